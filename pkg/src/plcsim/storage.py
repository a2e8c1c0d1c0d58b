"""The coded storage system: messages, encoding, shards and virtual symbols.

Message ``m`` is a ``beta x k`` array over GF(q). Row ``t`` of every
message is encoded separately into a length-``n`` codeword; database ``j``
stores coordinate ``j`` of all those codewords, message-major.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .codes import LinearCode
from .errors import FieldMismatch, IndexOutOfRange, InvalidParameters
from .field import GF, FMatrix, matmul_mod, row_basis


@dataclass(frozen=True, eq=False)
class MessageArray:
    """``f`` messages of shape ``beta x k``, stored as one (f, beta, k) array."""

    field: GF
    data: np.ndarray

    def __post_init__(self):
        a = np.array(self.data, dtype=np.int64) % self.field.q
        if a.ndim != 3:
            raise InvalidParameters("message data must have shape (f, beta, k)")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def f(self) -> int:
        return self.data.shape[0]

    @property
    def beta(self) -> int:
        return self.data.shape[1]

    @property
    def k(self) -> int:
        return self.data.shape[2]

    @property
    def L(self) -> int:
        return self.beta * self.k

    def message(self, m: int) -> FMatrix:
        """Message ``m`` (1-based) as a matrix."""
        return FMatrix(self.field, self.data[m - 1])

    @property
    def messages(self) -> list[FMatrix]:
        return [self.message(m) for m in range(1, self.f + 1)]


def random_messages(field: GF, f: int, beta: int, k: int, rng: np.random.Generator) -> MessageArray:
    return MessageArray(field, rng.integers(0, field.q, size=(f, beta, k), dtype=np.int64))


def load_messages(path: str | Path, field: GF) -> MessageArray:
    """Read messages separated by blank lines, one row of ``k`` integers per line."""
    blocks: list[list[list[int]]] = [[]]
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            if blocks[-1]:
                blocks.append([])
            continue
        blocks[-1].append([int(x) for x in line.split()])
    if not blocks[-1]:
        blocks.pop()
    if not blocks:
        raise InvalidParameters(f"{path}: no messages found")
    shapes = {(len(b), len(b[0])) for b in blocks}
    widths = {len(r) for b in blocks for r in b}
    if len(shapes) != 1 or len(widths) != 1:
        raise InvalidParameters(f"{path}: messages must all have the same shape")
    return MessageArray(field, np.array(blocks, dtype=np.int64))


def save_messages(path: str | Path, messages: MessageArray) -> None:
    blocks = ["\n".join(" ".join(str(int(x)) for x in row) for row in msg) for msg in messages.data]
    Path(path).write_text("\n\n".join(blocks) + "\n")


@dataclass(frozen=True, eq=False)
class CodeArray:
    """All stored codewords: row ``(m-1)*beta + t`` is ``W^(m)_t G``."""

    field: GF
    C: np.ndarray
    beta: int

    @property
    def n(self) -> int:
        return self.C.shape[1]

    @property
    def f(self) -> int:
        return self.C.shape[0] // self.beta


@dataclass(frozen=True, eq=False)
class DatabaseShard:
    j: int
    column: np.ndarray
    beta: int

    def symbol(self, m: int, t: int) -> int:
        """Stored symbol of message ``m``, row ``t`` (both 1-based)."""
        return int(self.column[(m - 1) * self.beta + t - 1])


def encode_dss(messages: MessageArray, code: LinearCode) -> CodeArray:
    if messages.field != code.field:
        raise FieldMismatch(f"messages over {messages.field}, code over {code.field}")
    if messages.k != code.k:
        raise InvalidParameters(f"messages have {messages.k} columns, code dimension is {code.k}")
    flat = messages.data.reshape(-1, code.k)
    c = matmul_mod(flat, code.G.array, code.q)
    c.setflags(write=False)
    return CodeArray(code.field, c, messages.beta)


def shard(array: CodeArray, j: int) -> DatabaseShard:
    if not 1 <= j <= array.n:
        raise IndexOutOfRange(f"database index {j} outside [1:{array.n}]")
    col = np.ascontiguousarray(array.C[:, j - 1])
    col.setflags(write=False)
    return DatabaseShard(j, col, array.beta)


@dataclass(frozen=True, eq=False)
class FunctionSpec:
    """The candidate functions ``X^(v) = sum_m V[v,m] W^(m)``.

    ``basis`` and the keys of ``expansions`` are 1-based row indices of V.
    """

    V: FMatrix
    basis: tuple[int, ...]
    expansions: dict[int, tuple[int, ...]]

    @classmethod
    def from_matrix(cls, V: FMatrix) -> FunctionSpec:
        if V.rows == 0 or V.cols == 0:
            raise InvalidParameters("V must have at least one row and one column")
        rb = row_basis(V)
        return cls(
            V,
            tuple(i + 1 for i in rb.indices),
            {d + 1: c for d, c in rb.expansions.items()},
        )

    @classmethod
    def from_rows(cls, field: GF, rows: Sequence[Sequence[int]]) -> FunctionSpec:
        return cls.from_matrix(FMatrix.from_rows(field, rows))

    @property
    def field(self) -> GF:
        return self.V.field

    @property
    def q(self) -> int:
        return self.V.q

    @property
    def mu(self) -> int:
        return self.V.rows

    @property
    def f(self) -> int:
        return self.V.cols

    @property
    def r(self) -> int:
        return len(self.basis)

    @property
    def dependent(self) -> tuple[int, ...]:
        return tuple(sorted(self.expansions))

    @cached_property
    def expansion_matrix(self) -> np.ndarray:
        """``mu x r`` matrix E with ``V = E @ V[basis]``."""
        e = np.zeros((self.mu, self.r), dtype=np.int64)
        for pos, b in enumerate(self.basis):
            e[b - 1, pos] = 1
        for d, coeffs in self.expansions.items():
            e[d - 1] = coeffs
        e.setflags(write=False)
        return e

    def evaluate(self, messages: MessageArray, v: int) -> np.ndarray:
        """Direct ``beta x k`` value of ``X^(v)`` from plaintext messages."""
        row = self.V.array[v - 1]
        return np.tensordot(row, messages.data, axes=(0, 0)) % self.q


def virtual_symbol(
    spec: FunctionSpec, v: int, shard_: DatabaseShard, perm: Sequence[int], t: int
) -> int:
    """``U^(v)_{t,j}``: function ``v`` applied to stored row ``perm[t]`` at this shard.

    ``perm`` is the 1-based permutation as a sequence, ``perm[t-1] = pi(t)``.
    """
    if not 1 <= v <= spec.mu:
        raise IndexOutOfRange(f"function index {v} outside [1:{spec.mu}]")
    if not 1 <= t <= shard_.beta:
        raise IndexOutOfRange(f"row {t} outside [1:{shard_.beta}]")
    row = int(perm[t - 1])
    total = 0
    for m in range(1, spec.f + 1):
        total += int(spec.V.array[v - 1, m - 1]) * shard_.symbol(m, row)
    return total % spec.q
