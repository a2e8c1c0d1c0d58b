"""Exact arithmetic over prime fields GF(q) and matrices over them.

Field elements are plain integers in ``[0, q)`` inside matrices; the
:class:`Fp` wrapper exists for scalar code that wants operator syntax.
Rates and capacities use :class:`fractions.Fraction`, re-exported here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ._kernels import rref_inplace
from .errors import FieldMismatch, FieldTooSmall, NotPrime, Unsolvable

__all__ = [
    "Fraction",
    "GF",
    "Fp",
    "FMatrix",
    "RowBasis",
    "field_new",
    "is_prime",
    "mat_rank",
    "row_basis",
    "solve",
]

# products of two reduced entries must fit in int64
MAX_MODULUS = 2**31 - 1


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    d = 3
    while d * d <= q:
        if q % d == 0:
            return False
        d += 2
    return True


class GF:
    """Arithmetic provider for the prime field GF(q), q odd."""

    __slots__ = ("q",)

    def __init__(self, q: int):
        q = int(q)
        if q > MAX_MODULUS:
            raise NotPrime(f"modulus {q} exceeds the supported range (< 2**31)")
        if q < 2 or not is_prime(q):
            raise NotPrime(f"{q} is not prime")
        if q < 3:
            raise FieldTooSmall("GF(2) is not supported: +1 and -1 coincide")
        self.q = q

    def __repr__(self) -> str:
        return f"GF({self.q})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("GF", self.q))

    def __call__(self, value: int) -> Fp:
        return Fp(int(value) % self.q, self.q)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def inv(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, self.q - 2, self.q)

    def elements(self) -> range:
        return range(self.q)

    def reduce(self, x) -> np.ndarray:
        """Reduce an integer array (or nested list) into canonical int64 form."""
        return np.mod(np.asarray(x, dtype=np.int64), self.q)


def field_new(q: int) -> GF:
    return GF(q)


@dataclass(frozen=True)
class Fp:
    value: int
    q: int

    def _coerce(self, other) -> int:
        if isinstance(other, Fp):
            if other.q != self.q:
                raise FieldMismatch(f"GF({self.q}) vs GF({other.q})")
            return other.value
        return int(other) % self.q

    def __add__(self, other) -> Fp:
        return Fp((self.value + self._coerce(other)) % self.q, self.q)

    __radd__ = __add__

    def __sub__(self, other) -> Fp:
        return Fp((self.value - self._coerce(other)) % self.q, self.q)

    def __rsub__(self, other) -> Fp:
        return Fp((self._coerce(other) - self.value) % self.q, self.q)

    def __mul__(self, other) -> Fp:
        return Fp((self.value * self._coerce(other)) % self.q, self.q)

    __rmul__ = __mul__

    def __neg__(self) -> Fp:
        return Fp((-self.value) % self.q, self.q)

    def inverse(self) -> Fp:
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse")
        return Fp(pow(self.value, self.q - 2, self.q), self.q)

    def __truediv__(self, other) -> Fp:
        return self * Fp(self._coerce(other), self.q).inverse()

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.q})"


class FMatrix:
    """Immutable dense matrix over GF(q), backed by a read-only int64 array."""

    __slots__ = ("field", "_a")

    def __init__(self, field: GF, data):
        a = np.array(data, dtype=np.int64, copy=True)
        if a.ndim == 1:
            a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
        if a.ndim != 2:
            raise ValueError("FMatrix data must be two-dimensional")
        a %= field.q
        a.setflags(write=False)
        self.field = field
        self._a = a

    @classmethod
    def from_rows(cls, field: GF, rows: Iterable[Sequence[int]]) -> FMatrix:
        rows = [list(r) for r in rows]
        if rows and len({len(r) for r in rows}) != 1:
            raise ValueError("ragged rows")
        return cls(field, np.array(rows, dtype=np.int64).reshape(len(rows), -1 if rows else 0))

    @classmethod
    def zeros(cls, field: GF, rows: int, cols: int) -> FMatrix:
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: GF, size: int) -> FMatrix:
        return cls(field, np.eye(size, dtype=np.int64))

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def T(self) -> FMatrix:
        return FMatrix(self.field, self._a.T)

    def row(self, i: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self._a[i])

    def columns(self, idx: Sequence[int]) -> FMatrix:
        return FMatrix(self.field, self._a[:, list(idx)])

    def tolist(self) -> list[list[int]]:
        return self._a.tolist()

    def _check(self, other: FMatrix) -> None:
        if not isinstance(other, FMatrix):
            raise TypeError(f"expected FMatrix, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __matmul__(self, other: FMatrix) -> FMatrix:
        self._check(other)
        return FMatrix(self.field, matmul_mod(self._a, other._a, self.q))

    def __add__(self, other: FMatrix) -> FMatrix:
        self._check(other)
        return FMatrix(self.field, self._a + other._a)

    def __sub__(self, other: FMatrix) -> FMatrix:
        self._check(other)
        return FMatrix(self.field, self._a - other._a)

    def scale(self, c: int) -> FMatrix:
        return FMatrix(self.field, self._a * (int(c) % self.q))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FMatrix)
            and other.field == self.field
            and other.shape == self.shape
            and bool(np.array_equal(other._a, self._a))
        )

    def __hash__(self) -> int:
        return hash((self.q, self.shape, self._a.tobytes()))

    def __repr__(self) -> str:
        return f"FMatrix(GF({self.q}), {self._a.tolist()})"

    def rank(self) -> int:
        return mat_rank(self)


def matmul_mod(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Matrix product mod q without int64 overflow for large inner dimensions."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    inner = a.shape[-1]
    # each partial sum stays below 2**63 when chunk * (q-1)**2 < 2**63
    chunk = max(1, (2**62) // max(1, (q - 1) ** 2))
    if inner <= chunk:
        return (a @ b) % q
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for s in range(0, inner, chunk):
        out = (out + (a[:, s : s + chunk] @ b[s : s + chunk]) % q) % q
    return out


def rref(a: np.ndarray, q: int, ncols: int = -1) -> tuple[np.ndarray, list[int]]:
    m = np.ascontiguousarray(np.mod(a, q), dtype=np.int64)
    pivots = rref_inplace(m, q, ncols)
    return m, list(pivots)


def mat_rank(m: FMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(rref(m.array, m.q)[1])


class RowBasis(NamedTuple):
    """Lexicographically first row basis of a matrix.

    ``indices`` are 0-based row indices in ascending order; ``expansions``
    maps each dependent row to its coefficients over ``indices``.
    """

    indices: tuple[int, ...]
    expansions: dict[int, tuple[int, ...]]


def row_basis(v: FMatrix) -> RowBasis:
    q = v.q
    a = v.array
    basis: list[int] = []
    expansions: dict[int, tuple[int, ...]] = {}
    for i in range(v.rows):
        if not basis:
            if np.any(a[i]):
                basis.append(i)
            else:
                expansions[i] = ()
            continue
        # solve  B^T c = row_i  with B the current basis rows
        coeffs = _solve_array(a[basis].T, a[i], q)
        if coeffs is None:
            basis.append(i)
        else:
            expansions[i] = tuple(int(x) for x in coeffs)
    # expansions found early are over a prefix of the final basis; pad them
    r = len(basis)
    full = {}
    for d, c in expansions.items():
        full[d] = tuple(c) + (0,) * (r - len(c))
    return RowBasis(tuple(basis), full)


def _solve_array(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray | None:
    rows, cols = a.shape
    aug = np.concatenate([np.mod(a, q), np.mod(b, q).reshape(rows, -1)], axis=1)
    m, piv = rref(aug, q, cols)
    rank = len(piv)
    if np.any(m[rank:, cols:]):
        return None
    x = np.zeros((cols,) + b.shape[1:], dtype=np.int64)
    x[piv] = m[:rank, cols:].reshape((rank,) + b.shape[1:])
    return x


def solve(a: FMatrix, b) -> np.ndarray:
    """Return some x with ``a @ x == b`` (unique when ``a`` is square invertible)."""
    b = np.asarray(b.array if isinstance(b, FMatrix) else b, dtype=np.int64)
    if b.shape[0] != a.rows:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, expected {a.rows}")
    x = _solve_array(a.array, b, a.q)
    if x is None:
        raise Unsolvable("inconsistent linear system")
    return x
