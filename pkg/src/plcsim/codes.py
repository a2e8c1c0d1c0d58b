"""Linear codes, PIR achievable rate matrices and interference matrices.

Code coordinates, rate-matrix rows and the labels stored in the
interference matrices are all 1-based, matching the way the protocol
indexes databases and blocks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    InvalidParameters,
    NonUniformColumnWeight,
    NotFound,
    RowLacksInformationSet,
)
from .field import GF, FMatrix, mat_rank, solve

MAX_SEARCH_LENGTH = 12


@dataclass(frozen=True, eq=False)
class LinearCode:
    """An [n, k] code over GF(q) given by a full-rank k x n generator matrix."""

    G: FMatrix

    def __post_init__(self):
        k, n = self.G.shape
        if not 1 <= k <= n:
            raise InvalidParameters(f"need 1 <= k <= n, got k={k}, n={n}")
        if mat_rank(self.G) != k:
            raise InvalidParameters("generator matrix is not full rank")

    @classmethod
    def from_rows(cls, q: int | GF, rows: Sequence[Sequence[int]]) -> LinearCode:
        f = q if isinstance(q, GF) else GF(q)
        return cls(FMatrix.from_rows(f, rows))

    @property
    def field(self) -> GF:
        return self.G.field

    @property
    def q(self) -> int:
        return self.G.q

    @property
    def k(self) -> int:
        return self.G.rows

    @property
    def n(self) -> int:
        return self.G.cols

    @cached_property
    def information_sets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(information_sets(self))

    def is_information_set(self, coords: Sequence[int]) -> bool:
        return len(coords) == self.k and mat_rank(self.G.columns([j - 1 for j in coords])) == self.k

    def information_set_within(self, coords: Sequence[int]) -> tuple[int, ...] | None:
        """First information set (lexicographic) contained in ``coords``."""
        pool = set(coords)
        for s in self.information_sets:
            if pool.issuperset(s):
                return s
        return None

    def encode(self, messages: np.ndarray) -> np.ndarray:
        """Encode each row of ``messages`` (shape (..., k)) into a codeword."""
        from .field import matmul_mod

        m = np.asarray(messages, dtype=np.int64)
        flat = m.reshape(-1, self.k)
        return matmul_mod(flat, self.G.array, self.q).reshape(m.shape[:-1] + (self.n,))

    def recover(self, coords: Sequence[int], values) -> np.ndarray:
        """Message row from codeword symbols observed on an information set."""
        sub = self.G.columns([j - 1 for j in coords])
        return solve(sub.T, np.asarray(values, dtype=np.int64) % self.q)


def information_sets(code: LinearCode) -> list[tuple[int, ...]]:
    return [
        s
        for s in itertools.combinations(range(1, code.n + 1), code.k)
        if mat_rank(code.G.columns([j - 1 for j in s])) == code.k
    ]


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """A validated PIR achievable rate matrix bound to its code."""

    matrix: np.ndarray  # nu x n, 0/1
    kappa: int
    code: LinearCode = field(repr=False)

    @property
    def nu(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def capacity_achieving(self) -> bool:
        return Fraction(self.kappa, self.nu) == Fraction(self.code.k, self.code.n)

    def support(self, row: int) -> tuple[int, ...]:
        """1-based support of the 1-based ``row``."""
        return tuple(int(j) + 1 for j in np.flatnonzero(self.matrix[row - 1]))

    def tolist(self) -> list[list[int]]:
        return self.matrix.tolist()


def validate_rate_matrix(lam, code: LinearCode) -> RateMatrix:
    m = np.array(lam, dtype=np.int64)
    if m.ndim != 2 or m.shape[1] != code.n or m.shape[0] == 0:
        raise InvalidParameters(f"rate matrix must have shape (nu, {code.n})")
    if not np.isin(m, (0, 1)).all():
        raise InvalidParameters("rate matrix must be binary")
    weights = m.sum(axis=0)
    kappa = int(weights[0])
    for j, w in enumerate(weights, start=1):
        if w != kappa or w == 0:
            raise NonUniformColumnWeight(j, int(w), max(kappa, 1))
    for i, row in enumerate(m, start=1):
        supp = tuple(int(j) + 1 for j in np.flatnonzero(row))
        if code.information_set_within(supp) is None:
            raise RowLacksInformationSet(i, supp)
    m.setflags(write=False)
    return RateMatrix(m, kappa, code)


def find_rate_matrix(code: LinearCode) -> RateMatrix:
    """Backtracking search for an MDS-PIR capacity-achieving rate matrix.

    Columns are filled left to right, each choosing its kappa rows in
    lexicographic order, so the first hit is the lexicographically first
    matrix in that enumeration. Because total weight kappa*n equals nu*k,
    every row ends with exactly k ones forming an information set.
    """
    n, k = code.n, code.k
    if n > MAX_SEARCH_LENGTH:
        raise NotFound(
            f"rate-matrix search is limited to n <= {MAX_SEARCH_LENGTH}; supply Lambda explicitly"
        )
    g = math.gcd(n, k)
    kappa, nu = k // g, n // g
    info = {frozenset(s) for s in code.information_sets}
    # a partial row must stay inside some information set
    extendable = set()
    for s in info:
        for size in range(k + 1):
            for sub in itertools.combinations(sorted(s), size):
                extendable.add(frozenset(sub))

    rows: list[set[int]] = [set() for _ in range(nu)]
    choices = list(itertools.combinations(range(nu), kappa))

    def place(j: int) -> bool:
        if j == n:
            return all(frozenset(r) in info for r in rows)
        remaining = n - j
        for pick in choices:
            if any(len(rows[i]) >= k for i in pick):
                continue
            if any(frozenset(rows[i] | {j + 1}) not in extendable for i in pick):
                continue
            for i in pick:
                rows[i].add(j + 1)
            # every row still needs k ones from the columns left
            if all(k - len(r) <= remaining - 1 for r in rows) and place(j + 1):
                return True
            for i in pick:
                rows[i].discard(j + 1)
        return False

    if not place(0):
        raise NotFound(
            f"no rate matrix with kappa/nu = {kappa}/{nu} exists; the code is not MDS-PIR capacity-achieving"
        )
    m = np.zeros((nu, n), dtype=np.int64)
    for i, r in enumerate(rows):
        m[i, [j - 1 for j in r]] = 1
    return validate_rate_matrix(m, code)


@dataclass(frozen=True, eq=False)
class InterferencePair:
    A: np.ndarray  # kappa x n, entries in [1:nu]
    B: np.ndarray  # (nu - kappa) x n

    @property
    def kappa(self) -> int:
        return self.A.shape[0]

    @property
    def nu(self) -> int:
        return self.A.shape[0] + self.B.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def blocks_at(self, j: int) -> tuple[int, ...]:
        return tuple(int(u) for u in self.A[:, j - 1])

    def side_blocks_at(self, j: int) -> tuple[int, ...]:
        return tuple(int(u) for u in self.B[:, j - 1])


def interference_pair(rate: RateMatrix) -> InterferencePair:
    lam = rate.matrix
    nu, n = lam.shape
    a = np.zeros((rate.kappa, n), dtype=np.int64)
    b = np.zeros((nu - rate.kappa, n), dtype=np.int64)
    for j in range(n):
        a[:, j] = np.flatnonzero(lam[:, j] == 1) + 1
        b[:, j] = np.flatnonzero(lam[:, j] == 0) + 1
    a.setflags(write=False)
    b.setflags(write=False)
    return InterferencePair(a, b)


def coord_set(u: int, m: np.ndarray) -> tuple[int, ...]:
    """Columns (1-based) of ``m`` holding the label ``u``."""
    if m.size == 0:
        return ()
    return tuple(int(j) + 1 for j in np.flatnonzero((np.asarray(m) == u).any(axis=0)))
