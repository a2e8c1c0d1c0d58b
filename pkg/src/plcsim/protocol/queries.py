"""Query-set generation.

Rows of the permuted code array are labelled 1..beta, functions 1..mu,
databases 1..n and blocks (rate-matrix rows) 1..nu. Each generated
query is a :class:`TauSum`: a formal sum of ``tau`` virtual symbols
``U^(v')_{t,j}`` at one database, one symbol per function.

Per round and database the generator keeps, for every block ``u`` whose
row of the rate matrix covers the database, a list of desired sums (one
fresh row of the requested function each) and a list of undesired sums
(no term of the requested function). Undesired sums of a block are
identical at every coordinate of that block, so each is a codeword the
user can complete from an information set; those completions are the
side information mixed into the next round's desired sums elsewhere.
"""

from __future__ import annotations

import enum
import itertools
from collections import defaultdict
from dataclasses import dataclass, field, replace
from math import comb
from typing import Iterable, Sequence

import numpy as np

from ..codes import InterferencePair, coord_set
from ..errors import InvalidParameters, NoSource, NotDivisible


class Kind(enum.Enum):
    DESIRED = "D"
    UNDESIRED = "U"


@dataclass(frozen=True, order=True)
class Term:
    fn: int
    row: int
    sign: int = 1

    def with_sign(self, sign: int) -> Term:
        return Term(self.fn, self.row, sign)


@dataclass(frozen=True, order=True)
class SumRef:
    """An undesired sum of ``block`` in ``round``, shared by all its coordinates."""

    round: int
    block: int
    index: int


@dataclass(frozen=True)
class TauSum:
    db: int
    round: int
    kind: Kind
    block: int
    index: int
    terms: tuple[Term, ...]
    # desired sums from round 2 on carry the undesired sum whose copy they contain
    source: SumRef | None = None
    # a global flip applied to the whole query as sent (1 when unused)
    flip: int = 1

    @property
    def tau(self) -> int:
        return len(self.terms)

    @property
    def type(self) -> tuple[int, ...]:
        return tuple(t.fn for t in self.terms)

    @property
    def key(self) -> tuple[int, int, str, int, int]:
        """Canonical position: database, round, desired before undesired, block, index."""
        return (self.db, self.round, self.kind.value, self.block, self.index)

    @property
    def ref(self) -> SumRef:
        return SumRef(self.round, self.block, self.index)

    def term_for(self, fn: int) -> Term | None:
        for t in self.terms:
            if t.fn == fn:
                return t
        return None

    def with_terms(self, terms: Iterable[Term]) -> TauSum:
        return replace(self, terms=tuple(sorted(terms, key=lambda t: t.fn)))


def tau_sum(db, rnd, kind, block, index, terms, source=None) -> TauSum:
    terms = tuple(sorted(terms, key=lambda t: t.fn))
    fns = [t.fn for t in terms]
    if len(set(fns)) != len(fns):
        raise InvalidParameters(f"repeated function index in {fns}")
    return TauSum(db, rnd, kind, block, index, terms, source)


def alphas(kappa: int, nu: int, mu: int) -> tuple[int, ...]:
    """``alpha_0 .. alpha_mu``; round ``tau`` uses desired offsets in [alpha_{tau-1}, alpha_tau)."""
    out = [0]
    for tau in range(1, mu + 1):
        out.append(
            kappa ** (mu - 1)
            + sum(comb(mu - 1, h) * kappa ** (mu - h - 1) * (nu - kappa) ** h for h in range(1, tau))
        )
    return tuple(out)


def initial_round(u: int, alpha1: int, j: int, v: int, mu: int) -> tuple[list[TauSum], list[TauSum]]:
    """Round-1 desired singletons of block ``u`` and the matching undesired singletons."""
    rows = [(u - 1) * alpha1 + l for l in range(1, alpha1 + 1)]
    desired = [
        tau_sum(j, 1, Kind.DESIRED, u, i, [Term(v, t)]) for i, t in enumerate(rows)
    ]
    undesired = []
    for vp in range(1, mu + 1):
        if vp == v:
            continue
        for t in rows:
            undesired.append(tau_sum(j, 1, Kind.UNDESIRED, u, len(undesired), [Term(vp, t)]))
    return desired, undesired


def desired_q(u: int, alpha_prev: int, alpha_cur: int, nu: int, j: int, v: int, tau: int) -> list[TauSum]:
    """Fresh desired symbols of block ``u`` for round ``tau`` >= 2 (no side information yet)."""
    return [
        tau_sum(j, tau, Kind.DESIRED, u, i, [Term(v, l * nu + u)])
        for i, l in enumerate(range(alpha_prev, alpha_cur))
    ]


def exploit_si(
    u: int,
    undesired_prev: dict[int, list[TauSum]],
    pair: InterferencePair,
    j: int,
) -> list[TauSum]:
    """Copies, at database ``j``, of block ``u``'s undesired sums from the previous round.

    ``undesired_prev`` maps database to that database's undesired list for
    block ``u``. The source is the first ``(i, j')`` in row-major order
    with ``A[i, j'] = u`` and ``j' != j``.
    """
    for i in range(pair.kappa):
        for jp in range(1, pair.n + 1):
            if jp != j and int(pair.A[i, jp - 1]) == u:
                return [replace(s, db=j) for s in undesired_prev[jp]]
    raise NoSource(f"block {u} has no coordinate outside database {j}")


def _type_balanced_parts(side: Sequence[TauSum], kappa: int) -> list[list[TauSum]]:
    by_type: dict[tuple[int, ...], list[TauSum]] = defaultdict(list)
    for s in sorted(side, key=lambda s: (s.type, tuple(t.row for t in s.terms))):
        by_type[s.type].append(s)
    parts: list[list[TauSum]] = [[] for _ in range(kappa)]
    for typ in sorted(by_type):
        group = by_type[typ]
        if len(group) % kappa:
            raise NotDivisible(f"{len(group)} side-information sums of type {typ} for kappa={kappa}")
        size = len(group) // kappa
        for i in range(kappa):
            parts[i].extend(group[i * size : (i + 1) * size])
    return parts


def merge_side_information(
    desired: dict[int, list[TauSum]],
    side: Sequence[TauSum],
    blocks: Sequence[int],
) -> dict[int, list[TauSum]]:
    """Add the side information at one database into its desired sums.

    ``desired`` maps block to its fresh desired singletons, ``blocks`` are
    the blocks ``A[:, j]`` in order. The side information is grouped by
    type and each type split into ``kappa`` equal contiguous chunks; part
    ``i`` takes chunk ``i`` of every type, so every block pairs its desired
    rows with residual types in the same order at every coordinate.
    """
    kappa = len(blocks)
    if len(side) % kappa:
        raise NotDivisible(f"{len(side)} side-information sums cannot be split into {kappa} parts")
    parts = _type_balanced_parts(side, kappa)
    out = {}
    for i, u in enumerate(blocks):
        fresh = desired[u]
        if len(fresh) != len(parts[i]):
            raise NotDivisible(
                f"block {u}: {len(fresh)} desired symbols but {len(parts[i])} side-information sums"
            )
        merged = []
        for d, s in zip(fresh, parts[i]):
            terms = list(d.terms) + list(s.terms)
            merged.append(tau_sum(d.db, d.round, Kind.DESIRED, u, d.index, terms, s.ref))
        out[u] = merged
    return out


def m_sym(desired: Sequence[TauSum], j: int, v: int, tau: int, mu: int) -> list[TauSum]:
    """Undesired ``tau``-sums mirroring the row pattern of one block's desired sums.

    For each type ``S`` of size ``tau`` avoiding ``v`` (lexicographic), the
    ``k``-th emitted sum takes, for each ``s`` in ``S``, the desired row of
    the ``k``-th desired sum whose residual type is ``S - {s}``.
    """
    if not desired:
        return []
    u = desired[0].block
    by_residual: dict[tuple[int, ...], list[int]] = defaultdict(list)
    for d in desired:
        residual = tuple(fn for fn in d.type if fn != v)
        by_residual[residual].append(d.term_for(v).row)
    counts = {len(rows) for rows in by_residual.values()}
    if len(counts) != 1:
        raise NotDivisible(f"block {u}: unequal residual-type counts {sorted(counts)}")
    m = counts.pop()
    out: list[TauSum] = []
    others = [x for x in range(1, mu + 1) if x != v]
    for S in itertools.combinations(others, tau):
        for k in range(m):
            terms = []
            for s in S:
                residual = tuple(x for x in S if x != s)
                terms.append(Term(s, by_residual[residual][k]))
            out.append(tau_sum(j, tau, Kind.UNDESIRED, u, len(out), terms))
    return out


@dataclass
class QueryPlan:
    """Query sets for every database plus the user's private randomness.

    ``sums`` holds the retained queries in canonical order. After
    :func:`sign_and_prune` the removed queries and their reconstruction
    recipes are in ``pruned``.
    """

    v: int
    mu: int
    n: int
    kappa: int
    nu: int
    pair: InterferencePair = field(repr=False)
    sums: tuple[TauSum, ...]
    perm: np.ndarray = field(repr=False)
    signs: np.ndarray | None = field(default=None, repr=False)
    pruned: tuple = ()
    pruned_types: frozenset = frozenset()
    seed: int | None = None
    sign_mode: str = "unsigned"

    @property
    def beta(self) -> int:
        return self.nu**self.mu

    def for_db(self, j: int) -> list[TauSum]:
        return [s for s in self.sums if s.db == j]

    def rounds(self, j: int) -> dict[int, list[TauSum]]:
        out: dict[int, list[TauSum]] = defaultdict(list)
        for s in self.for_db(j):
            out[s.round].append(s)
        return dict(out)

    @property
    def all_sums(self) -> list[TauSum]:
        """Retained and pruned sums together, in canonical order."""
        return sorted(list(self.sums) + [p.sum for p in self.pruned], key=lambda s: s.key)

    def profile(self, j: int) -> dict[tuple[int, tuple[int, ...]], int]:
        """Count of retained sums per (round, type) at database ``j``."""
        out: dict[tuple[int, tuple[int, ...]], int] = defaultdict(int)
        for s in self.for_db(j):
            out[(s.round, s.type)] += 1
        return dict(out)


def q_gen(
    v: int,
    mu: int,
    pair: InterferencePair,
    rng: np.random.Generator | None = None,
    *,
    omit_msym: bool = False,
) -> QueryPlan:
    """Unsigned, unpruned query sets for requesting function ``v``.

    ``rng`` draws the row permutation; without it the identity is used.
    ``omit_msym`` drops the symmetry sums from the assembled query sets
    (they are still used internally); it exists as a negative control.
    """
    if not 1 <= v <= mu:
        raise InvalidParameters(f"requested index {v} outside [1:{mu}]")
    kappa, nu, n = pair.kappa, pair.nu, pair.n
    alpha = alphas(kappa, nu, mu)
    sup_a = {u: coord_set(u, pair.A) for u in range(1, nu + 1)}
    sup_b = {u: coord_set(u, pair.B) for u in range(1, nu + 1)}

    # des[tau][j][u], und[tau][j][u]
    des: dict[int, dict[int, dict[int, list[TauSum]]]] = {}
    und: dict[int, dict[int, dict[int, list[TauSum]]]] = {}
    for tau in range(1, mu + 1):
        des[tau] = defaultdict(dict)
        und[tau] = defaultdict(dict)
        if tau == 1:
            for u in range(1, nu + 1):
                for j in sup_a[u]:
                    des[1][j][u], und[1][j][u] = initial_round(u, alpha[1], j, v, mu)
            continue
        fresh: dict[int, dict[int, list[TauSum]]] = defaultdict(dict)
        side: dict[int, list[TauSum]] = defaultdict(list)
        for u in range(1, nu + 1):
            for j in sup_a[u]:
                fresh[j][u] = desired_q(u, alpha[tau - 1], alpha[tau], nu, j, v, tau)
            prev = {jp: und[tau - 1][jp][u] for jp in sup_a[u]}
            for j in sup_b[u]:
                side[j].extend(exploit_si(u, prev, pair, j))
        for j in range(1, n + 1):
            blocks = pair.blocks_at(j)
            des[tau][j] = merge_side_information(fresh[j], side[j], blocks)
        for u in range(1, nu + 1):
            for j in sup_a[u]:
                und[tau][j][u] = m_sym(des[tau][j][u], j, v, tau, mu)

    sums: list[TauSum] = []
    for j in range(1, n + 1):
        for tau in range(1, mu + 1):
            for u in sorted(des[tau][j]):
                sums.extend(des[tau][j][u])
            if omit_msym and tau > 1:
                continue
            for u in sorted(und[tau][j]):
                sums.extend(und[tau][j][u])
    sums.sort(key=lambda s: s.key)

    beta = nu**mu
    perm = np.arange(1, beta + 1, dtype=np.int64) if rng is None else rng.permutation(beta) + 1
    return QueryPlan(v, mu, n, kappa, nu, pair, tuple(sums), perm)


def expected_count(kappa: int, nu: int, mu: int, tau: int) -> int:
    """Sums per (database, round, type)."""
    return kappa ** (mu - tau + 1) * (nu - kappa) ** (tau - 1)


def retained_type_count(mu: int, r: int, tau: int) -> int:
    return comb(mu, tau) - comb(mu - r, tau)
