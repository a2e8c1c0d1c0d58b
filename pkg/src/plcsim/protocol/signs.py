"""Sign assignment, removal of redundant sums, and reconstruction recipes.

Baseline signs: in an undesired sum of type ``S`` the term of function
``s`` carries ``(-1)**(position of s in S)``. A desired sum carries that
same alternating sign on its desired term, and the copied side
information enters negated. With these signs every sum whose type lies
inside the dependent functions is an exact linear combination of the
queries that are kept, so it can be dropped and recomputed offline.

On top of the baseline every symbol ``U^(s)_t`` gets a user-private sign
``sigma[s, t]`` applied wherever it appears:

* ``independent``: iid uniform per (function, row). Recipes survive this
  only when at most one function is dependent.
* ``gauge``: ``sigma[s, t] = rho[t] * theta[s, origin(t)]`` where
  ``origin(t)`` is the (block, round) that introduced row ``t``. This
  keeps every recipe valid for any number of dependent functions.
* ``auto``: ``independent`` when at most one function is dependent,
  ``gauge`` otherwise.
* ``fixed``: all ``+1`` (reproducible tables).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

import numpy as np

from ..codes import LinearCode
from ..errors import InvalidParameters, UnreconstructiblePrune
from ..field import rref
from ..storage import FunctionSpec
from .queries import Kind, QueryPlan, TauSum, alphas

SIGN_MODES = ("auto", "independent", "gauge", "fixed")


@dataclass(frozen=True)
class PrunedSum:
    """A removed query and its value as a combination of kept queries.

    ``recipe`` lists ``(key, coefficient)`` pairs where ``key`` is the
    canonical key of a retained :class:`TauSum`; values are taken before
    any global query flip.
    """

    sum: TauSum
    recipe: tuple[tuple[tuple, int], ...]


def alternating_sign(s: int, typ: tuple[int, ...]) -> int:
    return -1 if typ.index(s) % 2 else 1


def baseline_sum(s: TauSum, v: int) -> TauSum:
    if s.kind is Kind.UNDESIRED:
        return s.with_terms(t.with_sign(alternating_sign(t.fn, s.type)) for t in s.terms)
    residual = tuple(fn for fn in s.type if fn != v)
    terms = []
    for t in s.terms:
        if t.fn == v:
            terms.append(t.with_sign(alternating_sign(v, s.type)))
        else:
            terms.append(t.with_sign(-alternating_sign(t.fn, residual)))
    return s.with_terms(terms)


def resolve_mode(mode: str, mu: int, r: int) -> str:
    if mode not in SIGN_MODES:
        raise InvalidParameters(f"unknown sign mode {mode!r}; expected one of {SIGN_MODES}")
    if mode == "auto":
        return "independent" if mu - r <= 1 else "gauge"
    return mode


def row_origins(kappa: int, nu: int, mu: int) -> np.ndarray:
    """Index of the (block, round) pair that introduces each row, 0-based by row."""
    alpha = alphas(kappa, nu, mu)
    beta = nu**mu
    origin = np.full(beta, -1, dtype=np.int64)
    for u in range(1, nu + 1):
        for l in range(1, alpha[1] + 1):
            origin[(u - 1) * alpha[1] + l - 1] = u - 1
        for tau in range(2, mu + 1):
            for l in range(alpha[tau - 1], alpha[tau]):
                origin[l * nu + u - 1] = (tau - 1) * nu + u - 1
    return origin


def sign_parameter_count(mode: str, mu: int, kappa: int, nu: int) -> int:
    beta = nu**mu
    if mode == "independent":
        return mu * beta
    if mode == "gauge":
        return beta + mu * nu * mu
    return 0


def sign_table(mode: str, mu: int, kappa: int, nu: int, bits: np.ndarray) -> np.ndarray:
    """Sign table from a vector of +-1 parameters (length ``sign_parameter_count``)."""
    beta = nu**mu
    bits = np.asarray(bits, dtype=np.int64)
    if mode == "fixed":
        return np.ones((mu, beta), dtype=np.int64)
    if mode == "independent":
        return bits.reshape(mu, beta).copy()
    if mode == "gauge":
        rho = bits[:beta]
        theta = bits[beta:].reshape(mu, mu * nu)
        origin = row_origins(kappa, nu, mu)
        return rho[None, :] * theta[:, origin]
    raise InvalidParameters(f"unknown sign mode {mode!r}")


def draw_signs(mode: str, mu: int, kappa: int, nu: int, rng: np.random.Generator) -> np.ndarray:
    count = sign_parameter_count(mode, mu, kappa, nu)
    bits = 1 - 2 * rng.integers(0, 2, size=count, dtype=np.int64)
    return sign_table(mode, mu, kappa, nu, bits)


def all_sign_tables(mode: str, mu: int, kappa: int, nu: int) -> Iterator[np.ndarray]:
    """Every sign table of ``mode``, one per parameter vector (uniform weighting)."""
    count = sign_parameter_count(mode, mu, kappa, nu)
    for bits in itertools.product((1, -1), repeat=count):
        yield sign_table(mode, mu, kappa, nu, np.array(bits, dtype=np.int64))


def apply_signs(s: TauSum, signs: np.ndarray, v: int) -> TauSum:
    b = baseline_sum(s, v)
    return b.with_terms(t.with_sign(t.sign * int(signs[t.fn - 1, t.row - 1])) for t in b.terms)


def redundant_types(spec: FunctionSpec) -> frozenset[tuple[int, ...]]:
    dep = spec.dependent
    return frozenset(
        c for size in range(1, len(dep) + 1) for c in itertools.combinations(dep, size)
    )


def functional(s: TauSum, spec: FunctionSpec, code: LinearCode, beta: int) -> np.ndarray:
    """Coefficients of a sum over the free data ``X^(basis l)_{row, c}``."""
    e = spec.expansion_matrix
    r, k, q = spec.r, code.k, code.q
    g = code.G.array[:, s.db - 1]
    out = np.zeros((r, beta, k), dtype=np.int64)
    for t in s.terms:
        out[:, t.row - 1, :] += t.sign * np.outer(e[t.fn - 1], g)
    return out.reshape(-1) % q


def derive_recipes(
    kept: list[TauSum], removed: list[TauSum], spec: FunctionSpec, code: LinearCode, beta: int
) -> list[PrunedSum]:
    """Express each removed sum as a combination of kept ones, or raise."""
    if not removed:
        return []
    q = code.q
    f = np.stack([functional(s, spec, code, beta) for s in kept], axis=1) if kept else None
    p = np.stack([functional(s, spec, code, beta) for s in removed], axis=1)
    nk = 0 if f is None else f.shape[1]
    aug = p if f is None else np.concatenate([f, p], axis=1)
    m, piv = rref(aug, q, nk)
    rank = len(piv)
    out = []
    for i, s in enumerate(removed):
        col = m[:, nk + i]
        if np.any(col[rank:]):
            raise UnreconstructiblePrune(
                f"removed sum at database {s.db}, round {s.round}, type {s.type} "
                "is not determined by the retained queries"
            )
        recipe = tuple(
            (kept[c].key, int(col[row])) for row, c in enumerate(piv) if col[row]
        )
        out.append(PrunedSum(s, recipe))
    return out


def sign_and_prune(
    plan: QueryPlan,
    spec: FunctionSpec,
    code: LinearCode,
    rng: np.random.Generator | None = None,
    *,
    mode: str = "auto",
    query_flip: bool = False,
    extra_pruned_types: Iterable[tuple[int, ...]] = (),
    recipes: bool = True,
) -> QueryPlan:
    """Sign every symbol, drop redundant sums and attach their recipes."""
    mode = resolve_mode(mode, spec.mu, spec.r)
    if rng is None and mode != "fixed":
        raise InvalidParameters(f"sign mode {mode!r} needs a random generator")
    if mode == "fixed":
        signs = np.ones((plan.mu, plan.beta), dtype=np.int64)
    else:
        signs = draw_signs(mode, plan.mu, plan.kappa, plan.nu, rng)
    drop = redundant_types(spec) | {tuple(sorted(t)) for t in extra_pruned_types}
    kept, removed = [], []
    for s in plan.sums:
        signed = apply_signs(s, signs, plan.v)
        (removed if signed.type in drop else kept).append(signed)
    if query_flip:
        if rng is None:
            raise InvalidParameters("query flips need a random generator")
        flips = 1 - 2 * rng.integers(0, 2, size=len(kept), dtype=np.int64)
        kept = [replace(s, flip=int(x)) for s, x in zip(kept, flips)]
    pruned = (
        derive_recipes(kept, removed, spec, code, plan.beta)
        if recipes
        else [PrunedSum(s, ()) for s in removed]
    )
    return replace(
        plan,
        sums=tuple(kept),
        signs=signs,
        pruned=tuple(pruned),
        pruned_types=frozenset(drop),
        sign_mode=mode,
    )
