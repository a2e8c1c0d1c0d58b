"""Capacities, rate accounting and the recovery / privacy / uniformity verifiers."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

import networkx as nx
import numpy as np

from .codes import InterferencePair, LinearCode, RateMatrix, find_rate_matrix, interference_pair, validate_rate_matrix
from .config import RunConfig
from .errors import BudgetExceeded, DecodeFailure, InternalMismatch, InvalidParameters, UnreconstructiblePrune
from .field import GF, FMatrix, matmul_mod
from .protocol import (
    AnswerSet,
    Database,
    QueryPlan,
    all_sign_tables,
    apply_signs,
    collect_answers,
    decode,
    download_cost,
    expected_count,
    q_gen,
    redundant_types,
    resolve_mode,
    retained_type_count,
    sign_and_prune,
)
from .protocol.signs import sign_parameter_count
from .storage import FunctionSpec, encode_dss, random_messages, shard

DEFAULT_BUDGET = 2_000_000


# ---------------------------------------------------------------- capacities


def _check_nk(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise InvalidParameters(f"need 1 <= k <= n, got n={n}, k={k}")


def _closed_form(ratio: Fraction, r: int) -> Fraction:
    if ratio == 1:
        # (1 - x) / (1 - x**r) tends to 1/r as x -> 1
        return Fraction(1, r)
    return (1 - ratio) / (1 - ratio**r)


def plc_capacity(n: int, k: int, r: int) -> Fraction:
    """Capacity of retrieving one of the candidate functions of rank ``r``.

    For ``k == n`` the expression is 0/0; its limit ``1/r`` is returned.
    """
    _check_nk(n, k)
    if r < 1:
        raise InvalidParameters(f"rank must be at least 1, got {r}")
    return _closed_form(Fraction(k, n), r)


def mds_pir_capacity(n: int, k: int, f: int) -> Fraction:
    _check_nk(n, k)
    if f < 1:
        raise InvalidParameters(f"need at least one message, got f={f}")
    return _closed_form(Fraction(k, n), f)


def per_db_count(kappa: int, nu: int, mu: int, r: int) -> int:
    """Retained sums per database in units of one block column."""
    return sum(
        retained_type_count(mu, r, tau) * expected_count(kappa, nu, mu, tau) for tau in range(1, mu + 1)
    )


def achievable_rate_forms(kappa: int, nu: int, mu: int, r: int) -> tuple[Fraction, Fraction]:
    """The rate of the scheme as a ratio of counts, and in closed form."""
    if not 1 <= kappa <= nu:
        raise InvalidParameters(f"need 1 <= kappa <= nu, got kappa={kappa}, nu={nu}")
    if not 1 <= r <= mu:
        raise InvalidParameters(f"need 1 <= r <= mu, got r={r}, mu={mu}")
    summed = Fraction(kappa * nu**mu, nu * per_db_count(kappa, nu, mu, r))
    return summed, _closed_form(Fraction(kappa, nu), r)


def achievable_rate(kappa: int, nu: int, mu: int, r: int) -> Fraction:
    summed, closed = achievable_rate_forms(kappa, nu, mu, r)
    if summed != closed:
        raise InternalMismatch(f"sum form {summed} != closed form {closed}")
    return summed


def expected_download(n: int, kappa: int, nu: int, mu: int, r: int) -> int:
    return n * per_db_count(kappa, nu, mu, r)


# ---------------------------------------------------------------- setup


@dataclass(frozen=True, eq=False)
class System:
    """A code, its rate matrix and a set of candidate functions."""

    code: LinearCode
    rate: RateMatrix
    pair: InterferencePair
    spec: FunctionSpec

    @property
    def q(self) -> int:
        return self.code.q

    @property
    def beta(self) -> int:
        return self.rate.nu**self.spec.mu

    @property
    def L(self) -> int:
        return self.beta * self.code.k


def build_system(cfg: RunConfig) -> System:
    fld = GF(cfg.q)
    code = LinearCode(FMatrix.from_rows(fld, cfg.G))
    rate = validate_rate_matrix(cfg.Lambda, code) if cfg.Lambda is not None else find_rate_matrix(code)
    spec = FunctionSpec.from_matrix(FMatrix.from_rows(fld, cfg.V))
    return System(code, rate, interference_pair(rate), spec)


def _as_system(x) -> System:
    return x if isinstance(x, System) else build_system(x)


@dataclass(frozen=True)
class Randomness:
    """How the user draws its private randomness for one plan."""

    sign_mode: str = "auto"
    query_flip: bool = False
    fixed: bool = False

    @classmethod
    def from_config(cls, cfg: RunConfig) -> Randomness:
        return cls(cfg.sign_mode, cfg.query_flip, cfg.fixed_randomness)


def make_plan(
    system: System,
    v: int,
    seed: int,
    randomness: Randomness = Randomness(),
    *,
    omit_msym: bool = False,
    extra_pruned_types: Sequence[tuple[int, ...]] = (),
) -> QueryPlan:
    perm_seq, sign_seq = np.random.SeedSequence([seed, 1]).spawn(2)
    spec = system.spec
    if randomness.fixed:
        plan = q_gen(v, spec.mu, system.pair, None, omit_msym=omit_msym)
        plan = sign_and_prune(
            plan, spec, system.code, None, mode="fixed", extra_pruned_types=extra_pruned_types
        )
    else:
        plan = q_gen(v, spec.mu, system.pair, np.random.default_rng(perm_seq), omit_msym=omit_msym)
        plan = sign_and_prune(
            plan,
            spec,
            system.code,
            np.random.default_rng(sign_seq),
            mode=randomness.sign_mode,
            query_flip=randomness.query_flip,
            extra_pruned_types=extra_pruned_types,
        )
    plan.seed = seed
    return plan


# ---------------------------------------------------------------- recovery


@dataclass
class RecoveryResult:
    passed: bool
    trials: int
    counterexample: dict | None = None

    def __bool__(self) -> bool:
        return self.passed


def run_trial(
    system: System,
    v: int,
    seed: int,
    randomness: Randomness = Randomness(),
    corrupt: Callable[[AnswerSet], AnswerSet] | None = None,
    **plan_options,
):
    """One retrieval; returns (decoded, expected, plan). Decoding errors propagate."""
    spec, code = system.spec, system.code
    msg_rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    messages = random_messages(code.field, spec.f, system.beta, code.k, msg_rng)
    stored = encode_dss(messages, code)
    dbs = [Database(shard(stored, j), code.q) for j in range(1, code.n + 1)]
    plan = make_plan(system, v, seed, randomness, **plan_options)
    answers = collect_answers(plan, spec, dbs)
    if corrupt is not None:
        answers = corrupt(answers)
    decoded = decode(answers, plan, code)
    return decoded, spec.evaluate(messages, v), plan


def corrupt_one(j: int, index: int, delta: int = 1) -> Callable[[AnswerSet], AnswerSet]:
    """Answer mutation adding ``delta`` to one answer of database ``j``."""

    def hook(answers: AnswerSet) -> AnswerSet:
        vals = {d: a.copy() for d, a in answers.values.items()}
        vals[j][index] += delta
        return AnswerSet(vals)

    return hook


def verify_recovery(
    config,
    seed: int,
    trials: int,
    *,
    v: int | None = None,
    randomness: Randomness | None = None,
    corrupt: Callable[[AnswerSet], AnswerSet] | None = None,
    **plan_options,
) -> RecoveryResult:
    system = _as_system(config)
    if randomness is None:
        randomness = Randomness.from_config(config) if isinstance(config, RunConfig) else Randomness()
    if v is None:
        v = config.v if isinstance(config, RunConfig) else 1
    for i in range(trials):
        trial_seed = seed + i
        try:
            got, want, _ = run_trial(system, v, trial_seed, randomness, corrupt, **plan_options)
        except (DecodeFailure, UnreconstructiblePrune) as exc:
            return RecoveryResult(False, i + 1, {"seed": trial_seed, "error": str(exc)})
        bad = np.argwhere(got != want)
        if bad.size:
            row, col = (int(x) + 1 for x in bad[0])
            return RecoveryResult(
                False,
                i + 1,
                {"seed": trial_seed, "row": row, "column": col, "got": int(got[row - 1, col - 1]),
                 "expected": int(want[row - 1, col - 1])},
            )
    return RecoveryResult(True, trials)


# ---------------------------------------------------------------- privacy


@dataclass
class StructuralResult:
    passed: bool
    differences: list[tuple[int, int, tuple[int, ...], dict[int, int]]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def _incidence_graph(plan: QueryPlan, j: int) -> nx.Graph:
    g = nx.Graph()
    for i, s in enumerate(plan.for_db(j)):
        g.add_node(("q", i), label="query")
        for t in s.terms:
            g.add_node(("s", t.fn, t.row), label=t.fn)
            g.add_edge(("q", i), ("s", t.fn, t.row))
    return g


def verify_privacy_structural(
    config,
    *,
    isomorphism: bool = False,
    **plan_options,
) -> StructuralResult:
    """Compare per-database (round, type) counts of the final plan across all requests.

    With ``isomorphism`` the query/symbol incidence graphs (symbols labelled
    by function) must also be isomorphic across requests.
    """
    system = _as_system(config)
    mu = system.spec.mu
    plans = {v: make_plan(system, v, 0, Randomness(fixed=True), **plan_options) for v in range(1, mu + 1)}
    diffs = []
    for j in range(1, system.code.n + 1):
        profiles = {v: plans[v].profile(j) for v in plans}
        keys = sorted(set().union(*profiles.values()))
        for rnd, typ in keys:
            counts = {v: profiles[v].get((rnd, typ), 0) for v in plans}
            if len(set(counts.values())) > 1:
                diffs.append((j, rnd, typ, counts))
        if isomorphism and not diffs:
            graphs = [_incidence_graph(plans[v], j) for v in plans]
            match = nx.algorithms.isomorphism.categorical_node_match("label", None)
            for v, g in zip(list(plans)[1:], graphs[1:]):
                if not nx.is_isomorphic(graphs[0], g, node_match=match):
                    diffs.append((j, 0, (), {1: 1, v: 0}))
    return StructuralResult(not diffs, diffs)


@dataclass
class ExhaustiveResult:
    passed: bool
    states: int
    tv_distance: dict[int, Fraction]
    distributions: dict[tuple[int, int], Counter] = field(repr=False, default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


def _tv(a: Counter, b: Counter) -> Fraction:
    na, nb = sum(a.values()), sum(b.values())
    keys = set(a) | set(b)
    return sum((abs(Fraction(a.get(x, 0), na) - Fraction(b.get(x, 0), nb)) for x in keys), Fraction(0)) / 2


def _with_answers(queries: Counter, data_cols: np.ndarray, q: int) -> Counter:
    """Join each query realization with its answers over every stored column."""
    out: Counter = Counter()
    for rows, weight in queries.items():
        if not rows:
            out[()] += weight * data_cols.shape[1]
            continue
        answers = matmul_mod(np.array(rows, dtype=np.int64), data_cols, q)
        for col in answers.T:
            out[tuple(zip(rows, (int(a) for a in col)))] += weight
    return out


def verify_privacy_exhaustive(
    config,
    *,
    budget: int = DEFAULT_BUDGET,
    randomness: Randomness | None = None,
    include_data: bool = False,
) -> ExhaustiveResult:
    """Exact distribution of what each database receives, for every request.

    Enumerates every row permutation and every sign table of the active
    sign mode (and every query flip when enabled). With ``include_data``
    the stored column is enumerated too and answers join the observation.
    ``randomness.fixed`` keeps all signs +1, a diagnostic that should fail.
    """
    system = _as_system(config)
    if randomness is None:
        randomness = Randomness.from_config(config) if isinstance(config, RunConfig) else Randomness()
    spec, code = system.spec, system.code
    q, mu, beta, f = code.q, spec.mu, system.beta, spec.f
    kappa, nu = system.rate.kappa, system.rate.nu
    mode = "fixed" if randomness.fixed else resolve_mode(randomness.sign_mode, mu, spec.r)
    drop = redundant_types(spec)
    unsigned = {v: [s for s in q_gen(v, mu, system.pair).sums if s.type not in drop] for v in range(1, mu + 1)}

    sign_count = 2 ** sign_parameter_count(mode, mu, kappa, nu)
    max_queries = max(len([s for s in unsigned[v] if s.db == j]) for v in unsigned for j in range(1, code.n + 1))
    flip_count = 2**max_queries if randomness.query_flip else 1
    data_count = q ** (f * beta) if include_data else 1
    states = factorial(beta) * sign_count * flip_count * data_count
    if states * mu * code.n > budget:
        raise BudgetExceeded(f"{states} states per (request, database) exceed the budget {budget}")

    V = spec.V.array
    data_cols = (
        np.array(list(itertools.product(range(q), repeat=f * beta)), dtype=np.int64).T
        if include_data
        else None
    )
    dists: dict[tuple[int, int], Counter] = {}
    tables = list(all_sign_tables(mode, mu, kappa, nu)) if mode != "fixed" else [np.ones((mu, beta), dtype=np.int64)]
    for v, sums in unsigned.items():
        for j in range(1, code.n + 1):
            mine = [s for s in sums if s.db == j]
            counter: Counter = Counter()
            for perm in itertools.permutations(range(beta)):
                for table in tables:
                    base = []
                    for s in mine:
                        vec = np.zeros(f * beta, dtype=np.int64)
                        for t in apply_signs(s, table, v).terms:
                            vec[perm[t.row - 1] :: beta] += t.sign * V[t.fn - 1]
                        base.append(vec % q)
                    flips = itertools.product((1, -1), repeat=len(mine)) if randomness.query_flip else [None]
                    for fl in flips:
                        rows = base if fl is None else [(x * c) % q for x, c in zip(base, fl)]
                        counter[tuple(sorted(tuple(int(a) for a in r) for r in rows))] += 1
            if include_data:
                counter = _with_answers(counter, data_cols, q)
            dists[(v, j)] = counter
    tv = {}
    for j in range(1, code.n + 1):
        tv[j] = max((_tv(dists[(1, j)], dists[(v, j)]) for v in range(2, mu + 1)), default=Fraction(0))
    return ExhaustiveResult(all(x == 0 for x in tv.values()), states, tv, dists)


# ---------------------------------------------------------------- uniformity


@dataclass
class UniformityResult:
    passed: bool
    pivots: tuple[int, ...]
    outcomes: int
    counts: Counter = field(repr=False, default_factory=Counter)

    def __bool__(self) -> bool:
        return self.passed


def verify_function_uniformity(
    V: FMatrix, h: int | None = None, *, budget: int = DEFAULT_BUDGET
) -> UniformityResult:
    """Brute force over all single-symbol messages: is the pivot-function tuple uniform?"""
    spec = FunctionSpec.from_matrix(V)
    q, f = V.q, V.cols
    h = spec.r if h is None else h
    if not 0 <= h <= spec.r:
        raise InvalidParameters(f"h={h} exceeds the rank {spec.r}")
    if q**f > budget:
        raise BudgetExceeded(f"{q}**{f} message tuples exceed the budget {budget}")
    pivots = spec.basis[:h]
    rows = V.array[[p - 1 for p in pivots]]
    counts: Counter = Counter()
    for w in itertools.product(range(q), repeat=f):
        x = rows @ np.array(w, dtype=np.int64) % q if h else np.zeros(0, dtype=np.int64)
        counts[tuple(int(a) for a in x)] += 1
    uniform = len(counts) == q**h and len(set(counts.values())) == 1
    return UniformityResult(uniform, pivots, len(counts), counts)


# ---------------------------------------------------------------- reporting


@dataclass
class RateReport:
    L: int
    D: int
    rate: Fraction
    capacity: Fraction
    achieves_capacity: bool
    capacity_achieving_matrix: bool
    params: dict
    round_counts: dict[int, int]
    expected_rate: Fraction

    @classmethod
    def from_plan(cls, system: System, plan: QueryPlan, seed: int) -> RateReport:
        spec, code, rate = system.spec, system.code, system.rate
        D = download_cost(plan)
        L = system.L
        r_meas = Fraction(L, D)
        cap = plc_capacity(code.n, code.k, spec.r)
        rounds: dict[int, int] = {}
        for s in plan.sums:
            rounds[s.round] = rounds.get(s.round, 0) + 1
        params = {
            "n": code.n, "k": code.k, "kappa": rate.kappa, "nu": rate.nu, "f": spec.f,
            "mu": spec.mu, "r": spec.r, "q": code.q, "v": plan.v, "seed": seed,
        }
        return cls(
            L, D, r_meas, cap, r_meas == cap, rate.capacity_achieving, params,
            dict(sorted(rounds.items())),
            achievable_rate(rate.kappa, rate.nu, spec.mu, spec.r),
        )

    @property
    def consistent(self) -> bool:
        """Measured rate agrees with the formula for this rate matrix."""
        return self.rate == self.expected_rate

    def machine_lines(self) -> list[str]:
        lines = [
            f"rate={self.rate}",
            f"capacity={self.capacity}",
            f"match={'true' if self.achieves_capacity else 'false'}",
            f"D={self.D}",
            f"L={self.L}",
        ]
        lines += [f"round{t}_queries={c}" for t, c in self.round_counts.items()]
        lines += [f"{k}={v}" for k, v in self.params.items()]
        return lines

    def table(self) -> str:
        rows = [
            ("rate L/D", f"{self.rate} ({self.L}/{self.D})"),
            ("capacity", str(self.capacity)),
            ("rate = capacity", "yes" if self.achieves_capacity else "no"),
            ("scheme formula", str(self.expected_rate)),
        ]
        rows += [(f"round {t} queries", str(c)) for t, c in self.round_counts.items()]
        rows.append(
            ("parameters", " ".join(f"{k}={v}" for k, v in self.params.items()))
        )
        width = max(len(a) for a, _ in rows)
        return "\n".join(f"{a.ljust(width)}  {b}" for a, b in rows)
