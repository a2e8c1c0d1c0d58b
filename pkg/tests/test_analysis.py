from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from plcsim import analysis
from plcsim.analysis import (
    Randomness,
    RateReport,
    achievable_rate,
    achievable_rate_forms,
    corrupt_one,
    make_plan,
    mds_pir_capacity,
    plc_capacity,
    verify_function_uniformity,
    verify_privacy_exhaustive,
    verify_privacy_structural,
    verify_recovery,
)
from plcsim.config import RunConfig
from plcsim.errors import BudgetExceeded, InvalidParameters
from plcsim.field import GF, FMatrix

from conftest import EXAMPLE_V, example_config

TINY = RunConfig(q=3, G=[[1, 1]], V=[[1, 0], [0, 1]])


def test_capacity_examples():
    assert plc_capacity(4, 2, 2) == Fraction(2, 3)
    assert plc_capacity(4, 2, 4) == Fraction(8, 15)
    assert plc_capacity(7, 3, 1) == 1
    assert mds_pir_capacity(2, 1, 2) == Fraction(2, 3)
    assert mds_pir_capacity(5, 2, 1) == 1
    for f in range(1, 8):
        assert mds_pir_capacity(4, 2, f) == plc_capacity(4, 2, f)


def test_capacity_degenerate_and_errors():
    assert plc_capacity(3, 3, 4) == Fraction(1, 4)
    with pytest.raises(InvalidParameters):
        plc_capacity(2, 3, 1)
    with pytest.raises(InvalidParameters):
        plc_capacity(3, 2, 0)
    with pytest.raises(InvalidParameters):
        mds_pir_capacity(3, 0, 1)


def test_capacity_decreases_in_rank():
    for n in range(2, 9):
        for k in range(1, n):
            caps = [plc_capacity(n, k, r) for r in range(1, 8)]
            assert all(a > b for a, b in zip(caps, caps[1:]))


def test_achievable_rate_examples():
    assert achievable_rate(1, 2, 3, 2) == Fraction(2, 3)
    assert achievable_rate(2, 3, 2, 2) == Fraction(3, 5)
    for mu in range(1, 6):
        assert achievable_rate(1, 2, mu, mu) == mds_pir_capacity(2, 1, mu)


def sum_oracle(kappa, nu, mu, r):
    # evaluate the count directly from binomials, independently of the package helpers
    total = 0
    for tau in range(1, mu + 1):
        retained = comb(mu, tau) - (comb(mu - r, tau) if mu - r >= tau else 0)
        total += retained * kappa ** (mu - tau + 1) * (nu - kappa) ** (tau - 1)
    return Fraction(kappa * nu**mu, nu * total)


def test_achievable_forms_agree_over_grid():
    for nu in range(1, 7):
        for kappa in range(1, nu + 1):
            for r in range(1, 5):
                for mu in range(r, r + 3):
                    summed, closed = achievable_rate_forms(kappa, nu, mu, r)
                    assert summed == closed == sum_oracle(kappa, nu, mu, r)


def test_recovery_example_and_corruption():
    cfg = example_config()
    assert verify_recovery(cfg, 0, 5).passed
    res = verify_recovery(cfg, 0, 3, corrupt=corrupt_one(2, 3))
    assert not res.passed
    assert res.counterexample["seed"] == 0


def test_recovery_pir_special_case():
    cfg = RunConfig(q=5, G=[[1, 0, 1], [0, 1, 1]], V=np.eye(3, dtype=int).tolist(), v=2)
    assert verify_recovery(cfg, 3, 5).passed


def test_recovery_locates_wrong_value():
    # corrupting a round-3 desired answer at one database gives a located mismatch or decode error
    res = verify_recovery(example_config(), 5, 1, corrupt=corrupt_one(1, 5))
    assert not res.passed
    assert "row" in res.counterexample or "error" in res.counterexample


def test_structural_privacy():
    assert verify_privacy_structural(example_config(), isomorphism=True).passed
    one = RunConfig(q=5, G=[[1, 0, 1], [0, 1, 1]], V=[[1, 2]])
    assert verify_privacy_structural(one).passed
    bad = verify_privacy_structural(example_config(), omit_msym=True)
    assert not bad.passed
    j, rnd, typ, counts = bad.differences[0]
    assert rnd == 2 and len(set(counts.values())) > 1


def test_exhaustive_privacy_tiny():
    res = verify_privacy_exhaustive(TINY)
    assert res.passed and res.states == 24 * 256
    assert all(d == 0 for d in res.tv_distance.values())


def test_exhaustive_privacy_fixed_signs_collapse():
    res = verify_privacy_exhaustive(TINY, randomness=Randomness(fixed=True))
    assert not res.passed
    assert max(res.tv_distance.values()) > 0


def test_exhaustive_single_function_vacuous():
    res = verify_privacy_exhaustive(RunConfig(q=3, G=[[1, 1]], V=[[1]]))
    assert res.passed


def test_exhaustive_with_answers():
    res = verify_privacy_exhaustive(RunConfig(q=3, G=[[1, 1]], V=[[1], [2]]), include_data=True, budget=10**7)
    assert res.passed


def test_exhaustive_budget():
    with pytest.raises(BudgetExceeded):
        verify_privacy_exhaustive(example_config())


def uniform_oracle(V, q, pivots):
    counts = {}
    for w in itertools.product(range(q), repeat=len(V[0])):
        x = tuple(sum(a * b for a, b in zip(V[p - 1], w)) % q for p in pivots)
        counts[x] = counts.get(x, 0) + 1
    return len(counts) == q ** len(pivots) and len(set(counts.values())) == 1


def test_uniformity_examples():
    res = verify_function_uniformity(FMatrix.from_rows(GF(3), [[1, 0], [1, 1]]), 2)
    assert res.passed and res.outcomes == 9
    assert verify_function_uniformity(FMatrix.from_rows(GF(5), [[0, 3, 1]]), 1).passed
    v3 = FMatrix.from_rows(GF(3), EXAMPLE_V)
    res = verify_function_uniformity(v3, 2)
    assert res.passed and res.pivots == (1, 2) and res.outcomes == 9
    assert uniform_oracle(v3.tolist(), 3, res.pivots)


def test_uniformity_rejects_excess_h():
    with pytest.raises(InvalidParameters):
        verify_function_uniformity(FMatrix.from_rows(GF(3), [[1, 1], [2, 2]]), 2)


def test_rate_report_example():
    system = analysis.build_system(example_config())
    plan = make_plan(system, 1, 7)
    rep = RateReport.from_plan(system, plan, 7)
    assert (rep.L, rep.D, rep.rate, rep.capacity) == (16, 24, Fraction(2, 3), Fraction(2, 3))
    assert rep.achieves_capacity and rep.consistent
    lines = rep.machine_lines()
    assert lines[:5] == ["rate=2/3", "capacity=2/3", "match=true", "D=24", "L=16"]
    assert "round1_queries=8" in lines and "seed=7" in lines
    assert "2/3" in rep.table()
