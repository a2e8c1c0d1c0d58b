from __future__ import annotations

import re
from collections import Counter
from dataclasses import replace
from math import comb

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from plcsim.analysis import Randomness, System, expected_download, make_plan, run_trial
from plcsim.codes import LinearCode, find_rate_matrix, interference_pair
from plcsim.errors import NoSource, NotDivisible, UnreconstructiblePrune
from plcsim.field import GF
from plcsim.protocol import (
    Database,
    Kind,
    Term,
    alphas,
    answer,
    collect_answers,
    decode,
    desired_q,
    download_cost,
    dump_plan,
    emit_query_table,
    expected_count,
    exploit_si,
    initial_round,
    m_sym,
    merge_side_information,
    q_gen,
    retained_type_count,
    sign_and_prune,
    wire_queries,
)
from plcsim.protocol.queries import tau_sum
from plcsim.protocol.server import coefficient_vector
from plcsim.storage import FunctionSpec, encode_dss, random_messages, shard, virtual_symbol

from conftest import random_system

LETTER = {"x": 1, "y": 2, "z": 3}


def parse(text):
    """'x7-y6+z4' -> sorted ((fn, row, sign), ...)."""
    out = []
    for sign, letter, row in re.findall(r"([+-]?)([xyz])(\d+)", text):
        out.append((LETTER[letter], int(row), -1 if sign == "-" else 1))
    return tuple(sorted(out))


def unsigned(text):
    return tuple((fn, row) for fn, row, _ in parse(text))


def shape(sums):
    return [tuple((t.fn, t.row) for t in s.terms) for s in sums]


def signed(sums):
    return [tuple((t.fn, t.row, t.sign * s.flip) for t in s.terms) for s in sums]


# auxiliary query sets per database and round (desired, undesired), v = 1
TABLE_I = {
    1: {1: (["x1"], ["y1", "z1"]), 2: (["x3+y2", "x5+z2"], ["y5+z3"]), 3: (["x7+y6+z4"], [])},
    2: {1: (["x2"], ["y2", "z2"]), 2: (["x4+y1", "x6+z1"], ["y6+z4"]), 3: (["x8+y5+z3"], [])},
    3: {1: (["x1"], ["y1", "z1"]), 2: (["x3+y2", "x5+z2"], ["y5+z3"]), 3: (["x7+y6+z4"], [])},
    4: {1: (["x2"], ["y2", "z2"]), 2: (["x4+y1", "x6+z1"], ["y6+z4"]), 3: (["x8+y5+z3"], [])},
}

# final query sets after signs and removal, per database in round order
TABLE_II = {
    1: ["x1", "y1", "x3-y2", "x5-z2", "y5-z3", "x7-y6+z4"],
    2: ["x2", "y2", "x4-y1", "x6-z1", "y6-z4", "x8-y5+z3"],
    3: ["x1", "y1", "x3-y2", "x5-z2", "y5-z3", "x7-y6+z4"],
    4: ["x2", "y2", "x4-y1", "x6-z1", "y6-z4", "x8-y5+z3"],
}


def test_alphas_example():
    assert alphas(1, 2, 3) == (0, 1, 3, 4)
    a = alphas(2, 3, 3)
    assert a[3] == 3**2
    for tau in range(2, 4):
        assert a[tau] - a[tau - 1] == comb(2, tau - 1) * 2 ** (3 - tau) * 1 ** (tau - 1)


def test_initial_round_examples():
    d, u = initial_round(1, 1, 1, 1, 3)
    assert shape(d) == [unsigned("x1")]
    assert shape(u) == [unsigned("y1"), unsigned("z1")]
    d, _ = initial_round(2, 1, 2, 1, 3)
    assert shape(d) == [unsigned("x2")]
    d, u = initial_round(1, 1, 1, 1, 1)
    assert u == [] and len(d) == 1


def test_desired_q_examples():
    assert shape(desired_q(1, 1, 3, 2, 1, 1, 2)) == [unsigned("x3"), unsigned("x5")]
    assert shape(desired_q(2, 3, 4, 2, 2, 1, 3)) == [unsigned("x8")]
    assert desired_q(1, 3, 3, 2, 1, 1, 2) == []


def test_exploit_si_and_merge_example(example_system):
    pair = example_system.pair
    prev = {j: initial_round(2, 1, j, 1, 3)[1] for j in (2, 4)}
    side = exploit_si(2, prev, pair, 1)
    assert shape(side) == [unsigned("y2"), unsigned("z2")]
    assert all(s.db == 1 for s in side)
    fresh = {1: desired_q(1, 1, 3, 2, 1, 1, 2)}
    merged = merge_side_information(fresh, side, (1,))
    assert shape(merged[1]) == [unsigned("x3+y2"), unsigned("x5+z2")]
    assert [s.source.index for s in merged[1]] == [0, 1]


def test_exploit_si_no_source(example_system):
    pair = example_system.pair
    with pytest.raises(NoSource):
        exploit_si(3, {}, pair, 1)


def test_merge_not_divisible():
    fresh = {1: [tau_sum(1, 2, Kind.DESIRED, 1, 0, [Term(1, 3)])], 2: []}
    side = [tau_sum(1, 1, Kind.UNDESIRED, 3, 0, [Term(2, 1)])]
    with pytest.raises(NotDivisible):
        merge_side_information(fresh, side, (1, 2))


def test_m_sym_examples():
    desired = [
        tau_sum(1, 2, Kind.DESIRED, 1, 0, [Term(1, 3), Term(2, 2)]),
        tau_sum(1, 2, Kind.DESIRED, 1, 1, [Term(1, 5), Term(3, 2)]),
    ]
    assert shape(m_sym(desired, 1, 1, 2, 3)) == [unsigned("y5+z3")]
    third = [tau_sum(1, 3, Kind.DESIRED, 1, 0, [Term(1, 7), Term(2, 6), Term(3, 4)])]
    assert m_sym(third, 1, 1, 3, 3) == []


def test_q_gen_reproduces_auxiliary_sets(example_system):
    plan = q_gen(1, 3, example_system.pair)
    for j, rounds in TABLE_I.items():
        by_round = plan.rounds(j)
        for tau, (des, und) in rounds.items():
            got = by_round.get(tau, [])
            assert shape([s for s in got if s.kind is Kind.DESIRED]) == [unsigned(x) for x in des]
            assert shape([s for s in got if s.kind is Kind.UNDESIRED]) == [unsigned(x) for x in und]


def test_final_sets_reproduce_table(example_system):
    plan = make_plan(example_system, 1, 0, Randomness(fixed=True))
    for j, rows in TABLE_II.items():
        assert signed(plan.for_db(j)) == [parse(x) for x in rows]
    assert download_cost(plan) == 24
    assert {p.sum.type for p in plan.pruned} == {(3,)}


def test_dump_format(example_system):
    plan = make_plan(example_system, 1, 0, Randomness(fixed=True))
    lines = dump_plan(plan).splitlines()
    assert len(lines) == 24
    assert lines[0] == "1 1 D +1*U[1,1]"
    assert lines[5] == "1 3 D +1*U[1,7] -1*U[2,6] +1*U[3,4]"
    table = emit_query_table(plan)
    assert table.count("database") == 4
    assert "  round 2  U  +U2[5] -U3[3]" in table


def test_pruned_recipe_example(example_system):
    plan = make_plan(example_system, 1, 0, Randomness(fixed=True))
    rec = {p.sum.db: p for p in plan.pruned}
    assert set(rec) == {1, 2, 3, 4}
    p = rec[1]
    assert signed([p.sum]) == [parse("z1")]
    assert sorted(p.recipe) == [((1, 1, "D", 1, 0), 1), ((1, 1, "U", 1, 0), 1)]


def test_nothing_pruned_when_full_rank():
    code = LinearCode.from_rows(5, [[1, 1]])
    rate = find_rate_matrix(code)
    spec = FunctionSpec.from_rows(GF(5), [[1, 0], [0, 1]])
    system = System(code, rate, interference_pair(rate), spec)
    unsigned_plan = q_gen(1, 2, system.pair)
    plan = make_plan(system, 1, 0, Randomness(fixed=True))
    assert plan.pruned == ()
    assert shape(plan.sums) == shape(unsigned_plan.sums)


def test_unreconstructible_prune_detected(example_system):
    plan = q_gen(1, 3, example_system.pair)
    with pytest.raises(UnreconstructiblePrune):
        sign_and_prune(plan, example_system.spec, example_system.code, mode="fixed", extra_pruned_types=[(2,)])


def test_answer_examples(example_system):
    spec, code = example_system.spec, example_system.code
    plan = make_plan(example_system, 1, 11, Randomness())
    w = random_messages(code.field, 4, 8, 2, np.random.default_rng(3))
    c = encode_dss(w, code)
    s1 = shard(c, 1)
    for s in plan.for_db(1):
        vec = coefficient_vector(s, spec, plan.perm, 8)
        got = int(answer(s1, vec.reshape(1, -1), 5)[0])
        want = sum(
            s.flip * t.sign * virtual_symbol(spec, t.fn, s1, plan.perm, t.row) for t in s.terms
        ) % 5
        assert got == want
    assert answer(s1, np.zeros((0, 32), dtype=np.int64), 5).size == 0


def test_wire_order_hides_canonical_order(example_system):
    spec = example_system.spec
    plan = make_plan(example_system, 2, 5, Randomness())
    wq = wire_queries(plan, spec, 1)
    rows = [tuple(r) for r in wq.matrix.tolist()]
    assert rows == sorted(rows)
    canon = [tuple(coefficient_vector(s, spec, plan.perm, 8)) for s in plan.for_db(1)]
    assert [canon[i] for i in wq.order] == rows


@pytest.mark.parametrize("v", [1, 2, 3])
def test_decode_example_all_requests(example_system, v):
    for seed in range(10):
        got, want, _ = run_trial(example_system, v, seed)
        assert (got == want).all()


def test_decode_pir_special_case():
    code = LinearCode.from_rows(5, [[1, 0, 1], [0, 1, 1]])
    rate = find_rate_matrix(code)
    spec = FunctionSpec.from_rows(GF(5), np.eye(3, dtype=int))
    system = System(code, rate, interference_pair(rate), spec)
    for v in (1, 2, 3):
        got, want, _ = run_trial(system, v, 4)
        w = random_messages(code.field, 3, system.beta, 2, np.random.default_rng(np.random.SeedSequence([4, 0])))
        assert (got == w.data[v - 1]).all() and (got == want).all()


def test_decode_example_function_one_is_w1_plus_w4(example_system):
    got, _, _ = run_trial(example_system, 1, 9)
    w = random_messages(GF(5), 4, 8, 2, np.random.default_rng(np.random.SeedSequence([9, 0])))
    assert (got == (w.data[0] + w.data[3]) % 5).all()


def test_download_cost_examples(example_system):
    assert download_cost(make_plan(example_system, 1, 0)) == 24
    # mu = 1: one round of desired singletons only
    code = LinearCode.from_rows(5, [[1, 0, 1], [0, 1, 1]])
    rate = find_rate_matrix(code)
    one = System(code, rate, interference_pair(rate), FunctionSpec.from_rows(GF(5), [[1, 2]]))
    plan = make_plan(one, 1, 0)
    assert download_cost(plan) == code.n * rate.kappa == expected_download(3, 2, 3, 1, 1)
    assert {s.round for s in plan.sums} == {1} and all(s.kind is Kind.DESIRED for s in plan.sums)
    # r = mu = f = 2 on the [2,1] repetition code: 3 per database
    rep = LinearCode.from_rows(3, [[1, 1]])
    rrate = find_rate_matrix(rep)
    two = System(rep, rrate, interference_pair(rrate), FunctionSpec.from_rows(GF(3), [[1, 0], [0, 1]]))
    plan = make_plan(two, 1, 0)
    assert [len(plan.for_db(j)) for j in (1, 2)] == [3, 3]
    assert download_cost(plan) == 6


def test_repetition_shape():
    rep = LinearCode.from_rows(3, [[1, 1]])
    rate = find_rate_matrix(rep)
    plan = q_gen(1, 2, interference_pair(rate))
    for j in (1, 2):
        rounds = plan.rounds(j)
        assert [s.kind for s in rounds[1]] == [Kind.DESIRED, Kind.UNDESIRED]
        assert [s.tau for s in rounds[2]] == [2]


def test_sign_obliviousness(example_system):
    """Flipping one symbol's sign flips it everywhere and leaves decoding intact."""
    spec, code = example_system.spec, example_system.code
    w = random_messages(code.field, 4, 8, 2, np.random.default_rng(1))
    c = encode_dss(w, code)
    dbs = [Database(shard(c, j), 5) for j in range(1, 5)]
    base = make_plan(example_system, 3, 2)
    assert base.sign_mode == "independent"
    for fn, row in [(1, 3), (2, 6), (3, 4), (3, 1)]:
        flipped_signs = base.signs.copy()
        flipped_signs[fn - 1, row - 1] *= -1
        unsigned_plan = replace(base, sums=q_gen(3, 3, example_system.pair).sums, pruned=())
        plan = _resign(unsigned_plan, flipped_signs, spec, code)
        ref = _resign(unsigned_plan, base.signs, spec, code)
        for a, b in zip(plan.all_sums, ref.all_sums):
            for ta, tb in zip(a.terms, b.terms):
                assert ta.sign == (-tb.sign if (ta.fn, ta.row) == (fn, row) else tb.sign)
        got = decode(collect_answers(plan, spec, dbs), plan, code)
        assert (got == spec.evaluate(w, 3)).all()


def _resign(plan, signs, spec, code):
    from plcsim.protocol import apply_signs, derive_recipes, redundant_types

    drop = redundant_types(spec)
    signed_sums = [apply_signs(s, signs, plan.v) for s in plan.sums]
    kept = [s for s in signed_sums if s.type not in drop]
    removed = [s for s in signed_sums if s.type in drop]
    return replace(
        plan, sums=tuple(kept), signs=signs, pruned=tuple(derive_recipes(kept, removed, spec, code, plan.beta))
    )


def test_query_flip_decodes(example_system):
    for seed in range(5):
        got, want, plan = run_trial(example_system, 2, seed, Randomness(query_flip=True))
        assert (got == want).all()
    assert any(s.flip == -1 for s in plan.sums)


def test_gauge_mode_needed_for_two_dependent_functions():
    code = LinearCode.from_rows(5, [[1, 1]])
    rate = find_rate_matrix(code)
    spec = FunctionSpec.from_rows(GF(5), [[1, 0], [0, 1], [1, 1], [1, 2]])
    system = System(code, rate, interference_pair(rate), spec)
    with pytest.raises(UnreconstructiblePrune):
        for seed in range(10):
            run_trial(system, 1, seed, Randomness(sign_mode="independent"))
    for v in range(1, 5):
        for seed in range(3):
            got, want, plan = run_trial(system, v, seed)
            assert plan.sign_mode == "gauge"
            assert (got == want).all()


def check_plan_invariants(system, plan):
    spec, rate = system.spec, system.rate
    kappa, nu, mu, r = rate.kappa, rate.nu, spec.mu, spec.r
    dep = set(spec.dependent)
    for j in range(1, system.code.n + 1):
        prof = plan.profile(j)
        for tau in range(1, mu + 1):
            types = [t for (rnd, t) in prof if rnd == tau]
            want = expected_count(kappa, nu, mu, tau)
            if want:
                assert len(types) == retained_type_count(mu, r, tau)
            for t in types:
                assert prof[(tau, t)] == want
                assert not set(t) <= dep
    assert download_cost(plan) == expected_download(system.code.n, kappa, nu, mu, r)
    rows = Counter()
    blocks = {}
    for s in plan.all_sums:
        if s.kind is Kind.DESIRED:
            t = s.term_for(plan.v)
            rows[t.row] += 1
            blocks.setdefault(t.row, set()).add(s.db)
            assert [x.fn for x in s.terms].count(plan.v) == 1
        else:
            assert plan.v not in s.type
    assert set(rows) == set(range(1, plan.beta + 1))
    for t, dbs in blocks.items():
        assert rows[t] == len(dbs)
        assert system.code.information_set_within(dbs) is not None


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 10**9))
def test_random_configs_end_to_end(seed):
    rng = np.random.default_rng(seed)
    system = random_system(rng)
    v = int(rng.integers(1, system.spec.mu + 1))
    got, want, plan = run_trial(system, v, seed % 1000)
    assert (got == want).all()
    check_plan_invariants(system, plan)
