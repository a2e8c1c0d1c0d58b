"""User-side decoding of the requested function from all answers."""

from __future__ import annotations

import numpy as np

from ..codes import LinearCode, coord_set
from ..errors import DecodeFailure
from ..field import matmul_mod
from .queries import Kind, QueryPlan, SumRef
from .server import AnswerSet


def _codeword_from(code: LinearCode, known: dict[int, int], what: str) -> np.ndarray:
    """Complete a codeword from symbols on a set containing an information set."""
    info = code.information_set_within(sorted(known))
    if info is None:
        raise DecodeFailure(f"{what}: coordinates {sorted(known)} hold no information set")
    msg = code.recover(info, [known[j] for j in info])
    word = matmul_mod(msg.reshape(1, -1), code.G.array, code.q).reshape(-1)
    for j, val in known.items():
        if int(word[j - 1]) != val % code.q:
            raise DecodeFailure(f"{what}: inconsistent symbol at database {j}")
    return msg


def decode(answers: AnswerSet, plan: QueryPlan, code: LinearCode) -> np.ndarray:
    """Recover the ``beta x k`` array of the requested function."""
    q = code.q
    pair = plan.pair
    values: dict[tuple, int] = {}
    for j in range(1, plan.n + 1):
        sums = plan.for_db(j)
        got = np.asarray(answers[j], dtype=np.int64)
        if got.shape[0] != len(sums):
            raise DecodeFailure(f"database {j}: {got.shape[0]} answers for {len(sums)} queries")
        for s, a in zip(sums, got):
            values[s.key] = (s.flip * int(a)) % q
    for p in plan.pruned:
        values[p.sum.key] = sum(c * values[k] for k, c in p.recipe) % q

    by_ref: dict[SumRef, dict[int, int]] = {}
    for s in plan.all_sums:
        if s.kind is Kind.UNDESIRED:
            by_ref.setdefault(s.ref, {})[s.db] = values[s.key]
    completed: dict[SumRef, np.ndarray] = {}

    def side_value(ref: SumRef, j: int) -> int:
        if ref not in completed:
            if ref not in by_ref:
                raise DecodeFailure(f"side information {ref} was never queried")
            completed[ref] = _codeword_from(code, by_ref[ref], f"side information {ref}")
        return int(completed[ref] @ code.G.array[:, j - 1]) % q

    desired: dict[int, dict[int, int]] = {}
    blocks: dict[int, int] = {}
    for s in plan.all_sums:
        if s.kind is not Kind.DESIRED:
            continue
        term = s.term_for(plan.v)
        val = values[s.key]
        if s.source is not None:
            val += side_value(s.source, s.db)
        desired.setdefault(term.row, {})[s.db] = (val * term.sign) % q
        blocks[term.row] = s.block

    beta = plan.beta
    out = np.zeros((beta, code.k), dtype=np.int64)
    if len(desired) != beta:
        raise DecodeFailure(f"{len(desired)} desired rows recovered, expected {beta}")
    for t, known in desired.items():
        expected = set(coord_set(blocks[t], pair.A))
        if set(known) != expected:
            raise DecodeFailure(f"row {t}: symbols from {sorted(known)}, expected {sorted(expected)}")
        out[int(plan.perm[t - 1]) - 1] = _codeword_from(code, known, f"row {t}")
    return out


def flatten(x: np.ndarray) -> np.ndarray:
    """Row-major list of all ``L = beta * k`` symbols."""
    return np.asarray(x).reshape(-1)

