"""What a database sees and computes.

A database receives a plain matrix: one row per query, one column per
stored symbol ``(m-1)*beta + row``. Rows are sent sorted by content so
that their order carries nothing beyond the set of vectors itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameters
from ..field import matmul_mod
from ..storage import DatabaseShard, FunctionSpec
from .queries import QueryPlan, TauSum


def coefficient_vector(s: TauSum, spec: FunctionSpec, perm: np.ndarray, beta: int) -> np.ndarray:
    """The sum flattened through V and the row permutation, including its flip."""
    q = spec.q
    vec = np.zeros(spec.f * beta, dtype=np.int64)
    for t in s.terms:
        stored = int(perm[t.row - 1]) - 1
        vec[stored::beta] += s.flip * t.sign * spec.V.array[t.fn - 1]
    return vec % q


@dataclass(frozen=True, eq=False)
class WireQueries:
    """Queries for one database: the matrix it receives and the user's order map.

    ``order[w]`` is the canonical position (within this database's retained
    sums) of the query sent at wire position ``w``.
    """

    j: int
    matrix: np.ndarray
    order: np.ndarray


def wire_queries(plan: QueryPlan, spec: FunctionSpec, j: int) -> WireQueries:
    sums = plan.for_db(j)
    width = spec.f * plan.beta
    if not sums:
        return WireQueries(j, np.zeros((0, width), dtype=np.int64), np.zeros(0, dtype=np.int64))
    rows = np.stack([coefficient_vector(s, spec, plan.perm, plan.beta) for s in sums])
    order = np.array(sorted(range(len(sums)), key=lambda i: tuple(rows[i])), dtype=np.int64)
    m = rows[order]
    m.setflags(write=False)
    return WireQueries(j, m, order)


def answer(shard_: DatabaseShard, queries: np.ndarray, q: int) -> np.ndarray:
    """Evaluate each received coefficient row against the stored column."""
    queries = np.asarray(queries, dtype=np.int64)
    if queries.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    if queries.shape[1] != shard_.column.shape[0]:
        raise InvalidParameters(
            f"query width {queries.shape[1]} does not match {shard_.column.shape[0]} stored symbols"
        )
    return matmul_mod(queries, shard_.column.reshape(-1, 1), q).reshape(-1)


class Database:
    """A noncolluding server holding one shard."""

    def __init__(self, shard_: DatabaseShard, q: int):
        self.shard = shard_
        self.q = q

    @property
    def j(self) -> int:
        return self.shard.j

    def respond(self, queries: np.ndarray) -> np.ndarray:
        return answer(self.shard, queries, self.q)


@dataclass(frozen=True)
class AnswerSet:
    """Answers per database in canonical plan order."""

    values: dict[int, np.ndarray]

    def __getitem__(self, j: int) -> np.ndarray:
        return self.values[j]


def collect_answers(plan: QueryPlan, spec: FunctionSpec, databases: list[Database]) -> AnswerSet:
    out = {}
    for db in databases:
        wq = wire_queries(plan, spec, db.j)
        received = db.respond(wq.matrix)
        canonical = np.zeros_like(received)
        canonical[wq.order] = received
        out[db.j] = canonical
    return AnswerSet(out)
