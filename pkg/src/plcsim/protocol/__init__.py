"""Query generation, signing, database answers and decoding."""

from .decode import decode, flatten
from .queries import (
    Kind,
    QueryPlan,
    SumRef,
    TauSum,
    Term,
    alphas,
    desired_q,
    expected_count,
    exploit_si,
    initial_round,
    m_sym,
    merge_side_information,
    q_gen,
    retained_type_count,
)
from .render import download_cost, dump_plan, emit_query_table
from .server import AnswerSet, Database, WireQueries, answer, collect_answers, wire_queries
from .signs import (
    SIGN_MODES,
    PrunedSum,
    all_sign_tables,
    apply_signs,
    baseline_sum,
    derive_recipes,
    draw_signs,
    redundant_types,
    resolve_mode,
    sign_and_prune,
)

__all__ = [
    "AnswerSet",
    "Database",
    "Kind",
    "PrunedSum",
    "QueryPlan",
    "SIGN_MODES",
    "SumRef",
    "TauSum",
    "Term",
    "WireQueries",
    "all_sign_tables",
    "alphas",
    "answer",
    "apply_signs",
    "baseline_sum",
    "collect_answers",
    "decode",
    "derive_recipes",
    "desired_q",
    "download_cost",
    "draw_signs",
    "dump_plan",
    "emit_query_table",
    "expected_count",
    "exploit_si",
    "flatten",
    "initial_round",
    "m_sym",
    "merge_side_information",
    "q_gen",
    "redundant_types",
    "resolve_mode",
    "retained_type_count",
    "sign_and_prune",
    "wire_queries",
]
