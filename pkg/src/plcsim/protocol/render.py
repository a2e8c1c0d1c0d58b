"""Text renderings of query plans and the download count."""

from __future__ import annotations

from .queries import QueryPlan, TauSum


def download_cost(plan: QueryPlan) -> int:
    """Downloaded field symbols: one per retained query."""
    return len(plan.sums)


def _signed_terms(s: TauSum, style: str) -> list[str]:
    out = []
    for t in s.terms:
        sign = t.sign * s.flip
        if style == "dump":
            out.append(f"{sign:+d}*U[{t.fn},{t.row}]")
        else:
            out.append(f"{'+' if sign > 0 else '-'}U{t.fn}[{t.row}]")
    return out


def dump_plan(plan: QueryPlan) -> str:
    """One line per retained query: ``j tau kind sign*U[fn,row] ...``."""
    lines = [
        " ".join([str(s.db), str(s.round), s.kind.value] + _signed_terms(s, "dump"))
        for s in plan.sums
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def emit_query_table(plan: QueryPlan) -> str:
    """Per-database listing of retained queries grouped by round."""
    out = []
    for j in range(1, plan.n + 1):
        rounds = plan.rounds(j)
        if not rounds:
            continue
        out.append(f"database {j}")
        for tau in sorted(rounds):
            for s in rounds[tau]:
                out.append(f"  round {tau}  {s.kind.value}  {' '.join(_signed_terms(s, 'table'))}")
    return "\n".join(out) + ("\n" if out else "")
