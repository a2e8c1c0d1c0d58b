"""Command-line runner: ``plcsim run <config> [options]``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for
configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from . import analysis
from .config import PRIVACY_MODES, load_config
from .errors import BudgetExceeded, ConfigError, NotFound, PLCError
from .protocol import dump_plan, emit_query_table

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def bundled_config(name: str = "example.cfg") -> Path:
    return Path(str(resources.files("plcsim") / "configs" / name))


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plcsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="build, execute and verify the scheme for one config")
    run.add_argument("config", help="config file, or 'example' for the bundled one")
    run.add_argument("--trials", type=int, help="recovery trials (default: config, then $PLCSIM_TRIALS)")
    run.add_argument("--privacy", choices=PRIVACY_MODES, help="privacy check to run")
    run.add_argument("--emit-queries", action="store_true", help="print the query table of the first trial")
    run.add_argument("--dump", action="store_true", help="print the plan in one-line-per-query form")
    run.add_argument("--machine", action="store_true", help="key=value output only")
    run.add_argument("--seed", type=int, help="override the config seed")
    return p


def run(args: argparse.Namespace, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    path = bundled_config() if args.config == "example" else Path(args.config)
    try:
        cfg = load_config(path)
        if args.trials is not None:
            if args.trials < 0:
                raise ConfigError("--trials must be non-negative")
            cfg.trials = args.trials
        if args.seed is not None:
            cfg.seed = args.seed
        trials = cfg.resolved_trials()
        privacy = args.privacy or cfg.privacy
        system = analysis.build_system(cfg)
    except NotFound as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CONFIG
    except PLCError as exc:
        print(f"error: {path}: {exc}", file=err)
        return EXIT_CONFIG

    randomness = analysis.Randomness.from_config(cfg)
    plan = analysis.make_plan(system, cfg.v, cfg.seed, randomness)
    report = analysis.RateReport.from_plan(system, plan, cfg.seed)
    recovery = analysis.verify_recovery(system, cfg.seed, trials, v=cfg.v, randomness=randomness)

    priv_line, priv_ok = "off", True
    if privacy == "structural":
        res = analysis.verify_privacy_structural(system)
        priv_ok = res.passed
        priv_line = "pass" if res.passed else f"fail {res.differences[0]}"
    elif privacy == "exhaustive":
        try:
            res = analysis.verify_privacy_exhaustive(system, randomness=randomness)
        except BudgetExceeded as exc:
            print(f"error: exhaustive privacy check not feasible: {exc}", file=err)
            return EXIT_CONFIG
        priv_ok = res.passed
        worst = max(res.tv_distance.values(), default=0)
        priv_line = f"{'pass' if res.passed else 'fail'} states={res.states} tv={worst}"

    rate_ok = report.consistent and (report.achieves_capacity or not report.capacity_achieving_matrix)
    ok = recovery.passed and priv_ok and rate_ok

    lines = report.machine_lines()
    lines.append(f"recovery={'pass' if recovery.passed else 'fail'}")
    lines.append(f"trials={trials}")
    if recovery.counterexample:
        lines.append("counterexample=" + " ".join(f"{k}:{v}" for k, v in recovery.counterexample.items()))
    lines.append(f"privacy={privacy}:{priv_line}")
    lines.append(f"status={'pass' if ok else 'fail'}")

    if args.machine:
        print("\n".join(lines), file=out)
    else:
        print(report.table(), file=out)
        print(f"recovery       {'pass' if recovery.passed else 'FAIL'} ({recovery.trials} trials)", file=out)
        if recovery.counterexample:
            print(f"counterexample {recovery.counterexample}", file=out)
        print(f"privacy        {privacy}: {priv_line}", file=out)
        print(f"status         {'pass' if ok else 'FAIL'}", file=out)
    if args.emit_queries or cfg.emit_queries:
        print(file=out)
        print(emit_query_table(plan), end="", file=out)
    if args.dump:
        print(file=out)
        print(dump_plan(plan), end="", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "run":
        return run(args)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
