"""Command line front end.

Exit codes: 0 success, 1 a comparison or run reported failure, 2 bad
configuration or arguments. Errors go to stderr prefixed with the program
name so wrapping scripts can grep for them.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import scenarios
from .kernel import ConfigurationError

PROG = "sepsim"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Deterministic co-simulation of a two-phase separator with a wireless sensor mesh.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a recipe and write its report")
    run.add_argument("--recipe", required=True, help="built-in recipe name or a YAML file path")
    run.add_argument("--seeds", type=int, default=None, metavar="N",
                     help="run seeds 1..N instead of the recipe's list")
    run.add_argument("--seed-list", type=int, nargs="+", default=None,
                     help="explicit seeds, overriding --seeds")
    run.add_argument("--out", default=None, help="report path (default <recipe>-report.json)")
    run.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    run.add_argument("--no-csv", action="store_true", help="skip per-seed tick tables")
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate", help="parse and check a recipe without running it")
    validate.add_argument("recipe", help="built-in recipe name or a YAML file path")
    validate.set_defaults(func=cmd_validate)

    compare = sub.add_parser("compare", help="check a report against a reference table")
    compare.add_argument("report", help="report JSON produced by 'run'")
    compare.add_argument("--table", required=True, help="reference table name")
    compare.add_argument("--tables-file", default=None, help="alternate reference tables YAML")
    compare.set_defaults(func=cmd_compare)

    recipes = sub.add_parser("recipes", help="list built-in recipes or print one")
    recipes.add_argument("name", nargs="?", default=None, help="recipe to print verbatim")
    recipes.set_defaults(func=cmd_recipes)

    serve = sub.add_parser("serve", help="start the operator HMI service")
    serve.add_argument("--recipe", default=None, help="recipe defining the served plant")
    serve.add_argument("--seed", type=int, default=1)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--pace", type=float, default=1.0,
                       help="simulated seconds per wall second")
    serve.add_argument("--token", default=None,
                       help="bearer token commands must present (default from SEPSIM_TOKEN)")
    serve.set_defaults(func=cmd_serve)
    return parser


def _out_dir() -> Path:
    return Path(os.environ.get("SEPSIM_OUT_DIR", "."))


def cmd_run(args: argparse.Namespace) -> int:
    cfg = scenarios.load_recipe(args.recipe)
    seeds = None
    if args.seed_list is not None:
        seeds = args.seed_list
    elif args.seeds is not None:
        if args.seeds < 1:
            raise ConfigurationError(f"--seeds must be at least 1, got {args.seeds}")
        seeds = list(range(1, args.seeds + 1))

    report, runs = scenarios.run_scenario_detailed(cfg, seeds=seeds)

    out = Path(args.out) if args.out else _out_dir() / f"{cfg.name}-report.json"
    scenarios.write_report(report, out)
    print(f"report: {out}")

    if not args.no_csv:
        for run in runs:
            path = out.parent / f"{cfg.name}-seed{run.seed}.csv"
            scenarios.write_run_csv(run, path)
            print(f"trace: {path}")

    if not args.no_figures:
        from . import figures

        for path in figures.render_report_figures(report, out.parent):
            print(f"figure: {path}")

    if report["failed"]:
        print(f"{PROG}: error: a run tripped the safety latch unexpectedly", file=sys.stderr)
        return 1
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = scenarios.load_recipe(args.recipe)
    print(f"ok: {cfg.name} ({cfg.duration_s:.0f} s, {len(cfg.seeds)} seeds)")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    import json

    path = Path(args.report)
    if not path.exists():
        raise ConfigurationError(f"no such report: {path}")
    report = json.loads(path.read_text())
    tables = scenarios.load_reference_tables(args.tables_file)
    rows = scenarios.compare_to_reference(report, args.table, tables)
    print(scenarios.format_comparison(rows))
    if scenarios.comparison_failed(rows):
        print(f"{PROG}: error: comparison against {args.table} failed", file=sys.stderr)
        return 1
    return 0


def cmd_recipes(args: argparse.Namespace) -> int:
    if args.name is None:
        for name in scenarios.BUILTIN_RECIPES:
            cfg = scenarios.load_recipe(name)
            print(f"{name}: {cfg.description}")
        return 0
    print(scenarios.recipe_text(args.name), end="")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .hmi.service import serve

    token = args.token if args.token is not None else os.environ.get("SEPSIM_TOKEN", "")
    cfg = scenarios.load_recipe(args.recipe) if args.recipe else None
    serve(
        cfg,
        seed=args.seed,
        host=args.host,
        port=args.port,
        pace=args.pace,
        token=token,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
