"""Command line entry point.

Exit codes: 0 on success, 1 for usage or input validation errors, 2 when a
computation fails at run time.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, harness
from .data import write_csv, ingest_csv
from .exceptions import ComputationError, PairedMIError, ValidationError
from .forest import ForestParams
from .imputation import METHODS as MI_METHODS
from .imputation import ImputationMethod, multiple_impute_traced

logger = logging.getLogger("pairedmi")

DEFAULT_CACHE = ".pairedmi-cache"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the subcommand from being reset by
    # the subparser's own default.
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes (default 1)")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def _column_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("csv", help="input CSV with a header row")
    p.add_argument("--x1", default="x1", help="first pair component column")
    p.add_argument("--x2", default="x2", help="second pair component column")
    p.add_argument("--aux", default="", help="comma-separated auxiliary columns")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--m", type=int, default=5, help="number of imputations")


def build_parser() -> argparse.ArgumentParser:
    flags = _global_flags()
    parser = _Parser(prog="pairedmi", parents=[flags],
                     description="Tests for matched pairs with missing components.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    sim = sub.add_parser("simulate", parents=[flags], help="run a simulation grid from a JSON config")
    sim.add_argument("config")
    sim.add_argument("--cache", default=DEFAULT_CACHE, help="per-cell result cache directory")
    sim.add_argument("--no-cache", action="store_true")

    test = sub.add_parser("test", parents=[flags], help="p-values for one dataset")
    _column_flags(test)
    test.add_argument("--methods", default=",".join(("ttest",) + harness.TEST_METHODS))
    test.add_argument("--inject", type=float, default=None, metavar="R",
                      help="inject Bernoulli(R) missingness before testing")
    test.add_argument("--B", type=int, default=1000, help="permutation draws")

    imp = sub.add_parser("impute", parents=[flags], help="write m completed datasets")
    _column_flags(imp)
    imp.add_argument("--method", default="norm", choices=MI_METHODS)
    imp.add_argument("--k", type=int, default=5, help="PMM donors")
    imp.add_argument("--iterations", type=int, default=5, help="chained sweeps")
    imp.add_argument("--max-iter", type=int, default=10, help="RF MI iteration cap")
    imp.add_argument("--n-trees", type=int, default=None)

    rep = sub.add_parser("reproduce", parents=[flags], help="rerun a published grid at desk scale")
    rep.add_argument("target", choices=harness.REPRODUCE_TARGETS)
    rep.add_argument("--scale", type=float, default=0.2, help="fraction of 10,000 replicates")
    rep.add_argument("--B", type=int, default=1000)
    rep.add_argument("--m", type=int, default=5)
    rep.add_argument("--n-trees", type=int, default=100)
    rep.add_argument("--cache", default=DEFAULT_CACHE)
    rep.add_argument("--no-cache", action="store_true")
    return parser


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _cmd_simulate(args) -> None:
    cache = None if args.no_cache else args.cache
    out = args.out or "results.csv"
    results = harness.run_grid(harness.load_config(args.config), out, seed=args.seed,
                               cache_dir=cache, threads=args.threads)
    print(f"wrote {len(results)} cell(s) to {out}")


def _cmd_test(args) -> None:
    methods = _names(args.methods)
    rows = harness.analyze_dataset(args.csv, methods, inject_rate=args.inject, m=args.m, B=args.B,
                                   seed=args.seed, x1=args.x1, x2=args.x2, aux=_names(args.aux),
                                   delimiter=args.delimiter)
    fields = ["method", "statistic", "df", "pvalue", "error"]
    table = [{"method": r.method, "statistic": r.statistic, "df": r.df,
              "pvalue": r.pvalue, "error": r.error} for r in rows]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields)
            w.writeheader()
            w.writerows(table)
    print(f"{'method':12} {'statistic':>10} {'df':>12} {'p-value':>8}")
    for r in rows:
        if r.error:
            print(f"{r.method:12} error: {r.error}")
            continue
        df = r.df if isinstance(r.df, str) else f"{r.df:.3f}"
        print(f"{r.method:12} {r.statistic:10.4f} {df:>12} {r.pvalue:8.4f}")


def _cmd_impute(args) -> None:
    aux = _names(args.aux)
    sample = ingest_csv(args.csv, args.x1, args.x2, aux, args.delimiter)
    forest = ForestParams(n_trees=args.n_trees) if args.n_trees is not None else None
    method = ImputationMethod(args.method, k=args.k, n_iter=args.iterations,
                              max_iter=args.max_iter, forest=forest)
    draws, traces = multiple_impute_traced(sample, method, args.m, np.random.default_rng(args.seed))
    out = Path(args.out or "imputed")
    out.mkdir(parents=True, exist_ok=True)
    names = [args.x1, args.x2, *aux]
    files = []
    for i, c in enumerate(draws, start=1):
        path = out / f"imputed_{i}.csv"
        write_csv(c.matrix, path, names, args.delimiter)
        files.append(path.name)
    fp = method.forest_params
    manifest = {
        "method": method.kind,
        "params": {"m": args.m, "k": method.k, "n_iter": method.n_iter, "max_iter": method.max_iter,
                   "forest": {"n_trees": fp.n_trees, "mtry": fp.mtry, "min_node": fp.min_node,
                              "max_depth": fp.max_depth}},
        "seed": args.seed,
        "input": str(args.csv),
        "rows_dropped": sample.n_dropped,
        "files": files,
        "delta_trace": traces if method.kind == "rfmi" else None,
        "version": __version__,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(files)} completed dataset(s) and manifest.json to {out}")


def _cmd_reproduce(args) -> None:
    cells = harness.reproduce_cells(args.target, args.scale, args.seed, args.B, args.m, args.n_trees)
    cache = None if args.no_cache else args.cache
    results = harness.run_cells(cells, cache, args.threads)
    out = args.out or f"{args.target}.csv"
    harness.write_comparison(results, out)
    print(harness.format_comparison(results))
    print(f"\n'*' marks estimates more than 3 combined SEs from the published value; wrote {out}")


COMMANDS = {"simulate": _cmd_simulate, "test": _cmd_test, "impute": _cmd_impute,
            "reproduce": _cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("pairedmi: error: a subcommand is required", file=sys.stderr)
        return 1
    for name, default in (("seed", 0), ("threads", 1), ("out", None), ("verbose", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("pairedmi: error: --threads must be at least 1", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](args)
    except (ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"pairedmi: error: {exc}", file=sys.stderr)
        return 1
    except (ComputationError, PairedMIError) as exc:
        print(f"pairedmi: runtime failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, MemoryError) as exc:
        print(f"pairedmi: runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
