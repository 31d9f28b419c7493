"""Command-line driver.

Exit codes: 0 valid/satisfiable, 1 invalid/unsatisfiable, 2 usage error,
3 resource budget exceeded, 4 the two modes disagree.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    MODES,
    TASKS,
    ParameterError,
    chain_grid,
    compare_corpus,
    exhaustive_corpus,
    generate_family,
    run_formula,
    sample_corpus,
)
from .formula import FormulaSyntaxError

EXIT_TRUE, EXIT_FALSE, EXIT_USAGE, EXIT_RESOURCE, EXIT_DISAGREE = 0, 1, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ws1s-nested", description="WS1S decision with nested antichains")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decide", help="decide one formula")
    src = d.add_mutually_exclusive_group(required=True)
    src.add_argument("--formula-file", type=Path)
    src.add_argument("--family", choices=["chain"])
    d.add_argument("--n", type=int)
    d.add_argument("--k", type=int)
    d.add_argument("--task", choices=TASKS, default="validity")
    d.add_argument("--mode", choices=MODES, default="antichain")
    d.add_argument("--json", action="store_true", help="print the run report as JSON")
    d.add_argument("--trace", action="store_true", help="print every fixpoint iterate")
    d.add_argument("--budget", type=int, default=10**6, help="state and term-node budget")
    d.add_argument("--seed", type=int, default=0, help="unused for single formulas")

    c = sub.add_parser("compare", help="run both modes over a corpus and report")
    c.add_argument("--corpus", choices=["exhaustive", "chain", "all"], default="chain")
    c.add_argument("--sample", type=int, help="random sample size from the corpus")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--max-n", type=int, default=4)
    c.add_argument("--max-k", type=int, default=3)
    c.add_argument("--task", choices=TASKS, default="validity")
    c.add_argument("--budget", type=int, default=10**6)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--out", type=Path, help="directory for CSV, summary and figures")
    c.add_argument("--json", action="store_true")

    g = sub.add_parser("generate", help="print a family formula")
    g.add_argument("--family", choices=["chain"], default="chain")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    return parser


def _usage(parser: argparse.ArgumentParser, message: str) -> int:
    parser.print_usage(sys.stderr)
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _decide(parser, args) -> int:
    if args.family:
        if args.n is None or args.k is None:
            return _usage(parser, "--family needs --n and --k")
        try:
            text = generate_family(args.family, args.n, args.k)
        except ParameterError as exc:
            return _usage(parser, str(exc))
        fid = f"{args.family}-n{args.n}-k{args.k}"
    else:
        try:
            text = args.formula_file.read_text()
        except OSError as exc:
            return _usage(parser, str(exc))
        fid = args.formula_file.stem
    trace: list | None = [] if args.trace else None
    report = run_formula(text, fid, args.task, args.mode, args.budget, args.budget, trace)
    if report.status == "error":
        if report.message.startswith(FormulaSyntaxError.__name__):
            return _usage(parser, report.message)
        print(report.message, file=sys.stderr)
        return EXIT_USAGE
    if trace:
        for label, term in trace:
            print(f"{label}: {term}")
    if args.json:
        print(report.to_json())
    else:
        _summarise(report)
    if report.status == "resource":
        return EXIT_RESOURCE
    if report.disagreement:
        return EXIT_DISAGREE
    return EXIT_TRUE if report.verdict else EXIT_FALSE


def _summarise(report) -> None:
    word = {"validity": ("valid", "invalid"), "satisfiability": ("satisfiable", "unsatisfiable")}[report.task]
    print(f"{report.formula_id}: ", end="")
    if report.status == "resource":
        print(f"resource limit ({report.message})")
        return
    if report.disagreement:
        print("DISAGREEMENT " + ", ".join(f"{m}={v}" for m, v in report.verdicts.items()))
    else:
        print(word[0] if report.verdict else word[1])
    for mode, ms in report.time_ms.items():
        size = report.classical_states if mode == "classical" else report.term_nodes
        unit = "states" if mode == "classical" else "term nodes"
        print(f"  {mode:9s} {ms:9.2f} ms  {size} {unit}")


def _compare(parser, args) -> int:
    items = []
    if args.corpus in ("chain", "all"):
        items.extend(chain_grid(args.max_n, args.max_k))
    if args.corpus in ("exhaustive", "all"):
        items.extend(exhaustive_corpus())
    if args.sample is not None:
        items = sample_corpus(items, args.sample, args.seed)
    report = compare_corpus(items, args.task, "both", args.budget, args.budget, args.workers)
    summary = report.summary()
    if args.out is not None:
        from .report import write_report

        paths = write_report(report, args.out)
        summary["files"] = {k: str(v) for k, v in paths.items()}
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        print(f"instances {summary['instances']}  compared {summary['compared']}  "
              f"agreement {summary['agreement_rate']:.4f}")
        for row in report.table()[:50]:
            print(f"  {row['formula_id']:16s} {row['verdict']:8s} "
                  f"classical {row['classical_states']} states  antichain {row['term_nodes']} nodes")
    if report.disagreements:
        return EXIT_DISAGREE
    if any(r.status == "resource" for r in report.reports):
        return EXIT_RESOURCE
    return EXIT_TRUE


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    if args.command == "decide":
        return _decide(parser, args)
    if args.command == "compare":
        return _compare(parser, args)
    try:
        print(generate_family(args.family, args.n, args.k))
    except ParameterError as exc:
        return _usage(parser, str(exc))
    return EXIT_TRUE


def run_cli(argv: list[str] | None = None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
