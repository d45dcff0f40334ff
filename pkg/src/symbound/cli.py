"""Command-line front end.

Exit codes: 0 bounds reported, 1 internal error, 2 usage or parse error,
3 inconsistent assumptions, 4 timeout.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import signal
import sys
import traceback
from dataclasses import replace
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from .problem import (DIRECTIONS, ENGINES, ORDER_NAMES, STAT_FIELDS, InconsistentProblem, Problem,
                      parse_problem, report_records, run)
from .syntax import ParseError

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_INCONSISTENT, EXIT_TIMEOUT = 0, 1, 2, 3, 4

CORPUS = Path(__file__).with_name("corpus")


class Timeout(Exception):
    pass


@contextlib.contextmanager
def time_limit(seconds: Optional[float]):
    """Raise :class:`Timeout` after ``seconds`` of wall time (main thread only)."""
    if not seconds or not hasattr(signal, "setitimer"):
        yield
        return

    def fire(signum, frame):
        raise Timeout(f"timed out after {seconds:g}s")

    old = signal.signal(signal.SIGALRM, fire)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def _apply_overrides(p: Problem, args) -> Problem:
    changes = {}
    if args.depth is not None:
        changes["depth"] = args.depth
    if args.order is not None:
        changes["order"] = args.order
    if args.keep is not None:
        changes["keep"] = [k for k in args.keep.split(",") if k]
    if args.direction is not None:
        changes["direction"] = args.direction
    if args.engine is not None:
        changes["engine"] = args.engine
    return replace(p, **changes)


def corpus_files(directory: Path) -> List[Path]:
    return sorted(directory.glob("*.prob"))


def bench(directory, depths: Iterable[int] = (3,), engines: Sequence[str] = ("local",),
          timeout: Optional[float] = None, out=None) -> List[dict]:
    """Run every problem in ``directory`` per depth and engine.

    Writes a human table followed by one JSON record per row to ``out``
    and returns the records.  A timeout is recorded and the run continues.
    """
    out = out or sys.stdout
    rows = []
    for path in corpus_files(Path(directory)):
        problem = parse_problem(path.read_text(encoding="utf-8"))
        for depth in depths:
            for engine in engines:
                p = replace(problem, depth=depth, engine=engine)
                row = {"problem": p.name, "depth": depth, "engine": engine, "timeout": False}
                try:
                    with time_limit(timeout):
                        report = run(p)
                except Timeout:
                    row["timeout"] = True
                    rows.append(row)
                    continue
                except InconsistentProblem:
                    row["inconsistent"] = True
                    rows.append(row)
                    continue
                row.update(report.stats)
                for d, r in report.results.items():
                    row[d] = None if r.unbounded else r.text
                rows.append(row)
    cols = ["problem", "depth", "engine"] + list(STAT_FIELDS) + ["upper", "lower"]
    table = [[_cell(r.get("timeout") and c in STAT_FIELDS[3:] and "timeout" or r.get(c)) for c in cols]
             for r in rows]
    widths = [max([len(c)] + [len(t[i]) for t in table]) for i, c in enumerate(cols)]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)), file=out)
    for t in table:
        print("  ".join(v.ljust(w) for v, w in zip(t, widths)), file=out)
    for r in rows:
        print(json.dumps(r), file=out)
    return rows


def _cell(v) -> str:
    if v is None:
        return "-"
    return str(v)


def _depths(text: str) -> List[int]:
    if "-" in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symbound",
                                 description="Sound symbolic bounds for non-linear arithmetic with floor and division.")
    ap.add_argument("problem", nargs="?", help="problem file ('-' for stdin)")
    ap.add_argument("--depth", type=int, help="saturation depth (product degree bound)")
    ap.add_argument("--depths", default=None, help="depth range for --bench, e.g. 1-5")
    ap.add_argument("--order", choices=sorted(ORDER_NAMES), help="monomial order")
    ap.add_argument("--keep", help="comma-separated variables allowed in the bound")
    ap.add_argument("--direction", choices=DIRECTIONS)
    ap.add_argument("--engine", choices=ENGINES + ("both",), help="reduction engine")
    ap.add_argument("--timeout", type=float, help="wall-clock limit in seconds")
    ap.add_argument("--stats", action="store_true", help="print cone sizes and timings")
    ap.add_argument("--witness", action="store_true", help="print the certificate of each bound")
    ap.add_argument("--json", action="store_true", help="print line-delimited JSON records")
    ap.add_argument("--bench", metavar="DIR", nargs="?", const=str(CORPUS),
                    help="benchmark every *.prob file in DIR (default: bundled corpus)")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        if args.bench is not None:
            if args.depth is not None and args.depth < 1:
                raise ValueError("depth must be positive")
            depths = _depths(args.depths) if args.depths else [args.depth or 3]
            engines = ENGINES if args.engine == "both" else (args.engine or "local",)
            bench(args.bench, depths, engines, args.timeout)
            return EXIT_OK
        if not args.problem:
            ap.print_usage(sys.stderr)
            print("symbound: error: a problem file or --bench is required", file=sys.stderr)
            return EXIT_USAGE
        if args.engine == "both":
            raise ValueError("--engine both is only meaningful with --bench")
        if args.depth is not None and args.depth < 1:
            raise ValueError("depth must be positive")
        text = sys.stdin.read() if args.problem == "-" else Path(args.problem).read_text(encoding="utf-8")
        problem = _apply_overrides(parse_problem(text), args)
        if problem.keep is not None and problem.variables is not None:
            missing = [k for k in problem.keep if k not in problem.variables]
            if missing:
                raise ParseError(f"keep variable {missing[0]!r} is not declared")
    except ParseError as e:
        print(f"{args.problem}:{e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print(f"symbound: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        with time_limit(args.timeout):
            report = run(problem)
    except Timeout as e:
        print(f"symbound: {e}", file=sys.stderr)
        return EXIT_TIMEOUT
    except InconsistentProblem as e:
        print(f"inconsistent assumptions: {e}")
        return EXIT_INCONSISTENT
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL

    if args.json:
        for rec in report_records(report):
            print(json.dumps(rec))
        return EXIT_OK
    for line in report.lines(witness=args.witness):
        print(line)
    if args.stats:
        for k in STAT_FIELDS:
            v = report.stats.get(k)
            if v is not None:
                print(f"{k:>14}: {v}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
