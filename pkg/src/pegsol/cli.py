"""Operator command line: compile, verify, query, export, stats.

Exit codes: 0 success, 1 operational error (missing database, bad input),
2 usage error (from argument parsing), 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from pegsol import formats, pipeline
from pegsol.boards import make_geometry, popcount
from pegsol.posclass import get_type, ksym_for, problem_by_address
from pegsol.windb import (
    FINISH_ANYWHERE,
    FINISH_COMPLEMENT,
    SolvabilityOracle,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 3

log = logging.getLogger("pegsol")


class CliError(Exception):
    pass


def _board_arg(args) -> str:
    kind = args.board_flag or args.board
    if not kind:
        raise CliError("a board is required (positional or --board)")
    return kind


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("board", nargs="?", help="board kind, e.g. triangle5, english33")
    sub.add_argument("--board", dest="board_flag", help="board kind (alternative to the positional)")
    sub.add_argument("--out", default=pipeline.DEFAULT_OUT, help="database directory")


def _add_build_opts(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--p", type=int, default=None, help="prime partition count for scratch dedup")
    sub.add_argument("--jobs", type=int, default=1, help="parallel partition workers")
    sub.add_argument("--scratch", default=None, help="scratch directory for partition files")
    sub.add_argument("--memory", type=int, default=None, help="dedup buffer budget in MiB")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pegsol",
        description="Compile, verify, query and export peg-solitaire winning-position databases.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="per-layer progress on stderr")
    subs = parser.add_subparsers(dest="command", required=True)

    c = subs.add_parser("compile", help="build databases")
    _add_common(c)
    _add_build_opts(c)
    scope = c.add_mutually_exclusive_group(required=True)
    scope.add_argument("--type", type=int, dest="type_number", help="build one problem type")
    scope.add_argument("--problem", help="build one complement problem, TYPE:NUMBER")
    scope.add_argument("--all", action="store_true", help="build every type of the board")
    c.add_argument("--losing", action="store_true", help="also count losing layers")

    v = subs.add_parser("verify", help="check databases against built-in reference values")
    _add_common(v)
    _add_build_opts(v)

    q = subs.add_parser("query", help="solvability verdict and per-jump good/bad list")
    _add_common(q)
    q.add_argument("--position", required=True, help="code (decimal or 0x hex) or ASCII diagram")
    q.add_argument("--problem", help="complement problem address TYPE:NUMBER")
    q.add_argument("--type", type=int, dest="type_number", help="problem type for finish-anywhere queries")
    q.add_argument("--finish", choices=[FINISH_COMPLEMENT, FINISH_ANYWHERE], default=FINISH_COMPLEMENT)
    q.add_argument("--start", help="actual starting vacancy X,Y when it differs from the canonical one")
    q.add_argument("--json", action="store_true", help="machine-readable output")

    e = subs.add_parser("export", help="write a JSON bundle for the web UI")
    _add_common(e)
    scope = e.add_mutually_exclusive_group(required=True)
    scope.add_argument("--type", type=int, dest="type_number")
    scope.add_argument("--problem")

    s = subs.add_parser("stats", help="per-layer counts of compiled databases")
    _add_common(s)
    s.add_argument("--json", action="store_true")
    return parser


def _config(args, geom):
    return pipeline.make_config(
        geom,
        p=args.p,
        scratch=args.scratch,
        jobs=args.jobs,
        memory_budget=(args.memory << 20) if args.memory else None,
    )


def _print_layer_table(entry: dict, header: str) -> None:
    print(header)
    rows = pipeline.layer_table(entry)
    has_l = any(r[3] is not None for r in rows)
    cols = "    n         F         W" + ("         L" if has_l else "")
    print(cols)
    for n, f, w, l in rows:
        line = f"{n:5d}{(f if f is not None else 0):10,}{(w if w is not None else 0):10,}"
        if has_l:
            line += f"{(l if l is not None else 0):10,}"
        print(line)
    f_total = sum(r[1] or 0 for r in rows)
    w_stored = entry.get("storedTotal")
    print(f"total F {f_total:,}" + (f", stored W {w_stored:,}" if w_stored is not None else ""))


def cmd_compile(args) -> int:
    kind = _board_arg(args)
    geom = make_geometry(kind)
    config = _config(args, geom)
    out = Path(args.out)
    t0 = time.monotonic()
    if args.problem:
        db = pipeline.compile_problem(
            kind, args.problem, out, config, with_losing=args.losing
        )
        _print_layer_table(
            pipeline._count_entry(db), f"{kind} problem {args.problem}"
        )
        if not db.solvable:
            print("warning: problem is unsolvable; database is empty")
    elif args.type_number:
        db, cdbs = pipeline.compile_type(kind, args.type_number, out, config)
        for i, cdb in sorted(cdbs.items()):
            _print_layer_table(pipeline._count_entry(cdb), f"{kind} problem {args.type_number}:{i}")
            if not cdb.solvable:
                print(f"note: problem {args.type_number}:{i} is unsolvable (empty sets)")
        print(f"indexed entries: {db.indexed.total():,}")
    else:
        for db in pipeline.compile_all(kind, out, config):
            print(f"type {db.type_number}: indexed entries {db.indexed.total():,}")
    print(f"compiled {kind} into {out} in {time.monotonic() - t0:.1f}s")
    return EXIT_OK


def cmd_verify(args) -> int:
    kind = _board_arg(args)
    geom = make_geometry(kind)
    checks = pipeline.verify_board(kind, Path(args.out), _config(args, geom))
    failed = [c for c in checks if not c.ok]
    for c in checks:
        print(c.line())
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed for {kind}")
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def _load_oracle(args, kind: str):
    geom = make_geometry(kind)
    out = Path(args.out)
    finish = args.finish
    if finish == FINISH_ANYWHERE:
        type_number = args.type_number
        if type_number is None and args.problem:
            type_number = problem_by_address(geom, args.problem).type_number
        if type_number is None:
            type_number = 1
        db = pipeline.load_type_db(kind, out, type_number)
        return SolvabilityOracle(db.indexed, geom, finish=FINISH_ANYWHERE), None
    if not args.problem:
        raise CliError("complement queries need --problem TYPE:NUMBER")
    problem = problem_by_address(geom, args.problem)
    ksym = 0
    if args.start:
        try:
            x, y = (int(v) for v in args.start.split(","))
        except ValueError:
            raise CliError(f"bad --start {args.start!r}, want X,Y") from None
        ksym = ksym_for(geom, problem, geom.hole_index(x, y))
    try:
        tdb = pipeline.load_type_db(kind, out, problem.type_number)
        oracle = SolvabilityOracle(
            tdb.indexed,
            geom,
            problem_number=problem.number,
            ksym=ksym,
            finish=FINISH_COMPLEMENT,
        )
    except FileNotFoundError:
        cdb = pipeline.load_problem_db(kind, out)
        if (cdb.problem.type_number, cdb.problem.number) != (
            problem.type_number,
            problem.number,
        ):
            raise FileNotFoundError(
                f"compiled problem is {cdb.problem.address}, not {problem.address}"
            ) from None
        oracle = SolvabilityOracle(cdb, geom, finish=FINISH_COMPLEMENT)
    return oracle, problem


def cmd_query(args) -> int:
    kind = _board_arg(args)
    geom = make_geometry(kind)
    code = geom.parse_position(args.position)
    oracle, _ = _load_oracle(args, kind)
    solvable = oracle.solvable(code)
    verdicts = oracle.good_jumps(code)
    if args.json:
        payload = {
            "board": kind,
            "position": code,
            "pegs": popcount(code),
            "finish": args.finish,
            "problem": args.problem,
            "solvable": solvable,
            "jumps": [
                {
                    "from": list(geom.holes[v.triple[0]]),
                    "over": list(geom.holes[v.triple[1]]),
                    "to": list(geom.holes[v.triple[2]]),
                    "successor": v.successor,
                    "good": v.good,
                }
                for v in verdicts
            ],
        }
        print(json.dumps(payload, sort_keys=True))
        return EXIT_OK
    print(f"board {kind}, position code {code} ({popcount(code)} pegs)")
    print(geom.render_ascii(code))
    print(f"verdict: {'solvable' if solvable else 'not solvable'}")
    for v in verdicts:
        f, o, t = (geom.holes[i] for i in v.triple)
        print(f"  {f} over {o} -> {t}: {'good' if v.good else 'bad'}")
    return EXIT_OK


def cmd_export(args) -> int:
    kind = _board_arg(args)
    geom = make_geometry(kind)
    out = Path(args.out)
    if args.type_number:
        db = pipeline.load_type_db(kind, out, args.type_number)
        path = formats.export_type_bundle(db, geom, out)
    else:
        problem = problem_by_address(geom, args.problem)
        cdb = pipeline.load_problem_db(kind, out)
        if (cdb.problem.type_number, cdb.problem.number) != (
            problem.type_number,
            problem.number,
        ):
            raise FileNotFoundError(f"compiled problem is {cdb.problem.address}")
        path = formats.export_problem_bundle(cdb, geom, out)
    print(path)
    return EXIT_OK


def cmd_stats(args) -> int:
    kind = _board_arg(args)
    meta = pipeline.stats_for(kind, Path(args.out))
    if args.json:
        print(json.dumps(meta, sort_keys=True))
        return EXIT_OK
    for key, entry in sorted(meta.get("entries", {}).items()):
        if key.startswith("problem:"):
            _print_layer_table(entry, f"{kind} {key}")
        else:
            print(f"{kind} {key}: indexed {entry['indexedTotal']:,}, plain {entry['plainTotal']:,}")
            for i, sub in sorted(entry.get("problems", {}).items()):
                _print_layer_table(sub, f"{kind} problem {entry['type']}:{i}")
    return EXIT_OK


_COMMANDS = {
    "compile": cmd_compile,
    "verify": cmd_verify,
    "query": cmd_query,
    "export": cmd_export,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except (CliError, FileNotFoundError, ValueError, formats.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
