"""Command-line entry point: ``prf`` (or ``python3 -m prfkit``)."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Iterable, Iterator, Sequence

from ..constructions import catalog
from ..evaluator import BudgetExceeded, EvalConfig, Session, with_big_stack
from ..parser import ParseError, parse, render
from ..terms import TermError
from . import suites
from .checks import CheckReport, run_check

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

TSV_FIELDS = ("id", "status", "tested_points", "first_mismatch", "steps_total", "ambiguous_minus_hits")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env_budget() -> int | None:
    raw = os.environ.get("PRF_BUDGET")
    if raw is None or raw == "":
        return None
    try:
        v = int(raw)
    except ValueError:
        raise UsageError(f"PRF_BUDGET must be a positive integer, got {raw!r}") from None
    if v <= 0:
        raise UsageError("PRF_BUDGET must be positive")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _natural(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a natural number: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="prf", description="Unary primitive recursive bases: evaluator and verification suites.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sp = sub.add_parser("parse", help="print the canonical form of an expression")
    sp.add_argument("expr")

    sp = sub.add_parser("eval", help="evaluate an expression")
    sp.add_argument("expr")
    sp.add_argument("args", nargs="*", type=_natural)
    sp.add_argument("--budget", type=_positive)
    sp.add_argument("--mode", choices=("deep", "shallow"), default="deep")
    sp.add_argument("--section", help="resolve names against a catalog group, e.g. sec5-monus")

    sp = sub.add_parser("catalog", help="inspect the construction catalog")
    csub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    cl = csub.add_parser("list")
    cl.add_argument("--section")
    cs = csub.add_parser("show")
    cs.add_argument("id")

    sp = sub.add_parser("check", help="run a verification suite")
    sp.add_argument("--suite", required=True, choices=suites.SUITES + (suites.ALL,))
    sp.add_argument("--max-x", type=_natural)
    sp.add_argument("--budget", type=_positive)
    sp.add_argument("--jobs", type=_positive, default=1)
    sp.add_argument("--format", choices=("text", "json", "tsv"), default="text")

    sp = sub.add_parser("export-lets", help="print a catalog section as a let-file")
    sp.add_argument("section")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        return _dispatch(ns)
    except UsageError as e:
        print(f"prf: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # output cut short by the reader (e.g. piped into head)
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK


def _dispatch(ns) -> int:
    if ns.cmd == "parse":
        return _cmd_parse(ns.expr)
    if ns.cmd == "eval":
        return _cmd_eval(ns)
    if ns.cmd == "catalog":
        return _cmd_catalog(ns)
    if ns.cmd == "check":
        return _cmd_check(ns)
    return _cmd_export(ns.section)


def _parse_or_usage(src: str, env=None):
    try:
        return parse(src, env)
    except (ParseError, TermError) as e:
        raise UsageError(str(e)) from None


def _cmd_parse(expr: str) -> int:
    print(render(_parse_or_usage(expr)))
    return EXIT_OK


def _cmd_eval(ns) -> int:
    env = None
    if ns.section:
        try:
            env = catalog.scope(ns.section)
        except catalog.UnknownId as e:
            raise UsageError(str(e)) from None
    t = _parse_or_usage(ns.expr, env)
    if ns.section:
        t = catalog.lower(t, ns.section)
    budget = ns.budget or _env_budget() or EvalConfig.budget
    try:
        out = with_big_stack(lambda: Session(EvalConfig(budget=budget, mode=ns.mode)).evaluate(t, ns.args))
    except ValueError as e:
        raise UsageError(str(e)) from None
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_FAIL
    print(out.value)
    if out.ambiguous_minus_hits:
        print(f"warning: {out.ambiguous_minus_hits} ambiguous minus hit(s)", file=sys.stderr)
    return EXIT_OK


def _cmd_catalog(ns) -> int:
    if ns.action == "list":
        try:
            entries = catalog.catalog_list(ns.section)
        except catalog.UnknownId as e:
            raise UsageError(str(e)) from None
        if ns.section and not entries:
            raise UsageError(f"unknown section {ns.section!r}")
        for e in entries:
            print(f"{e.id}\t{e.basis}\t{e.oracle_ref or '-'}")
        return EXIT_OK
    try:
        e = catalog.catalog_get(ns.id)
    except catalog.UnknownId as err:
        raise UsageError(str(err)) from None
    lo = e.domain_lo
    rows = [
        ("id", e.id),
        ("section", e.section),
        ("basis", e.basis),
        ("arity", e.arity),
        ("oracle", e.oracle_ref or "-"),
        ("range", f"{lo}..{e.max_x}" + (" (filtered)" if e.where else "")),
        ("budget", e.budget),
        ("source", e.source or "-"),
        ("term", render(e.term, catalog.source_env(e))),
    ]
    for k, v in rows:
        print(f"{k:8} {v}")
    return EXIT_OK


def _cmd_export(section: str) -> int:
    try:
        sys.stdout.write(catalog.export_lets(section))
    except catalog.UnknownId as e:
        raise UsageError(str(e)) from None
    return EXIT_OK


# -- check ------------------------------------------------------------------------------


def _worker(suite: str, check_id: str, max_x, budget) -> CheckReport:
    return run_check(suites.spec_by_id(suite, check_id), max_x=max_x, budget=budget)


def run_suite(suite: str, max_x: int | None = None, budget: int | None = None, jobs: int = 1) -> Iterator[CheckReport]:
    """Reports in completion order (id order when ``jobs`` is 1)."""
    specs = suites.suite_specs(suite)
    if jobs <= 1:
        for s in specs:
            yield run_check(s, max_x=max_x, budget=budget)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futs = [pool.submit(_worker, suite, s.id, max_x, budget) for s in specs]
        for f in as_completed(futs):
            yield f.result()


def _tsv_row(d: dict) -> str:
    cells = []
    for k in TSV_FIELDS:
        v = d[k]
        cells.append("" if v is None else (json.dumps(v, default=str) if isinstance(v, dict) else str(v)))
    return "\t".join(cells)


def _text_line(r: CheckReport) -> str:
    line = f"{r.status.upper():22} {r.id}  points={r.tested_points} steps={r.steps_total}"
    if r.ambiguous_minus_hits:
        line += f" ambiguous={r.ambiguous_minus_hits}"
    if r.first_mismatch:
        m = r.first_mismatch
        line += f"  at {tuple(m['args'])}: got {m['got']}, want {m['want']}"
    return line


def _cmd_check(ns) -> int:
    budget = ns.budget or _env_budget()
    reports: list[CheckReport] = []
    stream: Iterable[CheckReport] = run_suite(ns.suite, ns.max_x, budget, ns.jobs)
    if ns.format == "json":
        for r in stream:
            reports.append(r)
            print(json.dumps(r.to_dict(), default=str), flush=True)
    else:
        reports = sorted(stream, key=lambda r: r.id)
        if ns.format == "tsv":
            print("\t".join(TSV_FIELDS))
            for r in reports:
                print(_tsv_row(r.to_dict()))
        else:
            for r in reports:
                print(_text_line(r))
            bad = [r for r in reports if not r.ok]
            print(f"{len(reports) - len(bad)}/{len(reports)} checks passed")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
