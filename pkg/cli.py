from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from dotenv import load_dotenv

# .env overrides for GZ_* settings
load_dotenv()

from analytic_oracle import CofactorRemains, NonIntegral, v_J_oracle
from config import config
from genus import genus_of
from gz_valuation import ORACLE_ONLY, HypothesisViolated, PairContext, rho, support_prime, v_F
from quadratic import class_group, class_representatives, count_A, make_disc
from quaternion import SearchExhausted
from report_cache import ReportCache
from reports import (
    MODES,
    THEOREM,
    ReportRecord,
    build_report,
    count_rows,
    order_checks,
    render_csv,
    render_json,
    render_table,
    run_scan,
)
from utils import format_rational, setup_logging, write_metrics

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _discriminant(raw: str) -> int:
    try:
        return make_disc(int(raw)).d
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _cache(args: argparse.Namespace) -> ReportCache:
    return ReportCache(args.cache or config.GZ_CACHE, enabled=config.GZ_CACHE_ENABLED and not args.no_cache)


def _emit(records, args: argparse.Namespace) -> None:
    if args.json:
        print(render_json(records))
    elif args.csv:
        print(render_csv(records), end="")
    else:
        print(render_table(records))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_jfactor(args: argparse.Namespace) -> int:
    cache = _cache(args)
    hit = cache.get(args.d1, args.d2, args.mode)
    if hit is not None:
        record = ReportRecord.from_dict(hit)
    else:
        record = build_report(args.d1, args.d2, args.mode, args.prec_bits)
        cache.put(args.d1, args.d2, args.mode, record.to_dict())
    _emit([record], args)
    return EXIT_FAIL if record.mismatches else EXIT_OK


def cmd_vf(args: argparse.Namespace) -> int:
    ctx = PairContext.of(args.d1, args.d2)
    payload = {"d1": args.d1, "d2": args.d2, "ell": args.ell, "m": args.m}
    try:
        result = v_F(ctx, args.ell, args.m)
    except HypothesisViolated as exc:
        payload.update(
            {
                "reason": str(exc),
                "v_F": None,
                "v_J_oracle": format_rational(v_J_oracle(args.d1, args.d2, args.ell)),
                "status": ORACLE_ONLY,
            }
        )
    else:
        payload.update(
            {
                "support": support_prime(ctx, args.m) if args.m else None,
                "rho": rho(ctx, args.ell, args.m) if args.m else None,
                "A": {
                    str(r): count_A(ctx.d1, ctx.d2.f, args.ell, Fraction(args.m, args.ell**r))
                    for r in range(1, 4)
                }
                if args.m
                else {},
                "v_F": format_rational(result.value),
                "status": result.status,
            }
        )
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for key, value in payload.items():
            print(f"{key:>10}: {value}")
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    summary, records = run_scan(args.max_disc, args.mode, args.jobs, _cache(args), args.prec_bits)
    if args.json or args.csv:
        _emit(records, args)
    print(json.dumps(summary.to_dict(), sort_keys=True) if args.json else _summary_line(summary.to_dict()))
    if args.metrics_file:
        write_metrics(args.metrics_file)
    return EXIT_OK if summary.ok else EXIT_FAIL


def _summary_line(summary: dict) -> str:
    return (
        f"{summary['mode']}: {summary['total']} pairs, {summary['passed']} pass, "
        f"{summary['partial']} partial, {summary['failed']} fail ({summary['cached']} cached)"
    )


def cmd_quat_verify(args: argparse.Namespace) -> int:
    checks = order_checks(args.d1, args.ell, args.n_max)
    rows = count_rows(args.d1, args.ell, args.max_d2, args.n_max)
    failed = [name for name, ok in checks.items() if not ok]
    mismatched = [row for row in rows if row.mismatch]
    if args.json:
        print(
            json.dumps(
                {"checks": checks, "counts": [row.to_dict() for row in rows], "mismatches": len(mismatched)},
                sort_keys=True,
            )
        )
    else:
        for name, ok in checks.items():
            print(f"{name:>20}: {'ok' if ok else 'FAILED'}")
        print(f"  {'d2':>5} {'m':>6} {'n':>2} {'brute':>6} {'formula':>8}  status")
        for row in rows:
            if row.brute or row.formula:
                mark = "  MISMATCH" if row.mismatch else ""
                print(f"  {row.d2:>5} {row.m:>6} {row.n:>2} {row.brute:>6} {format_rational(row.formula):>8}  {row.status}{mark}")
    return EXIT_FAIL if failed or mismatched else EXIT_OK


def cmd_class_group(args: argparse.Namespace) -> int:
    disc = make_disc(args.d)
    group = class_group(disc)
    reps = class_representatives(disc, coprime_to=disc.f)
    genera = [genus_of(reps[form]) for form in group.forms]
    entries = [
        {"form": [form.a, form.b, form.c], "order": group.element_order(i), "genus": genus.to_dict()}
        for i, (form, genus) in enumerate(zip(group.forms, genera))
    ]
    if args.json:
        print(json.dumps({"d": disc.d, "h": group.order, "two_rank": group.two_rank, "forms": entries}, sort_keys=True))
    else:
        print(f"d = {disc.d}  h = {group.order}  2-rank = {group.two_rank}")
        for entry, form, genus in zip(entries, group.forms, genera):
            print(f"  {str(form):<16} order {entry['order']:>3}  genus {genus}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def _output_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--json", action="store_true", help="One JSON object per record")
    group.add_argument("--csv", action="store_true", help="One CSV row per (pair, l)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gzfactor", description="Factor CM j-invariant differences two ways.")
    parser.add_argument("--log-level", default=config.LOG_LEVEL)
    parser.add_argument("--cache", default=None, help="JSON-lines cache path (default GZ_CACHE)")
    parser.add_argument("--no-cache", action="store_true")
    parser.add_argument("--prec-bits", type=int, default=None, help="Starting oracle precision")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jfactor", help="Formula vs oracle for one pair")
    p.add_argument("d1", type=_discriminant)
    p.add_argument("d2", type=_discriminant)
    p.add_argument("--mode", choices=MODES, default=THEOREM)
    _output_flags(p)
    p.set_defaults(handler=cmd_jfactor)

    p = sub.add_parser("vf", help="Valuation of one F(m)")
    p.add_argument("d1", type=_discriminant)
    p.add_argument("d2", type=_discriminant)
    p.add_argument("ell", type=int)
    p.add_argument("m", type=int)
    _output_flags(p)
    p.set_defaults(handler=cmd_vf)

    p = sub.add_parser("scan", help="Check every admissible pair up to a bound")
    p.add_argument("--max-disc", type=int, default=40)
    p.add_argument("--mode", choices=MODES, default=THEOREM)
    p.add_argument("--jobs", type=int, default=config.GZ_JOBS)
    p.add_argument("--metrics-file", default=None)
    _output_flags(p)
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("quat-verify", help="Maximal order checks and S_{n,m} counts")
    p.add_argument("d1", type=_discriminant)
    p.add_argument("ell", type=int)
    p.add_argument("--max-d2", type=int, default=50)
    p.add_argument("--n-max", type=int, default=2)
    _output_flags(p)
    p.set_defaults(handler=cmd_quat_verify)

    p = sub.add_parser("class-group", help="Reduced forms, genera and 2-rank")
    p.add_argument("d", type=_discriminant)
    _output_flags(p)
    p.set_defaults(handler=cmd_class_group)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level.upper())
    try:
        return args.handler(args)
    except (CofactorRemains, NonIntegral, SearchExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        parser.error(str(exc))
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
