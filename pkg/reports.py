"""Per-pair comparison reports, their renderings, and the batch scan runner."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from analytic_oracle import J_product, full_factor_J, v_J_oracle
from core_arith import is_squarefree
from gz_valuation import (
    CONJECTURAL,
    ORACLE_ONLY,
    PROVED,
    PairContext,
    candidate_primes,
    classic_v_J,
    conjecture_v_J,
    doubly_ramified_at_two,
    enumerate_x,
    v_J,
    weighted_Snm,
)
from quadratic import class_representatives
from quaternion import (
    build_R,
    build_R_tilde,
    conjugate_order,
    count_Snm,
    find_lambda,
    intersect_with_field,
    is_order,
    lattice_index,
    make_algebra,
    reduced_discriminant_sq,
)
from report_cache import ReportCache
from utils import PAIRS_TOTAL, format_rational, parse_rational

THEOREM = "theorem"
CONJECTURE = "conjecture"
CLASSIC = "classic"
MODES = (THEOREM, CONJECTURE, CLASSIC)

STATUSES = (PROVED, CONJECTURAL, ORACLE_ONLY)


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ReportRow:
    ell: int
    v_formula: Optional[Fraction]
    v_oracle: Fraction
    status: str
    terms: tuple = ()
    h_term: Fraction = Fraction(0)

    @property
    def matches(self) -> bool:
        return self.v_formula == self.v_oracle

    def checked_in(self, mode: str) -> bool:
        """Rows that must agree with the oracle: proved ones, and every row of a conjecture run."""
        return self.status == PROVED or mode == CONJECTURE

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "v_formula": format_rational(self.v_formula),
            "v_oracle": format_rational(self.v_oracle),
            "status": self.status,
            "h_term": format_rational(self.h_term),
            "terms": [dict(term) for term in self.terms],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> ReportRow:
        status = str(payload["status"])
        if status not in STATUSES:
            raise ValueError(f"unknown row status {status!r}")
        return cls(
            ell=int(payload["ell"]),
            v_formula=parse_rational(payload.get("v_formula")),
            v_oracle=parse_rational(payload["v_oracle"]),
            status=status,
            terms=tuple(dict(term) for term in payload.get("terms", [])),
            h_term=parse_rational(payload.get("h_term")) or Fraction(0),
        )


@dataclass(frozen=True)
class ReportRecord:
    d1: int
    d2: int
    mode: str
    j_sign: int
    rows: tuple[ReportRow, ...]
    precision_used: int
    seconds: float = field(default=0.0, compare=False)

    @property
    def mismatches(self) -> list[ReportRow]:
        return [row for row in self.rows if row.checked_in(self.mode) and not row.matches]

    @property
    def outcome(self) -> str:
        if self.mismatches:
            return "fail"
        if any(not row.checked_in(self.mode) for row in self.rows):
            return "partial"
        return "pass"

    def to_dict(self) -> dict:
        return {
            "d1": self.d1,
            "d2": self.d2,
            "mode": self.mode,
            "j_sign": self.j_sign,
            "precision_used": self.precision_used,
            "seconds": round(self.seconds, 6),
            "rows": [row.to_dict() for row in self.rows],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> ReportRecord:
        return cls(
            d1=int(payload["d1"]),
            d2=int(payload["d2"]),
            mode=str(payload["mode"]),
            j_sign=int(payload["j_sign"]),
            rows=tuple(ReportRow.from_dict(row) for row in payload.get("rows", [])),
            precision_used=int(payload["precision_used"]),
            seconds=float(payload.get("seconds", 0.0)),
        )


# ---------------------------------------------------------------------------
# Building reports
# ---------------------------------------------------------------------------
def admissible(d1: int, d2: int, mode: str) -> bool:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if d1 == d2:
        return False
    ctx = PairContext.of(d1, d2)
    if mode == CONJECTURE:
        return math.gcd(ctx.d1.f, ctx.d2.f) == 1
    if mode == CLASSIC:
        return ctx.d1.f == 1 and ctx.d2.f == 1 and math.gcd(d1, d2) == 1
    return True


def _formula_row(ctx: PairContext, ell: int, mode: str, oracle: Fraction) -> ReportRow:
    if mode == CONJECTURE:
        return ReportRow(ell, conjecture_v_J(ctx, ell), oracle, CONJECTURAL)
    if mode == CLASSIC:
        return ReportRow(ell, classic_v_J(ctx, ell), oracle, PROVED)
    result = v_J(ctx, ell)
    terms = tuple(term.to_dict() for term in result.terms if term.value)
    return ReportRow(ell, result.value, oracle, result.status, terms, result.h_term)


def build_report(d1: int, d2: int, mode: str = THEOREM, prec_bits: Optional[int] = None) -> ReportRecord:
    if not admissible(d1, d2, mode):
        raise ValueError(f"pair ({d1}, {d2}) is not admissible for mode {mode}")
    started = time.perf_counter()
    ctx = PairContext.of(d1, d2)
    product = J_product(d1, d2, prec_bits)
    primes = set(candidate_primes(ctx)) | set(full_factor_J(d1, d2).primes())
    rows = tuple(_formula_row(ctx, ell, mode, v_J_oracle(d1, d2, ell)) for ell in sorted(primes))
    record = ReportRecord(d1, d2, mode, product.sign, rows, product.precision_used, time.perf_counter() - started)
    logging.info({"event": "pair_report", "d1": d1, "d2": d2, "mode": mode, "outcome": record.outcome})
    return record


def pairs_for(max_abs_disc: int, mode: str) -> Iterator[tuple[int, int]]:
    """Admissible (d1, d2) with |d1| < |d2| <= max_abs_disc; theorem mode keeps squarefree d1."""
    if max_abs_disc < 4:
        raise ValueError("max_abs_disc must be at least 4")
    discs = [d for d in range(-3, -max_abs_disc - 1, -1) if d % 4 in (0, 1)]
    for i, d1 in enumerate(discs):
        if mode == THEOREM and not is_squarefree(-d1):
            continue
        for d2 in discs[i + 1 :]:
            if admissible(d1, d2, mode):
                yield d1, d2


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------
@dataclass
class ScanSummary:
    mode: str
    total: int = 0
    passed: int = 0
    partial: int = 0
    failed: int = 0
    cached: int = 0
    failures: list = field(default_factory=list)

    def add(self, record: ReportRecord) -> None:
        self.total += 1
        outcome = record.outcome
        if outcome == "fail":
            self.failed += 1
            self.failures.append((record.d1, record.d2, [row.ell for row in record.mismatches]))
        elif outcome == "partial":
            self.partial += 1
        else:
            self.passed += 1
        PAIRS_TOTAL.labels(mode=self.mode, outcome=outcome).inc()

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "total": self.total,
            "passed": self.passed,
            "partial": self.partial,
            "failed": self.failed,
            "cached": self.cached,
            "failures": [{"d1": d1, "d2": d2, "ells": ells} for d1, d2, ells in self.failures],
        }


def _scan_worker(args: tuple[int, int, str, Optional[int]]) -> dict:
    d1, d2, mode, prec_bits = args
    return build_report(d1, d2, mode, prec_bits).to_dict()


def run_scan(
    max_abs_disc: int,
    mode: str,
    jobs: int = 1,
    cache: Optional[ReportCache] = None,
    prec_bits: Optional[int] = None,
) -> tuple[ScanSummary, list[ReportRecord]]:
    """Report every admissible pair; cache writes stay in this process."""
    summary = ScanSummary(mode)
    records: list[ReportRecord] = []
    pending: list[tuple[int, int]] = []
    logging.info({"event": "scan_start", "mode": mode, "max_abs_disc": max_abs_disc, "jobs": jobs})

    for d1, d2 in pairs_for(max_abs_disc, mode):
        hit = cache.get(d1, d2, mode) if cache is not None else None
        if hit is not None:
            record = ReportRecord.from_dict(hit)
            summary.cached += 1
            summary.add(record)
            records.append(record)
        else:
            pending.append((d1, d2))

    def finish(payload: dict) -> None:
        record = ReportRecord.from_dict(payload)
        if cache is not None:
            cache.put(record.d1, record.d2, mode, payload)
        summary.add(record)
        records.append(record)

    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = [executor.submit(_scan_worker, (d1, d2, mode, prec_bits)) for d1, d2 in pending]
            for future in as_completed(futures):
                finish(future.result())
    else:
        for d1, d2 in pending:
            finish(_scan_worker((d1, d2, mode, prec_bits)))

    records.sort(key=lambda r: (-r.d1, -r.d2))
    logging.info({"event": "scan_end", **summary.to_dict()})
    return summary, records


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------
def _fmt(value: Optional[Fraction]) -> str:
    text = format_rational(value)
    return "-" if text is None else text


def render_table(records: Iterable[ReportRecord]) -> str:
    lines = []
    for record in records:
        sign = "+" if record.j_sign > 0 else "-"
        lines.append(f"J({record.d1}, {record.d2})  sign {sign}  mode {record.mode}  {record.precision_used} bits")
        lines.append(f"  {'ell':>5}  {'formula':>10}  {'oracle':>10}  status")
        for row in record.rows:
            mark = "" if row.matches or not row.checked_in(record.mode) else "  MISMATCH"
            extra = f"  H={_fmt(row.h_term)}" if row.h_term else ""
            lines.append(
                f"  {row.ell:>5}  {_fmt(row.v_formula):>10}  {_fmt(row.v_oracle):>10}  {row.status}{extra}{mark}"
            )
    return "\n".join(lines)


def render_json(records: Iterable[ReportRecord]) -> str:
    return "\n".join(json.dumps(record.to_dict(), sort_keys=True) for record in records)


CSV_FIELDS = ("d1", "d2", "mode", "j_sign", "ell", "v_formula", "v_oracle", "status", "h_term")


def render_csv(records: Iterable[ReportRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for record in records:
        for row in record.rows:
            writer.writerow(
                [
                    record.d1,
                    record.d2,
                    record.mode,
                    record.j_sign,
                    row.ell,
                    format_rational(row.v_formula) or "",
                    format_rational(row.v_oracle),
                    row.status,
                    format_rational(row.h_term),
                ]
            )
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Quaternion self-checks
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CountRow:
    d2: int
    m: int
    n: int
    brute: int
    formula: Fraction
    status: str

    @property
    def mismatch(self) -> bool:
        return self.status == PROVED and self.brute != self.formula

    def to_dict(self) -> dict:
        return {
            "d2": self.d2,
            "m": self.m,
            "n": self.n,
            "brute": self.brute,
            "formula": format_rational(self.formula),
            "status": self.status,
        }


def order_checks(d1: int, ell: int, n_max: int = 2) -> dict[str, bool]:
    alg = make_algebra(d1, ell)
    lam = find_lambda(alg)
    orders = [build_R(alg, lam, None, n) for n in range(1, n_max + 1)]
    r1 = orders[0]
    tilde = build_R_tilde(alg)
    index = alg.q * abs(d1) // (ell if alg.ramified else 1)
    step = ell if alg.ramified else ell**2
    conjugates = [conjugate_order(r1, a) for a in class_representatives(alg.disc, coprime_to=ell * alg.q).values()]
    return {
        "is_order": all(is_order(order) for order in orders),
        "discriminant": reduced_discriminant_sq(r1) == ell**2,
        "field_intersection": intersect_with_field(r1) == [(1, 0), (0, 1)],
        "auxiliary_index": lattice_index(tilde, r1) == index,
        "depth_index": all(lattice_index(b, a) == step for a, b in zip(orders, orders[1:])),
        "conjugates": all(is_order(c) and reduced_discriminant_sq(c) == ell**2 for c in conjugates),
    }


def count_rows(d1: int, ell: int, max_d2: int, n_max: int = 2) -> list[CountRow]:
    rows = []
    for n in range(1, n_max + 1):
        for d2 in range(-3, -max_d2 - 1, -1):
            if d2 % 4 not in (0, 1) or d2 == d1:
                continue
            ctx = PairContext.of(d1, d2)
            status = CONJECTURAL if doubly_ramified_at_two(ctx, ell) else PROVED
            counts = count_Snm(d1, d2, ell, n)
            for slot in enumerate_x(ctx):
                if slot.m == 0 or math.gcd(slot.m, ctx.d1.f) != 1:
                    continue
                rows.append(CountRow(d2, slot.m, n, counts.count(slot.m), weighted_Snm(ctx, ell, slot.m, n), status))
    return rows
