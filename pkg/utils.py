from __future__ import annotations

import logging
from fractions import Fraction
from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

REGISTRY = CollectorRegistry()

PAIRS_TOTAL = Counter(
    "gz_pairs_total", "Discriminant pairs processed", ["mode", "outcome"], registry=REGISTRY
)
CACHE_HITS = Counter("gz_cache_hits_total", "Reports served from the result cache", registry=REGISTRY)
ORACLE_SECONDS = Histogram(
    "gz_oracle_seconds",
    "Wall time of one J(d1, d2) evaluation",
    buckets=(0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0, 120.0),
    registry=REGISTRY,
)
ORACLE_PRECISION = Histogram(
    "gz_oracle_precision_bits",
    "Working precision at which J(d1, d2) converged",
    buckets=(128, 256, 512, 1024, 2048, 4096, 8192, 16384),
    registry=REGISTRY,
)


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
    )


def write_metrics(path: str | Path) -> None:
    try:
        write_to_textfile(str(path), REGISTRY)
    except OSError as exc:
        logging.warning("Failed to write metrics to %s: %s", path, exc)


def format_rational(value: Fraction | int | None) -> str | None:
    """Serialise an exact rational as ``"p/q"`` (or ``"p"`` when integral)."""
    if value is None:
        return None
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(raw: object) -> Fraction | None:
    if raw is None:
        return None
    if isinstance(raw, bool):
        raise ValueError(f"not a rational: {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, str):
        return Fraction(raw.strip())
    raise ValueError(f"not a rational: {raw!r}")
