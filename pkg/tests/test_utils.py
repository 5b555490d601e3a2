import sys
from fractions import Fraction
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


@pytest.mark.parametrize(
    "value, text",
    [(Fraction(8, 3), "8/3"), (Fraction(-1, 2), "-1/2"), (Fraction(6, 3), "2"), (5, "5"), (None, None)],
)
def test_format_rational(value, text):
    from utils import format_rational

    assert format_rational(value) == text


def test_parse_rational_accepts_text_and_integers():
    from utils import parse_rational

    assert parse_rational("8/3") == Fraction(8, 3)
    assert parse_rational(" 2 ") == 2
    assert parse_rational(7) == 7
    assert parse_rational(None) is None


@pytest.mark.parametrize("raw", [1.5, True, [1]])
def test_parse_rational_rejects_inexact_values(raw):
    from utils import parse_rational

    with pytest.raises(ValueError):
        parse_rational(raw)


def test_write_metrics_produces_textfile(tmp_path):
    from utils import PAIRS_TOTAL, write_metrics

    PAIRS_TOTAL.labels(mode="theorem", outcome="pass").inc()
    target = tmp_path / "metrics.prom"
    write_metrics(target)
    assert "gz_pairs_total" in target.read_text(encoding="utf-8")


def test_write_metrics_logs_when_directory_is_missing(tmp_path, caplog):
    from utils import write_metrics

    write_metrics(tmp_path / "missing" / "metrics.prom")
    assert any("Failed to write metrics" in record.getMessage() for record in caplog.records)
