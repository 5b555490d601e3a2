import json
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


def _run(tmp_path, *argv):
    from cli import main

    return main(["--cache", str(tmp_path / "cache.jsonl"), *argv])


def test_jfactor_prints_table_and_succeeds(tmp_path, capsys):
    assert _run(tmp_path, "jfactor", "-3", "-4") == 0
    out = capsys.readouterr().out
    assert "J(-3, -4)" in out
    assert "proved" in out


def test_jfactor_json_is_served_from_cache_on_second_run(tmp_path, capsys):
    assert _run(tmp_path, "jfactor", "-3", "-12", "--json") == 0
    first = json.loads(capsys.readouterr().out)
    assert _run(tmp_path, "jfactor", "-3", "-12", "--json") == 0
    second = json.loads(capsys.readouterr().out)
    first.pop("seconds")
    second.pop("seconds")
    assert first == second
    assert {row["ell"]: row["v_formula"] for row in first["rows"]}[2] == "8/3"


def test_jfactor_h_term_pair(tmp_path, capsys):
    assert _run(tmp_path, "--no-cache", "jfactor", "-7", "-847", "--csv") == 0
    rows = [line.split(",") for line in capsys.readouterr().out.splitlines()[1:]]
    (row,) = [fields for fields in rows if fields[4] == "11"]
    assert row[:3] == ["-7", "-847", "theorem"]
    assert row[-1] == "1"


@pytest.mark.parametrize("argv", [["jfactor", "-3", "-3"], ["jfactor", "-5", "-4"], ["quat-verify", "-7", "2"]])
def test_invalid_arguments_are_usage_errors(tmp_path, argv):
    with pytest.raises(SystemExit) as excinfo:
        _run(tmp_path, *argv)
    assert excinfo.value.code == 2


def test_vf_reports_fractional_value(tmp_path, capsys):
    assert _run(tmp_path, "vf", "-3", "-12", "2", "0", "--json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["v_F"] == "1/3"
    assert payload["status"] == "proved"


def test_vf_lists_counts_for_positive_m(tmp_path, capsys):
    assert _run(tmp_path, "vf", "-3", "-4", "2", "2", "--json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["support"] == 2
    assert payload["v_F"] == "1"
    assert payload["A"]["1"] == 1


def test_vf_falls_back_to_the_oracle_when_l_divides_the_first_conductor(tmp_path, capsys):
    assert _run(tmp_path, "vf", "-12", "-3", "2", "8", "--json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "oracle-only"
    assert payload["v_F"] is None
    assert payload["v_J_oracle"] == "8/3"
    assert "conductor" in payload["reason"]


def test_class_group_shows_genera(tmp_path, capsys):
    assert _run(tmp_path, "class-group", "-15", "--json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["h"] == 2
    assert payload["two_rank"] == 1
    assert len({tuple(sorted(entry["genus"].items())) for entry in payload["forms"]}) == 2


def test_scan_writes_metrics_and_summary(tmp_path, capsys):
    metrics = tmp_path / "metrics.prom"
    assert _run(tmp_path, "scan", "--max-disc", "8", "--mode", "classic", "--metrics-file", str(metrics)) == 0
    out = capsys.readouterr().out
    assert "classic: 5 pairs" in out
    assert "gz_pairs_total" in metrics.read_text(encoding="utf-8")


def test_quat_verify_passes_for_inert_prime(tmp_path, capsys):
    assert _run(tmp_path, "quat-verify", "-7", "3", "--max-d2", "16", "--n-max", "1") == 0
    out = capsys.readouterr().out
    assert "is_order: ok" in out


def test_oracle_failures_exit_with_one(tmp_path, monkeypatch, capsys):
    import cli
    from analytic_oracle import NonIntegral

    def failing(*args, **kwargs):
        raise NonIntegral("gap never closed")

    monkeypatch.setattr(cli, "build_report", failing)
    assert _run(tmp_path, "--no-cache", "jfactor", "-3", "-4") == 1
    assert "gap never closed" in capsys.readouterr().err
