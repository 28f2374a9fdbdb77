import json
import math

import pytest

from qsov import harness as H
from qsov.cli import main


def _run(tmp_path, *argv):
    out = tmp_path / "r.jsonl"
    code = main([*argv, "--out", str(out), "--quiet"])
    return code, out


def test_config_validation():
    with pytest.raises(ValueError):
        H.ExperimentConfig(model="gl2-trig", mode="exact")
    with pytest.raises(ValueError):
        H.ExperimentConfig(suite="plots")
    with pytest.raises(ValueError):
        H.ExperimentConfig(sites=0)


def test_check_rng_is_keyed():
    a = H.check_rng(7, "x").integers(1 << 30, size=4)
    b = H.check_rng(7, "x").integers(1 << 30, size=4)
    c = H.check_rng(7, "y").integers(1 << 30, size=4)
    assert list(a) == list(b) and list(a) != list(c)


def test_exact_ybe_rows_are_zero():
    rows = H.run_checks(H.ExperimentConfig(suite="ybe", model="gl2-rational", sites=2, mode="exact"))
    assert rows and all(r.passed for r in rows)
    assert all(r.residual == 0 for r in rows if r.cmp == "le")


def test_report_schema(tmp_path):
    code, out = _run(tmp_path, "ybe", "--sites", "2")
    assert code == 0
    rows = H.read_report(out)
    assert rows[0]["kind"] == "header" and rows[0]["schema_version"] == H.SCHEMA_VERSION
    for r in rows[1:]:
        assert tuple(r) == H.ROW_KEYS
        assert r["anchor"] and r["ms"] is None
    side = [json.loads(l) for l in open(str(out) + ".timings")]
    assert all(isinstance(r["ms"], float) for r in side)


def test_determinism_all_suites(tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    args = ["spectrum", "--model", "gl2-rational", "--sites", "3", "--seed", "42", "--quiet"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gl3_spectrum_nine_records(tmp_path):
    rows = H.run_checks(H.ExperimentConfig(suite="spectrum", model="gl3-rational", sites=2))
    count = [r for r in rows if r.check == "record-count"][0]
    assert count.residual == 0          # |records - 3^N|
    assert all(r.passed for r in rows)


def test_failing_check_gives_exit_one(tmp_path):
    code, out = _run(tmp_path, "ybe", "--sites", "2", "--tol", "-1")
    assert code == 1
    assert main(["report", str(out)]) == 1


def test_bad_config_exit_two(tmp_path, capsys):
    code, _ = _run(tmp_path, "ybe", "--model", "gl2-trig", "--mode", "exact")
    assert code == 2
    assert "float-only" in capsys.readouterr().err


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(H.OUT_DIR_ENV, str(tmp_path / "env"))
    assert main(["ybe", "--sites", "1", "--quiet"]) == 0
    assert list((tmp_path / "env").glob("*.jsonl"))


def test_report_command_json(tmp_path, capsys):
    code, out = _run(tmp_path, "basis", "--sites", "2")
    capsys.readouterr()
    assert main(["report", str(out), "--json"]) == 0
    s = json.loads(capsys.readouterr().out)[str(out)]
    assert s["failed"] == 0 and "basis" in s["max_residual"]


def test_sweep_N(tmp_path):
    blocks = H.sweep(H.ExperimentConfig(suite="ybe"), "N", [1, 2, 3])
    assert [h["sweep"]["value"] for h, _ in blocks] == [1, 2, 3]
    assert all(r.passed for _, rs in blocks for r in rs)


def test_sweep_isolates_failures():
    # eta = 0 cannot be drawn around; the point fails, the sweep continues
    blocks = H.sweep(H.ExperimentConfig(suite="ybe", sites=2), "eta", [0, 0.5])
    assert not blocks[0][1][0].passed
    assert all(r.passed for r in blocks[1][1])


def test_sweep_alpha_special_point(tmp_path):
    code, out = _run(tmp_path, "sweep", "--model", "gl2-trig", "--suite", "spectrum",
                     "--sites", "3", "--axis", "alpha", "--values", "0.3", f"{math.pi / 2}j")
    assert code == 0
    rows = [r for r in H.read_report(out) if r.get("check") == "sum-rule-sector-mismatches"]
    assert len(rows) == 2 and all(r["residual"] == 0 for r in rows)


def test_sweep_seed_basis_never_fails():
    blocks = H.sweep(H.ExperimentConfig(suite="basis", model="gl2-rational", sites=3), "seed", range(20))
    assert sum(not r.passed for _, rs in blocks for r in rs) == 0
