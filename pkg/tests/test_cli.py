from pathlib import Path

import pytest

from medid.cli import main
from medid.modelfile import builtin_model_path

from conftest import DATA

TOY1 = str(builtin_model_path("toy1"))
TOY3 = str(builtin_model_path("toy3"))


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", TOY1)
    assert code == 0 and "valid" in out


def test_validate_missing_file(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent.model")
    assert code == 1 and "error" in err


def test_truth(capsys):
    code, out, _ = run(capsys, "truth", TOY1, "--estimand", "TE", "--estimand", "CDE(1)")
    assert code == 0
    assert "TE = 5/16" in out
    assert "CDE(1) = 1/4" in out


def test_identify_refusal_is_content(capsys):
    code, out, _ = run(capsys, "identify", TOY3, "--estimand", "XW(1,0)")
    assert code == 0
    assert "not computed" in out


def test_syntax_error_exit_2(capsys):
    code, _, err = run(capsys, "truth", TOY1, "--estimand", "XW(1,1)")
    assert code == 2 and "error" in err


def test_machine_format_versioned(capsys):
    code, out, _ = run(capsys, "truth", TOY1, "--estimand", "TE", "--format", "machine")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "format_version\t1"
    assert lines[1] == "value\tTE\t5/16"


def test_float_mode(capsys):
    code, out, _ = run(capsys, "identify", TOY1, "--estimand", "TE", "--mode", "float")
    assert code == 0
    assert "TE = 0.3125" in out


def test_audit_human(capsys):
    code, out, _ = run(capsys, "audit", TOY3, "--estimand", "NDE0")
    assert code == 0
    assert "NOT identified" in out
    assert "VIOLATED" in out


def test_observe_roundtrip(capsys, tmp_path):
    out_path = tmp_path / "joint.tsv"
    code, _, _ = run(capsys, "observe", TOY1, "--out", str(out_path))
    assert code == 0
    text = out_path.read_text()
    assert text.startswith("C\tA\tM\tY\tprob")


def test_sample_estimate_pipeline(capsys, tmp_path):
    csv = tmp_path / "d.csv"
    code, _, _ = run(capsys, "sample", TOY1, "--n", "20000", "--seed", "42", "--out", str(csv))
    assert code == 0
    code, out, _ = run(
        capsys,
        "estimate",
        "--data",
        str(csv),
        "--roles",
        str(DATA / "roles_toy1.toml"),
        "--estimand",
        "TE",
        "--mode",
        "float",
    )
    assert code == 0
    value = float(out.split("=")[1])
    assert abs(value - 0.3125) < 0.02


def test_sample_deterministic_bytes(capsys, tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "sample", TOY1, "--n", "500", "--seed", "9", "--out", str(p1))
    run(capsys, "sample", TOY1, "--n", "500", "--seed", "9", "--out", str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_report_byte_deterministic(capsys):
    _, out1, _ = run(capsys, "report", TOY3, "--format", "machine")
    _, out2, _ = run(capsys, "report", TOY3, "--format", "machine")
    assert out1 == out2
    assert "not-identified" in out1  # NDE rows refuse under the confounder


def test_report_catalog_rows(capsys):
    _, out, _ = run(capsys, "report", TOY1, "--format", "machine")
    rows = [line.split("\t")[1] for line in out.splitlines() if line.startswith("row\t")]
    for name in ["EY(0)", "EY(1)", "TE", "CDE(0)", "CDE(1)", "IDE(0)", "NDE0", "NIE0"]:
        assert name in rows
