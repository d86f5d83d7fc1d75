"""
test_cli.py – end-to-end runs of ``python -m robinlab`` through cli.main().

Every run writes into a per-test tmp directory; exit codes follow the
0 / 1 / 2 contract documented in robinlab.cli.
"""
import csv
import json
import logging
import os

import pytest

from robinlab.cli import EXIT_FAIL, EXIT_INVALID, EXIT_OK, main
from robinlab.log import parse_level, set_level


def _run(out_dir, *argv) -> int:
    return main([*argv, "--output-dir", str(out_dir)])


def _json(path):
    with open(path, "r") as fh:
        return json.load(fh)


def _csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def test_solve_radial_writes_eigenpair_and_profile(tmp_path, capsys):
    code = _run(tmp_path, "solve", "--domain", "interval:-1,1", "--p", "2", "--beta", "1")
    assert code == EXIT_OK

    record = _json(tmp_path / "eigenpair_radial.json")
    assert record["lambda"] == pytest.approx(-1.43923, abs=1e-5)
    assert record["config"]["domain"] == "interval:-1.0,1.0"
    assert record["config"]["p"] == 2.0

    profile = _csv(tmp_path / "profile.csv")
    assert profile[0] == ["s", "u", "du"]
    field = _csv(tmp_path / "field_radial.csv")
    assert field[0] == ["index", "s", "u"]
    assert len(field) == 1 + 129
    assert not (tmp_path / "grid.csv").exists()

    stdout = capsys.readouterr().out
    assert "[radial] lambda = " in stdout


def test_solve_both_solvers_agree(tmp_path, capsys):
    code = _run(
        tmp_path, "solve", "--domain", "interval:-1,1", "--p", "2", "--beta", "1",
        "--solver", "both", "--resolution", "200", "--export-grid",
    )
    assert code == EXIT_OK
    radial = _json(tmp_path / "eigenpair_radial.json")
    variational = _json(tmp_path / "eigenpair_variational.json")
    assert variational["lambda"] == pytest.approx(radial["lambda"], rel=0.01)
    assert variational["euler_lagrange_residual"] < 1e-3
    assert (tmp_path / "grid.csv").exists()
    assert "relative solver gap" in capsys.readouterr().out


def test_solve_variational_on_a_rectangle(tmp_path):
    code = _run(
        tmp_path, "solve", "--domain", "rectangle:1,1", "--p", "2", "--beta", "1",
        "--solver", "variational", "--resolution", "32",
    )
    assert code == EXIT_OK
    record = _json(tmp_path / "eigenpair_variational.json")
    assert record["lambda"] <= -4.0 + 1e-8
    assert record["resolution"] == 32


def test_config_file_with_flag_override(tmp_path):
    config = tmp_path / "solve.env"
    config.write_text("DOMAIN=ball:2,1\nP=3\nBETA=1\n")
    code = _run(tmp_path / "out", "solve", "--config", str(config), "--p", "2")
    assert code == EXIT_OK
    record = _json(tmp_path / "out" / "eigenpair_radial.json")
    assert record["p"] == 2.0
    assert record["config"]["domain"] == "ball:2,1.0"


# ---------------------------------------------------------------------------
# Validation failures → exit 2
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--domain", "interval:-1,1", "--p", "1", "--beta", "1"],
        ["solve", "--domain", "interval:-1,1", "--p", "0.5", "--beta", "1"],
        ["sweep", "--domain", "interval:-1,1", "--beta", "1", "--p-list", ""],
        ["solve", "--domain", "rectangle:1,1", "--p", "2", "--beta", "1"],
        ["expand", "--domain", "interval:-1,1", "--p", "2", "--beta-list", "2,4"],
        ["check", "--domain", "torus:1,2", "--beta", "1"],
    ],
    ids=["p-one", "p-half", "empty-p-list", "radial-rectangle", "expand-interval", "unknown-domain"],
)
def test_invalid_input_exits_2(tmp_path, capsys, argv):
    assert _run(tmp_path, *argv) == EXIT_INVALID
    captured = capsys.readouterr()
    payload = json.loads(captured.out.strip().splitlines()[-1])
    assert payload["error"] == "ConfigError"
    assert payload["exit_code"] == EXIT_INVALID
    assert "[error]" in captured.err


def test_unknown_config_key_exits_2(tmp_path):
    config = tmp_path / "bad.env"
    config.write_text("DOMAIN=interval:-1,1\nBETA=1\nWIDTH=3\n")
    assert _run(tmp_path, "check", "--config", str(config)) == EXIT_INVALID


def test_missing_field_file_exits_2_and_writes_error_json(tmp_path):
    code = _run(tmp_path, "check", "--domain", "interval:-1,1", "--beta", "1", "--field", str(tmp_path / "nope.csv"))
    assert code == EXIT_INVALID
    error = _json(tmp_path / "error.json")
    assert error["error"] == "ConfigError"
    assert "not found" in error["message"]


def test_field_from_another_grid_exits_2(tmp_path):
    assert _run(tmp_path / "a", "solve", "--domain", "interval:-1,1", "--p", "2", "--beta", "1", "--resolution", "32") == EXIT_OK
    code = _run(
        tmp_path / "b", "check", "--domain", "interval:-1,1", "--beta", "1", "--resolution", "64",
        "--field", str(tmp_path / "a" / "field_radial.csv"),
    )
    assert code == EXIT_INVALID


# ---------------------------------------------------------------------------
# sweep → check / bracket on the limit estimate
# ---------------------------------------------------------------------------

def test_sweep_then_bracket_the_limit_field(tmp_path):
    sweep_dir = tmp_path / "sweep"
    code = _run(
        sweep_dir, "sweep", "--domain", "interval:-1,1", "--beta", "1",
        "--p-list", "2,4,8,16,32,64", "--resolution", "64",
    )
    assert code == EXIT_OK

    rows = _csv(sweep_dir / "sweep.csv")
    assert rows[0] == ["p", "lambda", "root", "profile_gap", "energy_defect", "bounds_ok", "error"]
    assert len(rows) == 7
    assert {row[5] for row in rows[1:]} == {"true"}

    summary = _json(sweep_dir / "summary.json")
    assert summary["pass"] is True
    assert summary["relative_error"] < 0.1
    assert summary["tail_decreasing"] is True
    assert summary["gaps_decreasing"] is True
    assert summary["boundary_maximum"] is True
    assert summary["failed_entries"] == []
    assert summary["config"]["p_list"] == [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]

    limit_field = str(sweep_dir / "limit_field.csv")
    bracket_dir = tmp_path / "bracket"
    code = _run(bracket_dir, "bracket", "--domain", "interval:-1,1", "--beta", "1", "--resolution", "64", "--field", limit_field)
    assert code == EXIT_OK
    bracket = _json(bracket_dir / "bracket.json")
    assert bracket["lambda_low"] <= 1.0 <= bracket["lambda_high"]

    check_dir = tmp_path / "check"
    code = _run(check_dir, "check", "--domain", "interval:-1,1", "--beta", "1", "--resolution", "64", "--field", limit_field)
    assert code in (EXIT_OK, EXIT_FAIL)
    report = _json(check_dir / "viscosity_report.json")
    assert max(report["worst_interior"], report["worst_boundary"]) < 0.05
    assert report["field"] == limit_field


def test_sweep_where_every_entry_fails_exits_1(tmp_path, capsys):
    code = _run(
        tmp_path, "sweep", "--domain", "interval:-1,1", "--beta", "1", "--p-list", "2,3",
        "--solver", "variational", "--resolution", "16", "--max-iters", "1",
    )
    assert code == EXIT_FAIL
    error = _json(tmp_path / "error.json")
    assert error["error"] == "SolverError"
    assert error["exit_code"] == EXIT_FAIL
    rows = _csv(tmp_path / "sweep.csv")
    assert all(row[6] for row in rows[1:])


# ---------------------------------------------------------------------------
# check / bracket / expand / compare
# ---------------------------------------------------------------------------

def test_check_exact_profile_passes(tmp_path):
    assert _run(tmp_path, "check", "--domain", "ball:2,1", "--beta", "1", "--resolution", "64") == EXIT_OK
    report = _json(tmp_path / "viscosity_report.json")
    assert report["pass"] is True
    assert report["log_transform"]["pass"] is True
    points = _csv(tmp_path / "viscosity_points.csv")
    assert points[0] == ["index", "s", "role", "residual", "branch"]


def test_check_constant_field_fails(tmp_path):
    code = _run(tmp_path, "check", "--domain", "interval:-1,1", "--beta", "1", "--resolution", "64", "--field", "constant")
    assert code == EXIT_FAIL
    assert _json(tmp_path / "viscosity_report.json")["pass"] is False


def test_bracket_exact_profile(tmp_path, capsys):
    code = _run(tmp_path, "bracket", "--domain", "interval:-1,1", "--beta", "1", "--resolution", "64")
    assert code == EXIT_OK
    bracket = _json(tmp_path / "bracket.json")
    assert bracket["pass"] is True
    assert bracket["eps_list"] == [0.2, 0.1, 0.05]
    assert bracket["off_target_barriers"]["0.5beta"]["lower_ok"] is False
    assert bracket["off_target_barriers"]["2beta"]["upper_ok"] is False
    assert "[bracket] lambda in [" in capsys.readouterr().out


def test_bracket_constant_field_fails(tmp_path):
    code = _run(tmp_path, "bracket", "--domain", "interval:-1,1", "--beta", "1", "--resolution", "32", "--field", "constant")
    assert code == EXIT_FAIL
    assert _json(tmp_path / "bracket.json")["admissible"] is False


def test_expand_disc(tmp_path):
    code = _run(tmp_path, "expand", "--domain", "ball:2,1", "--p", "2", "--beta-list", "2,4,8,16")
    assert code == EXIT_OK
    rows = _csv(tmp_path / "expansion.csv")
    assert rows[0] == ["beta", "lambda", "leading", "curvature_coeff", "error"]
    assert len(rows) == 5
    summary = _json(tmp_path / "expansion_summary.json")
    assert summary["target"] == pytest.approx(-1.0)
    assert summary["last_deviation"] < 0.15


def test_compare_shell_and_ball(tmp_path):
    code = _run(tmp_path, "compare", "--p", "2", "--beta", "6")
    assert code == EXIT_OK
    payload = _json(tmp_path / "comparison.json")
    assert payload["verdict"] is True and payload["pass"] is True
    assert payload["shell_outer_radius"] == pytest.approx(2.0 ** 0.5)
    assert payload["config"]["volume"] == pytest.approx(3.141592653589793)


def test_verbose_flag_is_accepted(tmp_path):
    assert _run(tmp_path, "solve", "--domain", "ball:3,1", "--p", "3", "--beta", "2", "--verbose") == EXIT_OK
    assert os.path.exists(tmp_path / "eigenpair_radial.json")


# ---------------------------------------------------------------------------
# Determinism and logging
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--domain", "interval:-1,1", "--p", "2", "--beta", "1", "--solver", "both", "--resolution", "200", "--export-grid"],
        ["sweep", "--domain", "interval:-1,1", "--beta", "1", "--p-list", "2,4,8", "--resolution", "64"],
    ],
    ids=["solve", "sweep"],
)
def test_repeated_runs_write_identical_csv(tmp_path, argv):
    assert _run(tmp_path / "first", *argv) == EXIT_OK
    assert _run(tmp_path / "second", *argv) == EXIT_OK
    names = sorted(p.name for p in (tmp_path / "first").glob("*.csv"))
    assert names
    assert names == sorted(p.name for p in (tmp_path / "second").glob("*.csv"))
    for name in names:
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes(), name


@pytest.mark.parametrize(
    "raw, expected",
    [(None, "WARNING"), ("", "WARNING"), (" debug ", "DEBUG"), ("Error", "ERROR"), ("chatty", "WARNING")],
)
def test_parse_level(raw, expected):
    assert parse_level(raw) == expected


def test_log_level_comes_from_the_environment(tmp_path, monkeypatch):
    root = logging.getLogger("robinlab")
    argv = ("solve", "--domain", "interval:-1,1", "--p", "2", "--beta", "1", "--resolution", "16")
    try:
        monkeypatch.setenv("ROBINLAB_LOG_LEVEL", "chatty")
        assert _run(tmp_path / "a", *argv) == EXIT_OK
        assert root.level == logging.WARNING
        monkeypatch.setenv("ROBINLAB_LOG_LEVEL", "error")
        assert _run(tmp_path / "b", *argv) == EXIT_OK
        assert root.level == logging.ERROR
        assert _run(tmp_path / "c", *argv, "--verbose") == EXIT_OK
        assert root.level == logging.INFO
    finally:
        set_level("WARNING")
