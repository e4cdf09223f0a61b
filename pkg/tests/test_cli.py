import json

import pytest

from opinion_game.cli import main

SMALL = """\
name: cli_small
mode: nash
game:
  initial_judgments: [-0.3, 0.0, 0.25]
  delta: [0.2, -0.1, 0.3]
  horizon: 0.3
solver: {segments: 2}
"""

TWO_AGENTS = """\
name: cli_pair
mode: nash
game:
  initial_judgments: [-0.2, 0.15]
  delta: [0.3, 0.1]
  horizon: 0.3
solver: {segments: 2}
"""


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL)
    return path


def test_run_then_replot(tmp_path, scenario_file, capsys):
    out = tmp_path / "bundle"
    assert main(["run", str(scenario_file), "--out", str(out), "--grid", "60"]) == 0
    assert "converged=True" in capsys.readouterr().out
    report = json.loads((out / "report.json").read_text())
    assert report["grid_steps"] == 60
    svg = out / "plot.svg"
    first = svg.read_bytes()
    svg.unlink()
    assert main(["plot", str(out)]) == 0
    assert svg.read_bytes() == first


def test_sweep_prints_the_summary(tmp_path, scenario_file, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", str(scenario_file), "--axis", "delta", "--values", "0, 0.2", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0].startswith("value,converged")
    assert (out / "delta=0" / "report.json").exists() and (out / "summary.csv").exists()


def test_verify_writes_a_report(tmp_path, capsys):
    path = tmp_path / "pair.yaml"
    path.write_text(TWO_AGENTS)
    assert main(["verify", str(path), "--out", str(tmp_path / "v")]) == 0
    result = json.loads((tmp_path / "v" / "verify.json").read_text())
    assert result["passed"] and result["gradient"]["passed"]
    assert result["brute_force"]["passed"] is not False


def test_error_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(SMALL.replace("[0.2, -0.1, 0.3]", "[0.2]"))
    assert main(["run", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert "game.delta" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.yaml")]) == 2
    assert main(["sweep", str(bad.with_name("none.yaml")), "--axis", "delta", "--values", "1"]) == 2
    stuck = tmp_path / "stuck.yaml"
    stuck.write_text(SMALL.replace("{segments: 2}", "{segments: 1, max_iterations: 1}"))
    assert main(["run", str(stuck), "--out", str(tmp_path / "y")]) == 3
    assert "cli_small" in capsys.readouterr().err
