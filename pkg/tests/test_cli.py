import json
import math
import subprocess
import sys

import pytest

from collapse_lab import cli
from collapse_lab.experiments import DEFAULT_SEED, run_electron_experiment, run_retrodiction


def test_parse_electron_defaults(monkeypatch):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    cfg = cli.parse_args(["electron", "--initial", "+z", "--interpretation", "both"])
    assert cfg.experiment == "electron"
    assert cfg.params == {"initial": "+z", "j0": 0.0}
    assert cfg.samples == 0
    assert cfg.seed == DEFAULT_SEED
    assert cfg.output_format == "json"


def test_parse_photons():
    cfg = cli.parse_args(["photons", "--n", "4", "--samples", "100000", "--seed", "42", "--output", "json"])
    assert cfg.params["n"] == 4
    assert (cfg.samples, cfg.seed, cfg.output_format) == (100000, 42, "json")


def test_parse_phase_grid():
    cfg = cli.parse_args(["retrodict", "--branch", "M++", "--phase-grid", "0:pi:16"])
    grid = cfg.params["phase_grid"]
    assert len(grid) == 16
    assert grid[0] == 0.0 and grid[-1] == pytest.approx(math.pi)
    assert cli.parse_phase_grid("-pi:pi/2:3") == pytest.approx([-math.pi, -math.pi / 4, math.pi / 2])
    assert cli.parse_phase_grid("0:2*pi:2")[-1] == pytest.approx(2 * math.pi)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "777")
    assert cli.parse_args(["electron"]).seed == 777
    assert cli.parse_args(["electron", "--seed", "5"]).seed == 5


@pytest.mark.parametrize("argv", [
    ["electron", "--initial", "+y"],
    ["electron", "--interpretation", "bohm"],
    ["photons", "--n", "-3"],
    ["photons", "--n", "0"],
    ["photons", "--n", "4", "--samples", "-1"],
    ["electron", "--bogus"],
    ["retrodict", "--branch", "M--"],
    ["retrodict", "--phase-grid", "0:pi"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.parse_args(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_emit_electron_json():
    text = cli.emit_report(run_electron_experiment("+z", "both", 0.0), "json")
    assert '"expectations":{"everett":0.5,"copenhagen":0.0},"delta":0.5' in text


def test_emit_photon_distribution():
    out = json.loads(_run(["photons", "--n", "4"]).stdout)
    assert out["distribution"] == [0.0625, 0.25, 0.375, 0.25, 0.0625]


def test_emit_empty_findings():
    text = cli.emit_report(run_electron_experiment("+x"), "json")
    assert '"findings":[]' in text


def test_json_roundtrip_exact():
    rep = run_electron_experiment("+z", "both", 1.0 / 3.0)
    parsed = json.loads(cli.emit_report(rep, "json"))
    for k, v in rep.expectations.items():
        assert parsed["expectations"][k] == float(f"{v:.15g}")
        assert abs(parsed["expectations"][k] - v) <= 1e-15 * max(1.0, abs(v))
    assert json.loads(json.dumps(parsed, separators=(",", ":"))) == parsed


def test_csv_and_table_output():
    rep = run_electron_experiment("+z")
    csv_text = cli.emit_report(rep, "csv")
    lines = csv_text.splitlines()
    assert lines[0] == "section,key,detail,value"
    assert "expectation,bob_jz,everett,0.5" in lines
    assert "delta,bob_jz,everett-copenhagen,0.5" in lines
    table = cli.emit_report(rep, "table")
    assert "bob_jz" in table and "everett" in table
    retro = cli.emit_report(run_retrodiction("M_++"), "csv")
    assert "finding,before_second |-x>|M_+>,FALSE MEMORY,0.5" in retro.splitlines()


def _run(argv, **kw):
    return subprocess.run([sys.executable, "-m", "collapse_lab", *argv], capture_output=True, text=True, **kw)


def test_main_success_and_determinism():
    argv = ["photons", "--n", "5", "--samples", "2000", "--seed", "9"]
    a, b = _run(argv), _run(argv)
    assert a.returncode == 0
    assert a.stdout == b.stdout


def test_main_output_path(tmp_path):
    path = tmp_path / "out.json"
    assert cli.main(["electron", "--output-path", str(path)]) == 0
    assert json.loads(path.read_text(encoding="utf-8"))["delta"] == 0.5


def test_main_unwritable_path(tmp_path, capsys):
    bad = tmp_path / "missing" / "dir" / "out.json"
    assert cli.main(["electron", "--output-path", str(bad)]) == 1
    assert "error" in capsys.readouterr().err


def test_main_usage_exit_code():
    assert _run(["photons"]).returncode == 2
    assert _run(["nonsense"]).returncode == 2


def test_audit_subcommand():
    out = json.loads(_run(["audit", "--initial=-z", "--trials", "50"]).stdout)
    assert out["audit"]["everett"] == -0.5
    assert out["inputs"]["max_everett_violation"] <= 1e-10


def test_retrodict_subcommand():
    out = json.loads(_run(["retrodict", "--branch", "M+-"]).stdout)
    states = {(f["stage"], f["state"]): f for f in out["findings"]}
    assert states[("before_second", "|-x>|M_+>")]["false_memory"] is True
    assert states[("before_first", "|-x>|M'_B>")]["probability"] == 0.5
