import csv
import json
import subprocess
import sys

import pytest

from topomode.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, main, run


def _read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def _one(tmp_path, *argv):
    code = main([*argv, "--out", str(tmp_path)])
    files = sorted(tmp_path.glob("*.csv"))
    return code, files


def test_simulate_unlocked_trajectory(tmp_path, capsys):
    code, [path] = _one(tmp_path, "simulate", "--a", "1", "--b", "0.6", "--delta", "0", "--horizon", "50")
    assert code == EXIT_OK
    rows = _read(path)
    assert list(rows[0]) == ["t", "n0", "n_p", "re_c0", "im_c0", "re_cp", "im_cp"]
    assert max(float(r["n_p"]) for r in rows) > 0.99
    assert float(rows[-1]["t"]) == 50.0
    assert capsys.readouterr().out.count("\n") == 1


def test_eta_without_pump(tmp_path):
    code, [path] = _one(tmp_path, "eta", "--a", "5", "--b", "0")
    assert code == EXIT_OK
    [row] = _read(path)
    assert float(row["eta"]) == 1.0 and row["regime"] == "Locked"


def test_critical_at_resonance(tmp_path, capsys):
    code, [path] = _one(tmp_path, "critical", "--a", "1", "--delta", "0", "--bracket", "0.4,0.6")
    assert code == EXIT_OK
    [row] = _read(path)
    assert abs(float(row["b_critical"]) - 0.5) < 5e-4
    assert row["kind"] == "Jump"
    assert "b_c=0.50" in capsys.readouterr().out


def test_critical_in_gradient_units(tmp_path):
    code, [path] = _one(tmp_path, "critical", "--detuning-hz", "13", "--A-bracket", "0.05,0.3",
                        "--tol-A", "1e-3")
    assert code == EXIT_OK
    [row] = _read(path)
    assert row["kind"] == "Jump" and 0.05 < float(row["A_critical"]) < 0.3


def test_sweep_with_json_and_plot(tmp_path):
    code = main(["sweep", "--a", "1", "--b-grid", "0.3:0.7:5", "--json", "--plot", "--workers", "1",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    [csv_path] = tmp_path.glob("*.csv")
    run_id = csv_path.stem
    assert (tmp_path / f"{run_id}.svg").exists()
    record = json.loads((tmp_path / f"{run_id}.json").read_text())
    assert record["run_id"] == run_id and record["subcommand"] == "sweep"
    assert record["input"]["dynamics"]["a"] == "1.0"
    assert len(record["rows"]) == 5
    assert list(_read(csv_path)[0]) == ["b", "eta", "converged", "period", "status"]


def test_modes_table(tmp_path):
    code, [path] = _one(tmp_path, "modes")
    assert code == EXIT_OK
    rows = _read(path)
    assert [r["mode"] for r in rows] == ["000", "010", "001", "100"]
    assert abs(float(rows[3]["transition_hz"]) - 190) < 19


def test_quadrupole_rows(tmp_path):
    code, [path] = _one(tmp_path, "quadrupole", "--detuning-hz", "-2", "--A-grid", "0,0.1,0.2",
                        "--workers", "1")
    assert code == EXIT_OK
    rows = _read(path)
    assert list(rows[0]) == ["A_gauss_per_cm", "a", "b", "delta", "alpha_p0_rad_s", "eta",
                             "converged", "status"]
    assert float(rows[0]["eta"]) == 1.0


@pytest.mark.parametrize("argv", [
    ["critical", "--a", "1", "--bracket", "0.1,0.2"],
    ["eta", "--c0", "2"],
    ["eta", "--set", "nosection.key=1"],
    ["eta", "--set", "missing-dot=1"],
    ["simulate", "--tol", "1"],
    ["eta", "--config", "/nonexistent/run.ini"],
])
def test_validation_errors_exit_2(tmp_path, argv):
    assert main([*argv, "--out", str(tmp_path)]) == EXIT_INVALID
    assert not list(tmp_path.glob("*.csv"))


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["fly"])
    assert exc.value.code == 2


def test_numerical_failure_exits_3(tmp_path):
    code = main(["simulate", "--b", "1e12", "--horizon", "1", "--tol", "1e-12", "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL


def test_partial_sweep_failure_writes_rows(tmp_path):
    code = main(["sweep", "--b-grid", "0.2,1e12", "--tol", "1e-12", "--workers", "1", "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL
    [path] = tmp_path.glob("*.csv")
    rows = _read(path)
    assert rows[0]["status"] == "ok" and rows[1]["status"].startswith("StepFailure")


def test_flags_override_file_and_are_echoed(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[dynamics]\na = 0.3\nb = 0.2\n[output]\njson = true\n")
    out = tmp_path / "out"
    assert main(["eta", "--config", str(ini), "--b", "0.1", "--set", "dynamics.delta=0.05",
                 "--out", str(out)]) == EXIT_OK
    [path] = out.glob("*.json")
    echo = json.loads(path.read_text())["input"]["dynamics"]
    assert echo["a"] == "0.3" and echo["b"] == "0.1" and echo["delta"] == "0.05"


def test_echo_reparses(tmp_path):
    from topomode.config import RunConfig

    assert main(["eta", "--a", "0.7", "--b", "0.3", "--json", "--out", str(tmp_path)]) == EXIT_OK
    [path] = tmp_path.glob("*.json")
    echo = json.loads(path.read_text())["input"]
    cfg = RunConfig.from_mapping(echo)
    assert cfg.as_dict() == echo


@pytest.mark.parametrize("argv", [
    ["simulate", "--a", "0.8", "--b", "0.57", "--horizon", "30"],
    ["eta", "--a", "0.8", "--b", "0.57"],
    ["sweep", "--a", "1", "--b-grid", "0.3:0.7:5", "--workers", "2"],
    ["critical", "--a", "0.1", "--delta", "0.45", "--bracket", "0.2,0.4", "--tol-b", "1e-3"],
    ["modes"],
    ["quadrupole", "--detuning-hz", "13", "--A-grid", "0:0.2:3", "--workers", "2"],
])
def test_repeated_runs_are_byte_identical(tmp_path, argv):
    first, second = tmp_path / "1", tmp_path / "2"
    assert main([*argv, "--out", str(first)]) == EXIT_OK
    assert main([*argv, "--out", str(second)]) == EXIT_OK
    [a] = first.glob("*.csv")
    [b] = second.glob("*.csv")
    assert a.name == b.name
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "topomode", "eta", "--b", "0", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("eta: eta=1.000000")


def test_run_returns_artifact_paths(tmp_path):
    code, paths = run(None, "eta", {"dynamics": {"b": "0"}, "output": {"dir": str(tmp_path), "json": "1"}})
    assert code == EXIT_OK
    assert [p.suffix for p in paths] == [".csv", ".json"]
