import csv
import io
import json

import pytest

from ringspin.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, main, render_csv


def _rows(text):
    lines = text.splitlines()
    assert lines[0] == "# schema=v1"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_render_csv_format():
    text = render_csv(["a", "b"], [(1, 0.1 + 0.2), ("x,y", None)])
    assert text == '# schema=v1\na,b\n1,0.3\n"x,y",\n'


def test_spectrum_numeric_small_ring(capsys):
    code, out, _ = _run(capsys, "spectrum", "--numeric", "--L", "3", "--sector", "full")
    assert code == 0
    rows = _rows(out)
    vals = [float(r["eigenvalue"]) for r in rows]
    assert len(vals) == 8 and vals == sorted(vals)


def test_spectrum_both_within_two_permille(capsys, tmp_path):
    out = tmp_path / "spec.csv"
    code, _, _ = _run(capsys, "spectrum", "--L", "10", "--omega", "10", "--both", "--check", "--output", str(out))
    assert code == 0
    rows = _rows(out.read_text())
    assert len(rows) == 15
    assert max(float(r["rel_discrepancy"]) for r in rows) < 2e-3
    manifest = json.loads((tmp_path / "spec.csv.json").read_text())
    assert manifest["check_passed"] is True


def test_spectrum_analytic_tables(capsys):
    code, out, _ = _run(capsys, "spectrum", "--analytic", "--L", "10", "--omega", "10")
    assert code == 0
    table = {r["label"]: float(r["energy"]) for r in _rows(out)}
    assert round(table["2_4"], 2) == -58.09
    assert round(table["3_2,8,10"], 2) == -36.69
    assert round(float(_rows(out)[0]["energy_corrected"]), 2) == -97.64


def test_spectrum_omega_grid(capsys):
    code, out, _ = _run(capsys, "spectrum", "--numeric", "--L", "4", "--k", "3", "--omega-grid", "0", "1", "2")
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 9 and {r["omega"] for r in rows} == {"0", "1", "2"}


def test_correlate_analytic_only_large_ring(capsys):
    code, out, _ = _run(capsys, "correlate", "--L", "24", "--p", "12", "--analytic-only")
    assert code == 0
    vals = [float(r["g2_analytic"]) for r in _rows(out)][1:]
    assert all((a > 0) != (b > 0) for a, b in zip(vals, vals[1:]))


def test_correlate_numeric_agreement(capsys):
    code, out, _ = _run(capsys, "correlate", "--L", "10", "--p", "1", "--check")
    assert code == 0
    assert max(float(r["abs_diff"]) for r in _rows(out)) < 1e-9


def test_correlate_invalid_label(capsys, caplog):
    code, _, _ = _run(capsys, "correlate", "--L", "24", "--p", "13")
    assert code == EXIT_CONFIG
    assert "p=13" in caplog.text


def test_state_command(capsys):
    code, out, err = _run(capsys, "state", "--L", "4", "--kind", "one", "--check-symmetry", "--check")
    assert code == 0
    rows = _rows(out)
    assert [int(r["index"]) for r in rows] == [1, 2, 4, 8]
    assert "shift residual" in err


def test_prepare_ground_and_replay(capsys, tmp_path):
    out = tmp_path / "g.csv"
    code, _, _ = _run(capsys, "prepare-ground", "--L", "6", "--delta0", "45", "--t-final", "0.9", "--check", "--output", str(out))
    assert code == 0
    manifest = json.loads((tmp_path / "g.csv.json").read_text())
    assert manifest["results"]["fidelity"] > 0.99
    assert manifest["results"]["max_symmetry_residual"] < 1e-8
    rows = _rows(out.read_text())
    assert float(rows[-1]["fidelity"]) > 0.99
    replay = tmp_path / "again.csv"
    code, _, _ = _run(capsys, "replay", str(tmp_path / "g.csv.json"), "--output", str(replay))
    assert code == 0
    assert replay.read_bytes() == out.read_bytes()


def test_check_threshold_miss(capsys):
    code, _, _ = _run(capsys, "prepare-ground", "--L", "4", "--t-final", "0.05", "--check")
    assert code == EXIT_CHECK


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[prepare-ground]\nL = 4\nt-final = 0.3\ncheckpoints = 2\n")
    out = tmp_path / "o.csv"
    code, _, _ = _run(capsys, "prepare-ground", "--config", str(cfg), "--t-final", "0.6", "--output", str(out))
    assert code == 0
    conf = json.loads((tmp_path / "o.csv.json").read_text())["config"]
    assert conf["L"] == 4 and conf["t_final"] == 0.6 and conf["checkpoints"] == 2


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[prepare-ground]\nbogus = 1\n")
    assert _run(capsys, "prepare-ground", "--config", str(bad))[0] == EXIT_CONFIG
    bad.write_text("[prepare-ground]\nL = four\n")
    assert _run(capsys, "prepare-ground", "--config", str(bad))[0] == EXIT_CONFIG
    assert _run(capsys, "prepare-ground", "--config", str(tmp_path / "missing.ini"))[0] == EXIT_CONFIG
    assert _run(capsys, "prepare-ground", "--delta0", "-5")[0] == EXIT_CONFIG


def test_max_l_env(capsys, monkeypatch):
    monkeypatch.setenv("RINGSPIN_MAX_L", "8")
    assert _run(capsys, "spectrum", "--numeric", "--L", "10")[0] == EXIT_CONFIG


def test_numerical_failure_exit_code(capsys, monkeypatch):
    import ringspin.dynamics as dyn

    monkeypatch.setattr(dyn, "NORM_DRIFT_MAX", 0.0)
    assert _run(capsys, "prepare-ground", "--L", "4")[0] == EXIT_NUMERIC


def test_sweep_records_failures_per_cell(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _, _ = _run(
        capsys, "sweep", "--L", "4", "--t-final", "0.9", "--delta0", "45", "-1", "--workers", "2", "--output", str(out)
    )
    assert code == 0
    rows = _rows(out.read_text())
    assert [r["status"] for r in rows][0] == "ok"
    assert rows[1]["status"].startswith("error: InvalidParameterError")
    assert float(rows[0]["fidelity"]) > 0.99


def test_sweep_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--L", "4", "6", "--t-final", "0.3", "0.6", "--delta0", "45"]
    _run(capsys, *args, "--workers", "1", "--output", str(a))
    _run(capsys, *args, "--workers", "3", "--output", str(b))
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.slow
def test_excite_two_fermion_dominant(capsys, tmp_path):
    out = tmp_path / "e.csv"
    code, _, err = _run(capsys, "excite", "--target", "two:3", "--delta-osc", "0.05", "--L", "6", "--output", str(out))
    assert code == 0
    manifest = json.loads((tmp_path / "e.csv.json").read_text())
    assert manifest["results"]["dominant"] == "2_3"
    assert manifest["results"]["overlap_table"][0]["label"] == "2_3"
    assert err.splitlines()[1].startswith("2_3,")
