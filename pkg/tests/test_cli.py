import json
import os
import subprocess
import sys

import pytest

from emnls.cli import EXIT_INDETERMINATE, EXIT_INVALID, EXIT_OK, EXIT_SUITE_FAILED, OUTPUT_ENV, main


def _out(capsys):
    return json.loads(capsys.readouterr().out)


def test_ground_state_writes_bundle(capsys, tmp_path):
    assert main(["ground-state", "--n", "3", "--p", "3"]) == EXIT_OK
    out = _out(capsys)
    root = tmp_path / "runs"
    assert (root / "ground-state-n3-p3.json").is_file()
    assert (root / "ground-state-n3-p3.csv").is_file()
    assert out["files"]["json"].endswith("ground-state-n3-p3.json")
    assert abs(out["residuals"]["pokhozhaev_grad"]) <= 1e-6
    assert abs(out["residuals"]["pokhozhaev_lp"]) <= 1e-6


def test_ground_state_outside_window(capsys):
    assert main(["ground-state", "--p", "6"]) == EXIT_INVALID
    assert "window" in capsys.readouterr().err


@pytest.mark.parametrize("scale,region,code", [
    (0.9, "R1", EXIT_OK), (1.0, "Indeterminate", EXIT_INDETERMINATE), (1.2, "R2", EXIT_OK)])
def test_classify_exit_codes(capsys, scale, region, code):
    assert main(["classify", "--scale", str(scale)]) == code
    assert _out(capsys)["region"] == region


def test_classify_with_bundle_and_save(capsys, tmp_path):
    main(["ground-state"])
    capsys.readouterr()
    save = tmp_path / "cl.json"
    rc = main(["classify", "--bundle", str(tmp_path / "runs" / "ground-state-n3-p3.json"),
               "--initial", '{"kind": "gaussian", "amplitude": 0.5, "width": 1.0}', "--save", str(save)])
    assert rc == EXIT_OK
    assert json.loads(save.read_text())["region"] == "R1"


def test_classify_malformed_json(capsys):
    assert main(["classify", "--initial", "{not json"]) == EXIT_INVALID
    assert "malformed" in capsys.readouterr().err


def test_simulate_run_layout(capsys, tmp_path):
    cfg = {"grid_points": 32, "initial": {"kind": "zero"}, "dt": 0.01, "t_end": 0.05, "output_stride": 1}
    assert main(["simulate", json.dumps(cfg), "--name", "z"]) == EXIT_OK
    out = _out(capsys)
    run = tmp_path / "runs" / "z"
    assert sorted(p.name for p in run.iterdir()) == ["config.json", "diagnostics.csv", "summary.json"]
    assert out["status"] == "global_window_ok"
    assert json.loads((run / "config.json").read_text())["t_end"] == 0.05
    assert len((run / "diagnostics.csv").read_text().splitlines()) == 1 + 6


def test_simulate_bad_config(capsys):
    assert main(["simulate", '{"dt": -1}']) == EXIT_INVALID
    assert "dt" in capsys.readouterr().err


def test_simulate_config_file_and_override(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"grid_points": 32, "initial": {"kind": "zero"}, "dt": 0.01}))
    assert main(["simulate", str(path), "--t-end", "0.02", "--out", str(tmp_path / "o"), "--save-field"]) == EXIT_OK
    assert (tmp_path / "o" / "run" / "final_field.bin").is_file()
    assert _out(capsys)["t_final"] == pytest.approx(0.02)


def test_verify_suite(capsys):
    assert main(["verify", "potentials"]) == EXIT_OK
    assert _out(capsys)["passed"] is True


def test_verify_unknown(capsys):
    assert main(["verify", "nope"]) == EXIT_INVALID
    assert "available" in capsys.readouterr().err


def test_potential_report(capsys):
    rc = main(["potential-report", "--potential", '{"kind": "power_law", "alpha": 1.0, "amplitude": 0.1}'])
    assert rc == EXIT_OK
    out = _out(capsys)
    assert out  # non-empty report


def test_exit_code_constants():
    assert (EXIT_OK, EXIT_INVALID, EXIT_SUITE_FAILED, EXIT_INDETERMINATE) == (0, 2, 3, 4)


def test_module_entry_point(tmp_path):
    env = dict(os.environ, **{OUTPUT_ENV: str(tmp_path)})
    res = subprocess.run([sys.executable, "-m", "emnls", "verify", "bogus"], env=env,
                         capture_output=True, text=True)
    assert res.returncode == EXIT_INVALID
