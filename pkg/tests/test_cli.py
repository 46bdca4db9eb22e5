import argparse

import numpy as np
import orjson
import pandas as pd
import pytest

from nemacol.nemacol_defs import CONVERGENCE_COLUMNS, ExitCode, SimulationConstants
from nemacol.solver.coupled_system import CoupledSystem
from nemacol.solver.validation import CONDITIONS
from runner.nemacol_runner import fft_workers, main, parse_grids


@pytest.mark.parametrize(
    "text, expected",
    [
        ("32,64", [(32, 64), (64, 128)]),
        ("32x64, 64x128", [(32, 64), (64, 128)]),
        ("16,32x48", [(16, 32), (32, 48)]),
    ],
)
def test_parse_grids(text, expected):
    assert parse_grids(text) == expected


def test_parse_grids_needs_two_resolutions():
    with pytest.raises(argparse.ArgumentTypeError):
        parse_grids("32")


def test_usage_errors_map_to_validation_failure():
    assert main([]) == ExitCode.VALIDATION_FAILURE
    assert main(["verify", "curl"]) == ExitCode.VALIDATION_FAILURE
    assert main(["--help"]) == ExitCode.OK


@pytest.mark.parametrize("raw, expected", [("4", 4), ("0", -1), ("many", -1)])
def test_fft_workers_from_environment(monkeypatch, raw, expected):
    monkeypatch.setenv(SimulationConstants.THREADS_ENV_VAR, raw)
    assert fft_workers() == expected


def test_validate_accepts_preset(scenario_file, capsys):
    path = scenario_file(initial={"preset": "small_data", "amplitude": 0.02})
    assert main(["validate", "--scenario", str(path)]) == ExitCode.OK
    residuals = orjson.loads(capsys.readouterr().out)
    assert set(residuals) == set(CONDITIONS)


def test_validate_rejects_bad_scenario(scenario_file):
    path = scenario_file(grid={"N_r": 2})
    assert main(["validate", "--scenario", str(path)]) == ExitCode.VALIDATION_FAILURE


def test_validate_detects_interface_mismatch(scenario_file, tmp_path, capsys):
    first = scenario_file("first.json", initial={"preset": "small_swirl"})
    assert main(["simulate", "--scenario", str(first), "--out", str(tmp_path / "first")]) == ExitCode.OK
    path = scenario_file(initial={"snapshot": "first/final_state.csv", "l0": [0.1, 0.0]})
    capsys.readouterr()
    assert main(["validate", "--scenario", str(path)]) == ExitCode.VALIDATION_FAILURE
    residuals = orjson.loads(capsys.readouterr().out)
    assert residuals["interface"] > 1e-2


def test_simulate_writes_run_directory(scenario_file, tmp_path):
    path = scenario_file(initial={"preset": "small_swirl"})
    out = tmp_path / "run"
    assert main(["simulate", "--scenario", str(path), "--out", str(out)]) == ExitCode.OK
    for name in (
        SimulationConstants.TIMESERIES_FILE,
        SimulationConstants.RESOLVED_SCENARIO_FILE,
        SimulationConstants.FINAL_SNAPSHOT_FILE,
        SimulationConstants.RUN_LOG_FILE,
    ):
        assert (out / name).exists(), name
    assert "Run finished" in (out / SimulationConstants.RUN_LOG_FILE).read_text()


def test_simulate_rejects_invalid_scenario(scenario_file, tmp_path):
    path = scenario_file(physics={"mu": -1.0})
    out = tmp_path / "run"
    assert main(["simulate", "--scenario", str(path), "--out", str(out)]) == ExitCode.VALIDATION_FAILURE
    assert "physics.mu" in (out / SimulationConstants.RUN_LOG_FILE).read_text()


def test_simulate_reports_runtime_abort(scenario_file, tmp_path):
    path = scenario_file(initial={"preset": "small_swirl"}, solver={"cfl_safety": 1e-12})
    out = tmp_path / "run"
    assert main(["simulate", "--scenario", str(path), "--out", str(out)]) == ExitCode.RUNTIME_ABORT
    assert len(pd.read_csv(out / SimulationConstants.TIMESERIES_FILE)) == 1
    assert "StabilityError" in (out / SimulationConstants.RUN_LOG_FILE).read_text()


def test_fit_decay(scenario_file, tmp_path, capsys):
    path = scenario_file(initial={"preset": "small_swirl"})
    out = tmp_path / "run"
    main(["simulate", "--scenario", str(path), "--out", str(out)])
    series = str(out / SimulationConstants.TIMESERIES_FILE)
    capsys.readouterr()
    assert main(["fit-decay", "--series", series, "--column", "decay", "--tail", "1.0"]) == ExitCode.OK
    fit = orjson.loads(capsys.readouterr().out)
    assert fit["n_points"] == 6
    assert fit["C"] > 0.0
    assert main(["fit-decay", "--series", series, "--column", "E_total"]) == ExitCode.VALIDATION_FAILURE


def test_verify_grid_writes_convergence_table(tmp_path):
    assert main(["verify", "grid", "--grids", "16,32", "--out", str(tmp_path)]) == ExitCode.OK
    table = pd.read_csv(tmp_path / "convergence_grid.csv")
    assert list(table.columns) == CONVERGENCE_COLUMNS
    assert set(table["op"]) == {"grad", "div", "laplacian", "bphys"}
    assert table["observed_order"].notna().sum() == 4


def test_verify_transform_writes_violations(tmp_path):
    assert main(["verify", "transform", "--grids", "16,32", "--out", str(tmp_path)]) == ExitCode.OK
    frame = pd.read_csv(tmp_path / "transform_violations.csv")
    assert len(frame) == 33 * 64


def test_simulate_maps_kernel_error_to_runtime_abort(scenario_file, tmp_path, monkeypatch):
    monkeypatch.setattr(CoupledSystem, "surface_load", lambda self, v, p, d, T: (np.full(2, np.nan), 0.0))
    path = scenario_file(initial={"preset": "small_swirl"})
    out = tmp_path / "run"
    assert main(["simulate", "--scenario", str(path), "--out", str(out)]) == ExitCode.RUNTIME_ABORT
    assert "NonFiniteStateError" in (out / SimulationConstants.RUN_LOG_FILE).read_text()
    assert (out / SimulationConstants.FINAL_SNAPSHOT_FILE).exists()
