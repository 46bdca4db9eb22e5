import numpy as np
import pandas as pd
import pytest

from nemacol.grid.annulus import AnnulusGrid
from nemacol.nemacol_defs import TIMESERIES_COLUMNS, SimulationConstants
from nemacol.tools.data_logger import DataLogger, LoggerConfig, read_snapshot, snapshot_frame


class Row:
    def __init__(self, t):
        self.t = t

    def to_flat_record(self):
        return {name: (self.t if name == "t" else 0.0) for name in TIMESERIES_COLUMNS}


def test_logger_flushes_in_batches(tmp_path):
    logger = DataLogger(tmp_path, flush_every=2)
    for step in range(5):
        logger.log(Row(0.1 * step))
    assert len(pd.read_csv(logger.timeseries_path)) == 4
    logger.save_to_file()
    frame = pd.read_csv(tmp_path / SimulationConstants.TIMESERIES_FILE)
    assert list(frame.columns) == TIMESERIES_COLUMNS
    assert np.allclose(frame["t"], [0.0, 0.1, 0.2, 0.3, 0.4])


def test_logger_replaces_stale_timeseries(tmp_path):
    (tmp_path / SimulationConstants.TIMESERIES_FILE).write_text("stale\n")
    logger = DataLogger(tmp_path)
    logger.log(Row(0.0))
    logger.save_to_file()
    assert len(pd.read_csv(logger.timeseries_path)) == 1


@pytest.mark.parametrize("out_dir, flush_every", [("", 10), ("out", 0)])
def test_logger_config_validation(out_dir, flush_every):
    with pytest.raises(ValueError):
        LoggerConfig(out_dir=out_dir, flush_every=flush_every)


def test_snapshot_rejects_other_grid(coarse_grid, tmp_path):
    shape = coarse_grid.shape
    frame = snapshot_frame(coarse_grid, np.zeros((2,) + shape), np.zeros(shape), np.ones((3,) + shape))
    path = tmp_path / "snap.csv"
    frame.to_csv(path, index=False)
    other = AnnulusGrid(R_S=0.3, R_O=1.0, N_r=16, N_theta=32)
    with pytest.raises(ValueError, match="different grid"):
        read_snapshot(path, other)
    frame.drop(columns="d3").to_csv(path, index=False)
    with pytest.raises(ValueError, match="lacks columns: d3"):
        read_snapshot(path, coarse_grid)
