"""
data_logger.py

NEMATIC COLLOID SIMULATION - DATA LOGGER

PURPOSE:
========
Writes run outputs as CSV through pandas: the per-step diagnostics time
series, field snapshots on the reference grid and operator convergence
tables. Snapshots can be read back as initial data.

FEATURES:
=========
- Buffered time series with periodic and on-abort flushing
- Snapshot rows ordered row-major in (i_r, j_theta)
- Round-trip float formatting (%.17g) for reproducible files
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from nemacol.grid.annulus import AnnulusGrid, conform
from nemacol.nemacol_defs import (
    CONVERGENCE_COLUMNS,
    SNAPSHOT_COLUMNS,
    TIMESERIES_COLUMNS,
    SimulationConstants,
)

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


@dataclass
class LoggerConfig:
    """Configuration for data logger."""

    out_dir: str
    flush_every: int = 1000

    def __post_init__(self):
        """Validate configuration."""
        if not self.out_dir:
            raise ValueError("out_dir cannot be empty")
        if self.flush_every < 1:
            raise ValueError("flush_every must be at least 1")


def snapshot_frame(grid: AnnulusGrid, v: np.ndarray, p: np.ndarray, d: np.ndarray) -> pd.DataFrame:
    v, p, d = conform(v, grid), conform(p, grid), conform(d, grid)
    columns = [grid.R, np.broadcast_to(grid.theta[None, :], grid.shape), v[0], v[1], p, d[0], d[1], d[2]]
    return pd.DataFrame({name: np.ravel(col) for name, col in zip(SNAPSHOT_COLUMNS, columns)})


def read_snapshot(path: Union[str, Path], grid: AnnulusGrid) -> Dict[str, np.ndarray]:
    """Read a snapshot CSV back into (v, p, d) arrays on the grid."""
    frame = pd.read_csv(path)
    missing = [c for c in SNAPSHOT_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"snapshot {path} lacks columns: {', '.join(missing)}")
    if len(frame) != grid.nr * grid.nt:
        raise ValueError(f"snapshot {path} has {len(frame)} rows, grid needs {grid.nr * grid.nt}")
    r = frame["r"].to_numpy().reshape(grid.shape)
    theta = frame["theta"].to_numpy().reshape(grid.shape)
    if not (np.allclose(r, grid.R, atol=1e-12) and np.allclose(theta, grid.theta[None, :], atol=1e-12)):
        raise ValueError(f"snapshot {path} was written on a different grid")

    def field(*names):
        return np.stack([frame[n].to_numpy().reshape(grid.shape) for n in names])

    return {"v": field("ux", "uy"), "p": field("p")[0], "d": field("d1", "d2", "d3")}


def write_convergence(rows: Iterable[Dict[str, Any]], path: Union[str, Path]) -> Path:
    """Write an operator convergence table with the h,op,max_error,observed_order header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=CONVERGENCE_COLUMNS)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"📄 Convergence table saved to {path}")
    return path


class DataLogger:
    """Collects diagnostics rows and field snapshots of one run."""

    def __init__(self, out_dir: Union[str, Path], flush_every: int = 1000):
        self._config = LoggerConfig(out_dir=str(out_dir), flush_every=flush_every)
        self._records: List[Dict[str, Any]] = []
        self._path = Path(self._config.out_dir)
        self._path.mkdir(parents=True, exist_ok=True)
        self._timeseries_path = self._path / SimulationConstants.TIMESERIES_FILE
        self._header_written = False
        if self._timeseries_path.exists():
            self._timeseries_path.unlink()

    @property
    def timeseries_path(self) -> Path:
        return self._timeseries_path

    def log(self, row) -> None:
        """Buffer one DiagnosticsRow; flushes every flush_every rows."""
        self._records.append(row.to_flat_record())
        if len(self._records) >= self._config.flush_every:
            self.save_to_file()

    def save_to_file(self) -> None:
        """Append buffered rows to timeseries.csv."""
        if not self._records:
            return
        frame = pd.DataFrame(self._records, columns=TIMESERIES_COLUMNS)
        frame.to_csv(
            self._timeseries_path,
            mode="a" if self._header_written else "w",
            header=not self._header_written,
            index=False,
            float_format=FLOAT_FORMAT,
        )
        self._header_written = True
        logger.debug(f"Flushed {len(self._records)} rows to {self._timeseries_path}")
        self._records.clear()

    def write_snapshot(self, state, name: Optional[str] = None) -> Path:
        """Write the reference-frame fields of a SystemState."""
        name = name or f"snapshot_{state.step_index}.csv"
        target = self._path / name
        snapshot_frame(state.grid, state.v, state.p, state.d).to_csv(target, index=False, float_format=FLOAT_FORMAT)
        logger.info(f"📄 Snapshot saved to {target}")
        return target
