"""
decay.py

Exponential decay fit y ~ C exp(-eta t) by least squares on log y over the
tail of the time window.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from nemacol.nemacol_defs import SimulationConstants

logger = logging.getLogger(__name__)


@dataclass
class DecayFit:
    C: float
    eta: float
    t_start: float
    t_end: float
    n_points: int
    truncated: bool = False

    def to_dict(self):
        return {
            "C": self.C,
            "eta": self.eta,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "n_points": self.n_points,
            "truncated": self.truncated,
        }


def decay_fit(t, y, tail: float = SimulationConstants.DEFAULT_TAIL_FRACTION) -> DecayFit:
    """
    Fit C and eta over the last `tail` fraction of the time window.

    Non-positive samples end the usable window: the fit runs on the positive
    prefix of the tail and the result is flagged as truncated.

    Raises:
        ValueError: If fewer than two usable samples remain
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError(f"decay fit needs matching 1-D series, got {t.shape} and {y.shape}")
    if not 0.0 < tail <= 1.0:
        raise ValueError(f"tail fraction must lie in (0, 1], got {tail}")
    if t.size < 2:
        raise ValueError("decay fit needs at least two samples")

    t0 = t[0] + (1.0 - tail) * (t[-1] - t[0])
    window = t >= t0
    tw, yw = t[window], y[window]

    truncated = False
    bad = np.flatnonzero(~(yw > 0.0))
    if bad.size:
        truncated = True
        tw, yw = tw[: bad[0]], yw[: bad[0]]
        logger.warning(f"⚠️ Non-positive samples in the decay window; fitting {tw.size} leading points")
    if tw.size < 2:
        raise ValueError("decay fit needs at least two positive samples in the tail window")

    slope, intercept = np.polyfit(tw, np.log(yw), 1)
    return DecayFit(
        C=float(np.exp(intercept)),
        eta=float(-slope),
        t_start=float(tw[0]),
        t_end=float(tw[-1]),
        n_points=int(tw.size),
        truncated=truncated,
    )


# Columns computed from the time series; "decay" is ||v|| + |l| + |omega|
DERIVED_COLUMNS = {
    "decay": lambda frame: np.sqrt(2.0 * frame["E_kin"]) + frame["l_norm"] + frame["omega_norm"],
}


def series_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    """A stored or derived column of a time series frame."""
    if column in frame.columns:
        return frame[column].to_numpy(dtype=float)
    if column in DERIVED_COLUMNS:
        return np.asarray(DERIVED_COLUMNS[column](frame), dtype=float)
    raise ValueError(f"Unknown series column: {column} (known: {', '.join(list(frame.columns) + list(DERIVED_COLUMNS))})")


def fit_series(path, column: str, tail: float = SimulationConstants.DEFAULT_TAIL_FRACTION) -> DecayFit:
    """Decay fit of one column of a timeseries.csv file."""
    frame = pd.read_csv(path)
    if "t" not in frame.columns:
        raise ValueError(f"{path}: time series has no 't' column")
    fit = decay_fit(frame["t"].to_numpy(dtype=float), series_column(frame, column), tail)
    logger.info(f"📉 Decay fit of '{column}': C = {fit.C:.4g}, eta = {fit.eta:.4g} over [{fit.t_start:.4g}, {fit.t_end:.4g}]")
    return fit
