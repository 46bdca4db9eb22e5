"""
implicit.py

Solver for (I - tau * Laplacian) u = f on the annulus, componentwise.

The grid Laplacian is diagonal in the angular Fourier modes, so the system
splits into one radial tridiagonal problem per wavenumber. All modes are
assembled into a single block-diagonal sparse matrix and factored once.
Boundary rows carry either Dirichlet data or the one-sided Neumann
condition d_r u = 0 used by the grid stencils.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from nemacol.grid.annulus import AnnulusGrid, conform
from nemacol.nemacol_defs import BoundaryKind

logger = logging.getLogger(__name__)


class ModalSolver:
    """Factored (I - tau * Laplacian) with fixed boundary rows."""

    def __init__(self, grid: AnnulusGrid, tau: float, kind: BoundaryKind):
        if tau < 0.0:
            raise ValueError(f"implicit weight must be non-negative, got {tau}")
        self.grid = grid
        self.tau = tau
        self.kind = kind
        self.n_modes = grid.nt // 2 + 1
        blocks = [self._mode_matrix(k) for k in grid.wavenumbers]
        self._lu = splu(sp.block_diag(blocks, format="csc"))
        logger.debug(f"Factored {kind.value} modal system: {self.n_modes} modes x {grid.nr} radial nodes")

    def _mode_matrix(self, k: float) -> sp.csr_matrix:
        g, tau = self.grid, self.tau
        n, dr, r = g.nr, g.dr, g.r
        A = sp.lil_matrix((n, n))
        for i in range(1, n - 1):
            A[i, i - 1] = -tau * (1.0 / dr**2 - 0.5 / (dr * r[i]))
            A[i, i] = 1.0 + tau * (2.0 / dr**2 + k**2 / r[i] ** 2)
            A[i, i + 1] = -tau * (1.0 / dr**2 + 0.5 / (dr * r[i]))
        if self.kind is BoundaryKind.DIRICHLET:
            A[0, 0] = 1.0
            A[n - 1, n - 1] = 1.0
        else:
            A[0, 0], A[0, 1], A[0, 2] = -3.0, 4.0, -1.0
            A[n - 1, n - 1], A[n - 1, n - 2], A[n - 1, n - 3] = 3.0, -4.0, 1.0
        return A.tocsr()

    def _solve_scalar(self, rhs: np.ndarray) -> np.ndarray:
        g = self.grid
        modes = sfft.rfft(rhs, axis=-1)
        stacked = modes.T.reshape(-1)
        sol = self._lu.solve(np.column_stack([stacked.real, stacked.imag]))
        modes = (sol[:, 0] + 1j * sol[:, 1]).reshape(self.n_modes, g.nr).T
        return sfft.irfft(modes, n=g.nt, axis=-1)

    def solve(self, rhs: np.ndarray, inner: Optional[np.ndarray] = None, outer: Optional[np.ndarray] = None):
        """Solve for every component of rhs.

        inner and outer hold the Dirichlet data on the circles, shaped like
        rhs without its radial axis; they default to zero and are ignored for
        Neumann rows.
        """
        g = self.grid
        b = conform(rhs, g).copy()
        if self.kind is BoundaryKind.DIRICHLET:
            b[..., 0, :] = 0.0 if inner is None else inner
            b[..., -1, :] = 0.0 if outer is None else outer
        else:
            b[..., 0, :] = 0.0
            b[..., -1, :] = 0.0
        flat = b.reshape((-1,) + g.shape)
        out = np.stack([self._solve_scalar(component) for component in flat]).reshape(b.shape)
        if self.kind is BoundaryKind.DIRICHLET:
            # exact boundary data, free of FFT round-off
            out[..., 0, :] = b[..., 0, :]
            out[..., -1, :] = b[..., -1, :]
        return out
