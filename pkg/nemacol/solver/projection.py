"""
projection.py

NEMATIC COLLOID SIMULATION - PRESSURE PROJECTION

PURPOSE:
========
Removes the divergence of a velocity predictor. The increment phi solves the
variable-coefficient Neumann problem

    S phi = -W div_c(v*) / dt,     S = K^T W P g^{-1} K

with K the grid gradient, div_c the conservative divergence, W the
quadrature weights and P the mask of interior nodes. Summation by parts
makes S symmetric positive semidefinite and the corrected velocity
v = v* - dt P g^{-1} K phi discretely divergence free at every node.

S is solved by preconditioned conjugate gradients; the preconditioner is S
for the identity metric, inverted exactly mode by mode in theta.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, splu

from nemacol.grid.annulus import AnnulusGrid, conform, flux_divergence, grad, grad_transpose, integrate
from nemacol.nemacol_defs import ConvergenceError, SimulationConstants
from nemacol.transform.flow_map import TransformField

logger = logging.getLogger(__name__)


@dataclass
class ProjectionResult:
    v: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    iterations: int
    div_max: float


class PressureProjector:
    """Incremental pressure projection on one grid."""

    def __init__(self, grid: AnnulusGrid, cg_tol: float = 1e-10, cg_maxiter: int = 500, div_tol: float = 1e-8):
        self.grid = grid
        self.cg_tol = cg_tol
        self.cg_maxiter = cg_maxiter
        self.div_tol = div_tol
        self.mask = grid.interior_mask.astype(float)
        self._null_basis = self._null_space(grid)
        self._precond_lu = self._factor_preconditioner()

    @staticmethod
    def _null_space(grid: AnnulusGrid) -> np.ndarray:
        """Orthonormal kernel of S: constants and the checkerboards invisible to K."""
        i = np.arange(grid.nr)[:, None]
        j = np.arange(grid.nt)[None, :]
        modes = [np.ones(grid.shape), (-1.0) ** j * np.ones(grid.shape), (-1.0) ** (i + j)]
        modes.append((-1.0) ** i * np.ones(grid.shape))
        basis, _ = np.linalg.qr(np.stack([m.ravel() for m in modes], axis=1))
        return basis

    def _factor_preconditioner(self):
        g = self.grid
        Dr = g.radial_derivative_matrix
        wp = g.r * g.radial_weights * g.dtheta
        wp[0] = wp[-1] = 0.0
        blocks = []
        for k in g.wavenumbers:
            m = 0.0 if k == g.wavenumbers[-1] else k
            A = Dr.T @ sp.diags(wp) @ Dr + m**2 * sp.diags(wp / g.r**2)
            eps = 1e-12 * abs(A).max()
            blocks.append(A + eps * sp.identity(g.nr))
        return splu(sp.block_diag(blocks, format="csc"))

    def _apply_preconditioner(self, residual: np.ndarray) -> np.ndarray:
        g = self.grid
        n_modes = g.nt // 2 + 1
        modes = sfft.rfft(residual.reshape(g.shape), axis=-1)
        stacked = modes.T.reshape(-1)
        sol = self._precond_lu.solve(np.column_stack([stacked.real, stacked.imag]))
        modes = (sol[:, 0] + 1j * sol[:, 1]).reshape(n_modes, g.nr).T
        return sfft.irfft(modes, n=g.nt, axis=-1).ravel()

    def _metric_gradient(self, phi: np.ndarray, T: TransformField) -> np.ndarray:
        """P g^{-1} K phi."""
        gp = grad(phi, self.grid)
        if not T.flat:
            gp = np.einsum("ij...,j...->i...", T.g_upper, gp)
        return gp * self.mask

    def _apply_S(self, phi_flat: np.ndarray, T: TransformField) -> np.ndarray:
        g = self.grid
        flux = self._metric_gradient(phi_flat.reshape(g.shape), T) * g.weights
        return grad_transpose(flux, g).ravel()

    def _deflate(self, b: np.ndarray) -> np.ndarray:
        coeffs = self._null_basis.T @ b
        removed = float(np.linalg.norm(coeffs))
        if removed > 0.0:
            logger.debug(f"Removed kernel component {removed:.2e} from the pressure right-hand side")
        return b - self._null_basis @ coeffs

    def project(self, v_star: np.ndarray, T: TransformField, dt: float, p: Optional[np.ndarray] = None):
        """Project v_star; p is the pressure of the previous step, updated by phi."""
        g = self.grid
        v_star = conform(v_star, g)
        if not np.all(np.isfinite(v_star)):
            raise ValueError("non-finite velocity passed to the pressure projection")
        p = np.zeros(g.shape) if p is None else conform(p, g)

        b = self._deflate((-g.weights * flux_divergence(v_star, g) / dt).ravel())
        n = g.nr * g.nt
        iterations = 0
        if np.any(b):
            counter = {"n": 0}

            def count(_):
                counter["n"] += 1

            S = LinearOperator((n, n), matvec=lambda x: self._apply_S(x, T), dtype=float)
            M = LinearOperator((n, n), matvec=self._apply_preconditioner, dtype=float)
            atol = self.cg_tol * float(g.weights.min()) / dt
            phi_flat, info = cg(S, b, rtol=0.0, atol=atol, maxiter=self.cg_maxiter, M=M, callback=count)
            iterations = counter["n"]
            phi = self._deflate(phi_flat).reshape(g.shape)
        else:
            info = 0
            phi = np.zeros(g.shape)

        v = v_star - dt * self._metric_gradient(phi, T)
        div_max = float(np.max(np.abs(flux_divergence(v, g))))
        if info != 0:
            if div_max > self.div_tol:
                raise ConvergenceError(
                    f"pressure CG stopped after {iterations} iterations with div {div_max:.2e} > {self.div_tol:.1e}"
                )
            logger.warning(f"⚠️ Pressure CG hit its iteration budget; div {div_max:.2e} still within tolerance")

        p_new = p + phi
        p_new = p_new - integrate(p_new, g) / g.area
        mean = integrate(p_new, g) / g.area
        if abs(mean) > SimulationConstants.PRESSURE_MEAN_TOLERANCE:
            logger.warning(f"⚠️ Pressure mean {mean:.2e} above tolerance after re-centring")
        return ProjectionResult(v=v, p=p_new, phi=phi, iterations=iterations, div_max=div_max)


_projector_cache = {}


def project(v_star: np.ndarray, T: TransformField, dt: float = 1.0, p: Optional[np.ndarray] = None, **kwargs):
    """Project with a projector cached per grid; returns (v, p)."""
    key = (T.grid, tuple(sorted(kwargs.items())))
    projector = _projector_cache.get(key)
    if projector is None:
        projector = PressureProjector(T.grid, **kwargs)
        _projector_cache[key] = projector
    result = projector.project(v_star, T, dt, p)
    return result.v, result.p
