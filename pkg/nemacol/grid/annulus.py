"""
annulus.py

NEMATIC COLLOID SIMULATION - POLAR ANNULUS GRID

PURPOSE:
========
Discrete calculus on the fixed reference fluid domain, a concentric annulus
R_S <= r <= R_O. Fields are numpy arrays whose two trailing axes are (r, theta);
leading axes hold Cartesian components, so a scalar field has shape (nr, nt),
a velocity field (2, nr, nt) and a director field (3, nr, nt).

DISCRETIZATION:
===============
- r: second-order central differences, one-sided three-point stencils on the circles
- theta: Fourier differentiation (rfft), Nyquist mode dropped for odd derivatives
- Cartesian output through the polar chain rule
- Quadrature: trapezoid in r, periodic rectangle rule in theta
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp

from nemacol.nemacol_defs import Boundary, SimulationConstants

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnulusGrid:
    """Node-centred polar grid with N_r + 1 radial and N_theta angular nodes."""

    R_S: float
    R_O: float
    N_r: int
    N_theta: int

    def __post_init__(self):
        """Validate grid configuration."""
        if not 0.0 < self.R_S < self.R_O:
            raise ValueError(f"grid requires 0 < R_S < R_O, got R_S={self.R_S}, R_O={self.R_O}")
        if self.N_r < SimulationConstants.MIN_N_R:
            raise ValueError(f"grid requires N_r >= {SimulationConstants.MIN_N_R}, got {self.N_r}")
        if self.N_theta < SimulationConstants.MIN_N_THETA or self.N_theta % 2:
            raise ValueError(
                f"grid requires an even N_theta >= {SimulationConstants.MIN_N_THETA}, got {self.N_theta}"
            )

    # ---- node layout ----

    @property
    def nr(self) -> int:
        return self.N_r + 1

    @property
    def nt(self) -> int:
        return self.N_theta

    @property
    def shape(self):
        return (self.nr, self.nt)

    @property
    def dr(self) -> float:
        return (self.R_O - self.R_S) / self.N_r

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.N_theta

    @property
    def h(self) -> float:
        """Representative mesh size used in convergence tables."""
        return self.dr

    @cached_property
    def r(self) -> np.ndarray:
        return self.R_S + self.dr * np.arange(self.nr)

    @cached_property
    def theta(self) -> np.ndarray:
        return self.dtheta * np.arange(self.nt)

    @cached_property
    def R(self) -> np.ndarray:
        return np.broadcast_to(self.r[:, None], self.shape).copy()

    @cached_property
    def cos(self) -> np.ndarray:
        return np.broadcast_to(np.cos(self.theta)[None, :], self.shape).copy()

    @cached_property
    def sin(self) -> np.ndarray:
        return np.broadcast_to(np.sin(self.theta)[None, :], self.shape).copy()

    @cached_property
    def points(self) -> np.ndarray:
        """Cartesian node coordinates, shape (2, nr, nt)."""
        return np.stack([self.R * self.cos, self.R * self.sin])

    @property
    def x(self) -> np.ndarray:
        return self.points[0]

    @property
    def y(self) -> np.ndarray:
        return self.points[1]

    @cached_property
    def radial_weights(self) -> np.ndarray:
        w = np.full(self.nr, self.dr)
        w[0] = w[-1] = 0.5 * self.dr
        return w

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights r * dr * dtheta with trapezoid end corrections."""
        return (self.r * self.radial_weights)[:, None] * self.dtheta * np.ones(self.shape)

    @cached_property
    def area(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(self.nt // 2 + 1, dtype=float)

    @cached_property
    def interior_mask(self) -> np.ndarray:
        """False on both circles."""
        mask = np.ones(self.shape, dtype=bool)
        mask[0, :] = False
        mask[-1, :] = False
        return mask

    def deep_interior_mask(self, rows: int = 2) -> np.ndarray:
        """Nodes at least `rows` radial rows away from both circles."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[rows : self.nr - rows, :] = True
        return mask

    @cached_property
    def radial_derivative_matrix(self) -> sp.csr_matrix:
        """Sparse form of the radial first-derivative stencil used by d_dr."""
        n, dr = self.nr, self.dr
        rows, cols, vals = [], [], []
        for i in range(1, n - 1):
            rows += [i, i]
            cols += [i - 1, i + 1]
            vals += [-0.5 / dr, 0.5 / dr]
        rows += [0, 0, 0, n - 1, n - 1, n - 1]
        cols += [0, 1, 2, n - 1, n - 2, n - 3]
        vals += [-1.5 / dr, 2.0 / dr, -0.5 / dr, 1.5 / dr, -2.0 / dr, 0.5 / dr]
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def boundary_radius(self, boundary: Boundary) -> float:
        return self.R_S if boundary is Boundary.INNER else self.R_O

    def circle_points(self, boundary: Boundary) -> np.ndarray:
        """Cartesian coordinates of the boundary nodes, shape (2, nt)."""
        idx = 0 if boundary is Boundary.INNER else -1
        return self.points[:, idx, :]

    def outward_normal(self, boundary: Boundary) -> np.ndarray:
        """Unit normal pointing out of the fluid, shape (2, nt)."""
        sign = -1.0 if boundary is Boundary.INNER else 1.0
        return sign * np.stack([np.cos(self.theta), np.sin(self.theta)])


# =============================================================================
# FIELD HELPERS
# =============================================================================


def conform(f: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    """Return f as an array, raising if its trailing axes do not match the grid."""
    f = np.asarray(f, dtype=float)
    if f.ndim < 2 or f.shape[-2:] != g.shape:
        raise ValueError(f"field of shape {f.shape} does not conform to grid {g.shape}")
    return f


def perp(v: np.ndarray) -> np.ndarray:
    """Rotate planar vectors by +90 degrees along the leading axis."""
    return np.stack([-v[1], v[0]])


def boundary_values(f: np.ndarray, boundary: Boundary) -> np.ndarray:
    return f[..., 0, :] if boundary is Boundary.INNER else f[..., -1, :]


# =============================================================================
# ONE-DIMENSIONAL STENCILS
# =============================================================================


def d_dr(f: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    f = conform(f, g)
    out = np.empty_like(f)
    dr = g.dr
    out[..., 1:-1, :] = (f[..., 2:, :] - f[..., :-2, :]) / (2.0 * dr)
    out[..., 0, :] = (-3.0 * f[..., 0, :] + 4.0 * f[..., 1, :] - f[..., 2, :]) / (2.0 * dr)
    out[..., -1, :] = (3.0 * f[..., -1, :] - 4.0 * f[..., -2, :] + f[..., -3, :]) / (2.0 * dr)
    return out


def d2_dr2(f: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    f = conform(f, g)
    out = np.empty_like(f)
    dr2 = g.dr**2
    out[..., 1:-1, :] = (f[..., 2:, :] - 2.0 * f[..., 1:-1, :] + f[..., :-2, :]) / dr2
    out[..., 0, :] = (2.0 * f[..., 0, :] - 5.0 * f[..., 1, :] + 4.0 * f[..., 2, :] - f[..., 3, :]) / dr2
    out[..., -1, :] = (2.0 * f[..., -1, :] - 5.0 * f[..., -2, :] + 4.0 * f[..., -3, :] - f[..., -4, :]) / dr2
    return out


def d_dtheta(f: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    f = conform(f, g)
    multiplier = 1j * g.wavenumbers
    multiplier[-1] = 0.0
    return sfft.irfft(sfft.rfft(f, axis=-1) * multiplier, n=g.nt, axis=-1)


def d2_dtheta2(f: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    f = conform(f, g)
    return sfft.irfft(sfft.rfft(f, axis=-1) * (-(g.wavenumbers**2)), n=g.nt, axis=-1)


def _sbp_d_dr(f: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    """Radial derivative paired with the trapezoid weights (summation by parts)."""
    out = np.empty_like(f)
    dr = g.dr
    out[..., 1:-1, :] = (f[..., 2:, :] - f[..., :-2, :]) / (2.0 * dr)
    out[..., 0, :] = (f[..., 1, :] - f[..., 0, :]) / dr
    out[..., -1, :] = (f[..., -1, :] - f[..., -2, :]) / dr
    return out


# =============================================================================
# CARTESIAN OPERATORS
# =============================================================================


def grad(f: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    """Cartesian gradient; a new axis of length 2 is inserted before (r, theta)."""
    f = conform(f, g)
    fr = d_dr(f, g)
    ft = d_dtheta(f, g) / g.R
    return np.stack([g.cos * fr - g.sin * ft, g.sin * fr + g.cos * ft], axis=-3)


def div(u: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    """Cartesian divergence over the component axis just before (r, theta)."""
    u = conform(u, g)
    if u.ndim < 3 or u.shape[-3] != 2:
        raise ValueError(f"div expects a planar vector field, got shape {u.shape}")
    ux, uy = u[..., 0, :, :], u[..., 1, :, :]
    ur = g.cos * ux + g.sin * uy
    ut = -g.sin * ux + g.cos * uy
    return d_dr(ur, g) + ur / g.R + d_dtheta(ut, g) / g.R


def laplacian(f: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    """Componentwise Laplacian of a scalar, vector or director field."""
    f = conform(f, g)
    return d2_dr2(f, g) + d_dr(f, g) / g.R + d2_dtheta2(f, g) / g.R**2


def hessian(f: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    """Nested gradients; result[..., a, b, :, :] is d_a(d_b f)."""
    return np.swapaxes(grad(grad(f, g), g), -4, -3)


def flux_divergence(u: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    """Conservative divergence (1/r) d_r(r u_r) + (1/r) d_theta u_theta.

    Its weighted adjoint is minus the interior gradient, which keeps the
    pressure system symmetric.
    """
    u = conform(u, g)
    ur = g.cos * u[0] + g.sin * u[1]
    ut = -g.sin * u[0] + g.cos * u[1]
    return (_sbp_d_dr(g.R * ur, g) + d_dtheta(ut, g)) / g.R


def grad_transpose(a: np.ndarray, g: AnnulusGrid) -> np.ndarray:
    """Matrix transpose of `grad` acting on a planar vector field."""
    a = conform(a, g)
    ar = g.cos * a[0] + g.sin * a[1]
    at = -g.sin * a[0] + g.cos * a[1]
    return g.radial_derivative_matrix.T @ ar - d_dtheta(at / g.R, g)


# =============================================================================
# QUADRATURE
# =============================================================================


def integrate(f: np.ndarray, g: AnnulusGrid):
    f = conform(f, g)
    total = np.sum(f * g.weights, axis=(-2, -1))
    return float(total) if np.ndim(total) == 0 else total


def boundary_integral(values: np.ndarray, g: AnnulusGrid, boundary: Boundary = Boundary.INNER):
    """Periodic trapezoid rule over one circle; values have shape (..., nt)."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != g.nt:
        raise ValueError(f"boundary samples of shape {values.shape} do not match N_theta={g.nt}")
    total = np.sum(values, axis=-1) * g.boundary_radius(boundary) * g.dtheta
    return float(total) if np.ndim(total) == 0 else total


def normal_derivative(f: np.ndarray, g: AnnulusGrid, boundary: Boundary) -> np.ndarray:
    """Derivative along the outward fluid normal on one circle."""
    fr = boundary_values(d_dr(f, g), boundary)
    return -fr if boundary is Boundary.INNER else fr
