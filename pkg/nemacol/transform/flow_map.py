"""
flow_map.py

NEMATIC COLLOID SIMULATION - VOLUME-PRESERVING FLOW MAP

PURPOSE:
========
Carries the reference annulus onto the moving fluid domain. Every grid node y
is followed by the flow of the lift b (dX/dt = b(X)) together with its
Jacobian (dJ/dt = grad b(X) J). The inverse map Y is recovered at the nodes by
Newton iteration on a cubic interpolant of X. Geometric coefficients (metric,
Christoffel symbols, second derivatives of Y) are derived from these samples.

Array conventions (trailing axes are always (r, theta)):
    X, Y, dtY, lap_Y    (2, nr, nt)
    JX, JY, dt_JX       (2, 2, nr, nt)   JX[k, j] = d_j X_k
    g_upper, g_lower    (2, 2, nr, nt)
    Gamma               (2, 2, 2, nr, nt) Gamma[i, j, k]
    hess_Y              (2, 2, 2, nr, nt) hess_Y[k, i, j] = d_i d_j Y_k at X
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional

import numpy as np
from scipy import ndimage

from nemacol.grid.annulus import AnnulusGrid, grad
from nemacol.nemacol_defs import ConvergenceError
from nemacol.rigid.rigid_body import RigidState2D, rotation
from nemacol.transform.cutoff import CutoffSpec
from nemacol.transform.lift import LiftField, build_b

logger = logging.getLogger(__name__)


def _eye_field(shape) -> np.ndarray:
    return np.broadcast_to(np.eye(2).reshape(2, 2, 1, 1), (2, 2) + tuple(shape)).copy()


def _inv2(J: np.ndarray):
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    inv = np.stack([np.stack([J[1, 1], -J[0, 1]]), np.stack([-J[1, 0], J[0, 0]])]) / det
    return inv, det


def _matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.einsum("ik...,kj...->ij...", A, B)


def _matvec(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ik...,k...->i...", A, v)


@dataclass
class TransformField:
    """Samples of the flow map and its geometry at the reference nodes."""

    grid: AnnulusGrid
    spec: CutoffSpec
    pose: RigidState2D
    X: np.ndarray
    JX: np.ndarray
    Y: np.ndarray
    JY: np.ndarray
    det: np.ndarray
    dtY: np.ndarray
    dt_JX: np.ndarray
    lift: Optional[LiftField] = None
    g_upper: Optional[np.ndarray] = None
    g_lower: Optional[np.ndarray] = None
    Gamma: Optional[np.ndarray] = None
    hess_Y: Optional[np.ndarray] = None
    lap_Y: Optional[np.ndarray] = None
    flat: bool = False
    inversion_residual: float = 0.0
    _cache: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @property
    def has_tensors(self) -> bool:
        return self.Gamma is not None

    @property
    def moving(self) -> bool:
        """True when the domain velocity terms are active."""
        return bool(np.any(self.dtY) or np.any(self.dt_JX))

    def volume_drift(self) -> float:
        return float(np.max(np.abs(self.det - 1.0)))

    def inversion_field(self) -> np.ndarray:
        """|X(Y(x)) - x| per node: the residual of the stored inverse map, stale Y included."""
        points = self.grid.points
        if np.array_equal(self.X, points) and np.array_equal(self.Y, points):
            return np.zeros(self.grid.shape)
        X, _ = _MapInterpolant(self).evaluate(self.Y)
        return np.max(np.abs(X - points), axis=0)

    def inversion_error(self) -> float:
        return float(np.max(self.inversion_field()))

    def metric_error(self) -> float:
        """max |g^{ik} g_{kj} - delta| over nodes."""
        return float(np.max(np.abs(_matmul(self.g_upper, self.g_lower) - _eye_field(self.grid.shape))))


# =============================================================================
# CONSTRUCTION
# =============================================================================


def identity_transform(
    grid: AnnulusGrid, spec: CutoffSpec, state: Optional[RigidState2D] = None
) -> TransformField:
    """Identity map at t = 0; the domain velocity comes from the initial rigid motion."""
    state = state or RigidState2D()
    lift = build_b(state, spec, grid.R_S)
    points = grid.points.copy()
    eye = _eye_field(grid.shape)
    b, jb = lift.evaluate(points)
    T = TransformField(
        grid=grid,
        spec=spec,
        pose=state,
        X=points,
        JX=eye,
        Y=points.copy(),
        JY=eye.copy(),
        det=np.ones(grid.shape),
        dtY=-b,
        dt_JX=jb,
        lift=lift,
    )
    return tensors(T)


def _rk4_flow(lift: LiftField, X: np.ndarray, J: np.ndarray, dt: float):
    def rhs(Xs, Js, tau):
        b, jb = lift.evaluate(Xs, tau)
        return b, _matmul(jb, Js)

    k1x, k1j = rhs(X, J, 0.0)
    k2x, k2j = rhs(X + 0.5 * dt * k1x, J + 0.5 * dt * k1j, 0.5 * dt)
    k3x, k3j = rhs(X + 0.5 * dt * k2x, J + 0.5 * dt * k2j, 0.5 * dt)
    k4x, k4j = rhs(X + dt * k3x, J + dt * k3j, dt)
    X_new = X + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    J_new = J + dt / 6.0 * (k1j + 2.0 * k2j + 2.0 * k3j + k4j)
    return X_new, J_new


def advance_flow(
    T: TransformField,
    s: RigidState2D,
    dt: float,
    newton_tol: float = 1e-12,
    newton_maxiter: int = 8,
    invert: bool = True,
) -> TransformField:
    """Advance X and J_X over one step with b frozen at the velocities of s.

    The pose of s (h, theta_b) is the pose at the start of the step; the
    returned field carries the pose at its end.
    """
    if dt <= 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    grid = T.grid
    lift = build_b(s, T.spec, grid.R_S)
    pose = RigidState2D(h=s.h + dt * s.h_prime, theta_b=s.theta_b + dt * s.omega, l=s.l, omega=s.omega)

    if lift.is_zero:
        X, J = T.X.copy(), T.JX.copy()
    else:
        X, J = _rk4_flow(lift, T.X, T.JX, dt)
    JY, det = _inv2(J)

    b_end, jb_end = lift.evaluate(X, dt)
    new = TransformField(
        grid=grid,
        spec=T.spec,
        pose=pose,
        X=X,
        JX=J,
        Y=T.Y,
        JY=JY,
        det=det,
        dtY=-_matvec(JY, b_end),
        dt_JX=_matmul(jb_end, J),
        lift=lift,
        inversion_residual=T.inversion_residual,
    )
    if invert:
        new.Y, new.inversion_residual = invert_map(new, T.Y, newton_tol, newton_maxiter)
    return tensors(new)


def tensors(T: TransformField) -> TransformField:
    """Fill the metric tensors, Christoffel symbols and second derivatives of Y."""
    grid = T.grid
    eye = _eye_field(grid.shape)
    T.g_lower = np.einsum("ki...,kj...->ij...", T.JX, T.JX)
    T.g_upper = np.einsum("ik...,jk...->ij...", T.JY, T.JY)
    T.flat = bool(np.array_equal(T.JX, eye))
    T._cache.clear()

    if T.flat:
        T.Gamma = np.zeros((2, 2, 2) + grid.shape)
        T.hess_Y = np.zeros((2, 2, 2) + grid.shape)
        T.lap_Y = np.zeros((2,) + grid.shape)
        return T

    # dg[a, b, c] = d_c g_ab
    dg = grad(T.g_lower, grid)
    bracket = np.einsum("lkj...->ljk...", dg) + dg - np.einsum("jkl...->ljk...", dg)
    T.Gamma = 0.5 * np.einsum("il...,ljk...->ijk...", T.g_upper, bracket)

    # HX[m, a, b] = d_a d_b X_m
    dJ = grad(T.JX, grid)
    HX = np.einsum("mba...->mab...", dJ)
    HX = 0.5 * (HX + np.einsum("mab...->mba...", HX))
    T.hess_Y = -np.einsum("km...,mab...,ai...,bj...->kij...", T.JY, HX, T.JY, T.JY)
    T.lap_Y = np.einsum("kii...->k...", T.hess_Y)
    return T


# =============================================================================
# INVERSION
# =============================================================================


class _MapInterpolant:
    """Cubic spline evaluation of X and J_X at arbitrary reference points.

    Inside the particle the map is the rigid motion of the pose, outside the
    outer circle it is the identity.
    """

    def __init__(self, T: TransformField):
        grid = T.grid
        self.grid = grid
        self.pose = T.pose
        self.pad = grid.nt // 2
        displacement = T.X - grid.points
        samples = np.concatenate([displacement, (T.JX - _eye_field(grid.shape)).reshape(4, *grid.shape)])
        self.coeffs = [ndimage.spline_filter(self._wrap(s), order=3, mode="mirror") for s in samples]

    def _wrap(self, a: np.ndarray) -> np.ndarray:
        p = self.pad
        return np.concatenate([a[:, -p:], a, a[:, :p]], axis=1)

    def evaluate(self, y: np.ndarray):
        grid = self.grid
        rho = np.hypot(y[0], y[1])
        phi = np.mod(np.arctan2(y[1], y[0]), 2.0 * np.pi)
        coords = np.stack([(np.clip(rho, grid.R_S, grid.R_O) - grid.R_S) / grid.dr, phi / grid.dtheta + self.pad])
        vals = [
            ndimage.map_coordinates(c, coords.reshape(2, -1), order=3, mode="mirror", prefilter=False).reshape(
                rho.shape
            )
            for c in self.coeffs
        ]
        X = y + np.stack(vals[:2])
        J = np.eye(2).reshape(2, 2, *([1] * rho.ndim)) + np.stack(vals[2:]).reshape(2, 2, *rho.shape)

        inside = rho < grid.R_S
        if np.any(inside):
            Q = rotation(self.pose.theta_b)
            rigid_X = self.pose.h[:, None] + Q @ y[:, inside]
            X[:, inside] = rigid_X
            J[:, :, inside] = Q[:, :, None]
        outside = rho > grid.R_O
        if np.any(outside):
            X[:, outside] = y[:, outside]
            J[:, :, outside] = np.eye(2)[:, :, None]
        return X, J


def invert_map(T: TransformField, seed: np.ndarray, tol: float, maxiter: int):
    """Solve X(Y) = x at every node by Newton iteration from the seed."""
    targets = T.grid.points
    if np.array_equal(T.X, targets):
        return targets.copy(), 0.0
    interp = _MapInterpolant(T)
    Y = seed.copy()
    residual = np.inf
    for iteration in range(maxiter):
        X, J = interp.evaluate(Y)
        misfit = X - targets
        residual = float(np.max(np.abs(misfit)))
        if residual <= tol:
            logger.debug(f"Newton inversion converged in {iteration} iterations (residual {residual:.2e})")
            return Y, residual
        Jinv, _ = _inv2(J)
        Y = Y - _matvec(Jinv, misfit)
    X, _ = interp.evaluate(Y)
    residual = float(np.max(np.abs(X - targets)))
    if residual > tol:
        raise ConvergenceError(f"Newton inversion of X stalled at residual {residual:.2e} after {maxiter} iterations")
    return Y, residual
