"""
rigid_body.py

NEMATIC COLLOID SIMULATION - RIGID PARTICLE

PURPOSE:
========
State, kinematics and Newton-Euler dynamics of the colloid. Velocities are kept
in the body frame (l, omega); the spatial quantities h', Omega and Q are derived
on demand. The planar state drives the field solver, the spatial state is used
by the standalone kinematics (frame recovery, free rotation).

CONVENTIONS:
============
- h' = Q l and Omega = Q omega (omega scalar in 2D)
- dQ/dt = Q [omega]_x, so constant omega rotates the body by |omega| t
- Newton-Euler in the body frame:
      m_S l'   = -m_S omega x l + F
      J_0 omega' = -omega x (J_0 omega) + T
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import polar

from nemacol.nemacol_defs import SimulationConstants

logger = logging.getLogger(__name__)

Inertia = Union[float, np.ndarray]


@dataclass(frozen=True)
class RigidBody:
    """Unit-density particle of radius R_S."""

    R_S: float
    m_S: float
    J0: Inertia
    dim: int = 2

    def __post_init__(self):
        """Validate inertia data."""
        if self.R_S <= 0.0 or self.m_S <= 0.0:
            raise ValueError("rigid body requires R_S > 0 and m_S > 0")
        if self.dim == 2:
            if not np.isscalar(self.J0) or self.J0 <= 0.0:
                raise ValueError("planar moment of inertia must be a positive scalar")
        elif self.dim == 3:
            J0 = np.asarray(self.J0, dtype=float)
            if J0.shape != (3, 3) or not np.allclose(J0, J0.T):
                raise ValueError("spatial inertia tensor must be a symmetric 3x3 matrix")
            if np.linalg.eigvalsh(J0).min() <= 0.0:
                raise ValueError("spatial inertia tensor must be positive definite")
        else:
            raise ValueError(f"Unknown rigid body dimension: {self.dim}")

    @classmethod
    def disk(cls, R_S: float) -> "RigidBody":
        return cls(R_S=R_S, m_S=np.pi * R_S**2, J0=0.5 * np.pi * R_S**4, dim=2)

    @classmethod
    def ball(cls, R_S: float) -> "RigidBody":
        mass = 4.0 / 3.0 * np.pi * R_S**3
        return cls(R_S=R_S, m_S=mass, J0=0.4 * mass * R_S**2 * np.eye(3), dim=3)


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def skew(w: np.ndarray) -> np.ndarray:
    """Matrix of the cross product w x (.)."""
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


@dataclass(frozen=True)
class RigidState2D:
    h: np.ndarray = field(default_factory=lambda: np.zeros(2))
    theta_b: float = 0.0
    l: np.ndarray = field(default_factory=lambda: np.zeros(2))
    omega: float = 0.0

    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float).reshape(2))
        object.__setattr__(self, "l", np.asarray(self.l, dtype=float).reshape(2))
        object.__setattr__(self, "theta_b", float(self.theta_b))
        object.__setattr__(self, "omega", float(self.omega))
        if not (np.all(np.isfinite(self.h)) and np.all(np.isfinite(self.l))):
            raise ValueError("rigid state entries must be finite")
        if not (np.isfinite(self.theta_b) and np.isfinite(self.omega)):
            raise ValueError("rigid state entries must be finite")

    @property
    def Q(self) -> np.ndarray:
        return rotation(self.theta_b)

    @property
    def h_prime(self) -> np.ndarray:
        return self.Q @ self.l

    @property
    def Omega(self) -> float:
        return self.omega


@dataclass(frozen=True)
class RigidState3D:
    h: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Q: np.ndarray = field(default_factory=lambda: np.eye(3))
    l: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))

    dim = 3

    def __post_init__(self):
        for name, shape in (("h", (3,)), ("Q", (3, 3)), ("l", (3,)), ("omega", (3,))):
            value = np.asarray(getattr(self, name), dtype=float).reshape(shape)
            if not np.all(np.isfinite(value)):
                raise ValueError(f"rigid state entry '{name}' must be finite")
            object.__setattr__(self, name, value)
        drift = orthogonality_drift(self.Q)
        if drift > SimulationConstants.ORTHOGONALITY_TOLERANCE or np.linalg.det(self.Q) <= 0.0:
            raise ValueError(f"Q is not a rotation (orthogonality drift {drift:.2e})")

    @property
    def h_prime(self) -> np.ndarray:
        return self.Q @ self.l

    @property
    def Omega(self) -> np.ndarray:
        return self.Q @ self.omega


RigidState = Union[RigidState2D, RigidState3D]


def orthogonality_drift(Q: np.ndarray) -> float:
    Q = np.asarray(Q)
    eye = np.eye(Q.shape[-1])
    return float(np.max(np.abs(np.swapaxes(Q, -1, -2) @ Q - eye)))


# =============================================================================
# KINEMATICS
# =============================================================================


def rigid_velocity(x: np.ndarray, s: RigidState) -> np.ndarray:
    """u_S = h' + Omega x (x - h); points carry their components on axis 0."""
    x = np.asarray(x, dtype=float)
    lead = (slice(None),) + (None,) * (x.ndim - 1)
    rel = x - s.h[lead]
    if s.dim == 2:
        return s.h_prime[lead] + s.Omega * np.stack([-rel[1], rel[0]])
    Omega = s.Omega[lead]
    return s.h_prime[lead] + np.cross(Omega, rel, axis=0)


def inertia_spatial(J0: Inertia, Q: np.ndarray) -> Inertia:
    """J(t) = Q J_0 Q^T; planar inertia is rotation invariant."""
    if np.isscalar(J0):
        return J0
    Q = np.asarray(Q, dtype=float)
    return Q @ np.asarray(J0, dtype=float) @ Q.T


def kinetic_energy(body: RigidBody, s: RigidState):
    """Translational and rotational kinetic energy of the particle."""
    e_trans = 0.5 * body.m_S * float(np.dot(s.l, s.l))
    if s.dim == 2:
        return e_trans, 0.5 * body.J0 * s.omega**2
    return e_trans, 0.5 * float(s.omega @ (np.asarray(body.J0) @ s.omega))


# =============================================================================
# DYNAMICS
# =============================================================================


def _rk_step(rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float, method: str) -> np.ndarray:
    if method == "rk2":
        k1 = rhs(y)
        k2 = rhs(y + dt * k1)
        return y + 0.5 * dt * (k1 + k2)
    if method == "rk4":
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    raise ValueError(f"Unknown rigid integrator: {method}")


def _planar_rhs(body: RigidBody, F: np.ndarray, T: float):
    def rhs(y):
        theta, l, omega = y[2], y[3:5], y[5]
        dh = rotation(theta) @ l
        dl = -omega * np.array([-l[1], l[0]]) + F / body.m_S
        return np.concatenate([dh, [omega], dl, [T / body.J0]])

    return rhs


def _spatial_rhs(body: RigidBody, F: np.ndarray, T: np.ndarray):
    J0 = np.asarray(body.J0, dtype=float)

    # Q maps body to space (dQ/dt = Q[omega]), so Q J0 omega and Q l are conserved
    # only with the gyroscopic term entering as -omega x J0 omega.
    def rhs(y):
        Q, l, omega = y[3:12].reshape(3, 3), y[12:15], y[15:18]
        dh = Q @ l
        dQ = Q @ skew(omega)
        dl = -np.cross(omega, l) + F / body.m_S
        domega = np.linalg.solve(J0, -np.cross(omega, J0 @ omega) + T)
        return np.concatenate([dh, dQ.ravel(), dl, domega])

    return rhs


@dataclass(frozen=True)
class PrescribedMotion:
    """Body-frame velocities given as functions of time, used instead of Newton-Euler."""

    l: Callable[[float], np.ndarray]
    omega: Callable[[float], float]

    @classmethod
    def constant(cls, l=(0.0, 0.0), omega: float = 0.0) -> "PrescribedMotion":
        l = np.asarray(l, dtype=float)
        return cls(l=lambda t: l.copy(), omega=lambda t: float(omega))

    @classmethod
    def at_rest(cls) -> "PrescribedMotion":
        return cls.constant()

    def __call__(self, t: float):
        return np.asarray(self.l(t), dtype=float), float(self.omega(t))


def newton_euler_step(
    s: RigidState,
    F,
    T,
    dt: float,
    body: RigidBody,
    integrator: str = "rk2",
) -> RigidState:
    """Advance the particle over dt under a force and torque held constant in the body frame."""
    if dt <= 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    F = np.asarray(F, dtype=float)
    T = np.asarray(T, dtype=float)
    if not (np.all(np.isfinite(F)) and np.all(np.isfinite(T))):
        raise ValueError("non-finite force or torque passed to the rigid update")

    if s.dim == 2:
        y = np.concatenate([s.h, [s.theta_b], s.l, [s.omega]])
        y = _rk_step(_planar_rhs(body, F.reshape(2), float(T)), y, dt, integrator)
        return RigidState2D(h=y[0:2], theta_b=y[2], l=y[3:5], omega=y[5])

    y = np.concatenate([s.h, s.Q.ravel(), s.l, s.omega])
    y = _rk_step(_spatial_rhs(body, F.reshape(3), T.reshape(3)), y, dt, integrator)
    return RigidState3D(h=y[0:3], Q=y[3:12].reshape(3, 3), l=y[12:15], omega=y[15:18])


# =============================================================================
# FRAME RECOVERY
# =============================================================================


@dataclass
class FrameHistory:
    """Spatial trajectory recovered from sampled body-frame velocities."""

    Q: np.ndarray
    h_prime: np.ndarray
    Omega: np.ndarray
    h: np.ndarray
    orthogonality_drift: float


def recover_frame(l_series, omega_series, dt: float, orthonormalize: bool = False) -> FrameHistory:
    """Integrate dQ/dt = Q[omega] from Q(0) = Id and h from h(0) = 0.

    RK4 stages use linear interpolation of omega between samples; h is
    integrated with the trapezoid rule.
    """
    l_series = np.asarray(l_series, dtype=float)
    omega_series = np.asarray(omega_series, dtype=float)
    if l_series.size == 0 or omega_series.size == 0:
        raise ValueError("frame recovery needs a non-empty velocity series")
    if dt <= 0.0:
        raise ValueError(f"sampling interval must be positive, got {dt}")
    n = l_series.shape[0]

    if omega_series.ndim == 1:
        theta = cumulative_trapezoid(omega_series, dx=dt, initial=0.0)
        Q = np.array([rotation(a) for a in theta])
        Omega = omega_series.copy()
    else:
        Q = np.empty((n, 3, 3))
        Q[0] = np.eye(3)
        for k in range(n - 1):
            w0, w1 = omega_series[k], omega_series[k + 1]
            wm = 0.5 * (w0 + w1)
            Qk = Q[k]
            k1 = Qk @ skew(w0)
            k2 = (Qk + 0.5 * dt * k1) @ skew(wm)
            k3 = (Qk + 0.5 * dt * k2) @ skew(wm)
            k4 = (Qk + dt * k3) @ skew(w1)
            Q[k + 1] = Qk + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if orthonormalize:
                Q[k + 1] = polar(Q[k + 1])[0]
        Omega = np.einsum("nij,nj->ni", Q, omega_series)

    h_prime = np.einsum("nij,nj->ni", Q, l_series)
    h = cumulative_trapezoid(h_prime, dx=dt, axis=0, initial=0.0)
    drift = orthogonality_drift(Q)
    if drift > SimulationConstants.ORTHOGONALITY_TOLERANCE:
        logger.warning(f"⚠️ Frame recovery orthogonality drift {drift:.2e} above tolerance")
    return FrameHistory(Q=Q, h_prime=h_prime, Omega=Omega, h=h, orthogonality_drift=drift)
