"""
lift.py

Solenoidal extension b of the rigid velocity: b = curl(chi A) with A the stream
function (2D) or vector potential (3D) of u_S = h' + Omega x (x - h).

    2D: psi = h'_1 (x_2 - h_2) - h'_2 (x_1 - h_1) - Omega |x - h|^2 / 2
        b   = chi u_S + psi (d_2 chi, -d_1 chi)
    3D: A   = h' x (x - h) / 2 - |x - h|^2 Omega / 2
        b   = chi u_S + grad(chi) x A

b is divergence free for every chi, equals u_S where chi = 1 and vanishes where chi = 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from nemacol.nemacol_defs import GapViolationError
from nemacol.rigid.rigid_body import RigidState
from nemacol.transform.cutoff import CutoffSpec, chi_derivatives

logger = logging.getLogger(__name__)

LEVI_CIVITA = np.zeros((3, 3, 3))
LEVI_CIVITA[0, 1, 2] = LEVI_CIVITA[1, 2, 0] = LEVI_CIVITA[2, 0, 1] = 1.0
LEVI_CIVITA[0, 2, 1] = LEVI_CIVITA[2, 1, 0] = LEVI_CIVITA[1, 0, 2] = -1.0

_PLANAR_ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


def _lead(v: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(v.shape + (1,) * (x.ndim - 1))


@dataclass(frozen=True)
class LiftField:
    """b(tau, x) for a rigid motion with frozen velocities; the centre drifts as h + tau h'."""

    h: np.ndarray
    h_prime: np.ndarray
    Omega: Union[float, np.ndarray]
    spec: CutoffSpec

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.h_prime) or np.any(self.Omega))

    def center(self, tau: float = 0.0) -> np.ndarray:
        return self.h + tau * self.h_prime

    def rigid(self, x: np.ndarray, tau: float = 0.0) -> np.ndarray:
        rel = x - _lead(self.center(tau), x)
        if self.dim == 2:
            return _lead(self.h_prime, x) + self.Omega * np.stack([-rel[1], rel[0]])
        return _lead(self.h_prime, x) + np.cross(_lead(np.asarray(self.Omega), x), rel, axis=0)

    def velocity(self, x, tau: float = 0.0) -> np.ndarray:
        return self.evaluate(x, tau)[0]

    def jacobian(self, x, tau: float = 0.0) -> np.ndarray:
        """J[i, j] = d_j b_i."""
        return self.evaluate(x, tau)[1]

    def evaluate(self, x, tau: float = 0.0):
        """Return b and its Jacobian at the points x (components on axis 0)."""
        x = np.asarray(x, dtype=float)
        if self.is_zero:
            return np.zeros_like(x), np.zeros((self.dim,) + x.shape)
        chi, dchi, hchi = chi_derivatives(x, self.spec)
        u = self.rigid(x, tau)
        rel = x - _lead(self.center(tau), x)

        if self.dim == 2:
            hp = _lead(self.h_prime, x)
            psi = hp[0] * rel[1] - hp[1] * rel[0] - 0.5 * self.Omega * np.sum(rel**2, axis=0)
            dpsi = np.stack([-u[1], u[0]])
            rot_dchi = np.stack([dchi[1], -dchi[0]])
            rot_hchi = np.stack([hchi[1], -hchi[0]])
            du = self.Omega * _PLANAR_ROT.reshape((2, 2) + (1,) * (x.ndim - 1))
            b = chi * u + psi * rot_dchi
            jac = (
                u[:, None] * dchi[None, :]
                + chi * du
                + rot_dchi[:, None] * dpsi[None, :]
                + psi * rot_hchi
            )
            return b, jac

        Omega = np.asarray(self.Omega, dtype=float)
        A = 0.5 * np.cross(_lead(self.h_prime, x), rel, axis=0) - 0.5 * np.sum(rel**2, axis=0) * _lead(Omega, x)
        dA = 0.5 * np.einsum("lmj,m->lj", LEVI_CIVITA, self.h_prime).reshape((3, 3) + (1,) * (x.ndim - 1))
        dA = dA - _lead(Omega, x)[:, None] * rel[None, :]
        du = np.einsum("ikj,k->ij", LEVI_CIVITA, Omega).reshape((3, 3) + (1,) * (x.ndim - 1))
        b = chi * u + np.cross(dchi, A, axis=0)
        jac = (
            u[:, None] * dchi[None, :]
            + chi * du
            + np.einsum("ikl,kj...,l...->ij...", LEVI_CIVITA, hchi, A)
            + np.einsum("ikl,k...,lj...->ij...", LEVI_CIVITA, dchi, dA)
        )
        return b, jac


def particle_gap(h: np.ndarray, R_S: float, spec: CutoffSpec) -> float:
    """dist(S(t), dO) for a spherical particle in the concentric outer domain."""
    return float(spec.R_O - np.linalg.norm(h) - R_S)


def build_b(s: RigidState, spec: CutoffSpec, R_S: float) -> LiftField:
    """Lift the rigid velocity of s into a solenoidal field that vanishes near dO."""
    gap = particle_gap(s.h, R_S, spec)
    if gap <= 0.5 * spec.r:
        raise GapViolationError(f"gap {gap:.6f} reached the transition zone (r/2 = {0.5 * spec.r})")
    if gap < spec.r:
        logger.warning(f"⚠️ Particle left the cutoff plateau (gap {gap:.4f} < r = {spec.r})")
    Omega = s.Omega if s.dim == 2 else np.asarray(s.Omega, dtype=float)
    return LiftField(h=np.array(s.h, dtype=float), h_prime=np.array(s.h_prime, dtype=float), Omega=Omega, spec=spec)
