"""
evaluation_engine.py

NEMATIC COLLOID SIMULATION - EVALUATION ENGINE

PURPOSE:
========
Turns a SystemState into the numbers tracked per step: the energy and its
four parts, the dissipation rate, the director-norm drift, the distance to
the equilibrium set, the particle gap and the projection/pressure checks.

The kinetic and elastic energies are evaluated with physical quantities at
X(y); the flow map preserves volume, so the reference quadrature applies
unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from nemacol.grid.annulus import AnnulusGrid, flux_divergence, grad, integrate, normal_derivative
from nemacol.nemacol_defs import Boundary
from nemacol.operators.stress import PhysicalParams, physical_gradients
from nemacol.operators.transformed_operators import L2
from nemacol.rigid.rigid_body import RigidBody, kinetic_energy
from nemacol.solver.system_state import SystemState

logger = logging.getLogger(__name__)


@dataclass
class DiagnosticsRow:
    """One line of the time series."""

    t: float
    E: float
    E_kin: float
    E_pot: float
    E_trans: float
    E_rot: float
    dissipation: float
    director_drift: float
    eq_residual: float
    l_norm: float
    omega_norm: float
    h_norm: float
    gap: float
    div_max: float
    p_mean: float

    def to_flat_record(self) -> Dict[str, Any]:
        return asdict(self)

    def is_finite(self) -> bool:
        return all(np.isfinite(value) for value in asdict(self).values())


def _body(s: SystemState, body: Optional[RigidBody]) -> RigidBody:
    return body or RigidBody.disk(s.grid.R_S)


def _metric_norm2(T, grad_d: np.ndarray) -> np.ndarray:
    """|grad d|^2 in the pulled-back metric, g^{ij} d_i d . d_j d."""
    if T.flat:
        return np.sum(grad_d**2, axis=(0, 1))
    return np.einsum("ij...,li...,lj...->...", T.g_upper, grad_d, grad_d)


def director_residual(s: SystemState) -> np.ndarray:
    """L2 d + |grad d|^2_g d, the harmonic-map tension of the director."""
    T = s.transform
    return L2(s.d, T) + _metric_norm2(T, grad(s.d, T.grid))[None] * s.d


def energy(
    s: SystemState, params: PhysicalParams, body: Optional[RigidBody] = None
) -> Tuple[float, float, float, float, float]:
    """(E, E_kin, E_pot, E_trans, E_rot)."""
    T = s.transform
    grid = T.grid
    u, _, grad_phys = physical_gradients(s.v, s.d, T)
    e_kin = 0.5 * integrate(np.sum(u**2, axis=0), grid)
    e_pot = 0.5 * params.lam * integrate(np.sum(grad_phys**2, axis=(0, 1)), grid)
    e_trans, e_rot = kinetic_energy(_body(s, body), s.rigid)
    return e_kin + e_pot + e_trans + e_rot, e_kin, e_pot, e_trans, e_rot


def dissipation(s: SystemState, params: PhysicalParams) -> float:
    """2 mu |D(u)|^2 + (lam^2 / gamma) |L2 d + |grad d|^2 d|^2, integrated."""
    T = s.transform
    grid = T.grid
    _, grad_u, _ = physical_gradients(s.v, s.d, T)
    strain = 0.5 * (grad_u + np.swapaxes(grad_u, 0, 1))
    viscous = 2.0 * params.mu * integrate(np.sum(strain**2, axis=(0, 1)), grid)
    tension = director_residual(s)
    elastic = params.lam**2 / params.gamma * integrate(np.sum(tension**2, axis=0), grid)
    return float(viscous + elastic)


def director_drift(s: SystemState) -> float:
    return float(np.max(np.abs(np.linalg.norm(s.d, axis=0) - 1.0)))


def equilibrium_residual(s: SystemState) -> float:
    """Distance to the set of constant-director rest states."""
    T = s.transform
    grid = T.grid
    tension = np.sqrt(integrate(np.sum(director_residual(s) ** 2, axis=0), grid))
    boundary = 0.0
    for side in Boundary:
        dn = normal_derivative(s.d, grid, side)
        boundary += float(np.sum(dn**2)) * grid.boundary_radius(side) * grid.dtheta
    u = s.v if T.flat else np.einsum("ij...,j...->i...", T.JX, s.v)
    velocity = np.sqrt(integrate(np.sum(u**2, axis=0), grid))
    return float(tension + np.sqrt(boundary) + velocity + np.linalg.norm(s.rigid.l) + abs(s.rigid.omega))


def gap(s: SystemState, scenario=None) -> float:
    """dist(S(t), dO) = R_O - |h| - R_S, with the geometry of the scenario when given."""
    geometry = scenario.geometry if scenario is not None else s.grid
    return float(geometry.R_O - np.linalg.norm(s.rigid.h) - geometry.R_S)


def mean_split(d: np.ndarray, grid: AnnulusGrid):
    """(d_m, d_avg) with d_avg the mean over the annulus and d_m = d - d_avg."""
    d_avg = np.atleast_1d(integrate(d, grid)) / grid.area
    d_m = d - d_avg.reshape((-1,) + (1,) * 2)
    return d_m, d_avg


class EvaluationEngine:
    """Evaluates the per-step diagnostics of one run."""

    def __init__(self, params: PhysicalParams, body: RigidBody):
        self.params = params
        self.body = body
        logger.info(f"✅ Evaluation engine initialized: mu={params.mu}, lambda={params.lam}, gamma={params.gamma}")

    def evaluate(self, s: SystemState) -> DiagnosticsRow:
        grid = s.grid
        e, e_kin, e_pot, e_trans, e_rot = energy(s, self.params, self.body)
        return DiagnosticsRow(
            t=float(s.t),
            E=float(e),
            E_kin=float(e_kin),
            E_pot=float(e_pot),
            E_trans=float(e_trans),
            E_rot=float(e_rot),
            dissipation=dissipation(s, self.params),
            director_drift=director_drift(s),
            eq_residual=equilibrium_residual(s),
            l_norm=float(np.linalg.norm(s.rigid.l)),
            omega_norm=float(abs(s.rigid.omega)),
            h_norm=float(np.linalg.norm(s.rigid.h)),
            gap=gap(s),
            div_max=float(np.max(np.abs(flux_divergence(s.v, grid)))),
            p_mean=float(integrate(s.p, grid) / grid.area),
        )
