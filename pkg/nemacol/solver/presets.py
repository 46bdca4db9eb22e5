"""
presets.py

Built-in initial data and the factory that selects them.

Every preset satisfies the compatibility conditions by construction:
velocity perturbations are compactly supported inside the annulus and the
rigid part is the lift b at the identity pose, so the traces on both circles
are exact; the sum is then discretely projected. Director perturbations
rotate d* towards a fixed orthogonal direction, keeping |d| = 1 and leaving
the boundary rows constant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from nemacol.grid.annulus import AnnulusGrid, grad
from nemacol.nemacol_defs import Preset
from nemacol.rigid.rigid_body import RigidState2D
from nemacol.solver.projection import PressureProjector
from nemacol.solver.scenario import Scenario
from nemacol.tools.data_logger import read_snapshot
from nemacol.transform.cutoff import smoothstep
from nemacol.transform.flow_map import identity_transform
from nemacol.transform.lift import build_b

logger = logging.getLogger(__name__)

SWIRL_SCALE = 0.1


@dataclass
class InitialState:
    v: np.ndarray
    p: np.ndarray
    d: np.ndarray
    rigid: RigidState2D


def radial_bump(grid: AnnulusGrid, lo: float = 0.2, hi: float = 0.8, ramp: float = 0.25) -> np.ndarray:
    """Smooth bump in the normalized radius, identically zero near both circles."""
    xi = (grid.R - grid.R_S) / (grid.R_O - grid.R_S)
    rise = smoothstep((xi - lo) / ramp)[0]
    fall = smoothstep((hi - xi) / ramp)[0]
    return rise * fall


def swirl_velocity(grid: AnnulusGrid, amplitude: float) -> np.ndarray:
    """Perpendicular gradient of a compact stream function."""
    psi = amplitude * SWIRL_SCALE * (grid.R_O - grid.R_S) * radial_bump(grid) * (1.0 + 0.5 * np.cos(2.0 * grid.theta))
    gx, gy = grad(psi, grid)
    return np.stack([gy, -gx])


def orthogonal_direction(d_star: np.ndarray) -> np.ndarray:
    axis = np.eye(3)[int(np.argmin(np.abs(d_star)))]
    e1 = np.cross(d_star, axis)
    return e1 / np.linalg.norm(e1)


def director_twist(grid: AnnulusGrid, d_star: np.ndarray, amplitude: float) -> np.ndarray:
    """Unit director rotated from d* by an angle amplitude * bump * cos(theta)."""
    phi = amplitude * radial_bump(grid) * grid.cos
    e1 = orthogonal_direction(d_star)
    return np.cos(phi)[None] * d_star[:, None, None] + np.sin(phi)[None] * e1[:, None, None]


def rigid_lift_velocity(scenario: Scenario, rigid: RigidState2D) -> np.ndarray:
    grid = scenario.annulus
    lift = build_b(rigid, scenario.cutoff, grid.R_S)
    return lift.velocity(grid.points)


class PresetFactory:
    """Factory for the initial state of a scenario."""

    @staticmethod
    def initial_rigid(scenario: Scenario) -> RigidState2D:
        cfg = scenario.initial
        delta = cfg.amplitude
        moving = cfg.preset_kind in (Preset.SMALL_DATA, Preset.RIGID_LIFT) and cfg.snapshot is None
        l0 = cfg.l0 if cfg.l0 is not None else ([delta, 0.0] if moving else [0.0, 0.0])
        omega0 = cfg.omega0 if cfg.omega0 is not None else (delta if moving else 0.0)
        return RigidState2D(l=np.asarray(l0, dtype=float), omega=omega0)

    @staticmethod
    def create_initial_state(scenario: Scenario, projector: Optional[PressureProjector] = None) -> InitialState:
        """
        Build the t = 0 state of the scenario.

        Args:
            scenario: Resolved scenario
            projector: Projector on the scenario grid (built when omitted)

        Returns:
            InitialState with v, p, d and the rigid state

        Raises:
            ValueError: If the preset name is unknown
        """
        grid = scenario.annulus
        cfg = scenario.initial
        d_star = scenario.d_star
        rigid = PresetFactory.initial_rigid(scenario)

        if cfg.snapshot:
            fields = read_snapshot(cfg.snapshot, grid)
            logger.info(f"✅ Initial fields read from snapshot {cfg.snapshot}")
            return InitialState(v=fields["v"], p=fields["p"], d=fields["d"], rigid=rigid)

        kind = cfg.preset_kind
        delta = cfg.amplitude
        if kind is Preset.EQUILIBRIUM:
            v = np.zeros((2,) + grid.shape)
            d = np.broadcast_to(d_star[:, None, None], (3,) + grid.shape).copy()
        elif kind in (Preset.SMALL_SWIRL, Preset.SMALL_DATA):
            v = swirl_velocity(grid, delta)
            d = director_twist(grid, d_star, delta)
        elif kind is Preset.RIGID_LIFT:
            v = np.zeros((2,) + grid.shape)
            d = np.broadcast_to(d_star[:, None, None], (3,) + grid.shape).copy()
        else:
            raise ValueError(f"Unknown preset: {kind}")

        v = v + rigid_lift_velocity(scenario, rigid)
        p = np.zeros(grid.shape)
        if np.any(v):
            projector = projector or PressureProjector(grid, scenario.solver.cg_tol, scenario.solver.cg_maxiter)
            identity = identity_transform(grid, scenario.cutoff)
            v = projector.project(v, identity, dt=1.0, p=p).v
            p = np.zeros(grid.shape)
        logger.info(f"✅ Initial state built from preset '{kind.value}' (amplitude {delta})")
        return InitialState(v=v, p=p, d=d, rigid=rigid)
