"""
scenario.py

NEMATIC COLLOID SIMULATION - SCENARIO CONFIGURATION

PURPOSE:
========
Typed configuration of one run. Each JSON section maps onto a dataclass whose
__post_init__ re-checks the invariants of that section; cross-section
invariants are checked by Scenario itself. Errors name the offending section
and key, or quote the violated condition.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from nemacol.grid.annulus import AnnulusGrid
from nemacol.nemacol_defs import Preset, ScenarioError, SimulationConstants
from nemacol.operators.stress import PhysicalParams
from nemacol.rigid.rigid_body import RigidBody
from nemacol.transform.cutoff import CutoffSpec

logger = logging.getLogger(__name__)

RIGID_INTEGRATORS = ("rk2", "rk4")


@dataclass
class GeometryConfig:
    R_O: float = SimulationConstants.DEFAULT_R_O
    R_S: float = SimulationConstants.DEFAULT_R_S
    r: float = SimulationConstants.DEFAULT_CUTOFF_DISTANCE

    def __post_init__(self):
        """Validate geometry configuration."""
        if not 0.0 < self.R_S < self.R_O:
            raise ScenarioError(f"geometry: requires 0 < R_S < R_O (R_S = {self.R_S}, R_O = {self.R_O})")
        if not self.r > 0.0:
            raise ScenarioError(f"geometry.r: requires r > 0 (r = {self.r})")
        if not self.R_O - self.R_S > self.r:
            raise ScenarioError(
                f"geometry: requires dist(S0,∂O) > r (R_O - R_S = {self.R_O - self.R_S}, r = {self.r})"
            )


@dataclass
class PhysicsConfig:
    mu: float = 1.0
    lam: float = 1.0
    gamma: float = 1.0
    d_star: Tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        """Validate physical constants and the equilibrium director."""
        for key, value in (("mu", self.mu), ("lambda", self.lam), ("gamma", self.gamma)):
            if not value > 0.0:
                raise ScenarioError(f"physics.{key}: requires {key} > 0 (got {value})")
        d_star = np.asarray(self.d_star, dtype=float)
        if d_star.shape != (3,):
            raise ScenarioError(f"physics.d_star: expected a 3-vector, got {list(self.d_star)}")
        if abs(np.linalg.norm(d_star) - 1.0) > 1e-12:
            raise ScenarioError(f"physics.d_star: requires |d*| = 1 (|d*| = {np.linalg.norm(d_star):.6g})")
        self.d_star = tuple(float(c) for c in d_star)


@dataclass
class GridConfig:
    N_r: int = SimulationConstants.DEFAULT_N_R
    N_theta: int = SimulationConstants.DEFAULT_N_THETA

    def __post_init__(self):
        """Validate grid sizes."""
        if self.N_r < SimulationConstants.MIN_N_R:
            raise ScenarioError(f"grid.N_r: requires N_r >= {SimulationConstants.MIN_N_R} (got {self.N_r})")
        if self.N_theta < SimulationConstants.MIN_N_THETA or self.N_theta % 2:
            raise ScenarioError(
                f"grid.N_theta: requires an even N_theta >= {SimulationConstants.MIN_N_THETA} (got {self.N_theta})"
            )


@dataclass
class TimeConfig:
    dt: float = SimulationConstants.DEFAULT_DT
    T_end: float = SimulationConstants.DEFAULT_T_END
    output_every: int = SimulationConstants.DEFAULT_OUTPUT_EVERY

    def __post_init__(self):
        """Validate time stepping."""
        if not self.dt > 0.0:
            raise ScenarioError(f"time.dt: requires dt > 0 (got {self.dt})")
        if not self.T_end > 0.0:
            raise ScenarioError(f"time.T_end: requires T_end > 0 (got {self.T_end})")
        if self.output_every < 0:
            raise ScenarioError(f"time.output_every: must be non-negative (got {self.output_every})")

    @property
    def n_steps(self) -> int:
        return int(round(self.T_end / self.dt))


@dataclass
class InitialConfig:
    preset: str = Preset.EQUILIBRIUM.value
    amplitude: float = 1e-2
    l0: Optional[List[float]] = None
    omega0: Optional[float] = None
    snapshot: Optional[str] = None

    def __post_init__(self):
        """Validate initial data selection."""
        known = [p.value for p in Preset]
        if self.preset not in known:
            raise ScenarioError(f"initial.preset: unknown preset '{self.preset}' (known: {', '.join(known)})")
        if self.amplitude < 0.0:
            raise ScenarioError(f"initial.amplitude: must be non-negative (got {self.amplitude})")
        if self.l0 is not None:
            if len(self.l0) != 2:
                raise ScenarioError(f"initial.l0: expected a 2-vector, got {self.l0}")
            self.l0 = [float(c) for c in self.l0]

    @property
    def preset_kind(self) -> Preset:
        return Preset(self.preset)


@dataclass
class SolverConfig:
    subiterations: int = 2
    relaxation: Optional[float] = None
    rigid_integrator: str = "rk2"
    cg_tol: float = 1e-10
    cg_maxiter: int = 500
    newton_tol: float = 1e-12
    newton_maxiter: int = 8
    inversion_every: int = 1
    validation_tol: float = 1e-8
    volume_tol: float = 1e-6
    cfl_safety: float = 0.5
    renormalize_director: bool = False

    def __post_init__(self):
        """Validate solver controls."""
        if self.subiterations < 1:
            raise ScenarioError(f"solver.subiterations: requires at least 1 (got {self.subiterations})")
        if self.relaxation is not None and not 0.0 < self.relaxation <= 1.0:
            raise ScenarioError(f"solver.relaxation: requires 0 < relaxation <= 1 (got {self.relaxation})")
        if self.rigid_integrator not in RIGID_INTEGRATORS:
            raise ScenarioError(
                f"solver.rigid_integrator: unknown integrator '{self.rigid_integrator}' "
                f"(known: {', '.join(RIGID_INTEGRATORS)})"
            )
        for key in ("cg_tol", "newton_tol", "validation_tol", "volume_tol", "cfl_safety"):
            if not getattr(self, key) > 0.0:
                raise ScenarioError(f"solver.{key}: must be positive (got {getattr(self, key)})")
        for key in ("cg_maxiter", "newton_maxiter", "inversion_every"):
            if getattr(self, key) < 1:
                raise ScenarioError(f"solver.{key}: must be at least 1 (got {getattr(self, key)})")


@dataclass
class Scenario:
    """A fully resolved run description."""

    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    source: Optional[str] = None

    @cached_property
    def annulus(self) -> AnnulusGrid:
        return AnnulusGrid(self.geometry.R_S, self.geometry.R_O, self.grid.N_r, self.grid.N_theta)

    @cached_property
    def cutoff(self) -> CutoffSpec:
        return CutoffSpec(r=self.geometry.r, R_O=self.geometry.R_O)

    @cached_property
    def params(self) -> PhysicalParams:
        return PhysicalParams(mu=self.physics.mu, lam=self.physics.lam, gamma=self.physics.gamma)

    @cached_property
    def body(self) -> RigidBody:
        return RigidBody.disk(self.geometry.R_S)

    @property
    def d_star(self) -> np.ndarray:
        return np.asarray(self.physics.d_star, dtype=float)

    @property
    def dt(self) -> float:
        return self.time.dt

    @property
    def n_steps(self) -> int:
        return self.time.n_steps

    def with_grid(self, N_r: int, N_theta: int, dt: Optional[float] = None) -> "Scenario":
        """Copy of the scenario on another grid, optionally with another time step."""
        time = TimeConfig(dt=dt or self.time.dt, T_end=self.time.T_end, output_every=self.time.output_every)
        return Scenario(
            geometry=self.geometry,
            physics=self.physics,
            grid=GridConfig(N_r=N_r, N_theta=N_theta),
            time=time,
            initial=self.initial,
            solver=self.solver,
            source=self.source,
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready form using the file keys."""
        physics = asdict(self.physics)
        physics["lambda"] = physics.pop("lam")
        physics["d_star"] = list(self.physics.d_star)
        return {
            "geometry": asdict(self.geometry),
            "physics": {k: physics[k] for k in ("mu", "lambda", "gamma", "d_star")},
            "grid": asdict(self.grid),
            "time": asdict(self.time),
            "initial": asdict(self.initial),
            "solver": asdict(self.solver),
        }
