"""
manufactured.py

NEMATIC COLLOID SIMULATION - MANUFACTURED SOLUTIONS

PURPOSE:
========
Runs the coupled solver against closed-form space-time solutions with the
particle held at rest, so the flow map stays the identity. The residual of
the chosen solution is injected as a body source in the velocity and
director equations:

    f_v = du/dt + (grad u) u - mu Lap u + lam div(grad d grad d^T)
    f_d = dd/dt + (grad d) u - (lam/gamma) (Lap d + |grad d|^2 d)

with zero exact pressure. The error against the exact fields at T_end is
measured over several grids (spatial order) or several time steps (temporal
order).

Solutions:
    swirl_relax  - time-periodic azimuthal swirl a(t) w(r) e_theta vanishing
                   on both circles, and a relaxing unit director
                   (sin phi, 0, cos phi), phi = eps exp(-t) s(r) cos(theta)
                   with s'(R_S) = s'(R_O) = 0
    equilibrium  - u = 0, d = d*; zero sources
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from nemacol.nemacol_defs import SimulationConstants
from nemacol.operators.stress import PhysicalParams
from nemacol.oracle.catalog import (
    AnalyticField,
    ScalarProfile,
    compose,
    cos_k,
    neumann_ramp,
    polar_product,
    quadratic,
    radial_window,
    sin_k,
)
from nemacol.rigid.rigid_body import PrescribedMotion, RigidState2D
from nemacol.solver.coupled_system import Forcing
from nemacol.solver.presets import InitialState
from nemacol.solver.scenario import Scenario, TimeConfig
from nemacol.solver.simulation_runner import run
from nemacol.transform.flow_map import TransformField

logger = logging.getLogger(__name__)

DEFAULT_GRIDS: Tuple[Tuple[int, int], ...] = ((16, 32), (32, 64))
DEFAULT_DT = 1e-4
DEFAULT_T_END = 0.05


@dataclass(frozen=True)
class SwirlRelaxSolution:
    """Closed-form azimuthal swirl with a relaxing director on the annulus."""

    R_S: float
    R_O: float
    swirl: float = 0.1
    frequency: float = 2.0 * math.pi
    twist: float = 0.2
    decay: float = 1.0

    @cached_property
    def swirl_profile(self) -> AnalyticField:
        """Unit-amplitude w(r) e_theta."""
        window = radial_window(self.R_S, self.R_O)
        window = window / float(window(0.5 * (self.R_S + self.R_O)))
        return AnalyticField(
            name="swirl",
            kind="vector",
            components=(polar_product(window, sin_k(), -1.0), polar_product(window, cos_k())),
        )

    def amplitude(self, t: float) -> float:
        return self.swirl * math.cos(self.frequency * t)

    def amplitude_rate(self, t: float) -> float:
        return -self.swirl * self.frequency * math.sin(self.frequency * t)

    def tilt(self, t: float) -> float:
        return self.twist * math.exp(-self.decay * t)

    def phase(self, t: float) -> ScalarProfile:
        return polar_product(neumann_ramp(self.R_S, self.R_O), cos_k(), self.tilt(t))

    def director_field(self, t: float) -> AnalyticField:
        phase = self.phase(t)
        return AnalyticField(
            name="relaxing_director",
            kind="director",
            components=(compose(sin_k(), phase), quadratic(), compose(cos_k(), phase)),
        )

    def velocity(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.amplitude(t) * self.swirl_profile.value(x)

    def director(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.director_field(t).value(x)

    def velocity_source(self, t: float, x: np.ndarray, params: PhysicalParams) -> np.ndarray:
        U = self.swirl_profile
        a = self.amplitude(t)
        u = U.value(x)
        convective = a**2 * np.einsum("ij...,j...->i...", U.gradient(x), u)
        return (
            self.amplitude_rate(t) * u
            + convective
            - params.mu * a * U.laplacian(x)
            + params.lam * self.director_field(t).ericksen_force(x)
        )

    def director_source(self, t: float, x: np.ndarray, params: PhysicalParams) -> np.ndarray:
        D = self.director_field(t)
        d, grad_d = D.value(x), D.gradient(x)
        phi = self.phase(t).f(x)
        d_dt = -self.decay * phi * np.stack([np.cos(phi), np.zeros_like(phi), -np.sin(phi)])
        transport = np.einsum("lj...,j...->l...", grad_d, self.velocity(t, x))
        norm2 = np.sum(grad_d**2, axis=(0, 1))
        kappa = params.lam / params.gamma
        return d_dt + transport - kappa * (D.laplacian(x) + norm2 * d)


def equilibrium_solution(R_S: float, R_O: float) -> SwirlRelaxSolution:
    return SwirlRelaxSolution(R_S=R_S, R_O=R_O, swirl=0.0, twist=0.0)


SOLUTIONS = {
    "swirl_relax": SwirlRelaxSolution,
    "equilibrium": equilibrium_solution,
}


def make_solution(name: str, scenario: Scenario) -> SwirlRelaxSolution:
    if name not in SOLUTIONS:
        raise ValueError(f"Unknown manufactured solution: {name} (known: {', '.join(SOLUTIONS)})")
    return SOLUTIONS[name](scenario.geometry.R_S, scenario.geometry.R_O)


def forcing_for(solution: SwirlRelaxSolution, params: PhysicalParams) -> Forcing:
    """Sources in reference components, evaluated at the mapped nodes."""

    def velocity(t: float, T: TransformField) -> np.ndarray:
        return np.einsum("ij...,j...->i...", T.JY, solution.velocity_source(t, T.X, params))

    def director(t: float, T: TransformField) -> np.ndarray:
        return solution.director_source(t, T.X, params)

    return Forcing(velocity=velocity, director=director)


@dataclass
class ManufacturedReport:
    """Errors against the exact solution at T_end, one row per run."""

    solution: str
    rows: List[Dict[str, float]] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def observed_order(self, error: str = "v_error", by: str = "h") -> float:
        """Order between the last two rows."""
        if len(self.rows) < 2:
            return float("nan")
        a, b = self.rows[-2], self.rows[-1]
        if a[error] <= 0.0 or b[error] <= 0.0:
            return float("nan")
        return math.log(a[error] / b[error]) / math.log(a[by] / b[by])


def _solve(scenario: Scenario, solution: SwirlRelaxSolution) -> Dict[str, float]:
    grid = scenario.annulus
    x = grid.points
    initial = InitialState(
        v=solution.velocity(0.0, x),
        p=np.zeros(grid.shape),
        d=solution.director(0.0, x),
        rigid=RigidState2D(),
    )
    # the Neumann condition of the exact director holds only to truncation error on the grid
    result = run(
        scenario,
        initial=initial,
        forcing=forcing_for(solution, scenario.params),
        motion=PrescribedMotion.at_rest(),
        validate=False,
    )
    final = result.final_state
    v_error = float(np.max(np.abs(final.v - solution.velocity(final.t, x))))
    d_error = float(np.max(np.abs(final.d - solution.director(final.t, x))))
    logger.info(
        f"🧪 Manufactured run {grid.N_r}x{grid.N_theta}, dt={scenario.dt:g}: "
        f"|v - u| = {v_error:.3e}, |d - d_exact| = {d_error:.3e}"
    )
    return {"h": grid.dr, "dt": scenario.dt, "t": final.t, "v_error": v_error, "d_error": d_error}


def _timed(scenario: Scenario, dt: float, T_end: float) -> Scenario:
    return replace(scenario, time=TimeConfig(dt=dt, T_end=T_end, output_every=0))


def manufactured_run(
    scenario: Scenario,
    solution: str = "swirl_relax",
    grids: Sequence[Tuple[int, int]] = DEFAULT_GRIDS,
    dt: float = DEFAULT_DT,
    T_end: float = DEFAULT_T_END,
) -> ManufacturedReport:
    """
    Spatial convergence against a manufactured solution at fixed time step.

    Args:
        scenario: Base scenario (geometry, physics and solver settings are kept)
        solution: Name in SOLUTIONS
        grids: (N_r, N_theta) pairs, coarse to fine
        dt: Time step shared by all grids
        T_end: Final time

    Returns:
        ManufacturedReport with one row per grid
    """
    exact = make_solution(solution, scenario)
    report = ManufacturedReport(solution=solution)
    for N_r, N_theta in grids:
        report.rows.append(_solve(_timed(scenario.with_grid(N_r, N_theta), dt, T_end), exact))
    return report


def temporal_refinement(
    scenario: Scenario,
    solution: str = "swirl_relax",
    grid: Tuple[int, int] = DEFAULT_GRIDS[-1],
    dts: Sequence[float] = (4e-4, 2e-4),
    T_end: Optional[float] = DEFAULT_T_END,
) -> ManufacturedReport:
    """Time-step convergence against a manufactured solution on one grid."""
    exact = make_solution(solution, scenario)
    report = ManufacturedReport(solution=solution)
    base = scenario.with_grid(*grid)
    for dt in dts:
        report.rows.append(_solve(_timed(base, dt, T_end or SimulationConstants.DEFAULT_T_END), exact))
    return report
