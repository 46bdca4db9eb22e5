"""
validation.py

Compatibility checks on initial data: the velocity must be discretely
divergence free, vanish on the outer circle and match the rigid velocity on
the inner circle; the director must be a unit field with zero normal
derivative on both circles.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from nemacol.grid.annulus import AnnulusGrid, flux_divergence, normal_derivative, perp
from nemacol.nemacol_defs import Boundary, InitialDataError
from nemacol.solver.presets import InitialState, PresetFactory
from nemacol.solver.scenario import Scenario

logger = logging.getLogger(__name__)

CONDITIONS = ("divergence", "outer_trace", "interface", "director_neumann", "director_unit")


@dataclass
class ValidationReport:
    """Per-condition residuals of an initial datum."""

    tolerance: float
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def violations(self) -> List[str]:
        return [name for name in CONDITIONS if self.residuals.get(name, 0.0) > self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.violations

    def raise_for_violations(self) -> None:
        if not self.passed:
            details = ", ".join(f"{name} ({self.residuals[name]:.2e})" for name in self.violations)
            raise InitialDataError(self.violations, f"initial data violates: {details} > tol {self.tolerance:.1e}")

    def to_dict(self) -> Dict[str, float]:
        return dict(self.residuals)


def compatibility_residuals(state: InitialState, grid: AnnulusGrid) -> Dict[str, float]:
    v, d, rigid = state.v, state.d, state.rigid
    inner = grid.circle_points(Boundary.INNER)
    interface = rigid.l[:, None] + rigid.omega * perp(inner)
    neumann = max(float(np.max(np.abs(normal_derivative(d, grid, b)))) for b in Boundary)
    return {
        "divergence": float(np.max(np.abs(flux_divergence(v, grid)))),
        "outer_trace": float(np.max(np.abs(v[:, -1, :]))),
        "interface": float(np.max(np.abs(v[:, 0, :] - interface))),
        "director_neumann": neumann,
        "director_unit": float(np.max(np.abs(np.linalg.norm(d, axis=0) - 1.0))),
    }


def validate_initial(scenario: Scenario, state: Optional[InitialState] = None) -> ValidationReport:
    """Check the compatibility conditions of the scenario's initial data."""
    grid = scenario.annulus
    state = state or PresetFactory.create_initial_state(scenario)
    report = ValidationReport(tolerance=scenario.solver.validation_tol)
    report.residuals = compatibility_residuals(state, grid)
    if report.passed:
        logger.info("✅ Initial data satisfies all compatibility conditions")
    else:
        logger.warning(f"⚠️ Initial data violates: {', '.join(report.violations)}")
    return report
