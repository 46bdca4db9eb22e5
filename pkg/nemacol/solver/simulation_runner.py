"""
simulation_runner.py

NEMATIC COLLOID SIMULATION - RUN ORCHESTRATION

PURPOSE:
========
Drives a CoupledSystem from t = 0 to T_end: validates the initial data,
records one diagnostics row per step, writes snapshots at the configured
cadence and flushes everything before an abort is propagated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from nemacol.diagnostics.evaluation_engine import DiagnosticsRow, mean_split
from nemacol.event_engine.event_bus import EventBus
from nemacol.nemacol_defs import TIMESERIES_COLUMNS, EventType, SimulationAbort, SimulationConstants
from nemacol.rigid.rigid_body import PrescribedMotion
from nemacol.solver.coupled_system import CoupledSystem, Forcing
from nemacol.solver.presets import InitialState, PresetFactory
from nemacol.solver.projection import PressureProjector
from nemacol.solver.scenario import Scenario
from nemacol.solver.system_state import SystemState
from nemacol.solver.validation import validate_initial
from nemacol.tools.data_logger import DataLogger

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Outcome of a completed run."""

    final_state: SystemState
    rows: List[DiagnosticsRow] = field(default_factory=list)
    snapshots: List[SystemState] = field(default_factory=list)

    @property
    def timeseries(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_flat_record() for row in self.rows], columns=TIMESERIES_COLUMNS)


class SimulationRunner:
    """Runs one scenario, optionally writing its outputs to a directory."""

    def __init__(
        self,
        scenario: Scenario,
        out_dir: Optional[Union[str, Path]] = None,
        initial: Optional[InitialState] = None,
        forcing: Optional[Forcing] = None,
        motion: Optional[PrescribedMotion] = None,
        validate: bool = True,
        keep_snapshots: bool = False,
    ):
        self.scenario = scenario
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.validate = validate
        self.keep_snapshots = keep_snapshots
        self.event_bus = EventBus()
        self.data_logger = DataLogger(self.out_dir) if self.out_dir is not None else None
        self.rows: List[DiagnosticsRow] = []
        self.snapshots: List[SystemState] = []

        if initial is None:
            projector = PressureProjector(scenario.annulus, scenario.solver.cg_tol, scenario.solver.cg_maxiter)
            initial = PresetFactory.create_initial_state(scenario, projector)
        self.initial = initial
        self.forcing = forcing
        self.motion = motion
        self.system: Optional[CoupledSystem] = None

        self.event_bus.subscribe(EventType.STEP_COMPLETED, self._on_step)
        self.event_bus.subscribe(EventType.SNAPSHOT_DUE, self._on_snapshot)

    def _on_step(self, row: DiagnosticsRow, state: SystemState) -> None:
        self.rows.append(row)
        if self.data_logger:
            self.data_logger.log(row)
        every = self.scenario.time.output_every
        if every and state.step_index % every == 0:
            self.event_bus.publish(EventType.SNAPSHOT_DUE, state=state)

    def _on_snapshot(self, state: SystemState) -> None:
        d_m, d_avg = mean_split(state.d, state.grid)
        logger.info(
            f"📸 Snapshot at step {state.step_index} (t = {state.t:.6g}): "
            f"mean director {np.round(d_avg, 8).tolist()}, max oscillation {float(np.max(np.abs(d_m))):.3e}"
        )
        if self.keep_snapshots:
            self.snapshots.append(state)
        if self.data_logger:
            self.data_logger.write_snapshot(state)

    def run(self) -> RunResult:
        """
        Advance the scenario to T_end.

        Returns:
            RunResult with the final state and the diagnostics rows

        Raises:
            InitialDataError: If the initial data violates a compatibility condition
            SimulationAbort: On gap violation, solver failure, non-finite values or instability
        """
        if self.validate:
            validate_initial(self.scenario, self.initial).raise_for_violations()

        self.system = CoupledSystem(
            self.scenario, initial=self.initial, forcing=self.forcing, motion=self.motion, event_bus=self.event_bus
        )
        self.event_bus.publish(EventType.STEP_COMPLETED, row=self.system.last_row, state=self.system.state)

        n_steps = self.scenario.n_steps
        logger.info(f"🚀 Running {n_steps} steps to T_end = {self.scenario.time.T_end}")
        try:
            for _ in range(n_steps):
                self.system.step()
        except SimulationAbort as e:
            last = self.system.state
            logger.error(f"❌ Run aborted: {e} (last completed step {last.step_index}, t = {last.t:.6g})")
            self.event_bus.publish(EventType.RUN_ABORTED, state=last, error=e)
            self._finalize(last)
            raise

        final = self.system.state
        self._finalize(final)
        self.event_bus.publish(EventType.RUN_FINISHED, state=final)
        logger.info(
            f"✅ Run finished at t = {final.t:.6g} after {final.step_index} steps, "
            f"{self.event_bus.published(EventType.SNAPSHOT_DUE)} snapshots"
        )
        return RunResult(final_state=final, rows=self.rows, snapshots=self.snapshots)

    def _finalize(self, state: SystemState) -> None:
        if not self.data_logger:
            return
        self.data_logger.save_to_file()
        self.data_logger.write_snapshot(state, SimulationConstants.FINAL_SNAPSHOT_FILE)


def run(scenario: Scenario, out_dir: Optional[Union[str, Path]] = None, **kwargs) -> RunResult:
    """Run a scenario to T_end; see SimulationRunner for the keyword options."""
    return SimulationRunner(scenario, out_dir=out_dir, **kwargs).run()
