"""
nemacol_defs.py

NEMATIC COLLOID SIMULATION - MASTER DEFINITIONS

PURPOSE:
========
Centralized enums, constants and exception types used across the simulator.
Single source of truth for names shared by the solver, the diagnostics and the runner.
"""

from enum import Enum


# =============================================================================
# EVENT BUS EVENT TYPES
# =============================================================================


class EventType(Enum):
    """Standard event types published on the event bus."""

    STEP_COMPLETED = "step_completed"
    SNAPSHOT_DUE = "snapshot_due"
    RUN_ABORTED = "run_aborted"
    RUN_FINISHED = "run_finished"


class Boundary(Enum):
    """The two circles bounding the reference annulus."""

    INNER = "inner"
    OUTER = "outer"


class BoundaryKind(Enum):
    """Boundary rows of the implicit radial solves."""

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


class Preset(Enum):
    """Built-in initial data."""

    EQUILIBRIUM = "equilibrium"
    SMALL_SWIRL = "small_swirl"
    SMALL_DATA = "small_data"
    RIGID_LIFT = "rigid_lift"


class OperatorId(Enum):
    """Operators known to the verification oracle."""

    GRAD = "grad"
    DIV = "div"
    LAPLACIAN = "laplacian"
    BPHYS = "bphys"
    L1 = "L1"
    L2 = "L2"
    G = "G"
    B = "B"
    N = "N"


# =============================================================================
# SIMULATION CONSTANTS
# =============================================================================


class SimulationConstants:
    """Global simulation constants."""

    # Reference desk setup
    DEFAULT_R_O = 1.0
    DEFAULT_R_S = 0.25
    DEFAULT_CUTOFF_DISTANCE = 0.3
    DEFAULT_N_R = 64
    DEFAULT_N_THETA = 128
    DEFAULT_DT = 2e-4
    DEFAULT_T_END = 2.0
    DEFAULT_OUTPUT_EVERY = 500

    # Grid limits
    MIN_N_R = 8
    MIN_N_THETA = 16

    # Tolerances
    UNIT_TOLERANCE = 1e-8
    ORTHOGONALITY_TOLERANCE = 1e-8
    PRESSURE_MEAN_TOLERANCE = 1e-12

    # Decay fit
    DEFAULT_TAIL_FRACTION = 0.5

    # Output
    TIMESERIES_FILE = "timeseries.csv"
    RESOLVED_SCENARIO_FILE = "scenario.resolved.json"
    RUN_LOG_FILE = "run.log"
    FINAL_SNAPSHOT_FILE = "final_state.csv"

    THREADS_ENV_VAR = "NEMACOL_THREADS"


TIMESERIES_COLUMNS = [
    "t",
    "E",
    "E_kin",
    "E_pot",
    "E_trans",
    "E_rot",
    "dissipation",
    "director_drift",
    "eq_residual",
    "l_norm",
    "omega_norm",
    "h_norm",
    "gap",
    "div_max",
    "p_mean",
]

SNAPSHOT_COLUMNS = ["r", "theta", "ux", "uy", "p", "d1", "d2", "d3"]

CONVERGENCE_COLUMNS = ["h", "op", "max_error", "observed_order"]


# =============================================================================
# EXIT CODES
# =============================================================================


class ExitCode:
    OK = 0
    VALIDATION_FAILURE = 1
    RUNTIME_ABORT = 2


# =============================================================================
# EXCEPTIONS
# =============================================================================


class ScenarioError(ValueError):
    """Scenario file violates the schema or a scenario invariant."""


class InitialDataError(ValueError):
    """Initial data violates a compatibility condition."""

    def __init__(self, conditions, message: str = ""):
        self.conditions = list(conditions)
        super().__init__(message or f"initial data rejected: {', '.join(self.conditions)}")


class SimulationAbort(RuntimeError):
    """A run cannot continue; partial outputs are flushed by the runner."""


class GapViolationError(SimulationAbort):
    """The particle entered the transition zone of the cutoff."""


class ConvergenceError(SimulationAbort):
    """An iterative solve exhausted its iteration budget."""


class NonFiniteStateError(SimulationAbort):
    """A field picked up NaN or Inf values."""


class StabilityError(SimulationAbort):
    """The explicit terms violate the configured CFL estimate."""
