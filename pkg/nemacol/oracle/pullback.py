"""
pullback.py

NEMATIC COLLOID SIMULATION - OPERATOR VERIFICATION

PURPOSE:
========
Brute-force references for the discrete operators:

- fd_check: grid operators (grad, div, Laplacian, Bphys) against the exact
  derivatives of a catalog field
- pullback_check: transformed operators applied to pulled-back fields
  against the physical operator evaluated at X(t, y)
- moving_frame_check: the time-derivative correction Mop against a centred
  time difference of a pulled-back stationary field

Pulled-back fields follow the change of variables
    v(y) = J_Y u(X(y)),   d(y) = d(X(y)),   p(y) = pi(X(y)).

Errors are maximum norms over the deep interior (two radial rows away from
both circles). Convergence tables carry the columns h, op, max_error,
observed_order, with h the radial spacing.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from nemacol.grid.annulus import AnnulusGrid, div, grad, laplacian
from nemacol.nemacol_defs import CONVERGENCE_COLUMNS, OperatorId, SimulationConstants
from nemacol.operators.transformed_operators import L1, L2, Bop, Bphys, Gop, Mop, Nop
from nemacol.oracle.catalog import AnalyticField, catalog_entry
from nemacol.rigid.rigid_body import PrescribedMotion, RigidState2D
from nemacol.transform.cutoff import CutoffSpec
from nemacol.transform.flow_map import TransformField, advance_flow, identity_transform

logger = logging.getLogger(__name__)

GridSize = Tuple[int, int]

DEFAULT_GRIDS: Tuple[GridSize, ...] = ((32, 64), (64, 128), (128, 256))
GENERIC_MOTION = PrescribedMotion.constant(l=(0.08, -0.05), omega=0.3)
DEFAULT_TIME = 0.5
FLOW_STEP = 0.02
DEEP_ROWS = 2

# Default catalog field per transformed operator
PULLBACK_FIELDS: Dict[OperatorId, str] = {
    OperatorId.L1: "taylor_green",
    OperatorId.L2: "twist",
    OperatorId.G: "cos_x",
    OperatorId.B: "unit_twist",
    OperatorId.N: "taylor_green",
}

# Default catalog field per grid operator
FD_FIELDS: Dict[OperatorId, str] = {
    OperatorId.GRAD: "sin_x_cos_y",
    OperatorId.DIV: "taylor_green",
    OperatorId.LAPLACIAN: "sin_x_sin_y",
    OperatorId.BPHYS: "unit_twist",
}

# Grid operator a transformed operator reduces to under the identity map
FLAT_COUNTERPART: Dict[OperatorId, OperatorId] = {
    OperatorId.L1: OperatorId.LAPLACIAN,
    OperatorId.L2: OperatorId.LAPLACIAN,
    OperatorId.G: OperatorId.GRAD,
    OperatorId.B: OperatorId.BPHYS,
}


def _as_operator(op: Union[OperatorId, str]) -> OperatorId:
    if isinstance(op, OperatorId):
        return op
    try:
        return OperatorId(op)
    except ValueError:
        raise ValueError(f"Unknown operator: {op} (known: {', '.join(o.value for o in OperatorId)})") from None


def _as_field(field: Union[AnalyticField, str]) -> AnalyticField:
    return field if isinstance(field, AnalyticField) else catalog_entry(field)


def _max_error(numeric: np.ndarray, exact: np.ndarray, grid: AnnulusGrid, rows: int = DEEP_ROWS) -> float:
    mask = grid.deep_interior_mask(rows)
    return float(np.max(np.abs(numeric - exact)[..., mask]))


def reference_grid(N_r: int, N_theta: int, R_S: float = None, R_O: float = None) -> AnnulusGrid:
    return AnnulusGrid(
        R_S=SimulationConstants.DEFAULT_R_S if R_S is None else R_S,
        R_O=SimulationConstants.DEFAULT_R_O if R_O is None else R_O,
        N_r=N_r,
        N_theta=N_theta,
    )


def reference_cutoff(grid: AnnulusGrid, r: float = None) -> CutoffSpec:
    return CutoffSpec(r=SimulationConstants.DEFAULT_CUTOFF_DISTANCE if r is None else r, R_O=grid.R_O)


def build_transform(
    grid: AnnulusGrid,
    spec: CutoffSpec,
    motion: PrescribedMotion,
    t: float,
    n_steps: Optional[int] = None,
) -> TransformField:
    """Flow map at time t for the particle moving with the prescribed velocities.

    The inverse map is recovered once, at the final step.
    """
    l0, omega0 = motion(0.0)
    T = identity_transform(grid, spec, RigidState2D(l=l0, omega=omega0))
    if t <= 0.0:
        return T
    n = n_steps or max(1, math.ceil(t / FLOW_STEP))
    dt = t / n
    for k in range(n):
        l, omega = motion((k + 0.5) * dt)
        s = RigidState2D(h=T.pose.h, theta_b=T.pose.theta_b, l=l, omega=omega)
        T = advance_flow(T, s, dt, invert=k == n - 1)
    return T


# =============================================================================
# EXACT REFERENCES
# =============================================================================


def _pullback_pair(op: OperatorId, field: AnalyticField, T: TransformField):
    """(discrete operator output, exact pulled-back physical output) on T."""
    X = T.X
    if op is OperatorId.L1:
        _require_kind(field, "vector", op)
        v = np.einsum("ij...,j...->i...", T.JY, field.value(X))
        return L1(v, T), np.einsum("ij...,j...->i...", T.JY, field.laplacian(X))
    if op is OperatorId.L2:
        _require_kind(field, "director", op)
        return L2(field.value(X), T), field.laplacian(X)
    if op is OperatorId.G:
        _require_kind(field, "scalar", op)
        return Gop(field.value(X), T), np.einsum("ij...,j...->i...", T.JY, field.gradient(X))
    if op is OperatorId.B:
        _require_kind(field, "director", op)
        d = field.value(X)
        return Bop(d, d, T), field.ericksen_force(X)
    if op is OperatorId.N:
        return convective_pair(field, T)
    raise ValueError(f"Unknown transformed operator: {op.value}")


def _require_kind(field: AnalyticField, kind: str, op: OperatorId) -> None:
    if field.kind != kind:
        raise ValueError(f"operator {op.value} needs a {kind} field, '{field.name}' is a {field.kind}")


def convective_pair(field: AnalyticField, T: TransformField):
    """Nop on a pulled-back vector field against J_Y (u . grad) u at X."""
    _require_kind(field, "vector", OperatorId.N)
    X = T.X
    u = field.value(X)
    v = np.einsum("ij...,j...->i...", T.JY, u)
    exact = np.einsum("ij...,j...->i...", T.JY, np.einsum("kj...,j...->k...", field.gradient(X), u))
    return Nop(v, T), exact


# =============================================================================
# CHECKS
# =============================================================================


def fd_check(op: Union[OperatorId, str], field: Union[AnalyticField, str], grid: AnnulusGrid) -> float:
    """Max deep-interior error of a grid operator on a catalog field."""
    op, field = _as_operator(op), _as_field(field)
    x = grid.points
    if op is OperatorId.GRAD:
        numeric, exact = grad(field.value(x), grid), field.gradient(x)
    elif op is OperatorId.DIV:
        numeric, exact = div(field.value(x), grid), field.divergence(x)
    elif op is OperatorId.LAPLACIAN:
        numeric, exact = laplacian(field.value(x), grid), field.laplacian(x)
    elif op is OperatorId.BPHYS:
        _require_kind(field, "director", op)
        d = field.value(x)
        numeric, exact = Bphys(d, d, grid), field.ericksen_force(x)
    else:
        raise ValueError(f"Unknown grid operator: {op.value}")
    return _max_error(numeric, exact, grid)


def observed_orders(rows: List[Dict]) -> List[Dict]:
    """Fill observed_order between consecutive rows of one operator."""
    for prev, row in zip(rows, rows[1:]):
        e0, e1 = prev["max_error"], row["max_error"]
        if e0 > 0.0 and e1 > 0.0:
            row["observed_order"] = math.log(e0 / e1) / math.log(prev["h"] / row["h"])
    return rows


def fd_convergence(
    op: Union[OperatorId, str], field: Union[AnalyticField, str, None] = None, grids: Sequence[GridSize] = DEFAULT_GRIDS
) -> List[Dict]:
    op = _as_operator(op)
    field = _as_field(field or FD_FIELDS[op])
    rows = []
    for N_r, N_theta in grids:
        grid = reference_grid(N_r, N_theta)
        rows.append({"h": grid.dr, "op": op.value, "max_error": fd_check(op, field, grid), "observed_order": np.nan})
    return observed_orders(rows)


def pullback_check(
    op: Union[OperatorId, str],
    field: Union[AnalyticField, str, None] = None,
    motion: PrescribedMotion = GENERIC_MOTION,
    t: float = DEFAULT_TIME,
    grids: Sequence[GridSize] = DEFAULT_GRIDS,
) -> List[Dict]:
    """
    Convergence of a transformed operator against the pulled-back physical one.

    Args:
        op: L1, L2, G, B or N
        field: Catalog field (default per operator)
        motion: Particle velocities; must keep the gap condition on [0, t]
        t: Time at which the flow map is built
        grids: (N_r, N_theta) pairs, coarse to fine

    Returns:
        Rows with h, op, max_error, observed_order

    Raises:
        GapViolationError: If the motion carries the particle into the transition zone
    """
    op = _as_operator(op)
    field = _as_field(field or PULLBACK_FIELDS[op])
    rows = []
    for N_r, N_theta in grids:
        grid = reference_grid(N_r, N_theta)
        T = build_transform(grid, reference_cutoff(grid), motion, t)
        numeric, exact = _pullback_pair(op, field, T)
        error = _max_error(numeric, exact, grid)
        logger.debug(f"pullback {op.value} on {N_r}x{N_theta}: max error {error:.3e}")
        rows.append({"h": grid.dr, "op": op.value, "max_error": error, "observed_order": np.nan})
    return observed_orders(rows)


def moving_frame_check(
    field: Union[AnalyticField, str] = "taylor_green",
    motion: PrescribedMotion = GENERIC_MOTION,
    t: float = DEFAULT_TIME,
    grids: Sequence[GridSize] = DEFAULT_GRIDS,
    eps: float = 1e-3,
) -> List[Dict]:
    """
    Residual of d_t v + Mop(v) for a pulled-back stationary physical field.

    v(t) = J_Y(t) u(X(t)) with u independent of time, so the transformed time
    derivative vanishes; d_t v is a centred difference over [t - eps, t + eps].
    """
    field = _as_field(field)
    rows = []
    for N_r, N_theta in grids:
        grid = reference_grid(N_r, N_theta)
        T_minus = build_transform(grid, reference_cutoff(grid), motion, t - eps)
        pulled = []
        T = T_minus
        for k in range(3):
            if k:
                l, omega = motion(t - eps + (k - 0.5) * eps)
                T = advance_flow(T, RigidState2D(h=T.pose.h, theta_b=T.pose.theta_b, l=l, omega=omega), eps, invert=False)
            pulled.append((T, np.einsum("ij...,j...->i...", T.JY, field.value(T.X))))
        (_, v_minus), (T_mid, v_mid), (_, v_plus) = pulled
        residual = (v_plus - v_minus) / (2.0 * eps) + Mop(v_mid, T_mid)
        error = _max_error(residual, np.zeros_like(residual), grid)
        rows.append({"h": grid.dr, "op": "M", "max_error": error, "observed_order": np.nan})
    return observed_orders(rows)


def operator_suite(
    grids: Sequence[GridSize] = DEFAULT_GRIDS,
    motion: PrescribedMotion = GENERIC_MOTION,
    t: float = DEFAULT_TIME,
    ops: Iterable[OperatorId] = (OperatorId.L1, OperatorId.L2, OperatorId.G, OperatorId.B),
) -> pd.DataFrame:
    """Pullback convergence of every transformed operator, one table."""
    rows: List[Dict] = []
    for op in ops:
        rows += pullback_check(op, motion=motion, t=t, grids=grids)
    return pd.DataFrame(rows, columns=CONVERGENCE_COLUMNS)


def grid_suite(grids: Sequence[GridSize] = DEFAULT_GRIDS) -> pd.DataFrame:
    """Finite-difference convergence of the grid operators, one table."""
    rows: List[Dict] = []
    for op in FD_FIELDS:
        rows += fd_convergence(op, grids=grids)
    return pd.DataFrame(rows, columns=CONVERGENCE_COLUMNS)


def orders_within(table: pd.DataFrame, low: float = 1.7, high: float = 2.3) -> bool:
    orders = table["observed_order"].dropna()
    return bool(len(orders)) and bool(((orders >= low) & (orders <= high)).all())


# =============================================================================
# TRANSFORM INVARIANTS
# =============================================================================


def transform_violations(T: TransformField) -> pd.DataFrame:
    """Per-node invariant violations of a flow map sample."""
    eye = np.eye(2).reshape(2, 2, 1, 1)
    grid = T.grid
    frame = pd.DataFrame(
        {
            "r": np.repeat(grid.r, grid.nt),
            "theta": np.tile(grid.theta, grid.nr),
            "volume": np.abs(T.det - 1.0).ravel(),
            "inversion": T.inversion_field().ravel(),
            "metric": np.max(
                np.abs(np.einsum("ik...,kj...->ij...", T.g_upper, T.g_lower) - eye), axis=(0, 1)
            ).ravel(),
        }
    )
    return frame


def transform_check(
    grid_size: GridSize = DEFAULT_GRIDS[1],
    motion: PrescribedMotion = GENERIC_MOTION,
    t: float = DEFAULT_TIME,
) -> Tuple[pd.DataFrame, Dict[str, float]]:
    """Flow map of the generic small motion with its per-node violations and their maxima."""
    grid = reference_grid(*grid_size)
    T = build_transform(grid, reference_cutoff(grid), motion, t)
    frame = transform_violations(T)
    summary = {
        "volume": float(frame["volume"].max()),
        "inversion": float(frame["inversion"].max()),
        "metric": float(frame["metric"].max()),
        "inversion_residual": float(T.inversion_residual),
    }
    return frame, summary
