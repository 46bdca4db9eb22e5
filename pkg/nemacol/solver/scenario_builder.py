"""
scenario_builder.py

NEMATIC COLLOID SIMULATION - SCENARIO BUILDER

PURPOSE:
========
Builds a validated Scenario from a JSON scenario file. Unknown sections and
keys are rejected, missing keys take the documented defaults, and the
resolved scenario is echoed next to the run outputs.

ARCHITECTURE:
=============
- Section schema: file key -> dataclass field, per section
- Coercion: numbers and flags are coerced per key, failures name the key
- Echo: scenario.resolved.json written with orjson
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Callable, Dict, Tuple, Type, Union

import orjson

from nemacol.nemacol_defs import ScenarioError, SimulationConstants
from nemacol.solver.scenario import (
    GeometryConfig,
    GridConfig,
    InitialConfig,
    PhysicsConfig,
    Scenario,
    SolverConfig,
    TimeConfig,
)

logger = logging.getLogger(__name__)


def _as_float(value):
    if isinstance(value, bool):
        raise TypeError("boolean given")
    return float(value)


def _as_int(value):
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise TypeError("integer expected")
    return int(value)


def _as_bool(value):
    if not isinstance(value, bool):
        raise TypeError("boolean expected")
    return value


def _as_str(value):
    if not isinstance(value, str):
        raise TypeError("string expected")
    return value


def _optional(coerce: Callable) -> Callable:
    return lambda value: None if value is None else coerce(value)


def _as_vector(value):
    if not isinstance(value, (list, tuple)):
        raise TypeError("list expected")
    return [_as_float(c) for c in value]


# section -> (config class, {file key: (field name, coercion)})
SECTION_SCHEMA: Dict[str, Tuple[Type, Dict[str, Tuple[str, Callable]]]] = {
    "geometry": (
        GeometryConfig,
        {"R_O": ("R_O", _as_float), "R_S": ("R_S", _as_float), "r": ("r", _as_float)},
    ),
    "physics": (
        PhysicsConfig,
        {
            "mu": ("mu", _as_float),
            "lambda": ("lam", _as_float),
            "gamma": ("gamma", _as_float),
            "d_star": ("d_star", _as_vector),
        },
    ),
    "grid": (GridConfig, {"N_r": ("N_r", _as_int), "N_theta": ("N_theta", _as_int)}),
    "time": (
        TimeConfig,
        {"dt": ("dt", _as_float), "T_end": ("T_end", _as_float), "output_every": ("output_every", _as_int)},
    ),
    "initial": (
        InitialConfig,
        {
            "preset": ("preset", _as_str),
            "amplitude": ("amplitude", _as_float),
            "l0": ("l0", _optional(_as_vector)),
            "omega0": ("omega0", _optional(_as_float)),
            "snapshot": ("snapshot", _optional(_as_str)),
        },
    ),
    "solver": (
        SolverConfig,
        {
            "subiterations": ("subiterations", _as_int),
            "relaxation": ("relaxation", _optional(_as_float)),
            "rigid_integrator": ("rigid_integrator", _as_str),
            "cg_tol": ("cg_tol", _as_float),
            "cg_maxiter": ("cg_maxiter", _as_int),
            "newton_tol": ("newton_tol", _as_float),
            "newton_maxiter": ("newton_maxiter", _as_int),
            "inversion_every": ("inversion_every", _as_int),
            "validation_tol": ("validation_tol", _as_float),
            "volume_tol": ("volume_tol", _as_float),
            "cfl_safety": ("cfl_safety", _as_float),
            "renormalize_director": ("renormalize_director", _as_bool),
        },
    ),
}


def _build_section(name: str, data: Any):
    config_cls, keys = SECTION_SCHEMA[name]
    if data is None:
        return config_cls()
    if not isinstance(data, dict):
        raise ScenarioError(f"{name}: section must be a JSON object")
    unknown = sorted(set(data) - set(keys))
    if unknown:
        raise ScenarioError(f"{name}.{unknown[0]}: unknown key (allowed: {', '.join(keys)})")
    kwargs = {}
    for file_key, value in data.items():
        field_name, coerce = keys[file_key]
        try:
            kwargs[field_name] = coerce(value)
        except (TypeError, ValueError) as e:
            raise ScenarioError(f"{name}.{file_key}: invalid value {value!r} ({e})") from e
    return config_cls(**kwargs)


def scenario_from_dict(data: Dict[str, Any], source: str = None) -> Scenario:
    """Validate a decoded scenario document and fill defaults."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario: top level must be a JSON object")
    unknown = sorted(set(data) - set(SECTION_SCHEMA))
    if unknown:
        raise ScenarioError(f"{unknown[0]}: unknown section (allowed: {', '.join(SECTION_SCHEMA)})")
    sections = {name: _build_section(name, data.get(name)) for name in SECTION_SCHEMA}
    scenario = Scenario(**sections, source=source)

    if scenario.initial.snapshot and source:
        snapshot = Path(scenario.initial.snapshot)
        if not snapshot.is_absolute():
            scenario.initial.snapshot = str(Path(source).parent / snapshot)
    logger.info(
        f"✅ Scenario resolved: grid {scenario.grid.N_r}x{scenario.grid.N_theta}, dt={scenario.time.dt}, "
        f"T_end={scenario.time.T_end}, preset={scenario.initial.preset}"
    )
    return scenario


def parse_scenario(path: Union[str, Path]) -> Scenario:
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ScenarioError(f"scenario: cannot read {path} ({e})") from e
    try:
        data = orjson.loads(raw)
    except orjson.JSONDecodeError as e:
        raise ScenarioError(f"scenario: {path} is not valid JSON ({e})") from e
    return scenario_from_dict(data, source=str(path))


def write_resolved(scenario: Scenario, out_dir: Union[str, Path]) -> Path:
    """Echo the resolved scenario into the output directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / SimulationConstants.RESOLVED_SCENARIO_FILE
    target.write_bytes(orjson.dumps(scenario.to_dict(), option=orjson.OPT_INDENT_2))
    logger.info(f"📄 Resolved scenario written to {target}")
    return target
