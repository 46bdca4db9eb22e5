import logging

import numpy as np
import orjson
import pytest

from nemacol.grid.annulus import AnnulusGrid
from nemacol.solver.scenario_builder import scenario_from_dict

logging.getLogger("nemacol").setLevel(logging.WARNING)


def small_scenario_dict(**overrides):
    """A coarse scenario that runs in well under a second."""
    data = {
        "grid": {"N_r": 16, "N_theta": 32},
        "time": {"dt": 1e-3, "T_end": 5e-3, "output_every": 0},
        "initial": {"preset": "equilibrium"},
    }
    for section, values in overrides.items():
        data.setdefault(section, {}).update(values)
    return data


@pytest.fixture
def coarse_grid():
    return AnnulusGrid(R_S=0.25, R_O=1.0, N_r=16, N_theta=32)


@pytest.fixture
def grid():
    return AnnulusGrid(R_S=0.25, R_O=1.0, N_r=32, N_theta=64)


@pytest.fixture
def make_scenario():
    def factory(**overrides):
        return scenario_from_dict(small_scenario_dict(**overrides))

    return factory


@pytest.fixture
def scenario_file(tmp_path):
    def write(name="scenario.json", **overrides):
        path = tmp_path / name
        path.write_bytes(orjson.dumps(small_scenario_dict(**overrides)))
        return path

    return write


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def scenario_dict():
    return small_scenario_dict
