import orjson
import pytest

from nemacol.nemacol_defs import ScenarioError, SimulationConstants
from nemacol.solver.scenario_builder import parse_scenario, scenario_from_dict, write_resolved


def test_defaults_fill_missing_sections():
    scenario = scenario_from_dict({})
    assert scenario.geometry.R_O == SimulationConstants.DEFAULT_R_O
    assert scenario.geometry.R_S == SimulationConstants.DEFAULT_R_S
    assert (scenario.grid.N_r, scenario.grid.N_theta) == (64, 128)
    assert scenario.physics.d_star == (0.0, 0.0, 1.0)
    assert scenario.solver.subiterations == 2
    assert scenario.n_steps == round(SimulationConstants.DEFAULT_T_END / SimulationConstants.DEFAULT_DT)


@pytest.mark.parametrize(
    "data, message",
    [
        ({"grid": {"N_r": 4}}, "grid.N_r"),
        ({"grid": {"N_theta": 33}}, "grid.N_theta"),
        ({"grid": {"foo": 1}}, "grid.foo: unknown key"),
        ({"foo": {}}, "foo: unknown section"),
        ({"geometry": {"r": 0.8}}, "geometry: requires dist"),
        ({"geometry": {"R_S": 1.5}}, "geometry: requires 0 < R_S < R_O"),
        ({"physics": {"d_star": [1.0, 1.0, 0.0]}}, r"physics.d_star: requires \|d\*\| = 1"),
        ({"physics": {"lambda": 0.0}}, "physics.lambda"),
        ({"time": {"dt": -1.0}}, "time.dt"),
        ({"initial": {"preset": "vortex"}}, "initial.preset"),
        ({"solver": {"rigid_integrator": "euler"}}, "solver.rigid_integrator"),
        ({"solver": {"relaxation": 1.5}}, "solver.relaxation"),
        ({"grid": {"N_r": "many"}}, "grid.N_r: invalid value"),
        ({"solver": {"renormalize_director": 1}}, "solver.renormalize_director: invalid value"),
    ],
)
def test_invalid_scenarios_name_the_offending_key(data, message):
    with pytest.raises(ScenarioError, match=message):
        scenario_from_dict(data)


def test_scenario_errors_are_value_errors():
    with pytest.raises(ValueError):
        scenario_from_dict({"grid": {"N_r": 2}})


def test_parse_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    with pytest.raises(ScenarioError, match="not valid JSON"):
        parse_scenario(path)


def test_parse_rejects_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="cannot read"):
        parse_scenario(tmp_path / "absent.json")


def test_relative_snapshot_resolved_against_scenario_file(scenario_file, tmp_path):
    path = scenario_file(initial={"snapshot": "snapshots/final_state.csv"})
    scenario = parse_scenario(path)
    assert scenario.initial.snapshot == str(tmp_path / "snapshots" / "final_state.csv")


def test_resolved_echo_uses_file_keys(make_scenario, tmp_path):
    scenario = make_scenario(physics={"lambda": 0.5, "mu": 2.0})
    target = write_resolved(scenario, tmp_path / "out")
    echoed = orjson.loads(target.read_bytes())
    assert target.name == SimulationConstants.RESOLVED_SCENARIO_FILE
    assert echoed["physics"]["lambda"] == 0.5
    assert "lam" not in echoed["physics"]
    assert echoed["grid"] == {"N_r": 16, "N_theta": 32}
    assert scenario_from_dict(echoed).to_dict() == echoed


def test_with_grid_keeps_other_sections(make_scenario):
    scenario = make_scenario(physics={"mu": 0.5})
    finer = scenario.with_grid(32, 64, dt=5e-4)
    assert finer.annulus.shape == (33, 64)
    assert finer.dt == 5e-4
    assert finer.physics.mu == 0.5
    assert finer.time.T_end == scenario.time.T_end
