import numpy as np
import pytest

from nemacol.grid.annulus import flux_divergence, integrate, laplacian, normal_derivative
from nemacol.nemacol_defs import Boundary, BoundaryKind, InitialDataError
from nemacol.rigid.rigid_body import RigidState2D
from nemacol.solver.implicit import ModalSolver
from nemacol.solver.presets import InitialState, PresetFactory, radial_bump
from nemacol.solver.projection import PressureProjector
from nemacol.solver.validation import CONDITIONS, validate_initial
from nemacol.transform.cutoff import CutoffSpec
from nemacol.transform.flow_map import identity_transform


@pytest.fixture
def smooth_field(grid):
    return np.stack([np.sin(grid.x) * np.cos(grid.y) + grid.x**2, np.cos(2.0 * grid.x) * grid.y])


def test_dirichlet_solve_recovers_field(grid, smooth_field):
    tau = 0.05
    solver = ModalSolver(grid, tau, BoundaryKind.DIRICHLET)
    rhs = smooth_field - tau * laplacian(smooth_field, grid)
    u = solver.solve(rhs, inner=smooth_field[:, 0, :], outer=smooth_field[:, -1, :])
    assert np.max(np.abs(u - smooth_field)) <= 1e-10
    assert np.array_equal(u[:, 0, :], smooth_field[:, 0, :])


def test_neumann_solve_has_zero_normal_derivative(grid, smooth_field):
    solver = ModalSolver(grid, 0.05, BoundaryKind.NEUMANN)
    u = solver.solve(smooth_field)
    for side in Boundary:
        assert np.max(np.abs(normal_derivative(u, grid, side))) <= 1e-8


def test_modal_solver_rejects_negative_weight(grid):
    with pytest.raises(ValueError, match="non-negative"):
        ModalSolver(grid, -1.0, BoundaryKind.DIRICHLET)


def test_projection_removes_divergence(grid, smooth_field):
    T = identity_transform(grid, CutoffSpec(r=0.3, R_O=1.0))
    projector = PressureProjector(grid)
    result = projector.project(smooth_field, T, dt=1.0)
    assert result.div_max <= 1e-8
    assert np.max(np.abs(flux_divergence(result.v, grid))) <= 1e-8
    assert abs(integrate(result.p, grid)) / grid.area <= 1e-12
    assert np.array_equal(result.v[:, 0, :], smooth_field[:, 0, :])
    assert np.array_equal(result.v[:, -1, :], smooth_field[:, -1, :])

    again = projector.project(result.v, T, dt=1.0)
    assert np.max(np.abs(again.v - result.v)) <= 1e-9


def test_projection_rejects_non_finite_input(grid, smooth_field):
    T = identity_transform(grid, CutoffSpec(r=0.3, R_O=1.0))
    smooth_field[0, 5, 5] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        PressureProjector(grid).project(smooth_field, T, dt=1.0)


def test_radial_bump_vanishes_near_circles(coarse_grid):
    bump = radial_bump(coarse_grid)
    assert np.all(bump[:3] == 0.0)
    assert np.all(bump[-3:] == 0.0)
    assert bump.max() == pytest.approx(1.0)


@pytest.mark.parametrize("preset", ["equilibrium", "small_swirl", "small_data", "rigid_lift"])
def test_presets_satisfy_compatibility(make_scenario, preset):
    scenario = make_scenario(initial={"preset": preset, "amplitude": 0.02})
    report = validate_initial(scenario)
    assert report.passed, report.to_dict()
    assert set(report.to_dict()) == set(CONDITIONS)


def test_moving_presets_start_with_rigid_velocity(make_scenario):
    rigid = PresetFactory.initial_rigid(make_scenario(initial={"preset": "rigid_lift", "amplitude": 0.03}))
    assert np.allclose(rigid.l, [0.03, 0.0])
    assert rigid.omega == pytest.approx(0.03)
    rigid = PresetFactory.initial_rigid(make_scenario(initial={"preset": "small_data", "l0": [0.0, 0.01]}))
    assert np.allclose(rigid.l, [0.0, 0.01])


def _rest_state(grid):
    d = np.zeros((3,) + grid.shape)
    d[2] = 1.0
    return InitialState(v=np.zeros((2,) + grid.shape), p=np.zeros(grid.shape), d=d, rigid=RigidState2D())


def test_interface_mismatch_detected(make_scenario):
    scenario = make_scenario()
    state = _rest_state(scenario.annulus)
    state.rigid = RigidState2D(l=(0.1, 0.0))
    report = validate_initial(scenario, state)
    assert report.violations == ["interface"]
    with pytest.raises(InitialDataError) as info:
        report.raise_for_violations()
    assert info.value.conditions == ["interface"]


def test_outer_slip_detected(make_scenario):
    scenario = make_scenario()
    state = _rest_state(scenario.annulus)
    state.v[0, -1, :] = 0.1
    assert "outer_trace" in validate_initial(scenario, state).violations


def test_non_unit_director_detected(make_scenario):
    scenario = make_scenario()
    state = _rest_state(scenario.annulus)
    state.d = 2.0 * state.d
    assert validate_initial(scenario, state).violations == ["director_unit"]
