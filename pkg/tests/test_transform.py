import logging
from dataclasses import replace

import numpy as np
import pytest

from nemacol.nemacol_defs import GapViolationError
from nemacol.rigid.rigid_body import RigidState2D, rigid_velocity
from nemacol.transform.cutoff import CutoffSpec, chi, chi_derivatives, smoothstep
from nemacol.transform.flow_map import advance_flow, identity_transform
from nemacol.transform.lift import build_b, particle_gap

SPEC = CutoffSpec(r=0.3, R_O=1.0)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_smoothstep_plateaus(order):
    value, first, second = smoothstep(np.array([-0.5, 0.0, 0.5, 1.0, 1.5]), order)
    assert np.allclose(value, [0.0, 0.0, 0.5, 1.0, 1.0])
    assert first[0] == first[-1] == 0.0
    assert second[0] == second[-1] == 0.0


def test_cutoff_rejects_bad_distance():
    with pytest.raises(ValueError, match="0 < r < R_O"):
        CutoffSpec(r=1.5, R_O=1.0)


def test_chi_zones():
    x = np.array([[0.0, 0.5, 0.7, 0.85, 0.95], [0.0, 0.0, 0.0, 0.0, 0.0]])
    values = chi(x, SPEC)
    assert np.allclose(values[:3], 1.0)
    assert np.allclose(values[3:], 0.0)
    assert SPEC.admits(0.25)


def test_chi_derivatives_match_finite_differences(rng):
    angle = rng.uniform(0.0, 2.0 * np.pi, 20)
    rho = rng.uniform(0.71, 0.84, 20)
    x = np.stack([rho * np.cos(angle), rho * np.sin(angle)])
    _, gradient, hess = chi_derivatives(x, SPEC)
    eps = 1e-6
    for k in range(2):
        step = np.zeros((2, 1))
        step[k] = eps
        fd = (chi(x + step, SPEC) - chi(x - step, SPEC)) / (2.0 * eps)
        assert np.allclose(gradient[k], fd, atol=1e-6)
        _, gp, _ = chi_derivatives(x + step, SPEC)
        _, gm, _ = chi_derivatives(x - step, SPEC)
        assert np.allclose(hess[:, k], (gp - gm) / (2.0 * eps), atol=1e-4)


def test_lift_matches_rigid_motion_and_vanishes_near_outer_circle():
    s = RigidState2D(h=(0.1, 0.0), theta_b=0.2, l=(0.2, 0.1), omega=0.5)
    b = build_b(s, SPEC, 0.25)
    inner = np.array([[0.3, -0.2, 0.0], [0.2, 0.1, -0.5]])
    assert np.allclose(b.velocity(inner), rigid_velocity(inner, s), atol=1e-14)
    outer = np.array([[0.9, 0.0, -0.6], [0.0, -0.95, 0.65]])
    assert np.allclose(b.velocity(outer), 0.0)


def test_lift_is_solenoidal(grid):
    s = RigidState2D(h=(0.05, -0.1), l=(0.2, -0.3), omega=0.7)
    jac = build_b(s, SPEC, 0.25).jacobian(grid.points)
    assert np.max(np.abs(jac[0, 0] + jac[1, 1])) <= 1e-12


def test_lift_jacobian_matches_finite_differences(rng):
    s = RigidState2D(h=(0.05, 0.02), l=(0.2, -0.3), omega=0.7)
    b = build_b(s, SPEC, 0.25)
    angle = rng.uniform(0.0, 2.0 * np.pi, 20)
    rho = rng.uniform(0.65, 0.9, 20)
    x = np.stack([rho * np.cos(angle), rho * np.sin(angle)])
    jac = b.jacobian(x)
    eps = 1e-6
    for k in range(2):
        step = np.zeros((2, 1))
        step[k] = eps
        fd = (b.velocity(x + step) - b.velocity(x - step)) / (2.0 * eps)
        assert np.allclose(jac[:, k], fd, atol=1e-6)


def test_gap_violation_rejected():
    s = RigidState2D(h=(0.65, 0.0), l=(0.1, 0.0))
    assert particle_gap(s.h, 0.25, SPEC) == pytest.approx(0.1)
    with pytest.raises(GapViolationError):
        build_b(s, SPEC, 0.25)


def test_gap_inside_transition_margin_warns(caplog):
    s = RigidState2D(h=(0.5, 0.0))
    with caplog.at_level(logging.WARNING, logger="nemacol.transform.lift"):
        build_b(s, SPEC, 0.25)
    assert "cutoff plateau" in caplog.text


def test_identity_transform_is_flat(grid):
    T = identity_transform(grid, SPEC)
    assert T.flat
    assert not T.moving
    assert T.volume_drift() == 0.0
    assert T.inversion_error() == 0.0
    assert np.all(T.Gamma == 0.0)


def test_initial_motion_sets_domain_velocity(grid):
    s = RigidState2D(l=(0.1, 0.0))
    T = identity_transform(grid, SPEC, s)
    assert T.flat
    assert T.moving
    assert np.allclose(T.dtY[:, 0], -np.array([0.1, 0.0])[:, None])
    assert np.allclose(T.dtY[:, -1], 0.0)


def test_rotation_flow_keeps_invariants(grid):
    s = RigidState2D(omega=0.5)
    T = identity_transform(grid, SPEC, s)
    for _ in range(5):
        T = advance_flow(T, s, 1e-2, invert=False)
        s = T.pose
    assert T.pose.theta_b == pytest.approx(0.05)
    assert T.volume_drift() <= 1e-8
    assert T.metric_error() <= 1e-10
    # Y was never updated, so the stored inverse lags the rotated map
    assert T.inversion_error() > 1e-3
    radius = np.hypot(T.X[0], T.X[1])
    assert np.allclose(radius, grid.R, atol=1e-10)


def test_translation_flow_inverts(grid):
    s = RigidState2D(l=(0.05, -0.02))
    T = identity_transform(grid, SPEC, s)
    T = advance_flow(T, s, 1e-2)
    assert np.allclose(T.pose.h, [5e-4, -2e-4])
    assert T.inversion_residual <= 1e-12
    assert T.inversion_error() == pytest.approx(T.inversion_residual, abs=1e-15)
    assert np.allclose(T.X[:, 0], grid.points[:, 0] + np.array([5e-4, -2e-4])[:, None], atol=1e-12)
    assert np.allclose(T.X[:, -1], grid.points[:, -1])
    assert T.volume_drift() <= 1e-8


def test_perturbed_inverse_map_is_detected(grid):
    s = RigidState2D(l=(0.05, -0.02), omega=0.3)
    T = advance_flow(identity_transform(grid, SPEC, s), s, 1e-2)
    assert T.inversion_error() <= 1e-12
    shifted = T.Y.copy()
    shifted[0, grid.nr // 2] += 1e-6
    residual = replace(T, Y=shifted).inversion_field()
    assert residual.shape == grid.shape
    assert residual[grid.nr // 2].min() > 5e-7
    assert residual[0].max() <= 1e-12
