import numpy as np
import pytest

from nemacol.rigid.rigid_body import (
    PrescribedMotion,
    RigidBody,
    RigidState2D,
    RigidState3D,
    inertia_spatial,
    kinetic_energy,
    newton_euler_step,
    orthogonality_drift,
    recover_frame,
    rigid_velocity,
    rotation,
)


def test_disk_inertia():
    body = RigidBody.disk(0.25)
    assert body.m_S == pytest.approx(np.pi * 0.25**2)
    assert body.J0 == pytest.approx(0.5 * np.pi * 0.25**4)


def test_ball_inertia_and_energy():
    body = RigidBody.ball(0.5)
    mass = 4.0 / 3.0 * np.pi * 0.125
    assert body.dim == 3
    assert body.m_S == pytest.approx(mass)
    assert np.allclose(body.J0, 0.1 * mass * np.eye(3))
    state = RigidState3D(l=(1.0, 0.0, 0.0), omega=(0.0, 0.0, 2.0))
    e_trans, e_rot = kinetic_energy(body, state)
    assert e_trans == pytest.approx(0.5 * mass)
    assert e_rot == pytest.approx(0.5 * 0.1 * mass * 4.0)


def test_rigid_body_rejects_indefinite_inertia():
    with pytest.raises(ValueError):
        RigidBody(R_S=1.0, m_S=1.0, J0=np.diag([1.0, -1.0, 2.0]), dim=3)


def test_rigid_state_rejects_non_rotation():
    with pytest.raises(ValueError, match="not a rotation"):
        RigidState3D(Q=2.0 * np.eye(3))


def test_rigid_velocity_at_center_is_translation():
    s = RigidState2D(h=[0.1, -0.2], theta_b=0.4, l=[0.3, 0.0], omega=1.5)
    u = rigid_velocity(s.h[:, None], s)
    assert np.allclose(u[:, 0], s.h_prime)
    assert np.allclose(s.h_prime, rotation(0.4) @ np.array([0.3, 0.0]))


def test_free_rotation_conserves_energy():
    body = RigidBody(R_S=1.0, m_S=1.0, J0=np.diag([1.0, 2.0, 3.0]), dim=3)
    s = RigidState3D(omega=np.ones(3))
    e0 = sum(kinetic_energy(body, s))
    for _ in range(10_000):
        s = newton_euler_step(s, np.zeros(3), np.zeros(3), 1e-3, body, "rk4")
    e1 = sum(kinetic_energy(body, s))
    assert abs(e1 - e0) / e0 <= 1e-6
    assert orthogonality_drift(s.Q) <= 1e-8


def test_free_rotation_conserves_spatial_momenta():
    body = RigidBody(R_S=1.0, m_S=1.0, J0=np.diag([1.0, 2.0, 3.0]), dim=3)
    s = RigidState3D(l=(0.2, -0.1, 0.3), omega=(1.0, 0.1, 0.0))
    angular0 = s.Q @ body.J0 @ s.omega
    linear0 = s.h_prime
    for _ in range(10_000):
        s = newton_euler_step(s, np.zeros(3), np.zeros(3), 1e-3, body, "rk4")
    assert np.max(np.abs(s.Q @ body.J0 @ s.omega - angular0)) <= 1e-6 * np.linalg.norm(angular0)
    assert np.allclose(s.h_prime, linear0, atol=1e-6)
    assert np.allclose(s.h, 10.0 * linear0, atol=1e-5)


def test_planar_translation_under_constant_force():
    body = RigidBody.disk(0.25)
    force = np.array([0.02, -0.01])
    s = RigidState2D(l=[0.1, 0.0])
    for _ in range(100):
        s = newton_euler_step(s, force, 0.0, 1e-2, body, "rk2")
    assert np.allclose(s.l, [0.1, 0.0] + force / body.m_S * 1.0, atol=1e-12)
    assert np.allclose(s.h, [0.1, 0.0] + 0.5 * force / body.m_S, atol=1e-12)


def test_spinning_body_keeps_spatial_velocity():
    body = RigidBody.disk(0.25)
    s = RigidState2D(l=[0.1, 0.05], omega=2.0)
    h_prime = s.h_prime.copy()
    for _ in range(500):
        s = newton_euler_step(s, np.zeros(2), 0.0, 1e-3, body, "rk4")
    assert s.theta_b == pytest.approx(1.0)
    assert np.allclose(s.h_prime, h_prime, atol=1e-10)


def test_unknown_integrator_rejected():
    with pytest.raises(ValueError, match="Unknown rigid integrator"):
        newton_euler_step(RigidState2D(), np.zeros(2), 0.0, 1e-3, RigidBody.disk(0.25), "euler")


def test_inertia_rotation_keeps_spectrum(rng):
    J0 = np.diag([1.0, 2.0, 3.0])
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1.0
    J = inertia_spatial(J0, Q)
    assert np.allclose(J, J.T, atol=1e-12)
    assert np.allclose(np.linalg.eigvalsh(J), [1.0, 2.0, 3.0], atol=1e-12)


def test_recover_planar_frame():
    dt, n, omega = 1e-3, 2001, 0.5
    t = dt * np.arange(n)
    history = recover_frame(np.tile([1.0, 0.0], (n, 1)), np.full(n, omega), dt)
    assert np.allclose(history.Q[-1], rotation(omega * t[-1]), atol=1e-12)
    expected = np.stack([np.sin(omega * t) / omega, (1.0 - np.cos(omega * t)) / omega], axis=1)
    assert np.allclose(history.h, expected, atol=1e-6)


def test_recover_spatial_frame_stays_orthogonal():
    n = 1001
    omega = np.tile([0.2, -0.1, 0.3], (n, 1))
    history = recover_frame(np.zeros((n, 3)), omega, 1e-2)
    assert history.orthogonality_drift <= 1e-8


def test_prescribed_motion_returns_fresh_arrays():
    motion = PrescribedMotion.constant(l=(0.1, 0.0), omega=0.3)
    l, omega = motion(1.0)
    l[0] = 5.0
    assert motion(2.0)[0][0] == pytest.approx(0.1)
    assert omega == pytest.approx(0.3)
    assert PrescribedMotion.at_rest()(0.0)[1] == 0.0
