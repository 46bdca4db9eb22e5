from dataclasses import replace

import numpy as np
import pytest

from nemacol.grid.annulus import AnnulusGrid, div, grad, laplacian
from nemacol.operators.stress import PhysicalParams, stress_from_gradients, surface_load
from nemacol.operators.transformed_operators import L1, L2, Bop, Bphys, Gop, Mop, Nop
from nemacol.rigid.rigid_body import RigidState2D, rotation
from nemacol.transform.cutoff import CutoffSpec
from nemacol.transform.flow_map import identity_transform

SPEC = CutoffSpec(r=0.3, R_O=1.0)


@pytest.fixture
def flat(grid):
    return identity_transform(grid, SPEC)


def test_physical_params_must_be_positive():
    with pytest.raises(ValueError, match="mu"):
        PhysicalParams(mu=0.0)


def test_operators_reduce_on_identity_map(grid, flat, rng):
    v = np.stack([np.sin(grid.x) * np.cos(grid.y), grid.x * grid.y])
    d = np.stack([np.sin(grid.x), np.cos(grid.y), grid.x**2])
    p = np.cos(grid.x) + grid.y
    assert np.array_equal(L1(v, flat), laplacian(v, grid))
    assert np.array_equal(L2(d, flat), laplacian(d, grid))
    assert np.array_equal(Gop(p, flat), grad(p, grid))
    assert np.array_equal(Bop(d, d, flat), Bphys(d, d, grid))
    assert np.array_equal(Mop(v, flat), np.zeros_like(v))


def test_operators_require_tensors(flat):
    bare = replace(flat, Gamma=None)
    with pytest.raises(ValueError, match="tensors missing"):
        L1(np.zeros((2,) + flat.grid.shape), bare)


def test_convective_term_of_rotation(grid, flat):
    omega = 0.7
    v = np.stack([-omega * grid.y, omega * grid.x])
    conv = Nop(v, flat)
    mask = grid.interior_mask
    assert np.allclose(conv[:, mask], -(omega**2) * grid.points[:, mask], atol=1e-12)


def test_domain_motion_term_active_when_particle_moves(grid):
    T = identity_transform(grid, SPEC, RigidState2D(l=(0.1, 0.0)))
    v = np.stack([grid.x, np.zeros(grid.shape)])
    # b is the rigid translation on the plateau
    out = Mop(v, T)
    near = grid.deep_interior_mask(1) & (grid.R < 0.6)
    assert np.allclose(out[0][near], -0.1, atol=1e-12)
    assert np.allclose(out[1][near], 0.0, atol=1e-12)


def test_ericksen_force_matches_tensor_divergence():
    g = AnnulusGrid(R_S=0.25, R_O=1.0, N_r=64, N_theta=128)
    d = np.stack([np.sin(g.x) * np.cos(g.y), 0.5 * g.x**2, np.cos(g.x * g.y)])
    Dd = grad(d, g)
    ericksen = np.einsum("li...,lj...->ij...", Dd, Dd)
    composed = div(ericksen, g)
    mask = g.deep_interior_mask(2)
    assert np.max(np.abs(Bphys(d, d, g) - composed)[:, mask]) <= 1e-2


def test_stress_is_objective(rng):
    params = PhysicalParams(mu=0.7, lam=0.3, gamma=1.0)
    grad_u = rng.standard_normal((2, 2, 5))
    grad_d = rng.standard_normal((3, 2, 5))
    p = rng.standard_normal(5)
    R = rotation(0.9)
    sigma = stress_from_gradients(grad_u, p, grad_d, params)
    rotated = stress_from_gradients(
        np.einsum("ik,kl...,jl->ij...", R, grad_u, R),
        p,
        np.einsum("lk...,jk->lj...", grad_d, R),
        params,
    )
    assert np.allclose(rotated, np.einsum("ik,kl...,jl->ij...", R, sigma, R), atol=1e-12)
    assert np.allclose(sigma, np.swapaxes(sigma, 0, 1))


def test_pressure_load_on_particle(grid):
    eye = np.eye(2)[:, :, None]
    p = np.cos(grid.theta)
    force, torque = surface_load(-p * eye, grid)
    assert np.allclose(force, [-np.pi * grid.R_S, 0.0], atol=1e-12)
    assert torque == pytest.approx(0.0, abs=1e-12)

    force, torque = surface_load(-2.5 * np.broadcast_to(eye, (2, 2, grid.nt)), grid)
    assert np.allclose(force, 0.0, atol=1e-12)
    assert torque == pytest.approx(0.0, abs=1e-12)


def test_shear_load_produces_torque(grid):
    tau = 0.4
    e_r = np.stack([np.cos(grid.theta), np.sin(grid.theta)])
    e_t = np.stack([-np.sin(grid.theta), np.cos(grid.theta)])
    sigma = tau * (e_t[:, None] * e_r[None, :] + e_r[:, None] * e_t[None, :])
    force, torque = surface_load(sigma, grid)
    assert np.allclose(force, 0.0, atol=1e-12)
    assert torque == pytest.approx(2.0 * np.pi * grid.R_S**2 * tau, rel=1e-12)
