import numpy as np
import pytest

from nemacol.grid.annulus import (
    AnnulusGrid,
    boundary_integral,
    conform,
    div,
    flux_divergence,
    grad,
    grad_transpose,
    integrate,
    laplacian,
    normal_derivative,
)
from nemacol.nemacol_defs import Boundary


def test_grid_layout(coarse_grid):
    assert coarse_grid.shape == (17, 32)
    assert coarse_grid.dr == pytest.approx(0.75 / 16)
    assert coarse_grid.r[0] == pytest.approx(0.25)
    assert coarse_grid.r[-1] == pytest.approx(1.0)
    assert coarse_grid.points.shape == (2, 17, 32)


@pytest.mark.parametrize("N_r, N_theta", [(4, 32), (16, 31), (16, 8)])
def test_grid_rejects_bad_sizes(N_r, N_theta):
    with pytest.raises(ValueError):
        AnnulusGrid(R_S=0.25, R_O=1.0, N_r=N_r, N_theta=N_theta)


def test_grid_rejects_inverted_radii():
    with pytest.raises(ValueError, match="R_S < R_O"):
        AnnulusGrid(R_S=1.0, R_O=0.5, N_r=16, N_theta=32)


def test_conform_rejects_foreign_shape(coarse_grid):
    with pytest.raises(ValueError, match="does not conform"):
        conform(np.zeros((16, 32)), coarse_grid)


def test_grad_exact_on_linear_field(grid):
    gx, gy = grad(grid.x, grid)
    assert np.max(np.abs(gx - 1.0)) <= 1e-12
    assert np.max(np.abs(gy)) <= 1e-12


def test_div_of_rigid_field_vanishes(grid):
    u = np.stack([0.3 - 0.7 * grid.y, -0.2 + 0.7 * grid.x])
    assert np.max(np.abs(div(u, grid)[grid.interior_mask])) <= 1e-12
    assert np.max(np.abs(flux_divergence(u, grid)[grid.interior_mask])) <= 1e-12


def test_laplacian_second_order():
    errors = []
    for n in (32, 64):
        g = AnnulusGrid(R_S=0.25, R_O=1.0, N_r=n, N_theta=2 * n)
        f = np.sin(g.x) * np.sin(g.y)
        err = laplacian(f, g) - (-2.0 * f)
        errors.append(np.max(np.abs(err[g.interior_mask])))
    assert 3.2 <= errors[0] / errors[1] <= 4.8


def test_laplacian_of_vector_is_componentwise(grid):
    f = np.stack([grid.x**2, grid.x * grid.y])
    lap = laplacian(f, grid)
    assert np.allclose(lap[0][grid.interior_mask], 2.0, atol=1e-10)
    assert np.allclose(lap[1][grid.interior_mask], 0.0, atol=1e-10)


def test_grad_transpose_is_matrix_transpose(grid, rng):
    phi = rng.standard_normal(grid.shape)
    a = rng.standard_normal((2,) + grid.shape)
    lhs = np.sum(grad(phi, grid) * a)
    rhs = np.sum(phi * grad_transpose(a, grid))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_quadrature_area(grid):
    assert integrate(np.ones(grid.shape), grid) == pytest.approx(np.pi * (1.0 - 0.25**2), rel=1e-12)
    assert grid.area == pytest.approx(np.pi * (1.0 - 0.25**2), rel=1e-12)


def test_boundary_integral_spectral(grid):
    values = np.cos(grid.theta) ** 2
    assert boundary_integral(values, grid, Boundary.INNER) == pytest.approx(np.pi * 0.25, rel=1e-12)
    assert boundary_integral(values, grid, Boundary.OUTER) == pytest.approx(np.pi, rel=1e-12)


def test_normal_derivative_points_out_of_fluid(grid):
    assert np.allclose(normal_derivative(grid.R, grid, Boundary.INNER), -1.0)
    assert np.allclose(normal_derivative(grid.R, grid, Boundary.OUTER), 1.0)


def test_outward_normal_of_inner_circle_points_to_center(grid):
    normal = grid.outward_normal(Boundary.INNER)
    points = grid.circle_points(Boundary.INNER)
    assert np.allclose(normal, -points / grid.R_S)
