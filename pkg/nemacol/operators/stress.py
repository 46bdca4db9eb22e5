"""
stress.py

Cauchy stress of the nematic fluid, Sigma = 2 mu D(u) - lambda grad d grad d^T - p Id,
its body-frame form sigma = Q^T Sigma Q, and the hydrodynamic load on the particle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from nemacol.grid.annulus import AnnulusGrid, boundary_integral, div, grad
from nemacol.nemacol_defs import Boundary
from nemacol.transform.flow_map import TransformField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhysicalParams:
    """Viscosity mu, elastic constant lam and rotational constant gamma."""

    mu: float = 1.0
    lam: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("mu", "lam", "gamma"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"physical constant '{name}' must be strictly positive")


def stress_from_gradients(grad_u: np.ndarray, p, grad_d: np.ndarray, params: PhysicalParams) -> np.ndarray:
    """Pointwise kernel: grad_u[i, j] = d_j u_i, grad_d[l, j] = d_j d_l; any dimension."""
    dim = grad_u.shape[0]
    strain = 0.5 * (grad_u + np.swapaxes(grad_u, 0, 1))
    ericksen = np.einsum("li...,lj...->ij...", grad_d, grad_d)
    eye = np.eye(dim).reshape((dim, dim) + (1,) * (grad_u.ndim - 2))
    return 2.0 * params.mu * strain - params.lam * ericksen - np.asarray(p) * eye


def stress(u: np.ndarray, p: np.ndarray, d: np.ndarray, params: PhysicalParams, grid: AnnulusGrid) -> np.ndarray:
    return stress_from_gradients(grad(u, grid), p, grad(d, grid), params)


def physical_gradients(v: np.ndarray, d: np.ndarray, T: TransformField):
    """Physical velocity u = J_X v and the x-gradients of u and d at X(y)."""
    grid = T.grid
    if T.flat:
        return v, grad(v, grid), grad(d, grid)
    u = np.einsum("ij...,j...->i...", T.JX, v)
    grad_u = np.einsum("im...,mj...->ij...", grad(u, grid), T.JY)
    grad_d = np.einsum("lm...,mj...->lj...", grad(d, grid), T.JY)
    return u, grad_u, grad_d


def stress_transformed(
    v: np.ndarray,
    p: np.ndarray,
    d: np.ndarray,
    T: TransformField,
    params: PhysicalParams,
    Q: np.ndarray,
) -> np.ndarray:
    """sigma = Q^T Sigma Q with Sigma evaluated from the physical fields at X(y)."""
    _, grad_u, grad_d = physical_gradients(v, d, T)
    sigma = stress_from_gradients(grad_u, p, grad_d, params)
    return np.einsum("ki,kl...,lj->ij...", Q, sigma, Q)


def tensor_divergence(sigma: np.ndarray, grid: AnnulusGrid) -> np.ndarray:
    """(div sigma)_i = d_j sigma_ij."""
    return div(sigma, grid)


def surface_load_kernel(sigma: np.ndarray, normals: np.ndarray, points: np.ndarray, weights: np.ndarray):
    """Force -sum w sigma N and torque -sum w y x (sigma N) over sampled surface points."""
    traction = np.einsum("ij...,j...->i...", sigma, normals)
    force = -np.sum(weights * traction, axis=-1)
    if points.shape[0] == 2:
        moment = points[0] * traction[1] - points[1] * traction[0]
        return force, float(-np.sum(weights * moment))
    return force, -np.sum(weights * np.cross(points, traction, axis=0), axis=-1)


def surface_load(sigma_inner: np.ndarray, grid: AnnulusGrid):
    """Load on the particle from sigma sampled at the inner-circle nodes, shape (2, 2, nt)."""
    normals = grid.outward_normal(Boundary.INNER)
    traction = np.einsum("ij...,j...->i...", sigma_inner, normals)
    points = grid.circle_points(Boundary.INNER)
    force = -boundary_integral(traction, grid, Boundary.INNER)
    moment = points[0] * traction[1] - points[1] * traction[0]
    torque = -boundary_integral(moment, grid, Boundary.INNER)
    return np.asarray(force), float(torque)
