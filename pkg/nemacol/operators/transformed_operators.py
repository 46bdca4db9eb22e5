"""
transformed_operators.py

Differential operators of the system pulled back to the reference annulus.
Each operator is written as its physical counterpart plus a metric
correction, so it reduces exactly to the grid operator when the map is the
identity. Indices follow the arrays of TransformField; repeated indices are
summed over both planar directions.
"""

from __future__ import annotations

import logging

import numpy as np

from nemacol.grid.annulus import AnnulusGrid, div, grad, hessian, laplacian
from nemacol.transform.flow_map import TransformField

logger = logging.getLogger(__name__)


def _require(T: TransformField) -> None:
    if not T.has_tensors:
        raise ValueError("transform tensors missing; call tensors() before applying operators")


def _coefficients(T: TransformField) -> dict:
    """Per-step coefficient fields of the velocity operator, cached on T."""
    cached = T._cache.get("L1")
    if cached is not None:
        return cached
    grid = T.grid
    g_up, Gamma = T.g_upper, T.Gamma
    eye = np.eye(2).reshape(2, 2, 1, 1)
    # C[i, j, k] = g^{kl} Gamma^i_{jl}
    C = np.einsum("kl...,ijl...->ijk...", g_up, Gamma)
    E = np.einsum("kl...,mjl...,ikm...->ij...", g_up, Gamma, Gamma, optimize=True)
    coeffs = {
        "g_minus": g_up - eye,
        "first_order": 2.0 * np.einsum("kl...,ijk...->ijl...", g_up, Gamma),
        "reaction": div(C, grid) + E,
    }
    T._cache["L1"] = coeffs
    return coeffs


def L1(v: np.ndarray, T: TransformField) -> np.ndarray:
    """Pulled-back vector Laplacian."""
    _require(T)
    grid = T.grid
    lap = laplacian(v, grid)
    if T.flat:
        return lap
    c = _coefficients(T)
    Dv = grad(v, grid)
    flux = np.einsum("jk...,ik...->ij...", c["g_minus"], Dv)
    return (
        lap
        + div(flux, grid)
        + np.einsum("ijl...,jl...->i...", c["first_order"], Dv)
        + np.einsum("ij...,j...->i...", c["reaction"], v)
    )


def L2(d: np.ndarray, T: TransformField) -> np.ndarray:
    """Pulled-back componentwise Laplacian of the director."""
    _require(T)
    grid = T.grid
    lap = laplacian(d, grid)
    if T.flat:
        return lap
    eye = np.eye(2).reshape(2, 2, 1, 1)
    return (
        lap
        + np.einsum("jk...,ijk...->i...", T.g_upper - eye, hessian(d, grid))
        + np.einsum("k...,ik...->i...", T.lap_Y, grad(d, grid))
    )


def Mop(v: np.ndarray, T: TransformField) -> np.ndarray:
    """Correction of the time derivative for the moving frame."""
    _require(T)
    if not T.moving:
        return np.zeros_like(v)
    Dv = grad(v, T.grid)
    return (
        np.einsum("j...,ij...->i...", T.dtY, Dv)
        + np.einsum("ijk...,k...,j...->i...", T.Gamma, T.dtY, v)
        + np.einsum("ik...,kj...,j...->i...", T.JY, T.dt_JX, v)
    )


def Nop(v: np.ndarray, T: TransformField) -> np.ndarray:
    """Pulled-back convective term."""
    _require(T)
    out = np.einsum("j...,ij...->i...", v, grad(v, T.grid))
    if T.flat:
        return out
    return out + np.einsum("ijk...,j...,k...->i...", T.Gamma, v, v)


def Gop(p: np.ndarray, T: TransformField) -> np.ndarray:
    """Pulled-back pressure gradient g^{ij} d_j p."""
    _require(T)
    gp = grad(p, T.grid)
    if T.flat:
        return gp
    return np.einsum("ij...,j...->i...", T.g_upper, gp)


def Bphys(d: np.ndarray, h: np.ndarray, grid: AnnulusGrid) -> np.ndarray:
    """[B(d)h]_i = d_i d_l Lap h_l + d_k d_l d_k d_i h_l; B(d)d = div(grad d grad d^T)."""
    Dd = grad(d, grid)
    return np.einsum("li...,l...->i...", Dd, laplacian(h, grid)) + np.einsum(
        "lk...,lki...->i...", Dd, hessian(h, grid)
    )


def Bop(d: np.ndarray, h: np.ndarray, T: TransformField) -> np.ndarray:
    """Pulled-back B(d)h, returned in physical Cartesian components."""
    _require(T)
    grid = T.grid
    if T.flat:
        return Bphys(d, h, grid)
    JY = T.JY
    phys_dd = np.einsum("lm...,mi...->li...", grad(d, grid), JY)
    phys_hh = np.einsum("ljm...,jk...,mi...->lki...", hessian(h, grid), JY, JY, optimize=True)
    phys_hh = phys_hh + np.einsum("lm...,mki...->lki...", grad(h, grid), T.hess_Y)
    return np.einsum("l...,li...->i...", L2(h, T), phys_dd) + np.einsum("lk...,lki...->i...", phys_dd, phys_hh)
