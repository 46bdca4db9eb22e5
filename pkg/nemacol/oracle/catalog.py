"""
catalog.py

NEMATIC COLLOID SIMULATION - ANALYTIC FIELD CATALOG

PURPOSE:
========
Closed-form scalar, vector and director fields with exact first and second
derivatives, used as references for the discrete operators. Fields are
assembled from scalar profiles:

- Cartesian products P(x) Q(y) of one-dimensional trigonometric factors
- polynomials in (x, y) of degree at most two
- separable polar products R(r) A(theta) with R a numpy Polynomial
- compositions g(phi) of a one-dimensional function with a profile

Each catalog entry is checked against centred finite differences when it is
first requested.

Array conventions follow the grid: components on axis 0, then
gradient[n, a] = d_a f_n and hessian[n, a, b] = d_a d_b f_n.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Tuple

import numpy as np
from numpy.polynomial import Polynomial

logger = logging.getLogger(__name__)

# (f, f', f'') of one variable
Function1D = Tuple[Callable, Callable, Callable]

SELF_CHECK_STEP = 1e-5
SELF_CHECK_TOL = 1e-6
SELF_CHECK_POINTS = np.array([[0.41, -0.55, 0.12, -0.3], [0.33, 0.21, -0.71, -0.5]])


def sin_k(k: float = 1.0) -> Function1D:
    return (lambda s: np.sin(k * s), lambda s: k * np.cos(k * s), lambda s: -(k**2) * np.sin(k * s))


def cos_k(k: float = 1.0) -> Function1D:
    return (lambda s: np.cos(k * s), lambda s: -k * np.sin(k * s), lambda s: -(k**2) * np.cos(k * s))


def one() -> Function1D:
    return (np.ones_like, np.zeros_like, np.zeros_like)


@dataclass(frozen=True)
class ScalarProfile:
    """A scalar function of the plane with its gradient and Hessian."""

    f: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]


def product(px: Function1D, qy: Function1D, c: float = 1.0) -> ScalarProfile:
    """c P(x) Q(y)."""
    p, dp, ddp = px
    q, dq, ddq = qy

    def grad(x):
        return c * np.stack([dp(x[0]) * q(x[1]), p(x[0]) * dq(x[1])])

    def hess(x):
        xy = dp(x[0]) * dq(x[1])
        return c * np.stack(
            [np.stack([ddp(x[0]) * q(x[1]), xy]), np.stack([xy, p(x[0]) * ddq(x[1])])]
        )

    return ScalarProfile(f=lambda x: c * p(x[0]) * q(x[1]), grad=grad, hess=hess)


def quadratic(c0: float = 0.0, b=(0.0, 0.0), A=((0.0, 0.0), (0.0, 0.0))) -> ScalarProfile:
    """c0 + b.x + x.A x / 2 with A symmetric."""
    b = np.asarray(b, dtype=float)
    A = np.asarray(A, dtype=float)
    if not np.allclose(A, A.T):
        raise ValueError("quadratic profile needs a symmetric matrix")

    def lead(v, x):
        return v.reshape(v.shape + (1,) * (x.ndim - 1))

    return ScalarProfile(
        f=lambda x: c0 + np.einsum("a,a...->...", b, x) + 0.5 * np.einsum("a...,ab,b...->...", x, A, x),
        grad=lambda x: lead(b, x) + np.einsum("ab,b...->a...", A, x),
        hess=lambda x: np.broadcast_to(lead(A, x), A.shape + x.shape[1:]).copy(),
    )


def polar_product(radial: Polynomial, angular: Function1D, c: float = 1.0) -> ScalarProfile:
    """c R(r) A(theta) with Cartesian derivatives by the polar chain rule."""
    dR, ddR = radial.deriv(1), radial.deriv(2)
    a, da, dda = angular

    def parts(x):
        r = np.hypot(x[0], x[1])
        t = np.arctan2(x[1], x[0])
        return r, np.cos(t), np.sin(t), t

    def f(x):
        r, _, _, t = parts(x)
        return c * radial(r) * a(t)

    def grad(x):
        r, co, si, t = parts(x)
        fr = dR(r) * a(t)
        ft = radial(r) * da(t)
        return c * np.stack([co * fr - si * ft / r, si * fr + co * ft / r])

    def hess(x):
        r, co, si, t = parts(x)
        fr, ft = dR(r) * a(t), radial(r) * da(t)
        frr, frt, ftt = ddR(r) * a(t), dR(r) * da(t), radial(r) * dda(t)
        cs, c2, s2 = co * si, co**2, si**2
        fxx = c2 * frr - 2.0 * cs * frt / r + s2 * ftt / r**2 + s2 * fr / r + 2.0 * cs * ft / r**2
        fyy = s2 * frr + 2.0 * cs * frt / r + c2 * ftt / r**2 + c2 * fr / r - 2.0 * cs * ft / r**2
        fxy = cs * frr + (c2 - s2) * frt / r - cs * ftt / r**2 - cs * fr / r - (c2 - s2) * ft / r**2
        return c * np.stack([np.stack([fxx, fxy]), np.stack([fxy, fyy])])

    return ScalarProfile(f=f, grad=grad, hess=hess)


def compose(outer: Function1D, inner: ScalarProfile) -> ScalarProfile:
    """g(phi) with g of one variable."""
    g, dg, ddg = outer

    def grad(x):
        return dg(inner.f(x)) * inner.grad(x)

    def hess(x):
        phi, dphi = inner.f(x), inner.grad(x)
        return ddg(phi) * dphi[:, None] * dphi[None, :] + dg(phi) * inner.hess(x)

    return ScalarProfile(f=lambda x: g(inner.f(x)), grad=grad, hess=hess)


@dataclass(frozen=True)
class AnalyticField:
    """A field with one ScalarProfile per component."""

    name: str
    kind: str
    components: Tuple[ScalarProfile, ...]

    def value(self, x: np.ndarray) -> np.ndarray:
        out = np.stack([c.f(x) for c in self.components])
        return out[0] if self.kind == "scalar" else out

    def gradient(self, x: np.ndarray) -> np.ndarray:
        out = np.stack([c.grad(x) for c in self.components])
        return out[0] if self.kind == "scalar" else out

    def hessian(self, x: np.ndarray) -> np.ndarray:
        out = np.stack([c.hess(x) for c in self.components])
        return out[0] if self.kind == "scalar" else out

    def laplacian(self, x: np.ndarray) -> np.ndarray:
        hess = np.stack([c.hess(x) for c in self.components])
        lap = hess[:, 0, 0] + hess[:, 1, 1]
        return lap[0] if self.kind == "scalar" else lap

    def divergence(self, x: np.ndarray) -> np.ndarray:
        if self.kind != "vector":
            raise ValueError(f"divergence needs a planar vector field, '{self.name}' is a {self.kind}")
        grad = self.gradient(x)
        return grad[0, 0] + grad[1, 1]

    def ericksen_force(self, x: np.ndarray) -> np.ndarray:
        """div(grad d grad d^T) for a director entry, in Cartesian components."""
        if self.kind != "director":
            raise ValueError(f"Ericksen force needs a director field, '{self.name}' is a {self.kind}")
        grad, hess = self.gradient(x), self.hessian(x)
        lap = hess[:, 0, 0] + hess[:, 1, 1]
        return np.einsum("li...,l...->i...", grad, lap) + np.einsum("lk...,lki...->i...", grad, hess)

    def self_check(self, points: np.ndarray = SELF_CHECK_POINTS) -> float:
        """Largest mismatch between the stored derivatives and centred differences."""
        eps = SELF_CHECK_STEP
        worst = 0.0
        for c in self.components:
            for a in range(2):
                e = np.zeros((2, 1))
                e[a] = eps
                fd_grad = (c.f(points + e) - c.f(points - e)) / (2.0 * eps)
                fd_hess = (c.grad(points + e) - c.grad(points - e)) / (2.0 * eps)
                scale = 1.0 + np.max(np.abs(c.hess(points)))
                worst = max(worst, float(np.max(np.abs(fd_grad - c.grad(points)[a]))) / scale)
                worst = max(worst, float(np.max(np.abs(fd_hess - c.hess(points)[:, a]))) / scale)
        return worst


def radial_window(R_S: float, R_O: float) -> Polynomial:
    """(r - R_S)^2 (R_O - r)^2: vanishes with its derivative on both circles."""
    return Polynomial.fromroots([R_S, R_S, R_O, R_O]) * 1.0


def neumann_ramp(R_S: float, R_O: float) -> Polynomial:
    """Cubic rising from 0 to 1 on [R_S, R_O] with zero slope at both ends."""
    L = R_O - R_S
    xi = Polynomial([-R_S / L, 1.0 / L])
    return 3.0 * xi**2 - 2.0 * xi**3


def _unit_twist() -> Tuple[ScalarProfile, ...]:
    phi = product(sin_k(), cos_k(), 0.5)
    zero = quadratic()
    return compose(sin_k(), phi), zero, compose(cos_k(), phi)


def _planar_unit() -> Tuple[ScalarProfile, ...]:
    phi = product(sin_k(), sin_k(), 0.4)
    return compose(cos_k(), phi), compose(sin_k(), phi), quadratic()


CATALOG: Dict[str, Tuple[str, Callable[[], Tuple[ScalarProfile, ...]]]] = {
    "constant": ("scalar", lambda: (quadratic(1.5),)),
    "x": ("scalar", lambda: (quadratic(b=(1.0, 0.0)),)),
    "linear": ("scalar", lambda: (quadratic(0.2, b=(0.7, -0.3)),)),
    "r_squared": ("scalar", lambda: (quadratic(A=((2.0, 0.0), (0.0, 2.0))),)),
    "cos_x": ("scalar", lambda: (product(cos_k(), one()),)),
    "sin_x_sin_y": ("scalar", lambda: (product(sin_k(), sin_k()),)),
    "sin_x_cos_y": ("scalar", lambda: (product(sin_k(), cos_k()),)),
    "rigid": ("vector", lambda: (quadratic(0.3, b=(0.0, -0.7)), quadratic(-0.2, b=(0.7, 0.0)))),
    "taylor_green": ("vector", lambda: (product(sin_k(), cos_k()), product(cos_k(), sin_k(), -1.0))),
    "shear": ("vector", lambda: (product(one(), sin_k(2.0)), product(cos_k(1.5), one(), 0.5))),
    "twist": ("director", lambda: (product(sin_k(), cos_k()), quadratic(), quadratic())),
    "unit_twist": ("director", _unit_twist),
    "planar_unit": ("director", _planar_unit),
}


@lru_cache(maxsize=None)
def catalog_entry(name: str) -> AnalyticField:
    """Catalog field by name, verified against finite differences on first use."""
    if name not in CATALOG:
        raise ValueError(f"Unknown catalog field: {name} (known: {', '.join(CATALOG)})")
    kind, build = CATALOG[name]
    field = AnalyticField(name=name, kind=kind, components=build())
    mismatch = field.self_check()
    if mismatch > SELF_CHECK_TOL:
        raise ValueError(f"catalog field '{name}' fails its finite-difference self-check ({mismatch:.2e})")
    logger.debug(f"Catalog field '{name}' verified (finite-difference mismatch {mismatch:.1e})")
    return field
