"""
cutoff.py

Radial cutoff chi: 1 where dist(x, dO) >= r, 0 where dist(x, dO) <= r/2,
a polynomial smoothstep in between. The outer boundary dO is the circle or
sphere of radius R_O centred at the origin, so dist(x, dO) = R_O - |x|.

The smoothstep of order n has n vanishing derivatives at both plateau edges.
Order 6 keeps the third derivatives of the flow map Lipschitz, which the
Christoffel terms of the velocity operator differentiate once more.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import Polynomial


@dataclass(frozen=True)
class CutoffSpec:
    r: float
    R_O: float
    order: int = 6

    def __post_init__(self):
        if not 0.0 < self.r < self.R_O:
            raise ValueError(f"cutoff requires 0 < r < R_O, got r={self.r}, R_O={self.R_O}")
        if self.order < 2:
            raise ValueError(f"cutoff smoothstep order must be at least 2, got {self.order}")

    def admits(self, R_S: float) -> bool:
        """True when a concentric particle of radius R_S sits in the plateau."""
        return self.R_O - R_S > self.r


@lru_cache(maxsize=None)
def _smoothstep_polynomials(order: int):
    coef = np.zeros(2 * order + 2)
    for n in range(order + 1):
        coef[order + 1 + n] = comb(order + n, n) * comb(2 * order + 1, order - n) * (-1) ** n
    p = Polynomial(coef)
    return p, p.deriv(1), p.deriv(2)


def smoothstep(s, order: int = 6):
    """Smoothstep of the given order and its first two derivatives, clamped to [0, 1]."""
    s = np.asarray(s, dtype=float)
    p, dp, ddp = _smoothstep_polynomials(order)
    inside = (s > 0.0) & (s < 1.0)
    sc = np.clip(s, 0.0, 1.0)
    value = np.where(s >= 1.0, 1.0, np.where(inside, p(sc), 0.0))
    first = np.where(inside, dp(sc), 0.0)
    second = np.where(inside, ddp(sc), 0.0)
    return value, first, second


def _normalized_distance(x: np.ndarray, spec: CutoffSpec):
    rho = np.sqrt(np.sum(x**2, axis=0))
    s = (spec.R_O - rho - 0.5 * spec.r) / (0.5 * spec.r)
    return rho, s


def chi(x, spec: CutoffSpec) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _, s = _normalized_distance(x, spec)
    return smoothstep(s, spec.order)[0]


def chi_derivatives(x, spec: CutoffSpec):
    """Return chi, its gradient (dim, ...) and its Hessian (dim, dim, ...)."""
    x = np.asarray(x, dtype=float)
    dim = x.shape[0]
    rho, s = _normalized_distance(x, spec)
    value, first, second = smoothstep(s, spec.order)
    safe_rho = np.where(rho > 0.0, rho, 1.0)
    unit = x / safe_rho
    k = 2.0 / spec.r
    gradient = -k * first * unit
    eye = np.eye(dim).reshape((dim, dim) + (1,) * (x.ndim - 1))
    outer = unit[:, None] * unit[None, :]
    hess = k * k * second * outer - k * first * (eye - outer) / safe_rho
    return value, gradient, hess
