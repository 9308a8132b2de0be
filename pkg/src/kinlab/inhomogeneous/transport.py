"""Velocity moments in the radial frame of x.

With x = X e_1 and v = r (cos(theta) e_1 + sin(theta) e_perp), every quantity
used by the mild formulation depends only on (r, theta), so moments reduce to
two-dimensional integrals with the factor |S^{N-2}| sin^{N-2}(theta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..kinetic.quadrature import gauss_legendre
from ..kinetic.special import log_sphere_area


@dataclass(frozen=True)
class FrameRule:
    """Angular rule in theta (N >= 2) or the two rays v = +-r e_1 (N = 1)."""
    dim: int
    order: int = 32

    def nodes(self):
        if self.dim == 1:
            return np.array([1.0, -1.0]), np.zeros(2)
        x, w = gauss_legendre(self.order)
        theta = 0.5 * math.pi * (x + 1.0)
        sin = np.sin(theta)
        with np.errstate(divide="ignore"):
            logw = (np.log(0.5 * math.pi * w) + (self.dim - 2) * np.log(sin)
                    + log_sphere_area(self.dim - 1))
        return np.cos(theta), logw


def weighted_moments(log_f: np.ndarray, log_w: np.ndarray, r: np.ndarray, cos: np.ndarray):
    """(log rho, u along e_1, E / rho) from log integrand values and log weights."""
    lf = log_f + log_w
    m = np.max(lf) if lf.size else -math.inf
    if not np.isfinite(m):
        return -math.inf, 0.0, 0.0
    p = np.exp(lf - m)
    s = p.sum()
    u = float(np.sum(p * r * cos) / s)
    e = float(np.sum(p * r * r) / s)
    return m + math.log(s), u, e


def support_segments(lower_ok, upper_ok, r_max: float, cos: np.ndarray, grid: int = 513,
                     iterations: int = 60):
    """Intervals in r (per angular node) where both support predicates hold.

    ``lower_ok(r, cos)`` and ``upper_ok(r, cos)`` are vectorised booleans.  The
    feasible set is located on a grid and its end points refined by bisection.
    Returns a list (one entry per node) of arrays of shape (k, 2).
    """
    rs = np.linspace(0.0, r_max, grid)
    c = cos[:, None]
    feas = lower_ok(rs[None, :], c) & upper_ok(rs[None, :], c)
    node, edge = np.nonzero(np.diff(feas.astype(np.int8), axis=1))
    inside_left = feas[node, edge]
    ci = cos[node]
    a, b = rs[edge], rs[edge + 1]
    # all sign changes of all nodes are refined together
    for _ in range(iterations):
        mid = 0.5 * (a + b)
        same = (lower_ok(mid, ci) & upper_ok(mid, ci)) == inside_left
        a = np.where(same, mid, a)
        b = np.where(same, b, mid)
    pts = 0.5 * (a + b)
    out = []
    for i in range(len(cos)):
        sel = node == i
        bounds = []
        start = 0.0 if feas[i, 0] else None
        for p, left_in in zip(pts[sel], inside_left[sel]):
            if left_in:
                bounds.append((start, p))
                start = None
            else:
                start = p
        if start is not None:
            bounds.append((start, r_max))
        out.append(np.array(bounds, dtype=float).reshape(-1, 2))
    return out


def segment_nodes(bounds: np.ndarray, order: int):
    """GL nodes and log-weights on a union of intervals."""
    if len(bounds) == 0:
        return np.zeros(0), np.zeros(0)
    x, w = gauss_legendre(order)
    lo, hi = bounds[:, 0], bounds[:, 1]
    half = 0.5 * (hi - lo)
    keep = half > 0
    lo, hi, half = lo[keep], hi[keep], half[keep]
    nodes = (0.5 * (lo + hi))[:, None] + half[:, None] * x[None, :]
    logw = np.log(half)[:, None] + np.log(w)[None, :]
    return nodes.ravel(), logw.ravel()
