"""Macroscopic fields of the transported datum g(t, x, v) = f_0(x - v t, v)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..families import InhomFamily
from ..kinetic.fields import MacroFields
from .transport import FrameRule, segment_nodes, support_segments, weighted_moments


@dataclass(frozen=True)
class TransportRule:
    theta_order: int = 32
    radial_order: int = 24
    scan_points: int = 513


DEFAULT_RULE = TransportRule()


def _radial_reach(fam: InhomFamily, abs_x: float, t: float) -> float:
    # largest |v| in the support: r <= 2 (X + r t)^gamma + 10, iterated to its fixed point
    r = 2.0 * abs_x ** fam.gamma + 10.0
    for _ in range(200):
        nxt = 2.0 * (abs_x + r * t) ** fam.gamma + 10.0
        if abs(nxt - r) < 1e-12 * nxt:
            break
        r = nxt
    return 1.02 * r + 1e-9


def transported_log_density(fam: InhomFamily, abs_x: float, t: float, r, cos):
    """log f_0(x - v t, v) in the radial frame (x = X e_1)."""
    r = np.asarray(r, dtype=float)
    d = np.sqrt(np.maximum(abs_x * abs_x - 2.0 * abs_x * t * r * cos + (t * r) ** 2, 0.0))
    return fam.log_radial_eval(d, r)


def transported_moments(fam: InhomFamily, t: float, abs_x: float, rule: TransportRule = DEFAULT_RULE):
    """(log rho, u_r, E / rho) of g at (t, |x|); u_r is the component along x."""
    frame = FrameRule(fam.dim, rule.theta_order)
    cos, logw_ang = frame.nodes()
    g = fam.gamma

    def dist(r, c):
        return np.sqrt(np.maximum(abs_x * abs_x - 2.0 * abs_x * t * r * c + (t * r) ** 2, 0.0))

    if t == 0:
        lo, hi = fam.shell(abs_x)
        segs = [np.array([[float(lo), float(hi)]])] * len(cos)
    else:
        segs = support_segments(lambda r, c: r >= dist(r, c) ** g,
                                lambda r, c: r <= 2.0 * dist(r, c) ** g + 10.0,
                                _radial_reach(fam, abs_x, t), cos, rule.scan_points)
    rs, cs, lws = [], [], []
    for c, lw_a, seg in zip(cos, logw_ang, segs):
        nodes, lw = segment_nodes(seg, rule.radial_order)
        rs.append(nodes)
        cs.append(np.full(nodes.shape, c))
        lws.append(lw + lw_a)
    r = np.concatenate(rs)
    c = np.concatenate(cs)
    with np.errstate(divide="ignore"):
        logw = np.concatenate(lws) + (fam.dim - 1) * np.log(r)
    d = dist(r, c)
    # inside the located segments the profile (no indicator) is the integrand
    log_f = fam.log_profile(d, r)
    return weighted_moments(log_f, logw, r, c)


def fields_from_moments(log_rho: float, u_r: float, energy: float, dim: int) -> tuple:
    temp = max(energy - u_r * u_r, 0.0) / dim
    return log_rho, u_r, temp


def first_iterate_fields(fam: InhomFamily, t: float, x, rule: TransportRule = DEFAULT_RULE) -> MacroFields:
    """(rho, u, T) of f_0(x - v t, v); x may be a vector or a radius |x|."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if x_arr.size == 1 and np.ndim(x) == 0:
        abs_x, direction = float(x_arr[0]), np.eye(fam.dim)[0]
    else:
        if x_arr.size != fam.dim:
            raise ValueError("x has the wrong dimension")
        abs_x = float(np.linalg.norm(x_arr))
        direction = x_arr / abs_x if abs_x > 0 else np.eye(fam.dim)[0]
    log_rho, u_r, energy = transported_moments(fam, t, abs_x, rule)
    log_rho, u_r, temp = fields_from_moments(log_rho, u_r, energy, fam.dim)
    if t == 0 or abs_x == 0:
        u_r = 0.0  # isotropic in v at t = 0 (and at x = 0 by symmetry)
    return MacroFields.from_log(log_rho, u_r * direction, temp)
