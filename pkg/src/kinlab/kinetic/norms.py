"""Weighted L^p norms ||w f||_{L^p_v} returned as ExtReal."""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ..errors import UnknownTail
from .densities import Density, log_power
from .extreal import ExtReal
from .fields import Tail, Weight
from .quadrature import (DEFAULT_SPEC, QuadratureSpec, adaptive_product_rule, find_cutoff,
                         log_integrate, radial_nodes, sphere_rule)
from .special import log_sphere_area, logsumexp


def _weight_params(w):
    if w is None:
        return 0.0, 1.0, 0.0
    if isinstance(w, Weight):
        return w.alpha, w.beta, w.delta
    alpha, beta, delta = w
    return float(alpha), float(beta), float(delta)


def divergence_witness(tail: Tail | None, w, p: float, dim: int) -> str | None:
    """Exponent comparison between the weight and the density's tail.

    Returns a witness string when ||w f||_p is provably infinite, else None.
    """
    if tail is None:
        return None
    alpha, beta, delta = _weight_params(w)
    if alpha > 0 and beta > tail.power:
        return f"β > {tail.power:g}"
    if alpha > 0 and beta == tail.power:
        if alpha > tail.coef:
            return f"α′ − {tail.coef:g} > 0"
        if alpha == tail.coef:
            if tail.drift:
                return "α′ equals the decay rate and the center drifts"
            poly = 2 * delta + tail.poly
            if math.isinf(p):
                if poly > 0:
                    return f"polynomial order {poly:g} > 0"
            elif p * poly + dim >= 0:
                return f"p·{poly:g} + N ≥ 0"
    return None


def _log_weight(alpha, beta, delta):
    def lw(speed):
        s = np.asarray(speed, dtype=float)
        return delta * np.log1p(s * s) + alpha * s ** beta
    return lw


def weighted_lp_norm(f: Density, w, p: float, dim: int | None = None,
                     spec: QuadratureSpec = DEFAULT_SPEC, tail: Tail | None = None) -> ExtReal:
    """||w f||_{L^p_v} for p in [1, inf].

    ``w`` is a :class:`Weight`, a raw (alpha, beta, delta) triple (alpha = 0
    allowed) or None for the unweighted norm.  PosInfinity is declared only
    from the exponent comparison against the density's tail (``tail``
    overrides the tail recorded on the density).
    """
    dim = f.dim if dim is None else dim
    if not (p >= 1):
        raise ValueError("p must be >= 1")
    alpha, beta, delta = _weight_params(w)
    lw = _log_weight(alpha, beta, delta)
    tail = tail if tail is not None else f.tail
    if not f.compact and tail is None and f.tail is None:
        known = False
    else:
        known = True
    witness = divergence_witness(tail, w, p, dim) if not f.compact else None
    if witness:
        return ExtReal.infinity(witness)
    try:
        if math.isinf(p):
            return ExtReal.from_log(_log_sup(f, lw, spec))
        return ExtReal.from_log(_log_lp_power(f, lw, p, spec) / p)
    except UnknownTail:
        if known:
            raise
        raise UnknownTail("no tail exponent supplied and the weighted integrand grows at the cutoff")


def _log_lp_power(f: Density, lw, p: float, spec: QuadratureSpec) -> float:
    n = f.dim
    if f.isotropic:
        def log_g(r):
            return p * (lw(r) + f.log_radial(r)) + log_power(r, n - 1)
        r0 = min(c.r_min for c in f.components)
        upper = _upper(f, log_g, r0, spec)
        scale = min((c.scale for c in f.components if c.scale), default=None)
        return log_sphere_area(n) + log_integrate(log_g, r0, upper, spec, breaks=f.breaks, scale=scale)
    # partition of unity: (w f)^p = sum_c f_c w^p f^{p-1}, each term on its own component's grid
    shared = p != 1 and not f.components_disjoint()
    parts = []
    for c in f.components:
        def log_g(v, c=c):
            own = c.log_eval(v)
            if not shared:
                return p * (lw(np.linalg.norm(v, axis=-1)) + own)
            rest = np.where(np.isfinite(own), (p - 1) * f.log_eval(v), 0.0)
            return own + p * lw(np.linalg.norm(v, axis=-1)) + rest
        center = c.center_vec
        if c.compact:
            upper = c.r_max
        else:
            if c.r_min == 0:
                center = _peak_center(log_g, center)
            upper = spec.radial_cutoff if spec.radial_cutoff is not None else _ray_cutoff(log_g, c, spec, center)
        parts.append(adaptive_product_rule(log_g, center, c.r_min, upper, n, spec, c.breaks)[0])
    return logsumexp(np.array(parts))


def _peak_center(log_g, start):
    """Local maximiser of a whole-space integrand; the weight can pull it far from the component centre."""
    base = float(log_g(start))
    res = minimize(lambda v: -float(log_g(v)), start, method="BFGS", jac="3-point", options={"gtol": 1e-8})
    if math.isfinite(res.fun) and -res.fun > base:
        return np.asarray(res.x, dtype=float)
    return start


def _upper(f: Density, log_g, r0: float, spec: QuadratureSpec) -> float:
    if f.compact:
        return max(c.r_max for c in f.components)
    if spec.radial_cutoff is not None:
        return spec.radial_cutoff
    scale = min((c.scale for c in f.components if c.scale), default=None)
    return find_cutoff(log_g, r0, spec, f.breaks, scale)


def _ray_cutoff(log_g, c, spec: QuadratureSpec, center=None) -> float:
    center = c.center_vec if center is None else center
    dirs, _ = sphere_rule(c.dim, spec.with_(sphere_rule="product-rule"), 6)
    best = 0.0
    for d in dirs:
        ray = lambda r, d=d: log_g(center[None, :] + np.asarray(r)[..., None] * d)
        best = max(best, find_cutoff(ray, c.r_min, spec, c.breaks, c.scale))
    return best


def _log_sup(f: Density, lw, spec: QuadratureSpec) -> float:
    if f.isotropic:
        def obj(r):
            return lw(r) + f.log_radial(r)
        r0 = min(c.r_min for c in f.components)
        try:
            upper = _upper(f, obj, r0, spec)
        except UnknownTail:
            if not _balanced(f.tail, lw):
                raise
            # weight exactly cancels the decay: the log is eventually flat or decreasing
            upper = 100.0 * max([1.0, r0] + list(f.breaks))
        grid = np.unique(np.concatenate([
            np.linspace(r0, upper, 4001),
            r0 + (upper - r0) * np.geomspace(1e-9, 1, 400),
            np.array([b for b in f.breaks if r0 <= b <= upper]),
            np.nextafter(np.array([b for b in f.breaks if r0 < b <= upper] + [upper]), -np.inf),
            np.nextafter(np.array([b for b in f.breaks if r0 <= b < upper] + [r0]), np.inf),
        ]))
        grid = grid[(grid >= r0) & (grid <= upper)]
        vals = obj(grid)
        i = int(np.argmax(vals))
        best = float(vals[i])
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        if hi > lo and math.isfinite(best):
            res = minimize_scalar(lambda r: -float(obj(np.array(r))), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12 * max(1.0, hi)})
            best = max(best, -float(res.fun))
        return best
    return _log_sup_general(f, lw, spec)[0]


def _balanced(tail, lw) -> bool:
    if tail is None:
        return False
    probe = np.array([1e3, 1e4])
    growth = lw(probe) - tail.coef * probe ** tail.power
    return bool(np.all(np.abs(np.diff(growth)) < 1e-6 * np.abs(growth).max() + 1e-9))


def _log_sup_general(f: Density, lw, spec: QuadratureSpec):
    n = f.dim

    def obj(v):
        v = np.asarray(v, dtype=float)
        return lw(np.linalg.norm(v, axis=-1)) + f.log_eval(v)

    best, arg = -math.inf, None
    for c in f.components:
        if c.compact:
            upper = c.r_max
        else:
            upper = _ray_cutoff(obj, c, spec)
        dirs, _ = sphere_rule(n, spec.with_(sphere_rule="product-rule"), max(spec.sphere_order, 16))
        r, _ = radial_nodes(c.r_min, upper, 16, 16, c.breaks)
        v = c.center_vec[None, None, :] + r[:, None, None] * dirs[None, :, :]
        vals = obj(v)
        idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
        if vals[idx] > best:
            best, arg = float(vals[idx]), v[idx]
    if arg is not None and n > 1:
        res = minimize(lambda x: -float(obj(x)), arg, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        if -res.fun > best:
            best, arg = float(-res.fun), res.x
    return best, arg
