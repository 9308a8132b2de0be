"""Log-space adaptive quadrature.

Integrands are passed as vectorised functions returning the *log* of the
integrand, so quantities like e^{-2500} never underflow.  One-dimensional
integrals use panel-wise Gauss-Legendre with bisection refinement; integrals
over a ball or shell in R^N use a radial rule times a sphere rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from ..errors import QuadratureFailure, UnknownTail
from .special import log_sphere_area, logsumexp

SPHERE_RULES = ("exact-isotropic-reduction", "product-rule", "monte-carlo")


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol_log: float = 60.0
    max_subdivisions: int = 4000
    radial_cutoff: float | None = None  # None: auto from the integrand's decay
    sphere_rule: str = "exact-isotropic-reduction"
    sphere_order: int = 24
    mc_samples: int = 20000
    seed: int = 0

    def __post_init__(self):
        if self.sphere_rule not in SPHERE_RULES:
            raise ValueError(f"sphere_rule must be one of {SPHERE_RULES}")
        if not (0 < self.rel_tol < 1):
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.abs_tol_log <= 0:
            raise ValueError("abs_tol_log must be positive")

    def with_(self, **changes) -> "QuadratureSpec":
        return replace(self, **changes)


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panel_logs(log_f, lo: np.ndarray, hi: np.ndarray, order: int) -> np.ndarray:
    x, w = gauss_legendre(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(log_f(nodes), dtype=float)
    with np.errstate(divide="ignore"):
        logw = np.log(w)[None, :] + np.log(half)[:, None]
    return logsumexp(vals + logw, axis=1)


def find_cutoff(log_f, a: float, spec: QuadratureSpec, breaks=(), scale: float | None = None,
                r_max: float = 1e12) -> float:
    """Radius beyond which log_f stays ``abs_tol_log`` below its running peak."""
    if scale is None or scale <= 0:
        scale = 1e-3 * max(1.0, abs(a))
    pts = [a + scale * 2.0 ** k for k in range(200) if a + scale * 2.0 ** k <= r_max]
    last_break = max([b for b in breaks if b > a], default=a)
    pts = np.array(sorted(set(pts) | {b for b in breaks if b > a}))
    vals = np.asarray(log_f(pts), dtype=float)
    peak = -math.inf
    for i, (r, lv) in enumerate(zip(pts, vals)):
        peak = max(peak, lv)
        if r < last_break or peak == -math.inf:
            continue
        if lv < peak - spec.abs_tol_log and (i == 0 or lv <= vals[i - 1]):
            return float(r)
    if peak == -math.inf:
        return float(last_break if last_break > a else a + scale)
    raise UnknownTail(f"integrand has not decayed by r = {pts[-1]:.3g}")


def log_integrate(log_f, a: float, b: float | None, spec: QuadratureSpec = DEFAULT_SPEC,
                  breaks=(), scale: float | None = None, order: int = 24) -> float:
    """log of the integral of exp(log_f) over [a, b]; ``b=None`` or inf means auto cutoff."""
    if b is None or math.isinf(b):
        b = find_cutoff(log_f, a, spec, breaks, scale)
    if b <= a:
        return -math.inf
    edges = {a, b} | {x for x in breaks if a < x < b}
    # geometric grading from the left end: resolves narrow peaks at a
    s = scale if scale else 1e-3 * max(1.0, abs(a))
    k = 0
    while a + s * 2.0 ** k < b and k < 200:
        edges.add(a + s * 2.0 ** k)
        k += 1
    edges = np.array(sorted(edges))
    lo, hi = edges[:-1], edges[1:]
    coarse = _panel_logs(log_f, lo, hi, order)
    total_est = logsumexp(coarse)
    accepted = []
    splits = 0
    log_tol = math.log(spec.rel_tol)
    while lo.size:
        mid = 0.5 * (lo + hi)
        left = _panel_logs(log_f, lo, mid, order)
        right = _panel_logs(log_f, mid, hi, order)
        fine = np.logaddexp(left, right)
        total_est = max(total_est, logsumexp(np.concatenate([fine, accepted])) if accepted else logsumexp(fine))
        with np.errstate(invalid="ignore"):
            both_zero = np.isneginf(fine) & np.isneginf(coarse)
            rel = np.abs(np.expm1(coarse - fine))
        ok = both_zero | (rel <= spec.rel_tol) | (fine < total_est + log_tol - 8.0)
        ok &= ~np.isnan(fine) | both_zero
        accepted.extend(fine[ok].tolist())
        bad = ~ok
        if not bad.any():
            break
        splits += int(bad.sum())
        if splits > spec.max_subdivisions:
            raise QuadratureFailure(
                f"tolerance {spec.rel_tol:g} not met within {spec.max_subdivisions} subdivisions "
                f"on [{a:g}, {b:g}]")
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    return logsumexp(np.array(accepted)) if accepted else -math.inf


# ---- sphere rules -------------------------------------------------------

def sphere_rule(dim: int, spec: QuadratureSpec, order: int | None = None):
    """Directions (M, dim) and weights summing to |S^{dim-1}|."""
    order = order or spec.sphere_order
    if spec.sphere_rule == "monte-carlo" or dim > 3:
        rng = np.random.default_rng(spec.seed)
        d = rng.standard_normal((spec.mc_samples, dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return d, np.full(len(d), math.exp(log_sphere_area(dim)) / len(d))
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dim == 2:
        m = 2 * order
        phi = 2 * math.pi * (np.arange(m) + 0.5) / m
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(m, 2 * math.pi / m)
    mu, wmu = gauss_legendre(order)
    m = 2 * order
    phi = 2 * math.pi * (np.arange(m) + 0.5) / m
    s = np.sqrt(1 - mu ** 2)
    dirs = np.stack([
        (s[:, None] * np.cos(phi)[None, :]).ravel(),
        (s[:, None] * np.sin(phi)[None, :]).ravel(),
        np.repeat(mu, m),
    ], axis=1)
    w = np.repeat(wmu, m) * (2 * math.pi / m)
    return dirs, w


def radial_nodes(r0: float, r1: float, panels: int, order: int, breaks=()):
    edges = np.unique(np.concatenate([np.linspace(r0, r1, panels + 1),
                                      [b for b in breaks if r0 < b < r1]]))
    x, w = gauss_legendre(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def product_rule_moments(log_f, center, r0: float, r1: float, dim: int, spec: QuadratureSpec,
                         radial_panels: int = 8, radial_order: int = 16, sphere_order=None,
                         breaks=()):
    """Integrate exp(log_f) over the shell r0 <= |v - center| <= r1.

    Returns (log mass, mean of v - center, mean of |v - center|^2) of the
    integrand viewed as a density.  The mean quantities are ratios, so they are
    immune to the overall scale of f.
    """
    center = np.asarray(center, dtype=float)
    dirs, wdir = sphere_rule(dim, spec, sphere_order)
    r, wr = radial_nodes(r0, r1, radial_panels, radial_order, breaks)
    offsets = r[:, None, None] * dirs[None, :, :]
    v = center[None, None, :] + offsets
    with np.errstate(divide="ignore"):
        logw = (np.log(wr) + (dim - 1) * np.log(np.maximum(r, 1e-300)))[:, None] + np.log(wdir)[None, :]
    lf = np.asarray(log_f(v), dtype=float) + logw
    m = np.max(lf)
    if m == -math.inf:
        return -math.inf, np.zeros(dim), 0.0
    p = np.exp(lf - m)
    s = p.sum()
    mean_off = np.einsum("ij,ijk->k", p, offsets) / s
    mean_sq = float(np.einsum("ij,i->", p, r * r) / s)
    return m + math.log(s), mean_off, mean_sq


def product_rule_log_integral(log_f, center, r0: float, r1: float, dim: int, spec: QuadratureSpec,
                              radial_panels: int = 8, radial_order: int = 16, sphere_order=None,
                              breaks=()) -> float:
    return product_rule_moments(log_f, center, r0, r1, dim, spec, radial_panels, radial_order,
                                sphere_order, breaks)[0]


def adaptive_product_rule(log_f, center, r0, r1, dim, spec, breaks=(), max_levels: int = 5,
                          moments: bool = True):
    """Product rule with radial/angular doubling until the log mass settles."""
    panels, order, sorder = 4, 16, spec.sphere_order
    prev = product_rule_moments(log_f, center, r0, r1, dim, spec, panels, order, sorder, breaks)
    for _ in range(max_levels):
        panels *= 2
        sorder = int(sorder * 1.5)
        cur = product_rule_moments(log_f, center, r0, r1, dim, spec, panels, order, sorder, breaks)
        if prev[0] == -math.inf and cur[0] == -math.inf:
            return cur
        if abs(math.expm1(prev[0] - cur[0])) <= spec.rel_tol * 10 or spec.sphere_rule == "monte-carlo":
            return cur
        prev = cur
    raise QuadratureFailure("product rule did not converge")
