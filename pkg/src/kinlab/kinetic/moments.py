"""Velocity moments (rho, u, T) of a density by log-space quadrature."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ZeroMass
from .densities import Component, Density, log_power
from .fields import MacroFields
from .quadrature import (DEFAULT_SPEC, QuadratureSpec, adaptive_product_rule, find_cutoff,
                         log_integrate, sphere_rule)
from .special import log_sphere_area, logsumexp


@dataclass(frozen=True)
class ComponentMoments:
    log_mass: float
    mean_offset: np.ndarray  # E[v - center]
    mean_sq_offset: float    # E[|v - center|^2]
    center: np.ndarray


def _radial_upper(c: Component, log_g, spec: QuadratureSpec) -> float:
    if c.compact:
        return c.r_max
    if spec.radial_cutoff is not None:
        return spec.radial_cutoff
    return find_cutoff(log_g, c.r_min, spec, c.breaks, c.scale)


def radial_log_moment(c: Component, k: float, spec: QuadratureSpec = DEFAULT_SPEC, extra=None) -> float:
    """log of the integral of f(r) * r^k (times exp(extra(r))) over the component's shell."""
    def log_g(r):
        out = c.log_radial(r) + log_power(r, k)
        return out + extra(r) if extra is not None else out
    upper = _radial_upper(c, log_g, spec)
    return log_integrate(log_g, c.r_min, upper, spec, breaks=c.breaks, scale=c.scale)


def _anisotropic_upper(c: Component, spec: QuadratureSpec, log_f) -> float:
    if c.compact:
        return c.r_max
    if spec.radial_cutoff is not None:
        return spec.radial_cutoff
    dirs, _ = sphere_rule(c.dim, spec.with_(sphere_rule="product-rule"), 6)
    best = 0.0
    for d in dirs:
        ray = lambda r, d=d: log_f(c.center_vec[None, :] + np.asarray(r)[..., None] * d)
        best = max(best, find_cutoff(ray, c.r_min, spec, c.breaks, c.scale))
    return best


def component_moments(c: Component, spec: QuadratureSpec = DEFAULT_SPEC) -> ComponentMoments:
    n = c.dim
    if c.isotropic and spec.sphere_rule == "exact-isotropic-reduction":
        l0 = radial_log_moment(c, n - 1, spec)
        if l0 == -math.inf:
            return ComponentMoments(-math.inf, np.zeros(n), 0.0, c.center_vec)
        l2 = radial_log_moment(c, n + 1, spec)
        return ComponentMoments(log_sphere_area(n) + l0, np.zeros(n), math.exp(l2 - l0), c.center_vec)
    log_f = c.log_eval
    upper = _anisotropic_upper(c, spec, log_f)
    lm, off, sq = adaptive_product_rule(log_f, c.center_vec, c.r_min, upper, n, spec, c.breaks)
    return ComponentMoments(lm, off, sq, c.center_vec)


def moment_integrals(f: Density, spec: QuadratureSpec = DEFAULT_SPEC):
    """(log rho, mean velocity, mean |v - mean|^2) for the whole density."""
    parts = [component_moments(c, spec) for c in f.components]
    log_masses = np.array([p.log_mass for p in parts])
    log_total = logsumexp(log_masses)
    if log_total == -math.inf:
        raise ZeroMass("density has zero mass; u and T are undefined")
    w = np.exp(log_masses - log_total)
    means = [p.center + p.mean_offset for p in parts]
    u = sum(wi * mi for wi, mi in zip(w, means))
    # |v - u|^2 = |v - c|^2 + 2 (c - u).(v - c) + |c - u|^2, component by component
    central = 0.0
    for wi, p in zip(w, parts):
        cu = p.center - u
        central += wi * (p.mean_sq_offset + 2.0 * float(cu @ p.mean_offset) + float(cu @ cu))
    if f.isotropic:
        u = np.zeros(f.dim)
    return log_total, np.asarray(u, dtype=float), float(central)


def moments(f: Density, spec: QuadratureSpec = DEFAULT_SPEC) -> MacroFields:
    log_rho, u, central = moment_integrals(f, spec)
    return MacroFields.from_log(log_rho, u, max(central, 0.0) / f.dim)


def raw_moments(f: Density, spec: QuadratureSpec = DEFAULT_SPEC):
    """(int f, int v f, int |v|^2 f) in linear arithmetic (may underflow for tiny masses)."""
    log_rho, u, central = moment_integrals(f, spec)
    rho = math.exp(log_rho)
    return rho, rho * u, rho * (central + float(u @ u))
