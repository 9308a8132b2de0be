"""Pointwise-evaluable velocity densities built from log-space components.

A :class:`Density` is a finite sum of :class:`Component` objects.  Each
component lives on a shell ``r_min <= |v - center| <= r_max`` and is either
isotropic about its center (given by a radial log profile) or general (given
by a pointwise log function).  This is enough to describe every family in the
lab exactly, and it lets quadrature pick the exact radial reduction whenever
it applies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fields import Maxwellian, Tail
from .special import logsumexp


def log_power(r, k: float):
    """k * log r with the convention 0 * log 0 = 0."""
    r = np.asarray(r, dtype=float)
    if k == 0:
        return np.zeros_like(r)
    with np.errstate(divide="ignore"):
        return k * np.log(r)


@dataclass(frozen=True)
class Component:
    dim: int
    center: tuple
    log_radial: Callable | None = None
    log_point: Callable | None = None
    r_min: float = 0.0
    r_max: float = math.inf
    breaks: tuple = ()
    tail: Tail | None = None
    scale: float | None = None

    def __post_init__(self):
        if (self.log_radial is None) == (self.log_point is None):
            raise ValueError("give exactly one of log_radial / log_point")
        if len(self.center) != self.dim:
            raise ValueError("center has the wrong dimension")

    @property
    def isotropic(self) -> bool:
        return self.log_radial is not None

    @property
    def center_vec(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @property
    def compact(self) -> bool:
        return math.isfinite(self.r_max)

    def radial_masked(self, r):
        r = np.asarray(r, dtype=float)
        out = np.asarray(self.log_radial(r), dtype=float)
        inside = (r >= self.r_min) & (r <= self.r_max)
        return np.where(inside, out, -np.inf)

    def log_eval(self, v):
        v = np.asarray(v, dtype=float)
        d = v - self.center_vec
        r = np.sqrt(np.sum(d * d, axis=-1))
        inside = (r >= self.r_min) & (r <= self.r_max)
        if self.isotropic:
            vals = np.asarray(self.log_radial(r), dtype=float)
        else:
            vals = np.asarray(self.log_point(v), dtype=float)
        return np.where(inside, vals, -np.inf)

    def shifted(self, log_factor: float) -> "Component":
        if self.isotropic:
            f = self.log_radial
            return _replace(self, log_radial=lambda r: f(r) + log_factor)
        g = self.log_point
        return _replace(self, log_point=lambda v: g(v) + log_factor)


def _replace(c: Component, **kw) -> Component:
    d = dict(dim=c.dim, center=c.center, log_radial=c.log_radial, log_point=c.log_point,
             r_min=c.r_min, r_max=c.r_max, breaks=c.breaks, tail=c.tail, scale=c.scale)
    d.update(kw)
    return Component(**d)


def _heavier(a: Tail, b: Tail) -> Tail:
    """The slower-decaying of two tails."""
    key_a = (a.power, a.coef, -a.poly)
    key_b = (b.power, b.coef, -b.poly)
    return a if key_a <= key_b else b


@dataclass(frozen=True)
class Density:
    """Sum of components; the pointwise value is a log-sum-exp over them."""
    components: tuple
    dim: int
    name: str = "density"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.components:
            raise ValueError("a density needs at least one component")
        for c in self.components:
            if c.dim != self.dim:
                raise ValueError("component dimension mismatch")

    def log_eval(self, v):
        v = np.asarray(v, dtype=float)
        parts = np.stack([np.broadcast_to(c.log_eval(v), v.shape[:-1]) for c in self.components])
        return logsumexp(parts, axis=0)

    def __call__(self, v):
        return np.exp(self.log_eval(v))

    @property
    def isotropic(self) -> bool:
        """True when every component is radial about the origin."""
        return all(c.isotropic and not np.any(c.center_vec) for c in self.components)

    def log_radial(self, r):
        if not self.isotropic:
            raise ValueError("density is not isotropic about the origin")
        r = np.asarray(r, dtype=float)
        parts = np.stack([np.broadcast_to(c.radial_masked(r), r.shape) for c in self.components])
        return logsumexp(parts, axis=0)

    @property
    def breaks(self) -> tuple:
        b = set()
        for c in self.components:
            b.update(c.breaks)
            b.update(x for x in (c.r_min, c.r_max) if math.isfinite(x) and x > 0)
        return tuple(sorted(b))

    @property
    def compact(self) -> bool:
        return all(c.compact for c in self.components)

    @property
    def support_radius(self) -> float:
        return max(float(np.linalg.norm(c.center_vec)) + c.r_max for c in self.components)

    @property
    def tail(self) -> Tail | None:
        """Heaviest component tail, None if compact or if any tail is unknown."""
        tails = [c.tail for c in self.components if not c.compact]
        if not tails or any(t is None for t in tails):
            return None
        out = tails[0]
        for t in tails[1:]:
            out = _heavier(out, t)
        return out

    @property
    def tail_known(self) -> bool:
        return self.compact or self.tail is not None

    def scaled(self, factor: float) -> "Density":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        lf = math.log(factor)
        return Density(tuple(c.shifted(lf) for c in self.components), self.dim, self.name, dict(self.meta))

    def __add__(self, other: "Density") -> "Density":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Density(self.components + other.components, self.dim, f"{self.name}+{other.name}")

    def components_disjoint(self) -> bool:
        cs = self.components
        for i in range(len(cs)):
            for j in range(i + 1, len(cs)):
                gap = np.linalg.norm(cs[i].center_vec - cs[j].center_vec)
                if gap < cs[i].r_max + cs[j].r_max:
                    return False
        return True


# -- constructors ---------------------------------------------------------

def radial_density(dim: int, log_radial, r_min=0.0, r_max=math.inf, breaks=(), tail=None,
                   name="radial", scale=None, center=None) -> Density:
    center = tuple([0.0] * dim) if center is None else tuple(float(c) for c in center)
    comp = Component(dim, center, log_radial=log_radial, r_min=r_min, r_max=r_max,
                     breaks=tuple(breaks), tail=tail, scale=scale)
    return Density((comp,), dim, name)


def pointwise_density(dim: int, log_point, center=None, r_min=0.0, r_max=math.inf, tail=None,
                      name="custom", scale=None) -> Density:
    """Escape hatch for arbitrary callables (log values, shape (..., N) -> (...))."""
    center = tuple([0.0] * dim) if center is None else tuple(float(c) for c in center)
    comp = Component(dim, center, log_point=log_point, r_min=r_min, r_max=r_max, tail=tail,
                     scale=scale)
    return Density((comp,), dim, name)


def maxwellian_density(m: Maxwellian) -> Density:
    m.check()
    comp = Component(m.dim, tuple(m.fields.u), log_radial=m.log_radial, tail=m.tail,
                     scale=math.sqrt(m.fields.temp) * 1e-3)
    return Density((comp,), m.dim, "maxwellian", {"maxwellian": m})


def gaussian_density(dim: int, coef: float, log_amp: float = 0.0) -> Density:
    """exp(log_amp - coef |v|^2)."""
    return radial_density(dim, lambda r: log_amp - coef * np.asarray(r) ** 2,
                          tail=Tail(coef, 2.0), name="gaussian", scale=1e-3 / math.sqrt(coef))


def ball_indicator(dim: int, radius: float = 1.0, log_amp: float = 0.0) -> Density:
    return radial_density(dim, lambda r: np.full(np.shape(r), log_amp), r_max=radius,
                          name="ball")
