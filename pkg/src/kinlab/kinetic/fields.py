"""Weights, macroscopic fields and Maxwellians."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateFields
from .extreal import ExtReal


@dataclass(frozen=True)
class Weight:
    """w(v) = (1 + |v|^2)^delta * exp(alpha |v|^beta)."""
    alpha: float
    beta: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("weight needs alpha > 0")
        if not self.beta > 0:
            raise ValueError("weight needs beta > 0")
        if not self.delta >= 0:
            raise ValueError("weight needs delta >= 0")

    def log_eval(self, speed):
        return weight_log_eval(self, speed)


def weight_log_eval(w: Weight, speed):
    """log w at |v| = speed, as the sum of the polynomial and exponential logs."""
    s = np.asarray(speed, dtype=float)
    if np.any(s < 0):
        raise ValueError("speed must be nonnegative")
    out = w.delta * np.log1p(s * s) + w.alpha * s ** w.beta
    return float(out) if out.ndim == 0 else out


def log_weight_fn(alpha: float, beta: float, delta: float = 0.0):
    """Vectorised log-weight on speeds; alpha = 0 allowed (pure polynomial weight)."""
    def fn(speed):
        s = np.asarray(speed, dtype=float)
        return delta * np.log1p(s * s) + alpha * s ** beta
    return fn


@dataclass(frozen=True)
class MacroFields:
    """(rho, u, T) with rho stored in log space so tiny masses survive.

    ``defined`` is False for a vacuum state; u and temp are then meaningless.
    """
    log_rho: float
    u: tuple
    temp: float
    defined: bool = True

    @classmethod
    def make(cls, rho: float, u, temp: float) -> "MacroFields":
        if rho < 0 or temp < 0:
            raise ValueError("rho and temp must be nonnegative")
        u = tuple(float(c) for c in np.atleast_1d(u))
        if rho == 0:
            return cls(-math.inf, u, float("nan"), defined=False)
        return cls(math.log(rho), u, float(temp))

    @classmethod
    def from_log(cls, log_rho: float, u, temp: float) -> "MacroFields":
        u = tuple(float(c) for c in np.atleast_1d(u))
        if log_rho == -math.inf:
            return cls(-math.inf, u, float("nan"), defined=False)
        if temp < 0:
            raise ValueError("temperature must be nonnegative")
        return cls(float(log_rho), u, float(temp))

    @property
    def rho(self) -> float:
        return math.exp(self.log_rho) if self.log_rho > -math.inf else 0.0

    @property
    def u_vec(self) -> np.ndarray:
        return np.asarray(self.u, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.u)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.u_vec))


@dataclass(frozen=True)
class Tail:
    """Asymptotic log-density: log f ~ -coef |v|^power + poly * log|v| (+ drift term).

    ``drift`` marks a nonzero linear term (a shifted Gaussian), which matters
    only in the borderline case where the weight exactly balances the decay.
    """
    coef: float
    power: float
    poly: float = 0.0
    drift: bool = False


@dataclass(frozen=True)
class Maxwellian:
    fields: MacroFields
    dim: int = 3

    def __post_init__(self):
        if len(self.fields.u) != self.dim:
            raise ValueError("bulk velocity dimension does not match dim")

    def check(self):
        f = self.fields
        if not f.defined or f.log_rho == -math.inf:
            raise DegenerateFields("Maxwellian with zero density")
        if not f.temp > 0:
            raise DegenerateFields("Maxwellian with zero temperature")

    @property
    def log_prefactor(self) -> float:
        f = self.fields
        return f.log_rho - 0.5 * self.dim * math.log(2 * math.pi * f.temp)

    def log_eval(self, v):
        """Vectorised log M(v) for v of shape (..., N)."""
        self.check()
        v = np.asarray(v, dtype=float)
        d = v - self.fields.u_vec
        return self.log_prefactor - np.sum(d * d, axis=-1) / (2 * self.fields.temp)

    def log_radial(self, r):
        """log M as a function of |v - u|."""
        self.check()
        r = np.asarray(r, dtype=float)
        return self.log_prefactor - r * r / (2 * self.fields.temp)

    @property
    def tail(self) -> Tail:
        return Tail(1.0 / (2 * self.fields.temp), 2.0, 0.0, drift=self.fields.speed > 0)


def maxwellian_eval(m: Maxwellian, v) -> ExtReal:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("maxwellian_eval takes a single velocity; use Maxwellian.log_eval for arrays")
    return ExtReal.from_log(float(m.log_eval(v)))


def maxwellian_from_moments(mf: MacroFields, dim: int | None = None) -> Maxwellian:
    dim = mf.dim if dim is None else dim
    if not mf.defined or mf.log_rho == -math.inf:
        raise DegenerateFields("cannot build a Maxwellian from a vacuum state")
    if not mf.temp > 0:
        raise DegenerateFields("cannot build a Maxwellian from a cold state (T = 0)")
    if len(mf.u) != dim:
        raise ValueError("bulk velocity dimension does not match dim")
    return Maxwellian(mf, dim)
