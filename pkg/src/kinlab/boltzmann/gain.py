"""Monte-Carlo estimate of the weighted gain integral

    I(v) = int int B(v-u, sigma) w(v) / (w(v') w(u')) du dsigma.

u is drawn from a Gaussian mixture centred at 0 and at v. sigma is drawn about the
relative velocity from a defensive mixture: the |cos| law plus two bands where
|cos| ~ 1/|v-u| or |sin| ~ 1/|v-u|, which is where the weight ratio stays O(1)
once |v| is large.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..errors import AdmissibilityViolation
from ..kinetic.fields import Weight
from ..kinetic.special import log_sphere_area
from .kernel import CollisionKernel, admissibility, collide, sample_abs_cos, sigma_from_cos

MIX_U = (0.8, 0.2)
MIX_COS = (0.4, 0.3, 0.3)
CHUNK = 50_000


def _log_weight(w: Weight, speed_sq):
    return w.delta * np.log1p(speed_sq) + w.alpha * speed_sq ** (0.5 * w.beta)


def _gauss_logpdf(z, scale, dim):
    return -0.5 * np.sum(z * z, axis=-1) / scale ** 2 - dim * (math.log(scale) + 0.5 * math.log(2 * math.pi))


def _sample_abs_cos_mixture(rng, eps, dim):
    n = len(eps)
    pick = rng.choice(3, size=n, p=MIX_COS)
    u01 = rng.random(n)
    c = sample_abs_cos(rng, n, dim)
    band0 = eps * np.tan(u01 * np.arctan(1.0 / eps))
    e2 = eps * eps
    y = e2 * np.tan(u01 * np.arctan(1.0 / e2))
    band1 = np.sqrt(np.clip(1.0 - y, 0.0, 1.0))
    c = np.where(pick == 1, band0, np.where(pick == 2, band1, c))
    return np.clip(c, 0.0, 1.0)


def _log_abs_cos_density(c, eps, dim):
    """Density of |cos| under the mixture, on [0, 1]."""
    one_minus = np.maximum((1.0 - c) * (1.0 + c), 0.0)
    with np.errstate(divide="ignore"):
        h1 = (dim - 1) * c * one_minus ** ((dim - 3) / 2.0)
    h2 = 1.0 / (eps * np.arctan(1.0 / eps) * (1.0 + (c / eps) ** 2))
    e2 = eps * eps
    h3 = 2.0 * c / (e2 * np.arctan(1.0 / e2) * (1.0 + (one_minus / e2) ** 2))
    with np.errstate(divide="ignore"):
        return np.log(MIX_COS[0] * h1 + MIX_COS[1] * h2 + MIX_COS[2] * h3)


@dataclass(frozen=True)
class GainEstimate:
    speed: float
    log_value: float
    value: float
    std_error: float
    samples: int
    seed: int
    admissibility: dict = field(default_factory=dict)

    @property
    def rel_error(self) -> float:
        return self.std_error / self.value if self.value > 0 else math.inf


def proposal_scales(w: Weight, speed: float):
    s0 = 1.5 * math.sqrt(1.0 / (w.alpha * w.beta)) * max(1.0, speed) ** ((2.0 - w.beta) / 2.0)
    return s0, 1.0


def qgain_weight_bound_estimate(v, kernel: CollisionKernel, w: Weight, mc_samples: int = 200_000,
                                seed: int = 0, strict: bool = False) -> GainEstimate:
    """Importance-sampled estimate of I(v) with its standard error.

    Admissibility of (N, alpha, beta, delta, kappa) is reported on the result. With
    ``strict`` a failing index set raises AdmissibilityViolation instead.
    """
    dim = kernel.dim
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        v = np.array([float(v)] + [0.0] * (dim - 1))
    if v.shape != (dim,):
        raise ValueError("v must be an N-vector")
    report = admissibility(dim, w.alpha, w.beta, w.delta, kernel.kappa)
    if strict and not report["admissible"]:
        raise AdmissibilityViolation("weight indices not admissible: " + ", ".join(report["failed"]))
    rng = np.random.default_rng(seed)
    speed = float(np.linalg.norm(v))
    s0, s1 = proposal_scales(w, speed)
    log_sphere_sub = log_sphere_area(dim - 1)
    log_v_weight = float(_log_weight(w, speed * speed))
    logs = []
    remaining = int(mc_samples)
    while remaining > 0:
        n = min(CHUNK, remaining)
        remaining -= n
        near_v = rng.random(n) < MIX_U[1]
        z = rng.standard_normal((n, dim))
        u = np.where(near_v[:, None], v + s1 * z, s0 * z)
        log_qu = np.logaddexp(math.log(MIX_U[0]) + _gauss_logpdf(u, s0, dim),
                              math.log(MIX_U[1]) + _gauss_logpdf(u - v, s1, dim))
        rel = v - u
        g = np.linalg.norm(rel, axis=-1)
        axis = rel / np.where(g > 0, g, 1.0)[:, None]
        eps = 1.0 / (1.0 + g)
        c = _sample_abs_cos_mixture(rng, eps, dim)
        signed = np.where(rng.random(n) < 0.5, c, -c)
        sigma = sigma_from_cos(axis, signed, rng)
        # density of sigma with respect to surface measure
        one_minus = np.maximum((1.0 - c) * (1.0 + c), 1e-300)
        log_qs = _log_abs_cos_density(c, eps, dim) - math.log(2.0) - log_sphere_sub \
            - 0.5 * (dim - 3) * np.log(one_minus)
        vp, up = collide(v, u, sigma, tol=1e-9)
        with np.errstate(divide="ignore"):
            log_b = math.log(kernel.angular_constant) + kernel.kappa * np.log(g) + np.log(c)
        log_ratio = log_v_weight - _log_weight(w, np.sum(vp * vp, axis=-1)) - _log_weight(w, np.sum(up * up, axis=-1))
        logs.append(log_b + log_ratio - log_qu - log_qs)
    lw = np.concatenate(logs)
    lw = np.where(np.isnan(lw), -np.inf, lw)
    count = len(lw)
    log_mean = float(logsumexp(lw) - math.log(count))
    scaled = np.exp(lw - log_mean)
    se = float(np.std(scaled, ddof=1) / math.sqrt(count)) * math.exp(log_mean)
    return GainEstimate(speed, log_mean, math.exp(log_mean), se, count, int(seed), report)


def gain_profile(speeds, kernel: CollisionKernel, w: Weight, mc_samples: int = 200_000, seed: int = 0):
    """Estimates along the e1 axis; each speed gets its own spawned stream."""
    seqs = np.random.SeedSequence(seed).spawn(len(speeds))
    out = []
    for s, ss in zip(speeds, seqs):
        out.append(qgain_weight_bound_estimate(float(s), kernel, w, mc_samples, int(ss.generate_state(1)[0])))
    return out


def predicted_slope(dim: int, beta: float, kappa: float) -> float:
    """Decay exponent of the bound: -min((N-1)beta/2 - kappa, 3beta/2 - 1 - kappa)."""
    return -min((dim - 1) * beta / 2.0 - kappa, 1.5 * beta - 1.0 - kappa)


def fitted_slope(estimates, lo: float = 4.0, hi: float = 32.0) -> float:
    sel = [e for e in estimates if lo <= e.speed <= hi]
    if len(sel) < 2:
        raise ValueError("need at least two speeds in the fit window")
    x = np.log1p([e.speed for e in sel])
    y = np.array([e.log_value for e in sel])
    return float(np.polyfit(x, y, 1)[0])


def gain_constant(estimates, k_se: float = 2.0) -> float:
    """Sup over the probed speeds of estimate + k_se SE; stands in for C_gain."""
    return max(e.value + k_se * e.std_error for e in estimates)
