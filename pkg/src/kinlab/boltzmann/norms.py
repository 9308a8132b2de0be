"""Weighted norms along a DSMC run and the a priori growth envelope."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..errors import ReconstructionFailure
from ..homogeneous import weighted_lp_norm_maxwellian
from ..kinetic.extreal import ExtReal
from ..kinetic.fields import Maxwellian, Weight, maxwellian_from_moments
from ..kinetic.special import log_ball_volume, log_sphere_area
from .dsmc import DsmcRun, ParticleEnsemble, truncated_weighted_sum

MIN_COUNT = 20


def _gl(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def equilibrium_of(run_or_ensemble) -> Maxwellian:
    ens = run_or_ensemble.initial if isinstance(run_or_ensemble, DsmcRun) else run_or_ensemble
    return maxwellian_from_moments(ens.fields(), ens.dim)


def maxwellian_truncated_norm(m: Maxwellian, alpha_prime: float, p: float, radius: float,
                              panels: int = 8, order: int = 32) -> ExtReal:
    """(int_{|v|<=R} (e^{alpha'|v|^2} M)^p dv)^{1/p} by Gauss-Legendre in (|v|, cos)."""
    m.check()
    f = m.fields
    dim, speed, temp = m.dim, f.speed, f.temp
    edges = np.linspace(0.0, radius, panels + 1)
    rs, ws = zip(*(_gl(a, b, order) for a, b in zip(edges[:-1], edges[1:])))
    r, wr = np.concatenate(rs), np.concatenate(ws)
    c, wc = _gl(-1.0, 1.0, 4 * order)
    rr, cc = np.meshgrid(r, c, indexing="ij")
    d2 = rr * rr - 2 * rr * cc * speed + speed * speed
    logf = m.log_prefactor - d2 / (2 * temp) + alpha_prime * rr * rr
    with np.errstate(divide="ignore"):
        jac = (dim - 1) * np.log(rr) + 0.5 * (dim - 3) * np.log1p(-cc * cc) + log_sphere_area(dim - 1)
        terms = p * logf + jac + np.log(wr)[:, None] + np.log(wc)[None, :]
    total = float(logsumexp(terms))
    return ExtReal.from_log(total / p)


def _adaptive_edges(speeds, radius, min_count):
    """Radial bin edges on [0, R] with roughly equal counts, at least min_count each."""
    inside = np.sort(speeds[speeds <= radius])
    n = len(inside)
    per_bin = max(min_count, int(math.sqrt(n)))
    bins = max(1, n // per_bin)
    cuts = inside[np.arange(1, bins) * per_bin] if bins > 1 else np.array([])
    return np.concatenate([[0.0], cuts, [radius]])


def histogram_lp(ensemble: ParticleEnsemble, log_weight, p: float, radius: float,
                 min_count: int = MIN_COUNT, order: int = 8) -> float:
    """Lp norm over |v| <= R of w f with f reconstructed by a radial histogram."""
    speeds = np.linalg.norm(ensemble.velocities, axis=1)
    n_in = int(np.sum(speeds <= radius))
    if n_in == 0:
        return 0.0
    if n_in < min_count:
        raise ReconstructionFailure(f"only {n_in} particles inside |v| <= {radius:g}")
    edges = _adaptive_edges(speeds, radius, min_count)
    counts = np.histogram(speeds[speeds <= radius], bins=edges)[0]
    dim = ensemble.dim
    log_unit = log_sphere_area(dim)
    vol = math.exp(log_ball_volume(dim)) * (edges[1:] ** dim - edges[:-1] ** dim)
    out = []
    for k in range(len(counts)):
        if counts[k] == 0:
            continue
        log_fb = math.log(ensemble.particle_weight * counts[k] / vol[k])
        r, wr = _gl(edges[k], edges[k + 1], order)
        with np.errstate(divide="ignore"):
            out.append(logsumexp(p * (log_fb + log_weight(r)) + (dim - 1) * np.log(r) + np.log(wr)) + log_unit)
    return math.exp(float(logsumexp(out)) / p)


def histogram_sup(ensemble: ParticleEnsemble, log_weight, min_count: int = MIN_COUNT) -> float:
    """sup of w f over radial bins, with w at the bin centre."""
    speeds = np.linalg.norm(ensemble.velocities, axis=1)
    edges = _adaptive_edges(speeds, float(speeds.max()) * (1 + 1e-12), min_count)
    counts = np.histogram(speeds, bins=edges)[0]
    vol = math.exp(log_ball_volume(ensemble.dim)) * (edges[1:] ** ensemble.dim - edges[:-1] ** ensemble.dim)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nz = counts > 0
    logs = np.log(ensemble.particle_weight * counts[nz] / vol[nz]) + log_weight(mid[nz])
    return float(np.exp(np.max(logs)))


def truncated_sum_error(ensemble: ParticleEnsemble, alpha_prime: float, radius: float) -> float:
    s2 = np.sum(ensemble.velocities ** 2, axis=1)
    terms = np.where(s2 <= radius * radius, np.exp(alpha_prime * np.minimum(s2, radius * radius)), 0.0)
    return ensemble.particle_weight * float(np.std(terms, ddof=1)) * math.sqrt(ensemble.count)


@dataclass
class NormTrajectory:
    times: np.ndarray
    radii: tuple
    values: np.ndarray           # (times, radii)
    p: float
    alpha_prime: float
    equilibrium: ExtReal
    equilibrium_truncated: tuple
    temperature: float
    noise: np.ndarray | None = None   # standard errors of the p = 1 particle sums

    def column(self, radius) -> np.ndarray:
        return self.values[:, list(self.radii).index(radius)]

    def approach(self, radius) -> dict:
        """Start, end and equilibrium truncated value at one radius."""
        col = self.column(radius)
        target = self.equilibrium_truncated[list(self.radii).index(radius)].value
        tail = col[len(col) * 2 // 3:]
        out = {"start": float(col[0]), "end": float(col[-1]), "target": target,
               "tail_mean": float(np.mean(tail))}
        if self.noise is not None:
            out["noise"] = float(self.noise[-1, list(self.radii).index(radius)])
        return out


def weighted_norm_trajectory(run: DsmcRun, alpha_prime: float, p: float = 1.0,
                             truncation_radius_grid=(5.0,), min_count: int = MIN_COUNT) -> NormTrajectory:
    """Truncated ||e^{alpha'|v|^2} f(t)||_{L^p(|v|<=R)} per snapshot and radius.

    p = 1 uses the particle sum directly; p > 1 goes through the adaptive radial histogram.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    radii = tuple(float(r) for r in truncation_radius_grid)
    log_w = lambda r: alpha_prime * r * r
    vals = np.empty((len(run.snapshots), len(radii)))
    noise = np.empty_like(vals) if p == 1 else None
    for i, snap in enumerate(run.snapshots):
        for j, radius in enumerate(radii):
            if p == 1:
                vals[i, j] = truncated_weighted_sum(snap, alpha_prime, radius)
                noise[i, j] = truncated_sum_error(snap, alpha_prime, radius)
            else:
                vals[i, j] = histogram_lp(snap, log_w, p, radius, min_count)
    eq = equilibrium_of(run)
    if math.isinf(p):
        from ..homogeneous import weighted_sup_norm_maxwellian
        full = weighted_sup_norm_maxwellian(eq, alpha_prime, 2.0, eq.dim)
        full = full[0] if isinstance(full, tuple) else full
    else:
        full = weighted_lp_norm_maxwellian(eq, alpha_prime, p, eq.dim)
    trunc = tuple(maxwellian_truncated_norm(eq, alpha_prime, 1.0 if math.isinf(p) else p, r) for r in radii)
    times = np.array([s.time for s in run.snapshots])
    return NormTrajectory(times, radii, vals, p, alpha_prime, full, trunc, eq.fields.temp, noise)


@dataclass
class EnvelopeCheck:
    times: np.ndarray
    sup_norms: np.ndarray
    envelope: np.ndarray
    initial_norm: float
    constant: float
    horizon: float
    blowup_time: float
    tolerance: float
    meta: dict = field(default_factory=dict)

    @property
    def checked(self) -> np.ndarray:
        return self.times <= self.horizon

    @property
    def holds(self) -> bool:
        sel = self.checked
        return bool(np.all(self.sup_norms[sel] <= self.envelope[sel] * (1 + self.tolerance)))


def envelope(initial_norm: float, constant: float, time):
    """1 / (a^{-1} - C t), infinite from the blow-up time a^{-1}/C on."""
    t = np.asarray(time, dtype=float)
    den = 1.0 / initial_norm - constant * t
    with np.errstate(divide="ignore"):
        return np.where(den > 0, 1.0 / np.where(den > 0, den, 1.0), np.inf)


def envelope_horizon(initial_norm: float, constant: float) -> float:
    """Time at which the envelope reaches three times the initial norm."""
    return (2.0 / 3.0) / (constant * initial_norm)


def apriori_envelope_check(run: DsmcRun, w: Weight, constant: float | None = None,
                           tolerance: float = 1e-9, mc_samples: int = 100_000, seed: int = 0,
                           min_count: int = MIN_COUNT) -> EnvelopeCheck:
    """Histogram sup of w f along the run against the Riccati envelope.

    Norms are taken for the unit-mass profile f / rho so that they pair with the
    normalised time tau = rho t of the run. Without ``constant`` the gain constant
    is estimated from Monte-Carlo values of the weighted gain integral.
    """
    meta = {}
    if constant is None:
        from .gain import gain_constant, gain_profile
        ests = gain_profile((0, 1, 2, 4, 8, 16, 32), run.kernel, w, mc_samples, seed)
        constant = gain_constant(ests)
        meta["gain_estimates"] = [(e.speed, e.value, e.std_error) for e in ests]
    log_w = lambda r: w.delta * np.log1p(r * r) + w.alpha * r ** w.beta
    sups = []
    for snap in run.snapshots:
        unit = ParticleEnsemble(snap.velocities, 1.0 / snap.count, snap.time, snap.rng_seed)
        sups.append(histogram_sup(unit, log_w, min_count))
    sups = np.array(sups)
    a = float(sups[0])
    times = np.array([s.time for s in run.snapshots])
    env = envelope(a, constant, times)
    return EnvelopeCheck(times, sups, env, a, float(constant), envelope_horizon(a, constant),
                         1.0 / (a * constant), tolerance, meta)
