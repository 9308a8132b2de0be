"""Direct simulation Monte Carlo for the spatially homogeneous Boltzmann equation.

Particles carry equal weight. Time is measured in tau = rho t, so the ensemble
evolves the unit-mass profile f / rho; the physical mass is kept on the ensemble
and only enters the reported moments and norms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from ..errors import MajorantOverflow, RegimeViolation
from ..kinetic.fields import MacroFields, Maxwellian
from .kernel import CollisionKernel, collide

H_BINS = 60


@dataclass(frozen=True)
class ParticleEnsemble:
    velocities: np.ndarray
    particle_weight: float
    time: float = 0.0
    rng_seed: int = 0

    @property
    def count(self) -> int:
        return len(self.velocities)

    @property
    def dim(self) -> int:
        return self.velocities.shape[1]

    @property
    def mass(self) -> float:
        return self.count * self.particle_weight

    @property
    def momentum(self) -> np.ndarray:
        return self.particle_weight * self.velocities.sum(axis=0)

    @property
    def energy(self) -> float:
        """int |v|^2 f dv."""
        return self.particle_weight * float(np.sum(self.velocities ** 2))

    @property
    def mean_velocity(self) -> np.ndarray:
        return self.velocities.mean(axis=0)

    @property
    def temperature(self) -> float:
        d = self.velocities - self.mean_velocity
        return float(np.sum(d * d) / (self.count * self.dim))

    def fields(self) -> MacroFields:
        return MacroFields.make(self.mass, self.mean_velocity, self.temperature)

    def central_speeds(self) -> np.ndarray:
        return np.linalg.norm(self.velocities - self.mean_velocity, axis=1)


# ------------------------------------------------------------ initial data

def _radial_inverse_cdf(log_radial, r_lo, r_hi, dim, points=20001):
    """Tabulated inverse CDF of r^{N-1} exp(log_radial(r)) on [r_lo, r_hi]."""
    def log_dens(r):
        with np.errstate(divide="ignore"):
            return (dim - 1) * np.log(r) + log_radial(r)
    if not math.isfinite(r_hi):
        r_hi = max(2 * r_lo, 1.0)
        while log_dens(np.array([r_hi]))[0] > np.max(log_dens(np.linspace(r_lo, r_hi, 257))) - 60:
            r_hi *= 1.5
    # trim the range to where the density is within e^-60 of its peak
    probe = np.linspace(r_lo, r_hi, 200001)
    ld = log_dens(probe)
    keep = np.nonzero(ld > ld.max() - 60)[0]
    lo, hi = probe[max(keep[0] - 1, 0)], probe[min(keep[-1] + 1, len(probe) - 1)]
    grid = np.linspace(lo, hi, points)
    dens = np.exp(log_dens(grid) - ld.max())
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    return grid, cdf / cdf[-1]


def _directions(rng, n, dim):
    z = rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_isotropic(log_radial, r_lo, r_hi, mass, particles, seed=0, dim=3):
    rng = np.random.default_rng(seed)
    grid, cdf = _radial_inverse_cdf(log_radial, r_lo, r_hi, dim)
    r = np.interp(rng.random(particles), cdf, grid)
    v = r[:, None] * _directions(rng, particles, dim)
    return ParticleEnsemble(v, mass / particles, 0.0, int(seed))


def sample_maxwellian(m: Maxwellian, particles, seed=0, match_moments=False):
    m.check()
    rng = np.random.default_rng(seed)
    f = m.fields
    v = f.u_vec + math.sqrt(f.temp) * rng.standard_normal((particles, m.dim))
    if match_moments:
        # shift and rescale so the sample has exactly the target mean and temperature
        d = v - v.mean(axis=0)
        v = f.u_vec + d * math.sqrt(f.temp * particles * m.dim / np.sum(d * d))
    return ParticleEnsemble(v, f.rho / particles, 0.0, int(seed))


def sample_ensemble(init, particles: int, seed: int = 0) -> ParticleEnsemble:
    """Ensemble from a shell family, a Maxwellian or an existing ensemble."""
    if isinstance(init, ParticleEnsemble):
        return init
    if isinstance(init, Maxwellian):
        return sample_maxwellian(init, particles, seed)
    if getattr(init, "kind", None) == "shell":
        mass = init.exact_fields().rho
        return sample_isotropic(init.log_radial, init.n, init.outer_radius, mass, particles, seed, init.dim)
    if hasattr(init, "isotropic") and init.isotropic and hasattr(init, "log_radial"):
        dens = init.density() if hasattr(init, "density") else init
        lo = min(c.r_min for c in dens.components)
        hi = max(c.r_max for c in dens.components)
        from ..kinetic.moments import moments
        return sample_isotropic(dens.log_radial, max(lo, 1e-12), hi, moments(dens).rho, particles, seed, dens.dim)
    raise TypeError(f"cannot sample particles from {type(init).__name__}")


# ------------------------------------------------------------ diagnostics

def radial_edges(ensemble: ParticleEnsemble, bins: int = H_BINS) -> np.ndarray:
    t = ensemble.temperature
    cap = max(1.25 * float(ensemble.central_speeds().max()), 6.0 * math.sqrt(t))
    return np.linspace(0.0, cap, bins + 1)


def _shell_volumes(edges, dim):
    from ..kinetic.special import log_ball_volume
    return math.exp(log_ball_volume(dim)) * (edges[1:] ** dim - edges[:-1] ** dim)


def entropy_and_distance(ensemble: ParticleEnsemble, edges) -> tuple[float, float]:
    """Coarse-grained H of the unit-mass profile and the L1 gap of the radial law to chi_N."""
    r = np.minimum(ensemble.central_speeds(), edges[-1] * (1 - 1e-15))
    counts = np.histogram(r, bins=edges)[0]
    p = counts / ensemble.count
    vol = _shell_volumes(edges, ensemble.dim)
    nz = p > 0
    h = float(np.sum(p[nz] * np.log(p[nz] / vol[nz])))
    cdf = stats.chi.cdf(edges, df=ensemble.dim, scale=math.sqrt(ensemble.temperature))
    target = np.diff(cdf)
    target[-1] += 1.0 - cdf[-1]
    return h, float(np.sum(np.abs(p - target)))


def truncated_weighted_sum(ensemble: ParticleEnsemble, alpha_prime: float, radius: float) -> float:
    """Unbiased particle estimate of int_{|v|<=R} e^{alpha'|v|^2} f dv."""
    s2 = np.sum(ensemble.velocities ** 2, axis=1)
    inside = s2 <= radius * radius
    return ensemble.particle_weight * float(np.sum(np.exp(alpha_prime * s2[inside])))


def _row(step, ens, edges, radii, alpha_prime):
    h, l1 = entropy_and_distance(ens, edges)
    d = ens.central_speeds()
    row = {"step": step, "time": ens.time, "mass": ens.mass}
    for k, c in zip("xyz", ens.momentum):
        row[f"momentum_{k}"] = float(c)
    row.update({"energy": ens.energy, "H": h, "L1_to_maxwellian": l1,
                "fourth_moment": float(np.mean(d ** 4))})
    for radius in radii:
        row[f"truncated_norm@{radius:g}"] = truncated_weighted_sum(ens, alpha_prime, radius)
    return row


# ------------------------------------------------------------ time stepping

@dataclass
class DsmcRun:
    kernel: CollisionKernel
    dt: float
    snapshots: list
    rows: list
    events: int
    momentum_error: float
    energy_error: float
    majorant_history: list
    retries: int
    edges: np.ndarray
    alpha_prime: float | None = None
    radii: tuple = ()
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def initial(self) -> ParticleEnsemble:
        return self.snapshots[0]

    @property
    def final(self) -> ParticleEnsemble:
        return self.snapshots[-1]

    def series(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.series("time")

    def columns(self) -> list:
        return list(self.rows[0].keys()) if self.rows else []


def _collision_step(v, pairs, kernel, majorant, dt, rng):
    rate = kernel.total_angular * majorant ** kernel.kappa
    if rate * dt >= 1.0:
        raise RegimeViolation(f"dt times the majorant collision rate is {rate * dt:.3f} >= 1")
    npairs = len(pairs)
    expected = npairs * rate * dt
    k = int(math.floor(expected)) + int(rng.random() < expected - math.floor(expected))
    cand = pairs[rng.choice(npairs, size=k, replace=False)]
    i, j = cand[:, 0], cand[:, 1]
    rel = v[i] - v[j]
    g = np.linalg.norm(rel, axis=1)
    if k and g.max() > majorant:
        raise MajorantOverflow(f"relative speed {g.max():.4g} exceeds majorant {majorant:.4g}")
    keep = rng.random(k) < (g / majorant) ** kernel.kappa
    i, j, rel = i[keep], j[keep], rel[keep]
    if len(i) == 0:
        return v, 0, 0.0, 0.0
    sigma = kernel.sample_sigma(rel, rng)
    vi, vj = v[i], v[j]
    vp, up = collide(vi, vj, sigma)
    mom_err = float(np.max(np.abs(vp + up - vi - vj)))
    before = np.sum(vi * vi, axis=1) + np.sum(vj * vj, axis=1)
    after = np.sum(vp * vp, axis=1) + np.sum(up * up, axis=1)
    en_err = float(np.max(np.abs(after - before) / np.where(before > 0, before, 1.0)))
    out = v.copy()
    out[i], out[j] = vp, up
    return out, len(i), mom_err, en_err


def evolve_dsmc(init, kernel: CollisionKernel, dt: float, steps: int, particles: int = 10_000,
                seed: int = 0, record_every: int = 1, alpha_prime: float | None = None,
                truncation_radii=(), majorant: float | None = None, max_retries: int = 20) -> DsmcRun:
    """Babovsky-type stepping: a random disjoint pairing, then acceptance-rejection
    of candidate pairs against the majorant |g|^kappa <= majorant^kappa."""
    if not (0 < kernel.kappa <= 1) or kernel.dim != 3:
        raise ValueError("DSMC runs need kappa in (0, 1] and N = 3")
    if dt <= 0 or steps < 0:
        raise ValueError("dt must be positive and steps nonnegative")
    ss = np.random.SeedSequence(seed)
    init_seed, step_seed = (int(s.generate_state(1)[0]) for s in ss.spawn(2))
    ens = sample_ensemble(init, particles, init_seed)
    rng = np.random.default_rng(step_seed)
    v = np.array(ens.velocities, dtype=float)
    weight = ens.particle_weight
    edges = radial_edges(ens)
    radii = tuple(float(r) for r in truncation_radii)
    if radii and alpha_prime is None:
        raise ValueError("truncated norms need alpha_prime")
    ap = 0.0 if alpha_prime is None else float(alpha_prime)
    if majorant is None:
        perm = rng.permutation(len(v))
        half = len(v) // 2
        majorant = 1.2 * float(np.max(np.linalg.norm(v[perm[:half]] - v[perm[half:2 * half]], axis=1)))
    majorant = max(majorant, 1e-12)
    snaps, rows = [ens], [_row(0, ens, edges, radii, ap)]
    history = [(0, majorant)]
    events, retries, mom_err, en_err = 0, 0, 0.0, 0.0
    for step in range(1, steps + 1):
        perm = rng.permutation(len(v))
        pairs = perm[: 2 * (len(v) // 2)].reshape(-1, 2)
        for attempt in range(max_retries + 1):
            state = rng.bit_generator.state
            try:
                v, n_ev, me, ee = _collision_step(v, pairs, kernel, majorant, dt, rng)
                break
            except MajorantOverflow:
                if attempt == max_retries:
                    raise
                rng.bit_generator.state = state
                rng.random()  # move the stream so the retried step draws fresh candidates
                majorant *= 2.0
                retries += 1
                history.append((step, majorant))
        events += n_ev
        mom_err, en_err = max(mom_err, me), max(en_err, ee)
        if step % record_every == 0 or step == steps:
            snap = ParticleEnsemble(v.copy(), weight, step * dt, ens.rng_seed)
            snaps.append(snap)
            rows.append(_row(step, snap, edges, radii, ap))
    return DsmcRun(kernel, dt, snaps, rows, events, mom_err, en_err, history, retries, edges,
                   alpha_prime, radii, int(seed), {"particles": len(v), "steps": steps})


# ------------------------------------------------------------ checks on a run

def energy_drift(run: DsmcRun) -> float:
    e = run.series("energy")
    return float(np.max(np.abs(e - e[0])) / e[0])


def h_check(run: DsmcRun, tail_fraction: float = 1 / 3, k_sigma: float = 3.0) -> dict:
    """Increments of H beyond k_sigma times their spread in the equilibrated tail."""
    h = run.series("H")
    diffs = np.diff(h)
    tail = diffs[int(len(diffs) * (1 - tail_fraction)):]
    sigma = float(np.std(tail, ddof=1)) if len(tail) > 1 else 0.0
    limit = k_sigma * sigma
    bad = np.nonzero(diffs > limit)[0]
    return {"violations": int(len(bad)), "sigma": sigma, "limit": limit,
            "max_increase": float(diffs.max()) if len(diffs) else 0.0,
            "decrease": float(h[0] - h[-1]), "indices": bad.tolist()}


def _sample_se(run: DsmcRun, key: str) -> float:
    """Monte-Carlo standard error of a diagnostic evaluated on the initial ensemble."""
    ens = run.initial
    if key == "fourth_moment":
        return float(np.std(ens.central_speeds() ** 4, ddof=1) / math.sqrt(ens.count))
    if key == "L1_to_maxwellian":
        return 0.0
    if key == "energy":
        s2 = np.sum(ens.velocities ** 2, axis=1)
        return ens.particle_weight * float(np.std(s2, ddof=1)) * math.sqrt(ens.count)
    return 0.0


def flatness(run: DsmcRun, keys=("mass", "momentum_x", "momentum_y", "momentum_z", "energy",
                                 "fourth_moment", "L1_to_maxwellian", "H"), k_sigma: float = 3.0) -> dict:
    """Fitted linear drift over the run against k_sigma times the series' noise level."""
    t = run.times
    out = {}
    for key in keys:
        y = run.series(key)
        scale = max(1.0, float(np.max(np.abs(y))))
        if len(y) < 3:
            out[key] = {"drift": 0.0, "sigma": 0.0, "flat": True}
            continue
        slope, icpt = np.polyfit(t, y, 1)
        resid = y - (slope * t + icpt)
        sigma = max(float(np.std(resid, ddof=2)), _sample_se(run, key), 1e-12 * scale)
        drift = abs(slope) * float(t[-1] - t[0])
        out[key] = {"drift": float(drift), "sigma": sigma, "flat": bool(drift <= k_sigma * sigma)}
    return out


def relaxation_rate(run: DsmcRun, floor_fraction: float = 1 / 3) -> dict:
    """Exponential rate of the L1 distance fitted above its noise floor."""
    t, d = run.times, run.series("L1_to_maxwellian")
    floor = float(np.median(d[int(len(d) * (1 - floor_fraction)):]))
    sel = d > 3 * floor
    if sel.sum() < 3:
        return {"rate": math.nan, "floor": floor, "points": int(sel.sum())}
    slope = np.polyfit(t[sel], np.log(d[sel] - floor), 1)[0]
    return {"rate": float(-slope), "floor": floor, "points": int(sel.sum())}


def rows_to_csv_rows(run: DsmcRun):
    return [run.columns()] + [[r[c] for c in run.columns()] for r in run.rows]
