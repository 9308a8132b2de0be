"""Mild-solution operator and Picard iterates evaluated lazily at phase points.

Level-k macro fields (moments of the k-th iterate at (tau, |y|)) live on a
lattice in (tau, asinh(|y| / y0)) and are filled on demand; values between
lattice nodes are bilinear in (log rho, u_r, log T).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateFields, IterationBudget
from ..families import InhomFamily
from ..kinetic.densities import Density
from ..kinetic.extreal import ExtReal
from ..kinetic.fields import MacroFields
from ..kinetic.moments import raw_moments
from ..kinetic.quadrature import gauss_legendre
from .fields import DEFAULT_RULE, TransportRule, transported_moments
from .transport import FrameRule


@dataclass(frozen=True)
class PicardConfig:
    t0: float = 0.05
    tau_step: float | None = None   # None: t0 / 8
    log_radius_step: float = 0.02   # lattice step in asinh(|y| / radius_scale)
    radius_scale: float = 1.0
    time_order: int = 8             # GL nodes in s for the Maxwellian part of a field
    sample_time_order: int = 24     # GL nodes in tau for a point value
    radial_order: int = 16          # per panel, four panels
    theta_order: int = 24
    width: float = 12.0             # Maxwellian reach in thermal widths
    log_rho_floor: float = -700.0
    budget: int = 200_000
    threads: int = 1
    transport: TransportRule = DEFAULT_RULE

    @property
    def step(self) -> float:
        return self.tau_step if self.tau_step is not None else (self.t0 / 8 if self.t0 > 0 else 1.0)


class FieldCache:
    """Memoized (log rho, u_r, log T) of one iterate on the lattice."""

    def __init__(self, compute, config: PicardConfig, counter):
        self._compute = compute
        self.config = config
        self._store: dict = {}
        self._counter = counter

    def node(self, j: int, i: int):
        key = (j, i)
        val = self._store.get(key)
        if val is None:
            self._counter.tick()
            cfg = self.config
            tau = j * cfg.step
            radius = cfg.radius_scale * math.sinh(i * cfg.log_radius_step)
            val = self._compute(tau, radius)
            self._store[key] = val  # recomputation on race is deterministic
        return val

    def __len__(self):
        return len(self._store)

    def lookup(self, tau, radius):
        """Bilinear interpolation; returns arrays (log rho, u_r, temp)."""
        cfg = self.config
        tau = np.asarray(tau, dtype=float)
        q = np.arcsinh(np.asarray(radius, dtype=float) / cfg.radius_scale) / cfg.log_radius_step
        tau, q = np.broadcast_arrays(tau, q)
        jt = tau / cfg.step
        j0 = np.floor(jt + 1e-9).astype(int)
        i0 = np.floor(q).astype(int)
        ft = np.clip(jt - j0, 0.0, 1.0)
        fq = q - i0
        # corner keys; the upper time node is skipped where the time fraction is zero
        need_up = ft > 0
        dj = np.stack([np.zeros_like(j0), np.zeros_like(j0), need_up, need_up], axis=-1).astype(int)
        di = np.array([0, 1, 0, 1])
        kj = (j0[..., None] + dj).ravel()
        ki = (i0[..., None] + di).ravel()
        packed = kj.astype(np.int64) * (1 << 32) + ki
        keys, inverse = np.unique(packed, return_inverse=True)
        table = np.array([self.node(int(k >> 32), int(k & 0xFFFFFFFF)) for k in keys], dtype=float)
        corners = table[inverse.ravel()].reshape(tau.shape + (4, 3))
        ft, fq = ft[..., None], fq[..., None]
        out = ((1 - ft) * ((1 - fq) * corners[..., 0, :] + fq * corners[..., 1, :])
               + ft * ((1 - fq) * corners[..., 2, :] + fq * corners[..., 3, :]))
        return out[..., 0], out[..., 1], np.exp(out[..., 2])


class _Counter:
    def __init__(self, cap):
        self.count = 0
        self.cap = cap

    def tick(self):
        self.count += 1
        if self.count > self.cap:
            raise IterationBudget(f"more than {self.cap} memoized moment evaluations")


def _combine(parts):
    """Mixture of (log mass, mean u_r, mean |v|^2) triples."""
    lm = np.array([p[0] for p in parts])
    top = np.max(lm)
    if not np.isfinite(top):
        return -math.inf, 0.0, 0.0
    w = np.exp(lm - top)
    s = w.sum()
    u = sum(wi * p[1] for wi, p in zip(w, parts)) / s
    e = sum(wi * p[2] for wi, p in zip(w, parts)) / s
    return top + math.log(s), float(u), float(e)


def _pack(log_rho, u_r, energy, dim, floor):
    if not math.isfinite(log_rho) or log_rho < floor:
        raise DegenerateFields(f"log rho = {log_rho:g} below the floor {floor:g}")
    temp = (energy - u_r * u_r) / dim
    if not temp > 0:
        raise DegenerateFields("nonpositive temperature")
    return (float(log_rho), float(u_r), math.log(temp))


def _log_maxwellian(log_rho, u_r, temp, speed_sq, along, dim):
    """log M with radial bulk velocity u_r and v . y_hat = along."""
    return (log_rho - 0.5 * dim * np.log(2 * math.pi * temp)
            - (speed_sq - 2.0 * u_r * along + u_r * u_r) / (2.0 * temp))


@dataclass
class MildState:
    """The K-th Picard iterate of the mild formulation for an inhomogeneous datum.

    ``evaluator(t, x, v)`` returns log f_K; level-k field caches are shared
    across states built from the same :class:`PicardSolver`.
    """
    solver: "PicardSolver"
    iterate_index: int

    @property
    def base(self):
        return self.solver.base

    @property
    def memo(self):
        return self.solver.caches

    def evaluator(self, t, x, v) -> float:
        return self.solver.log_value(self.iterate_index, t, x, v)


class PicardSolver:
    """Shared machinery for iterates of one base datum: field caches per level."""

    def __init__(self, base: InhomFamily, config: PicardConfig = PicardConfig()):
        self.base = base
        self.config = config
        self.dim = base.dim
        self.counter = _Counter(config.budget)
        self.caches: list[FieldCache] = []
        self._g_cache = FieldCache(self._g_fields, config, self.counter)
        self._frame = FrameRule(self.dim, config.theta_order)
        self._s_nodes = gauss_legendre(config.time_order)
        self._r_nodes = gauss_legendre(config.radial_order)

    # -- level fields
    def cache(self, level: int) -> FieldCache:
        while len(self.caches) <= level:
            k = len(self.caches)
            if k == 0:
                self.caches.append(self._g_cache)
            else:
                self.caches.append(FieldCache(lambda tau, y, k=k: self._level_fields(k, tau, y),
                                              self.config, self.counter))
        return self.caches[level]

    def _g_raw(self, tau, radius):
        lr, u, e = transported_moments(self.base, tau, radius, self.config.transport)
        if tau == 0 or radius == 0:
            u = 0.0
        return lr, u, e

    def _g_fields(self, tau, radius):
        return _pack(*self._g_raw(tau, radius), self.dim, self.config.log_rho_floor)

    def _maxwellian_part(self, level: int, tau: float, radius: float):
        """(log mass, mean u_r, mean |v|^2) of int_0^tau e^{-(tau-s)} M_{level}(s, y - v(tau-s), v) ds dv."""
        cfg, dim = self.config, self.dim
        prev = self.cache(level)
        lr0, u0, lt0 = self.cache(0).node(int(round(tau / cfg.step)), self._q_index(radius))
        reach = abs(u0) + cfg.width * math.sqrt(2.0 * math.exp(lt0)) + 1.0
        xs, ws = self._s_nodes
        s = 0.5 * tau * (xs + 1.0)
        log_ws = np.log(0.5 * tau * ws)
        xr, wr = self._r_nodes
        panels = np.linspace(0.0, reach, 5)
        half = 0.5 * np.diff(panels)
        r = ((0.5 * (panels[:-1] + panels[1:]))[:, None] + half[:, None] * xr[None, :]).ravel()
        log_wr = (np.log(half)[:, None] + np.log(wr)[None, :]).ravel()
        cos, log_wa = self._frame.nodes()
        S, R, C = np.meshgrid(s, r, cos, indexing="ij")
        lag = tau - S
        ysq = np.maximum(radius * radius - 2.0 * radius * lag * R * C + (lag * R) ** 2, 0.0)
        ynorm = np.sqrt(ysq)
        with np.errstate(invalid="ignore", divide="ignore"):
            along = np.where(ynorm > 0, (radius * R * C - lag * R * R) / ynorm, 0.0)
        lrho, ur, temp = prev.lookup(S, ynorm)
        with np.errstate(divide="ignore"):
            log_int = (_log_maxwellian(lrho, ur, temp, R * R, along, dim) - lag
                       + log_ws[:, None, None] + log_wr[None, :, None] + log_wa[None, None, :]
                       + (dim - 1) * np.log(R))
        top = np.max(log_int)
        if not np.isfinite(top):
            return -math.inf, 0.0, 0.0
        p = np.exp(log_int - top)
        mass = p.sum()
        return top + math.log(mass), float(np.sum(p * R * C) / mass), float(np.sum(p * R * R) / mass)

    def _level_fields(self, level: int, tau: float, radius: float):
        # the transported-datum moments sit on the same lattice node of level 0
        cfg = self.config
        lr, u, lt = self._g_cache.node(int(round(tau / cfg.step)), self._q_index(radius))
        parts = [(lr - tau, u, u * u + self.dim * math.exp(lt))]
        if tau > 0:
            parts.append(self._maxwellian_part(level - 1, tau, radius))
        log_rho, u_r, energy = _combine(parts)
        if radius == 0:
            u_r = 0.0
        return _pack(log_rho, u_r, energy, self.dim, self.config.log_rho_floor)

    def _q_index(self, radius):
        cfg = self.config
        return int(round(math.asinh(radius / cfg.radius_scale) / cfg.log_radius_step))

    def fields(self, level: int, tau: float, x) -> MacroFields:
        """Interpolated macro fields of the level-th iterate at (tau, x)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        radius = float(np.linalg.norm(x))
        lr, u, temp = self.cache(level).lookup(np.array([tau]), np.array([radius]))
        direction = x / radius if radius > 0 and x.size == self.dim else np.eye(self.dim)[0]
        return MacroFields.from_log(float(lr[0]), float(u[0]) * direction, float(temp[0]))

    # -- point values
    def log_value(self, level: int, t: float, x, v) -> float:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        log_g = float(self.base.log_eval(x - v * t, v))
        if level == 0:
            return log_g
        return float(np.logaddexp(log_g - t, self._log_duhamel(level - 1, t, x, v)))

    def _log_duhamel(self, level: int, t: float, x, v) -> float:
        """log int_0^t e^{-(t-tau)} M_level(tau, x - v(t-tau), v) dtau."""
        if t <= 0:
            return -math.inf
        xs, ws = gauss_legendre(self.config.sample_time_order)
        tau = 0.5 * t * (xs + 1.0)
        lag = t - tau
        y = x[None, :] - lag[:, None] * v[None, :]
        ynorm = np.linalg.norm(y, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            along = np.where(ynorm > 0, (y @ v) / np.where(ynorm > 0, ynorm, 1.0), 0.0)
        lrho, ur, temp = self.cache(level).lookup(tau, ynorm)
        vals = (_log_maxwellian(lrho, ur, temp, float(v @ v), along, self.dim) - lag
                + np.log(0.5 * t * ws))
        return float(np.logaddexp.reduce(vals))

    def state(self, iterate_index: int) -> MildState:
        return MildState(self, iterate_index)


def apply_T(state: MildState, t: float, x, v, spec=None) -> ExtReal:
    """(T f_K)(t, x, v) = f_{K+1}(t, x, v) as an ExtReal."""
    solver = state.solver
    if t > solver.config.t0 + 1e-12:
        raise ValueError(f"t = {t:g} beyond the configured t0 = {solver.config.t0:g}")
    return ExtReal.from_log(solver.log_value(state.iterate_index + 1, t, x, v))


# ---------------------------------------------------------------- samples and iteration

def default_sample_set(fam: InhomFamily, t0: float = 0.05):
    """30 points at t = t0: |x| in {0, .5, 1, 2, 4, 8} times five velocities in the support."""
    dim = fam.dim
    e1 = np.eye(dim)[0]
    e2 = np.eye(dim)[1] if dim > 1 else -e1
    dirs = [e1, -e1, e2, (e1 + e2) / np.linalg.norm(e1 + e2), (e2 - e1) / np.linalg.norm(e2 - e1)]
    fracs = [0.1, 0.3, 0.5, 0.7, 0.9]
    out = []
    for ax in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
        x = ax * e1
        for d, fr in zip(dirs, fracs):
            # shell radii of the transported point x - v t0, found by fixed-point iteration
            r = 0.0
            for _ in range(100):
                d_pt = np.linalg.norm(x - r * d * t0)
                lo, hi = d_pt ** fam.gamma, 2.0 * d_pt ** fam.gamma + 10.0
                r_new = lo + fr * (hi - lo)
                if abs(r_new - r) < 1e-13:
                    break
                r = r_new
            out.append((t0, tuple(x), tuple(r * d)))
    return out


@dataclass
class PicardResult:
    log_values: np.ndarray          # (K + 1, samples)
    differences: list               # d_1 .. d_K
    ratios: list                    # d_{k+1} / d_k
    samples: list
    evaluations: int
    cache_sizes: list = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)


def picard_iterate(fam: InhomFamily, K: int, sample_set=None, t0: float = 0.05, spec=None,
                   config: PicardConfig | None = None) -> PicardResult:
    """Iterates 0..K at the samples and d_k = sup |f_k - f_{k-1}| (1 + |x|^{2 gamma} + |v|^2)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    cfg = config if config is not None else PicardConfig(t0=t0)
    if cfg.t0 != t0:
        cfg = PicardConfig(**{**cfg.__dict__, "t0": t0})
    samples = default_sample_set(fam, t0) if sample_set is None else list(sample_set)
    for t, _, _ in samples:
        if t > t0 + 1e-12:
            raise ValueError("sample time beyond t0")
    solver = PicardSolver(fam, cfg)

    def row(smp):
        t, x, v = smp
        return [solver.log_value(k, t, np.asarray(x, float), np.asarray(v, float)) for k in range(K + 1)]

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            rows = list(pool.map(row, samples))
    else:
        rows = [row(s) for s in samples]
    logs = np.array(rows).T
    weights = np.array([1.0 + np.linalg.norm(x) ** (2 * fam.gamma) + float(np.dot(v, v))
                        for _, x, v in samples])
    vals = np.exp(logs)
    diffs = [float(np.max(np.abs(vals[k] - vals[k - 1]) * weights)) for k in range(1, K + 1)]
    ratios = [diffs[k] / diffs[k - 1] if diffs[k - 1] > 0 else 0.0 for k in range(1, K)]
    return PicardResult(logs, diffs, ratios, samples, solver.counter.count,
                        [len(c) for c in solver.caches])


# ---------------------------------------------------------------- homogeneous reduction

class HomogeneousMild:
    """Mild iterates for an x-independent datum with transport suppressed.

    Fields of iterate k at time tau combine e^{-tau} times the moments of f_0
    with the GL-weighted moments of the previous iterate's Maxwellians.
    """

    def __init__(self, f0: Density, spec=None, time_order: int = 16):
        from ..kinetic.quadrature import DEFAULT_SPEC
        self.f0 = f0
        self.dim = f0.dim
        self.spec = spec if spec is not None else DEFAULT_SPEC
        rho, mom, energy = raw_moments(f0, self.spec)
        self._raw0 = (math.log(rho), mom / rho, energy / rho)
        self._nodes = gauss_legendre(time_order)
        self._memo: dict = {}

    def raw(self, level: int, tau: float):
        """(log mass, mean velocity vector, mean |v|^2) of iterate ``level`` at time tau."""
        key = (level, round(tau, 14))
        if key in self._memo:
            return self._memo[key]
        lm, u, e = self._raw0
        if level == 0 or tau == 0:
            out = (lm, u, e)
        else:
            xs, ws = self._nodes
            s = 0.5 * tau * (xs + 1.0)
            masses, means, energies = [lm - tau], [u], [e]
            for si, wi in zip(s, ws):
                plm, pu, pe = self.raw(level - 1, float(si))
                masses.append(plm - (tau - si) + math.log(0.5 * tau * wi))
                means.append(pu)
                energies.append(pe)
            masses = np.array(masses)
            top = masses.max()
            w = np.exp(masses - top)
            total = w.sum()
            out = (top + math.log(total), sum(wi * mi for wi, mi in zip(w, means)) / total,
                   float(np.dot(w, energies) / total))
        self._memo[key] = out
        return out

    def fields(self, level: int, tau: float) -> MacroFields:
        lm, u, e = self.raw(level, tau)
        return MacroFields.from_log(lm, u, (e - float(np.dot(u, u))) / self.dim)

    def log_value(self, level: int, t: float, v) -> float:
        v = np.asarray(v, dtype=float)
        log_f0 = float(self.f0.log_eval(v))
        if level == 0 or t == 0:
            return log_f0
        xs, ws = self._nodes
        tau = 0.5 * t * (xs + 1.0)
        terms = [log_f0 - t]
        for ti, wi in zip(tau, ws):
            mf = self.fields(level - 1, float(ti))
            d = v - mf.u_vec
            terms.append(mf.log_rho - 0.5 * self.dim * math.log(2 * math.pi * mf.temp)
                         - float(d @ d) / (2 * mf.temp) - (t - ti) + math.log(0.5 * t * wi))
        return float(np.logaddexp.reduce(terms))
