"""Executable predicates for the elementary power inequalities and radius brackets.

Every check samples its stated domain with a seeded generator and reports the
minimum relative slack (>= 0 means the inequality holds).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gammaln, roots_jacobi, roots_legendre

from .errors import DomainViolation

CSV_COLUMNS = ("lemma_id", "samples", "violations", "min_slack")
SLACK_TOL = -1e-12


@dataclass
class InequalityResult:
    lemma_id: str
    samples: int
    violations: int
    min_slack: float
    counterexample: dict | None = None
    expected_failure: bool = False

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def row(self):
        return [self.lemma_id, self.samples, self.violations, self.min_slack]


def _rel(big, small):
    """Relative slack of big >= small."""
    scale = np.maximum(np.maximum(np.abs(big), np.abs(small)), 1e-300)
    return (big - small) / scale


def _summarize(lemma_id, slacks, inputs, expected_failure=False):
    slack = np.min(np.stack(slacks), axis=0) if len(slacks) > 1 else slacks[0]
    bad = slack < SLACK_TOL
    i = int(np.argmin(slack))
    ce = {k: float(v[i]) for k, v in inputs.items()} if bad.any() else None
    return InequalityResult(lemma_id, int(slack.size), int(bad.sum()), float(slack.min()), ce,
                            expected_failure)


# ---------------------------------------------------------------- samplers, one per lemma

def _scale_sample(rng, n, lo=-6, hi=6):
    return 10.0 ** rng.uniform(lo, hi, n)


def lemma_3_1(rng, n, outside=False):
    """(a+b)^c <= max(c,1)(a^c + b^c) for a, b >= 0, 0 <= c <= 2."""
    a = _scale_sample(rng, n) * (rng.random(n) > 0.05)
    b = _scale_sample(rng, n) * (rng.random(n) > 0.05)
    c = rng.uniform(2.0, 3.0, n) if outside else rng.uniform(0.0, 2.0, n)
    lhs = (a + b) ** c
    rhs = np.maximum(c, 1.0) * (a ** c + b ** c)
    return _summarize("3.1" + ("-outside" if outside else ""), [_rel(rhs, lhs)],
                      {"a": a, "b": b, "c": c}, outside)


def lemma_3_2(rng, n):
    """1-x <= (1-x)^c <= 1-cx (c <= 1); 1-cx <= (1-x)^c <= 1-cx+c^2x^2/2 (1 <= c <= 2); (a-b)^c bounds."""
    x = rng.random(n)
    lo_c = rng.uniform(0.0, 1.0, n)
    hi_c = rng.uniform(1.0, 2.0, n)
    p_lo, p_hi = (1 - x) ** lo_c, (1 - x) ** hi_c
    a = _scale_sample(rng, n, -3, 3)
    b = a * rng.random(n)
    b = np.where(b > 0, b, a)
    q_lo, q_hi = (a - b) ** lo_c, (a - b) ** hi_c
    slacks = [
        _rel(p_lo, 1 - x), _rel(1 - lo_c * x, p_lo),
        _rel(p_hi, 1 - hi_c * x), _rel(1 - hi_c * x + 0.5 * hi_c ** 2 * x ** 2, p_hi),
        _rel(q_lo, a ** lo_c - a ** (lo_c - 1) * b),
        _rel(q_hi, a ** hi_c - hi_c * a ** (hi_c - 1) * b),
    ]
    return _summarize("3.2", slacks, {"x": x, "c_low": lo_c, "c_high": hi_c, "a": a, "b": b})


def lemma_3_3(rng, n):
    """Four expansions of (x +- k t)^a for 2 <= a <= 3, x >= t > 0."""
    a = rng.uniform(2.0, 3.0, n)
    x = _scale_sample(rng, n, -4, 4)
    t = x * rng.random(n)
    t = np.where(t > 0, t, x)
    base = (x ** a, t * x ** (a - 1), t * t * x ** (a - 2))
    slacks = [
        _rel((x + 2 * t / a) ** a, base[0] + base[1] + 2 / a * base[2]),
        _rel(base[0] - base[1] + base[2] / a, (x - t / a) ** a),
        _rel(base[0] + base[1] + base[2] / (2 * a), (x + t / (2 * a)) ** a),
        _rel((x - t / (2 * a)) ** a, base[0] - base[1] + base[2] / (2 * a)),
    ]
    return _summarize("3.3", slacks, {"a": a, "x": x, "t": t})


def _perturbed_domain(rng, n, t_max):
    g = rng.uniform(1 / 3, 1 / 2, n)
    t = t_max * (1 - rng.random(n))          # (0, t_max]
    x_min = t ** (g / (1 - g))
    x = x_min * 10.0 ** rng.uniform(0, 4, n)
    x = np.where(rng.random(n) < 0.05, x_min, x)
    return g, t, x


def lemma_3_4(rng, n, as_printed=False):
    """Bounds on (x^g +- k g t x^{-(1-2g)})^{1/g} for 1/3 <= g <= 1/2, t <= 1, x >= t^{g/(1-g)}.

    ``as_printed`` uses x^{1-2g} in the right-hand sides (documents the sign typo).
    """
    g, t, x = _perturbed_domain(rng, n, 1.0)
    d = x ** (-(1 - 2 * g))
    e = x ** (1 - 2 * g) if as_printed else d
    xg = x ** g
    slacks = [
        _rel((xg + 2 * g * t * d) ** (1 / g), x + (xg + 2 * g * t * e) * t),
        _rel(x - (xg - g * t * e) * t, (xg - g * t * d) ** (1 / g)),
        _rel(x + (xg + 0.5 * g * t * e) * t, (xg + 0.5 * g * t * d) ** (1 / g)),
        _rel((xg - 0.5 * g * t * d) ** (1 / g), x - (xg - 0.5 * g * t * e) * t),
    ]
    return _summarize("3.4" + ("-as-printed" if as_printed else ""), slacks,
                      {"gamma": g, "t": t, "x": x}, as_printed)


def bracket_radii(x, t, g):
    """(upper+, lower-, inner+, inner-) thresholds: r >= |x+rt|^g above the first, etc."""
    xg = x ** g
    d = t * x ** (-(1 - 2 * g))
    return xg + 2 * g * d, xg - 0.5 * g * d, xg + 0.5 * g * d, xg - g * d


def lemma_3_5(rng, n):
    """r vs |x +- r t|^g outside / inside the bracket radii (t <= 1/2)."""
    g, t, x = _perturbed_domain(rng, n, 0.5)
    up_p, up_m, in_p, in_m = bracket_radii(x, t, g)
    span = 1.0 + 10.0 * x ** g
    u = rng.random((4, n))
    r1 = up_p + span * u[0] ** 2
    r2 = up_m + span * u[1] ** 2
    r3 = in_p * u[2]
    r4 = np.maximum(in_m, 0.0) * u[3]
    slacks = [
        _rel(r1, np.abs(x + r1 * t) ** g),
        _rel(r2, np.abs(x - r2 * t) ** g),
        _rel(np.abs(x + r3 * t) ** g, r3),
        _rel(np.abs(x - r4 * t) ** g, r4),
    ]
    return _summarize("3.5", slacks, {"gamma": g, "t": t, "x": x})


def lemma_5_1(rng, n):
    """x^a + y^a >= (x+y)^a >= x^a + (2^a - 1) y^a (y >= x), dyadic variant for y ~ 2^{-k} x."""
    a = 1 - rng.random(n)                    # (0, 1]
    y = _scale_sample(rng, n, -4, 4)
    x = y * rng.random(n)
    k = rng.integers(0, 30, n)
    x2 = _scale_sample(rng, n, -4, 4)
    y2 = x2 * 2.0 ** (-k - 1) * (1 + rng.random(n))
    s1 = (x + y) ** a
    s2 = (x2 + y2) ** a
    slacks = [
        _rel(x ** a + y ** a, s1), _rel(s1, x ** a + (2 ** a - 1) * y ** a),
        _rel(x2 ** a + y2 ** a, s2),
        _rel(s2, x2 ** a + 0.5 * a / 2.0 ** ((1 - a) * (k + 1)) * y2 ** a),
    ]
    return _summarize("5.1", slacks, {"alpha": a, "x": x, "y": y, "k": k})


# ---------------------------------------------------------------- kernel integral

def _inner_mu(r, x, dim, delta, order=64):
    """Average-free angular integral of (1 + |y + x|^2)^{-delta} over |y| = r (without r^{N-1})."""
    if dim == 3:
        # closed form of 2 pi int_{-1}^{1} (1 + r^2 + x^2 + 2 r x mu)^{-delta} d mu
        lo = 1.0 + (r - x) ** 2
        log_ratio = np.log1p(4 * r * x / lo)   # log(hi / lo) without cancellation
        if delta == 1:
            return 2 * math.pi * log_ratio / (2 * r * x)
        return (2 * math.pi * lo ** (1 - delta) * -np.expm1((1 - delta) * log_ratio)
                / (2 * r * x * (delta - 1)))
    if dim == 1:
        return (1 + (x + r) ** 2) ** (-delta) + (1 + (x - r) ** 2) ** (-delta)
    nodes, weights = roots_legendre(order)
    theta = 0.5 * math.pi * (nodes + 1)
    w = 0.5 * math.pi * weights * np.sin(theta) ** (dim - 2)
    perp = math.exp(math.log(2) + 0.5 * (dim - 1) * math.log(math.pi) - gammaln(0.5 * (dim - 1)))
    val = (1 + r[..., None] ** 2 + x[..., None] ** 2
           + 2 * r[..., None] * x[..., None] * np.cos(theta)) ** (-delta)
    return perp * np.sum(val * w, axis=-1)


def kernel_integral(dim: int, a: float, delta: float, abs_x, order: int = 48):
    """int_{|y| <= 2|x|} |y|^{-a} (1 + |y + x|^2)^{-delta} dy, vectorised over |x|."""
    xs = np.atleast_1d(np.asarray(abs_x, dtype=float))
    out = np.zeros_like(xs)
    pos = xs > 0
    if not pos.any():
        return out if np.ndim(abs_x) else float(out[0])
    x = xs[pos]
    # Jacobi panel on [0, x/2] for the r^{N-1-a} endpoint; panels graded geometrically
    # away from the unit-width peak at r = x on both sides
    offsets = 0.5 * 2.0 ** np.arange(26)
    left = x[:, None] - np.minimum(offsets[None, :], 0.5 * x[:, None])
    right = x[:, None] + np.minimum(offsets[None, :], x[:, None])
    p1 = left[:, -1]
    jn, jw = roots_jacobi(order, 0.0, dim - 1 - a)   # weight (1+s)^{N-1-a}
    gn, gw = roots_legendre(order)
    r0 = 0.5 * p1[:, None] * (1 + jn[None, :])
    w0 = (0.5 * p1[:, None]) ** (dim - a) * jw[None, :]
    total = np.sum(w0 * _inner_mu(r0, x[:, None], dim, delta), axis=1)
    edges = np.concatenate([left[:, ::-1], x[:, None], right], axis=1)
    for lo, hi in zip(edges.T[:-1], edges.T[1:]):
        half = 0.5 * (hi - lo)
        r = 0.5 * (lo + hi)[:, None] + half[:, None] * gn[None, :]
        w = half[:, None] * gw[None, :] * r ** (dim - 1 - a)
        total = total + np.sum(w * _inner_mu(r, x[:, None], dim, delta), axis=1)
    out[pos] = total
    return out if np.ndim(abs_x) else float(out[0])


def kernel_envelope(dim, a, delta, abs_x):
    x = np.asarray(abs_x, dtype=float)
    return np.minimum(x ** (dim - a), (1 + x) ** (-a) + (1 + x) ** (-2 * delta - a + dim))


@dataclass
class KernelBoundReport:
    rows: list
    constant: float
    dim: int
    a: float
    delta: float


def _check_kernel_domain(dim, a, delta):
    if not (a < dim and 2 * delta + a > dim):
        raise DomainViolation(f"need a < N and 2 delta + a > N (N={dim}, a={a:g}, delta={delta:g})")


def fitted_kernel_constant(dim: int, a: float, delta: float) -> float:
    """Sup over |x| > 0 of integral / envelope: dense log grid, local refinement and both limits."""
    _check_kernel_domain(dim, a, delta)
    grid = np.geomspace(1e-6, 1e6, 2401)
    ratio = kernel_integral(dim, a, delta, grid) / kernel_envelope(dim, a, delta, grid)
    best = float(ratio.max())
    i = int(np.argmax(ratio))
    lo, hi = math.log(grid[max(i - 1, 0)]), math.log(grid[min(i + 1, len(grid) - 1)])
    res = minimize_scalar(lambda s: -float(kernel_integral(dim, a, delta, math.exp(s))
                                           / kernel_envelope(dim, a, delta, math.exp(s))),
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    best = max(best, -float(res.fun))
    # |x| -> 0: |S^{N-1}| 2^{N-a}/(N-a);  |x| -> inf: int_{R^N} (1+|z|^2)^{-delta} dz
    log_sphere = math.log(2) + 0.5 * dim * math.log(math.pi) - gammaln(0.5 * dim)
    small = math.exp(log_sphere) * 2 ** (dim - a) / (dim - a)
    large = math.exp(0.5 * dim * math.log(math.pi) + gammaln(delta - 0.5 * dim) - gammaln(delta))
    return max(best, small, large) * (1 + 1e-9)


def check_kernel_integral_bound(dim: int = 3, a: float = 1.0, delta: float = 2.0,
                                x_grid=(0.0, 0.1, 0.5, 1.0, 10.0, 100.0), spec=None,
                                constant: float | None = None) -> KernelBoundReport:
    _check_kernel_domain(dim, a, delta)
    c = fitted_kernel_constant(dim, a, delta) if constant is None else constant
    rows = []
    for x in x_grid:
        val = kernel_integral(dim, a, delta, float(x))
        env = float(kernel_envelope(dim, a, delta, float(x)))
        ratio = val / env if env > 0 else 0.0
        rows.append({"abs_x": float(x), "integral": val, "envelope": env, "ratio": ratio,
                     "holds": val <= c * env * (1 + 1e-12)})
    return KernelBoundReport(rows, c, dim, a, delta)


def lemma_5_3(rng, n, dim=3, a=1.0, delta=2.0, constant=None):
    c = fitted_kernel_constant(dim, a, delta) if constant is None else constant
    x = 10.0 ** rng.uniform(-5, 5, n)
    vals = np.concatenate([kernel_integral(dim, a, delta, chunk) for chunk in np.array_split(x, 20)])
    env = kernel_envelope(dim, a, delta, x)
    return _summarize("5.3", [_rel(c * env, vals)], {"abs_x": x})


# ---------------------------------------------------------------- driver

LEMMAS = {"3.1": lemma_3_1, "3.2": lemma_3_2, "3.3": lemma_3_3, "3.4": lemma_3_4,
          "3.5": lemma_3_5, "5.1": lemma_5_1, "5.3": lemma_5_3}


def check_power_inequalities(sample_count: int = 100_000, seed: int = 0,
                             lemmas=tuple(LEMMAS), expected_failures: bool = False) -> list:
    """Seeded sampling of every lemma; one InequalityResult per lemma.

    Each lemma draws from its own child of SeedSequence(seed), so results do
    not depend on which other lemmas run.  ``expected_failures`` appends the
    out-of-domain and as-printed variants, which are meant to fail.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    children = np.random.SeedSequence(seed).spawn(len(LEMMAS) + 2)
    keys = list(LEMMAS)
    out = []
    for name in lemmas:
        rng = np.random.default_rng(children[keys.index(name)])
        out.append(LEMMAS[name](rng, sample_count))
    if expected_failures:
        out.append(lemma_3_1(np.random.default_rng(children[-2]), sample_count, outside=True))
        out.append(lemma_3_4(np.random.default_rng(children[-1]), sample_count, as_printed=True))
    return out


# ---------------------------------------------------------------- brackets

@dataclass
class BracketResult:
    x: float
    t: float
    gamma: float
    lower_radius: float          # below: r <= |x + rt|^gamma  (inner+)
    upper_radius: float          # above: r >= |x + rt|^gamma  (upper+)
    minus_lower_radius: float    # below: r <= |x - rt|^gamma  (inner-)
    minus_upper_radius: float    # above: r >= |x - rt|^gamma  (upper-)
    root_plus: float
    root_minus: float
    verified: dict = field(default_factory=dict)
    min_clause_active: bool = False

    @property
    def all_verified(self) -> bool:
        return all(self.verified.values())


def shell_radius_brackets(x: float, t: float, gamma: float, samples: int = 2001) -> BracketResult:
    """Bracket radii for r = |x +- r t|^gamma, verified by dense sampling and bisection."""
    if not 0 < t <= 0.5:
        raise DomainViolation("t must lie in (0, 1/2]")
    if not 1 / 3 - 1e-12 <= gamma <= 0.5 + 1e-12:
        raise DomainViolation("gamma must lie in [1/3, 1/2]")
    if x < t ** (gamma / (1 - gamma)):
        raise DomainViolation(f"x = {x:g} below t^(gamma/(1-gamma)) = {t ** (gamma / (1 - gamma)):g}")
    up_p, up_m, in_p, in_m = bracket_radii(x, t, gamma)

    def plus(r):
        return r - abs(x + r * t) ** gamma

    def minus(r):
        return r - abs(x - r * t) ** gamma

    # plus(0) < 0 < plus(up_p); minus(0) < 0 < minus(up_m) (minus increases on [0, x/t])
    root_p = brentq(plus, 0.0, up_p * (1 + 1e-9) + 1e-300, xtol=1e-15, rtol=1e-15)
    root_m = brentq(minus, 0.0, max(up_m, 1e-300) * (1 + 1e-9) + 1e-300, xtol=1e-15, rtol=1e-15)
    span = 1.0 + 10.0 * x ** gamma
    above_p = up_p + span * np.linspace(0, 1, samples) ** 2
    above_m = up_m + span * np.linspace(0, 1, samples) ** 2
    below_p = in_p * np.linspace(0, 1, samples)
    below_m = max(in_m, 0.0) * np.linspace(0, 1, samples)
    tol = 1e-12
    verified = {
        "upper_plus": bool(np.all(_rel(above_p, np.abs(x + above_p * t) ** gamma) >= -tol)),
        "upper_minus": bool(np.all(_rel(above_m, np.abs(x - above_m * t) ** gamma) >= -tol)),
        "lower_plus": bool(np.all(_rel(np.abs(x + below_p * t) ** gamma, below_p) >= -tol)),
        "lower_minus": bool(np.all(_rel(np.abs(x - below_m * t) ** gamma, below_m) >= -tol)),
        "root_plus_inside": in_p <= root_p <= up_p,
        "root_minus_inside": in_m <= root_m <= up_m,
    }
    return BracketResult(x, t, gamma, in_p, up_p, in_m, up_m, root_p, root_m, verified,
                         min_clause_active=x / t < up_m)
