"""Field-bound reports, transported moment bounds and blow-up exponent scans."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..errors import BadGamma
from ..families import InhomFamily
from .fields import DEFAULT_RULE, TransportRule, first_iterate_fields
from .picard import PicardConfig, PicardSolver

DEFAULT_TIMES = (0.0, 0.02, 0.05)
DEFAULT_RADII = (0.0, 1.0, 4.0, 16.0, 64.0, 100.0)
DEFAULT_GRID = tuple((t, x) for t in DEFAULT_TIMES for x in DEFAULT_RADII)
FIELD_COLUMNS = ("t", "abs_x", "rho", "u_norm", "temp", "ratio_rho", "ratio_u", "ratio_T")
SCAN_COLUMNS = ("probe", "abs_coord", "E", "side_condition_flags")


@dataclass
class FieldBoundReport:
    grid: list
    rows: list
    constants: dict           # empirical C1..C5
    spreads: dict             # max/min ratio per profile
    flags: dict               # profile -> spread exceeds the factor
    spread_factor: float = 1e2

    def table(self) -> list:
        return [[r[c] for c in FIELD_COLUMNS] for r in self.rows]

    @property
    def within_spread(self) -> bool:
        return not any(self.flags.values())


def _u_ratio(speed: float, abs_x: float, t: float, gamma: float) -> float:
    if speed == 0.0:
        return 0.0
    if t == 0.0:
        return math.inf
    return speed / ((1.0 + abs_x ** gamma) * t ** 0.25)


def field_bound_report(fam: InhomFamily, K: int = 1, grid=DEFAULT_GRID, spec=None,
                       t0: float = 0.05, spread_factor: float = 1e2,
                       rule: TransportRule = DEFAULT_RULE,
                       config: PicardConfig | None = None) -> FieldBoundReport:
    """Macro fields entering the K-th application of T, against their comparison profiles.

    K = 1 reports the fields of the transported datum f_0(x - vt, v); K >= 2
    reports the (lattice-interpolated) fields of iterate K - 1.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    grid = [(float(t), float(x)) for t, x in grid]
    if any(t > t0 + 1e-12 for t, _ in grid):
        raise ValueError("grid times must not exceed t0")
    solver = PicardSolver(fam, config or PicardConfig(t0=t0, transport=rule)) if K > 1 else None
    rows = []
    for t, ax in grid:
        if solver is None:
            mf = first_iterate_fields(fam, t, ax, rule)
        else:
            mf = solver.fields(K - 1, t, ax)
        speed = 0.0 if t == 0 else mf.speed
        rows.append({
            "t": t, "abs_x": ax, "rho": mf.rho, "u_norm": speed, "temp": mf.temp,
            "log_rho": mf.log_rho,
            "ratio_rho": math.exp(mf.log_rho - float(fam.density_profile(ax))),
            "ratio_u": _u_ratio(speed, ax, t, fam.gamma),
            "ratio_T": mf.temp / (1.0 + ax ** (2 * fam.gamma)),
        })
    rr = np.array([r["ratio_rho"] for r in rows])
    rt = np.array([r["ratio_T"] for r in rows])
    ru = np.array([r["ratio_u"] for r in rows])
    constants = {"C1": float(rr.min()), "C2": float(rr.max()), "C3": float(ru.max()),
                 "C4": float(rt.min()), "C5": float(rt.max())}
    spreads = {"rho": float(rr.max() / rr.min()), "T": float(rt.max() / rt.min())}
    flags = {k: v > spread_factor for k, v in spreads.items()}
    flags["u"] = not math.isfinite(constants["C3"])
    return FieldBoundReport(grid, rows, constants, spreads, flags, spread_factor)


# ---------------------------------------------------------------- transported moment bound

@dataclass
class MomentBoundReport:
    sup: float
    rows: list
    rel_tol: float
    sup_tight: float | None = None
    gamma_admissible: bool = True

    @property
    def relative_change(self) -> float | None:
        if self.sup_tight is None:
            return None
        return abs(self.sup_tight - self.sup) / self.sup


def _normalized_moment(n, m, alpha, beta, gamma, c_u, c_t, dim, t, tau, abs_x, rel_tol):
    """int |v|^n e^{-alpha|y|^{bg}} (1+|y|^{2g})^{-m/2} exp(-(v-u(tau,y))^2 / (C_T (1+|y|^{2g}))) dv,
    y = x - vt, divided by (1+|x|^g)^{n-m+N} e^{-alpha|x|^{bg}}; u(tau, y) is radial in y."""
    bg, g2 = beta * gamma, 2 * gamma
    log_norm = (n - m + dim) * math.log1p(abs_x ** gamma) - alpha * abs_x ** bg
    log_sphere_perp = (math.log(2.0) + 0.5 * (dim - 1) * math.log(math.pi)
                       - math.lgamma(0.5 * (dim - 1))) if dim >= 2 else 0.0

    def log_integrand(r, c):
        ysq = max(abs_x * abs_x - 2.0 * abs_x * t * r * c + (t * r) ** 2, 0.0)
        y = math.sqrt(ysq)
        along = (abs_x * r * c - t * r * r) / y if y > 0 else 0.0
        spread = 1.0 + y ** g2
        u = c_u * (1.0 + y ** gamma) * tau ** 0.25
        quad = r * r - 2.0 * u * along + u * u
        return (n * math.log(r) - alpha * y ** bg - 0.5 * m * math.log(spread)
                - quad / (c_t * spread))

    # reach: Gaussian of width sqrt(C_T(1+|y|^{2g})) around |u|, with |y| <= |x| + t r
    reach = 1.0
    for _ in range(100):
        y = abs_x + t * reach
        new = c_u * (1 + y ** gamma) * tau ** 0.25 + 12.0 * math.sqrt(c_t * (1 + y ** g2)) + 1.0
        if abs(new - reach) < 1e-10 * new:
            break
        reach = new
    # log-scale shift keeps the integrand O(1)
    probe = [log_integrand(r, c) for r in np.linspace(1e-6, reach, 41) for c in (-1.0, 0.0, 1.0)]
    shift = max(probe)

    if dim == 1:
        def ray(r, c):
            return math.exp(log_integrand(r, c) - shift)
        total = sum(integrate.quad(ray, 0.0, reach, args=(c,), epsabs=0.0, epsrel=rel_tol,
                                   limit=200)[0] for c in (1.0, -1.0))
    else:
        def f(theta, r):
            c = math.cos(theta)
            return (math.exp(log_integrand(r, c) - shift) * r ** (dim - 1)
                    * math.sin(theta) ** (dim - 2))
        total = integrate.dblquad(f, 0.0, reach, 0.0, math.pi, epsabs=0.0, epsrel=rel_tol)[0]
        total *= math.exp(log_sphere_perp)
    return math.exp(math.log(total) + shift - log_norm)


def transported_moment_bound_check(n: float = 2, m: float | None = None, alpha: float = 1.0,
                                   beta: float = 2.0, gamma: float = 0.5, c_u: float = 1.0,
                                   c_t: float = 1.0, dim: int = 3, grid=None,
                                   rel_tol: float = 1e-6, tighten: float | None = 10.0,
                                   enforce_gamma_range: bool = False) -> MomentBoundReport:
    """Sup over (t, tau, |x|) of the normalized transported moment.

    ``alpha = 0`` gives the exponent-free variant.  With ``tighten`` the sup is
    recomputed at rel_tol / tighten and recorded as ``sup_tight``.
    """
    admissible = 0 < gamma <= 1 / (1 + beta) + 1e-12
    if enforce_gamma_range and not admissible:
        raise BadGamma("gamma must lie in (0, 1/(1+beta)]")
    m = dim if m is None else m
    if grid is None:
        grid = [(t, tau, x) for t in DEFAULT_TIMES for tau in DEFAULT_TIMES
                for x in (0.0, 1.0, 4.0, 16.0, 64.0)]
    rows = []
    for t, tau, ax in grid:
        val = _normalized_moment(n, m, alpha, beta, gamma, c_u, c_t, dim, t, tau, ax, rel_tol)
        row = {"t": t, "tau": tau, "abs_x": ax, "value": val}
        if tighten:
            row["value_tight"] = _normalized_moment(n, m, alpha, beta, gamma, c_u, c_t, dim,
                                                    t, tau, ax, rel_tol / tighten)
        rows.append(row)
    sup = max(r["value"] for r in rows)
    sup_tight = max(r["value_tight"] for r in rows) if tighten else None
    return MomentBoundReport(sup, rows, rel_tol, sup_tight, admissible)


# ---------------------------------------------------------------- exponent scans

@dataclass
class ExponentScan:
    direction: str
    rows: list
    c3: float
    c4: float
    threshold: float | None = None   # abs_coord beyond which E increases
    fit: dict = field(default_factory=dict)

    def table(self) -> list:
        return [[r[c] for c in SCAN_COLUMNS] for r in self.rows]


def probe_speed(abs_x, alpha_prime: float, beta: float, gamma: float, c4: float):
    ax = np.asarray(abs_x, dtype=float)
    if beta <= 1:
        return (alpha_prime * beta * c4 * ax ** (2 * gamma) / 8.0) ** (1.0 / (2.0 - beta))
    return ax ** (2 * gamma)


def _exponent(speed, abs_y, alpha, alpha_prime, beta, gamma, c3, c4, tau):
    # u antiparallel to v maximizes (v - u)^2 for the recorded bound on |u|
    u = c3 * (1.0 + abs_y ** gamma) * tau ** 0.25
    return (alpha_prime * speed ** beta - alpha * abs_y ** (beta * gamma)
            - (speed + u) ** 2 / (2.0 * c4 * (1.0 + abs_y ** (2 * gamma)))), u


def blowup_exponent_scan(fam: InhomFamily, direction: str, grid, t: float, tau: float,
                         alpha_prime: float | None = None, c3: float | None = None,
                         c4: float | None = None, report: FieldBoundReport | None = None,
                         t0: float = 0.05) -> ExponentScan:
    """E along the probe points v = v_x (x_to_infinity) or x = x_v (v_to_infinity).

    C3, C4 default to the empirical constants of ``field_bound_report``.  Probe
    side conditions that fail are listed per row (a RegimeViolation record).
    """
    if direction not in ("x_to_infinity", "v_to_infinity"):
        raise ValueError("direction must be x_to_infinity or v_to_infinity")
    if not 0 <= tau <= t <= t0:
        raise ValueError("need 0 <= tau <= t <= t0")
    a, b, g = fam.alpha, fam.beta, fam.gamma
    ap = a if alpha_prime is None else alpha_prime
    if c3 is None or c4 is None:
        rep = report or field_bound_report(fam, 1, t0=t0)
        c3 = rep.constants["C3"] if c3 is None else c3
        c4 = rep.constants["C4"] if c4 is None else c4
    lag = t - tau
    rows = []
    for coord in np.asarray(grid, dtype=float):
        flags = []
        if direction == "x_to_infinity":
            speed = float(probe_speed(coord, ap, b, g, c4))
            # v_x parallel to x; |x - v_x (t - tau)|
            abs_y = abs(coord - speed * lag)
            if not 0.5 * coord <= abs_y <= 2.0 * coord:
                flags.append("|x-v(t-tau)| outside [|x|/2, 2|x|]")
            if b <= 1 and speed < 2:
                flags.append("|v_x| < 2")
            if b > 1 and coord < 2.0 ** (-2 * g):
                flags.append("|x| < 2^(-2 gamma)")
            probe = "v_x"
        else:
            speed = float(coord)
            abs_xv = speed ** ((4.0 - b) / (4.0 * g))
            abs_y = abs(abs_xv - speed * lag)
            if not 0.25 * abs_xv <= abs_y <= 3.0 * abs_xv:
                flags.append("|x_v-v(t-tau)| outside [|x_v|/4, 3|x_v|]")
            probe = "x_v"
        e, u = _exponent(speed, abs_y, a, ap, b, g, c3, c4, tau)
        if a * abs_y ** (b * g) > 0.5 * ap * speed ** b:
            flags.append("alpha|y|^(beta gamma) > alpha'|v|^beta/2")
        if direction == "x_to_infinity" and (speed + u) ** 2 > 2 * speed ** 2:
            flags.append("(v-u)^2 > 2v^2")
        if direction == "v_to_infinity" and u > 0.5 * speed:
            flags.append("|u| > |v|/2")
        extra = {}
        if direction == "x_to_infinity" and b < 2:
            # homogeneous exponent max_v alpha'|v|^beta - v^2/(2T) at T = (C4/16)|x|^{2 gamma}
            temp = c4 / 16.0 * coord ** (2 * g)
            v_t = (ap * b * temp) ** (1.0 / (2.0 - b))
            extra["homogeneous_exponent"] = ap * v_t ** b - v_t * v_t / (2.0 * temp)
        rows.append({**extra, "probe": probe, "abs_coord": float(coord), "E": float(e),
                     "speed": speed, "abs_y": abs_y, "u_bound": u,
                     "side_condition_flags": ";".join(flags) if flags else "ok",
                     "regime_violation": bool(flags)})
    es = np.array([r["E"] for r in rows])
    threshold = None
    inc = np.diff(es) > 0
    if inc.size and inc[-1]:
        k = len(inc)
        while k > 0 and inc[k - 1]:
            k -= 1
        threshold = float(rows[k]["abs_coord"])
    return ExponentScan(direction, rows, float(c3), float(c4), threshold)


def fit_power_pair(scan: ExponentScan, lead: float, sub: float, lo: float = None, hi: float = None) -> dict:
    """Least squares E ~ c |coord|^lead - c' |coord|^sub over lo <= coord <= hi."""
    pts = [(r["abs_coord"], r["E"]) for r in scan.rows
           if (lo is None or r["abs_coord"] >= lo) and (hi is None or r["abs_coord"] <= hi)]
    xs = np.array([p[0] for p in pts])
    es = np.array([p[1] for p in pts])
    basis = np.stack([xs ** lead, -xs ** sub], axis=1)
    # scale columns so both coefficients are resolved
    norms = np.linalg.norm(basis, axis=0)
    coef, *_ = np.linalg.lstsq(basis / norms, es, rcond=None)
    coef = coef / norms
    out = {"c": float(coef[0]), "c_prime": float(coef[1]), "lead": lead, "sub": sub}
    scan.fit = out
    return out


def log_log_slope(scan: ExponentScan, lo: float, hi: float) -> float:
    pts = [(r["abs_coord"], r["E"]) for r in scan.rows if lo <= r["abs_coord"] <= hi and r["E"] > 0]
    xs = np.log([p[0] for p in pts])
    es = np.log([p[1] for p in pts])
    return float(np.polyfit(xs, es, 1)[0])
