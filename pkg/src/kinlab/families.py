"""Initial-data families: shells, the two-bump sequence and the inhomogeneous datum.

Each family is an immutable value object that knows its exact normalisation,
builds a :class:`~kinlab.kinetic.Density` for quadrature, and records the
analytic macro-field targets it was designed to hit.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BadGamma, BadShell, BadTemperature, ConfigError
from .kinetic.densities import Component, Density
from .kinetic.extreal import ExtReal
from .kinetic.fields import MacroFields
from .kinetic.moments import component_moments, moments
from .kinetic.quadrature import DEFAULT_SPEC, QuadratureSpec, log_integrate
from .kinetic.special import log_ball_volume, log_sphere_area
from .tails import segment_integral, shell_macro_asymptotics


def _log_p_root(log_volume: float, p: float) -> float:
    return 0.0 if math.isinf(p) else -log_volume / p


# ---------------------------------------------------------------- shell

@dataclass(frozen=True)
class ShellFamily:
    """A e^{-alpha |v|^beta} on n <= |v| <= n^2 (or n <= |v| when half_infinite)."""
    alpha: float
    beta: float
    p: float
    n: float
    dim: int = 3
    half_infinite: bool = False
    kind: str = field(default="shell", init=False)

    @property
    def outer_radius(self) -> float:
        return math.inf if self.half_infinite else self.n ** 2

    @property
    def log_shell_volume(self) -> float:
        n, d = self.n, self.dim
        # |B_N| (n^{2N} - n^N), kept in log form
        return log_ball_volume(d) + 2 * d * math.log(n) + math.log1p(-n ** (-float(d)))

    @property
    def log_a(self) -> float:
        if self.half_infinite:
            return 0.0
        return _log_p_root(self.log_shell_volume, self.p)

    @property
    def a_np(self) -> float:
        return math.exp(self.log_a)

    def log_radial(self, r):
        r = np.asarray(r, dtype=float)
        return self.log_a - self.alpha * r ** self.beta

    def log_eval(self, v):
        v = np.asarray(v, dtype=float)
        r = np.linalg.norm(v, axis=-1)
        inside = (r >= self.n) & (r <= self.outer_radius)
        return np.where(inside, self.log_radial(r), -np.inf)

    def support(self, v) -> np.ndarray:
        r = np.linalg.norm(np.asarray(v, dtype=float), axis=-1)
        return (r >= self.n) & (r <= self.outer_radius)

    @property
    def isotropic(self) -> bool:
        return True

    def density(self) -> Density:
        from .kinetic.fields import Tail
        tail = Tail(self.alpha, self.beta) if self.half_infinite else None
        # the mass sits in a boundary layer of width ~ 1/(alpha beta n^{beta-1})
        layer = 1.0 / (self.alpha * self.beta * self.n ** (self.beta - 1))
        comp = Component(self.dim, tuple([0.0] * self.dim), log_radial=self.log_radial,
                         r_min=float(self.n), r_max=self.outer_radius, tail=tail,
                         scale=1e-3 * min(layer, self.n))
        return Density((comp,), self.dim, "shell", {"family": self})

    def weighted_norm(self) -> ExtReal:
        """||e^{alpha|v|^beta} f_n||_{L^p}: A times the shell volume to the 1/p (exact)."""
        if math.isinf(self.p):
            return ExtReal.from_log(self.log_a)
        if self.half_infinite:
            return ExtReal.infinity("unbounded support with finite p")
        return ExtReal.from_log(self.log_a + self.log_shell_volume / self.p)

    def exact_fields(self, spec: QuadratureSpec = DEFAULT_SPEC) -> MacroFields:
        """Moments through incomplete-gamma tails instead of generic quadrature."""
        d, a, b = self.dim, self.alpha, self.beta
        m0 = segment_integral(a, b, d - 1, self.n, self.outer_radius, spec).log_value
        m2 = segment_integral(a, b, d + 1, self.n, self.outer_radius, spec).log_value
        log_rho = log_sphere_area(d) + self.log_a + m0
        return MacroFields.from_log(log_rho, np.zeros(d), math.exp(m2 - m0) / d)

    def targets(self) -> MacroFields:
        return shell_macro_asymptotics(self.alpha, self.beta, self.dim, self.a_np, self.n)

    def hypotheses(self, alpha_prime: float) -> dict:
        """Which finite-n inequalities of the beta = 2 shell argument hold at this n."""
        margin = alpha_prime - self.dim / self.n ** 2
        return {"alpha_prime_minus_N_over_n2": margin, "alpha_prime_minus_N_over_n2_positive": margin > 0}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = _p_token(self.p)
        return d


def make_shell(alpha: float, beta: float, p: float, n: float, dim: int = 3,
               half_infinite: bool = False) -> ShellFamily:
    if n < 2:
        raise BadShell(f"shell needs n >= 2 so that n^2 > n (got n = {n})")
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if half_infinite and not math.isinf(p):
        raise BadShell("the half-infinite shell is normalised only for p = inf")
    return ShellFamily(float(alpha), float(beta), float(p), float(n), int(dim), bool(half_infinite))


# ---------------------------------------------------------------- two bumps

@dataclass(frozen=True)
class TwoBumpFamily:
    """Flat bump on |v| <= 1 plus a tiny Gaussian-weighted bump at (0, ..., -n)."""
    alpha: float
    temp: float
    alpha_prime: float
    p: float
    n: float
    dim: int = 3
    kind: str = field(default="two_bump", init=False)

    @property
    def log_a(self) -> float:
        return _log_p_root(log_ball_volume(self.dim) + 2 * self.dim * math.log(self.n), self.p)

    @property
    def bump_center(self) -> np.ndarray:
        c = np.zeros(self.dim)
        c[-1] = -self.n
        return c

    @property
    def bump_radius(self) -> float:
        return 1.0 / self.n ** 2

    def _small_component(self) -> Component:
        la, al = self.log_a, self.alpha

        def log_point(v):
            v = np.asarray(v, dtype=float)
            return la - al * np.sum(v * v, axis=-1)

        return Component(self.dim, tuple(self.bump_center), log_point=log_point,
                         r_max=self.bump_radius)

    @property
    def log_small_mass(self) -> float:
        # integrated in the bump's own frame: the radius 1/n^2 is far below any global grid
        return component_moments(self._small_component(), DEFAULT_SPEC.with_(sphere_rule="product-rule")).log_mass

    @property
    def log_flat_level(self) -> float:
        d = self.dim
        return math.log(d * self.temp / self.n ** 2) - log_ball_volume(d) + self.log_small_mass

    def density(self) -> Density:
        level = self.log_flat_level
        flat = Component(self.dim, tuple([0.0] * self.dim),
                         log_radial=lambda r: np.full(np.shape(r), level), r_max=1.0)
        return Density((flat, self._small_component()), self.dim, "two_bump", {"family": self})

    def log_eval(self, v):
        return self.density().log_eval(v)

    def weighted_norm_bound(self) -> float:
        """The family's a priori bound e^alpha N T / n^2 + 1 on ||e^{alpha|v|^2} f_n||_p."""
        return math.exp(self.alpha) * self.dim * self.temp / self.n ** 2 + 1.0

    def u_bracket(self) -> tuple[float, float]:
        d, n, t = self.dim, self.n, self.temp
        half = (d * t * (n + 1) + 1) / (d * t + n * n)
        return n - half, n + half

    def targets(self) -> MacroFields:
        d, n = self.dim, self.n
        log_rho = (log_ball_volume(d) + self.log_a - 2 * d * math.log(n)
                   + math.log1p(d * self.temp / n ** 2) - self.alpha * n * n)
        return MacroFields.from_log(log_rho, self.bump_center, self.temp)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = _p_token(self.p)
        return d


def make_two_bump(alpha: float, temp: float, alpha_prime: float, p: float, n: float,
                  dim: int = 3) -> TwoBumpFamily:
    if not 0 < alpha_prime * temp < 0.5:
        raise BadTemperature(f"need 0 < alpha' T < 1/2 (got {alpha_prime * temp:g})")
    if not alpha_prime / (1 - 2 * temp * alpha_prime) > alpha:
        raise BadTemperature("need alpha' / (1 - 2 T alpha') > alpha")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    return TwoBumpFamily(float(alpha), float(temp), float(alpha_prime), float(p), float(n), int(dim))


# ---------------------------------------------------------------- inhomogeneous

def gamma_range(beta: float) -> tuple[float, float]:
    return 1.0 / 3.0, min(1.0 / (beta + 1.0), 0.5)


def omega_threshold(p: float, q: float, dim: int, gamma: float) -> tuple[float, bool]:
    """(threshold, strict) such that the mixed norm is finite iff omega >(=) threshold."""
    p_inf, q_inf = math.isinf(p), math.isinf(q)
    if p_inf and q_inf:
        return 0.0, False
    if p_inf:
        return dim * gamma / q, False
    if q_inf:
        return dim / p, True
    return dim * (gamma / q + 1.0 / p), True


@dataclass(frozen=True)
class InhomFamily:
    """(1+|x|)^{-omega} (1+|v|^2)^{-delta} e^{-alpha|v|^beta} on |x|^gamma <= |v| <= 2|x|^gamma + 10."""
    alpha: float
    beta: float
    gamma: float
    delta: float = 0.0
    omega: float = 0.0
    dim: int = 3
    kind: str = field(default="inhomogeneous", init=False)

    @property
    def gamma_admissible(self) -> bool:
        lo, hi = gamma_range(self.beta)
        return lo - 1e-12 <= self.gamma <= hi + 1e-12

    def shell(self, abs_x):
        ax = np.asarray(abs_x, dtype=float)
        inner = ax ** self.gamma
        return inner, 2.0 * inner + 10.0

    def log_profile(self, abs_x, speed):
        """log f_0 as a function of (|x|, |v|) inside the support (no indicator)."""
        ax = np.asarray(abs_x, dtype=float)
        s = np.asarray(speed, dtype=float)
        return (-self.omega * np.log1p(ax) - self.delta * np.log1p(s * s) - self.alpha * s ** self.beta)

    def support_radial(self, abs_x, speed):
        lo, hi = self.shell(abs_x)
        s = np.asarray(speed, dtype=float)
        return (s >= lo) & (s <= hi)

    def log_radial_eval(self, abs_x, speed):
        return np.where(self.support_radial(abs_x, speed), self.log_profile(abs_x, speed), -np.inf)

    def support(self, x, v):
        x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
        return self.support_radial(np.linalg.norm(x, axis=-1), np.linalg.norm(v, axis=-1))

    def log_eval(self, x, v):
        x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
        return self.log_radial_eval(np.linalg.norm(x, axis=-1), np.linalg.norm(v, axis=-1))

    def __call__(self, x, v):
        return np.exp(self.log_eval(x, v))

    def velocity_density(self, abs_x: float) -> Density:
        """f_0(x, .) at a fixed |x| as a radial velocity density."""
        lo, hi = self.shell(abs_x)
        ax = float(abs_x)
        comp = Component(self.dim, tuple([0.0] * self.dim),
                         log_radial=lambda r: self.log_profile(ax, r),
                         r_min=float(lo), r_max=float(hi), scale=1e-3)
        return Density((comp,), self.dim, "inhomogeneous_slice", {"family": self, "abs_x": ax})

    def density_profile(self, abs_x):
        """Comparison profile (1+|x|)^{(N-2delta-beta)gamma-omega} e^{-alpha|x|^{beta gamma}} (log)."""
        ax = np.asarray(abs_x, dtype=float)
        expo = (self.dim - 2 * self.delta - self.beta) * self.gamma - self.omega
        return expo * np.log1p(ax) - self.alpha * ax ** (self.beta * self.gamma)

    def log_truncated_mixed_norm(self, p: float, q: float, radius: float,
                                 spec: QuadratureSpec = DEFAULT_SPEC) -> float:
        """log ||w f_0||_{L^p_x L^q_v} over |x| <= radius, with w = w_{alpha, beta, delta}.

        The weight cancels f_0 on its support, so the inner norm is
        (1+|x|)^{-omega} times the shell volume to the power 1/q.
        """
        d = self.dim

        def log_inner(ax):
            lo, hi = self.shell(ax)
            vol = log_ball_volume(d) + d * np.log(hi) + np.log1p(-(lo / hi) ** d)
            part = vol / q if not math.isinf(q) else 0.0
            return -self.omega * np.log1p(ax) + part

        if math.isinf(p):
            grid = np.linspace(0.0, radius, 2001)
            return float(np.max(log_inner(grid)))

        def log_g(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore"):
                return p * log_inner(r) + (d - 1) * np.log(r)

        val = log_sphere_area(d) + log_integrate(log_g, 0.0, radius, spec, scale=1e-3)
        return val / p

    def to_dict(self) -> dict:
        d = asdict(self)
        if not self.gamma_admissible:
            d["enforce_gamma_range"] = False
        return d


def make_inhomogeneous(alpha: float, beta: float, gamma: float, delta: float = 0.0,
                       omega: float = 0.0, dim: int = 3, enforce_gamma_range: bool = True) -> InhomFamily:
    lo, hi = gamma_range(beta)
    if enforce_gamma_range and not lo - 1e-12 <= gamma <= hi + 1e-12:
        raise BadGamma(f"gamma = {gamma:g} outside the admissible [{lo:g}, {hi:g}] for beta = {beta:g}")
    if not 0 < beta <= 2:
        raise ValueError("inhomogeneous datum needs 0 < beta <= 2")
    if alpha <= 0 or delta < 0 or omega < 0 or gamma <= 0:
        raise ValueError("need alpha > 0, gamma > 0, delta >= 0, omega >= 0")
    return InhomFamily(float(alpha), float(beta), float(gamma), float(delta), float(omega), int(dim))


# ---------------------------------------------------------------- reports, JSON

@dataclass(frozen=True)
class FamilyMacroReport:
    fields: MacroFields
    targets: MacroFields | None
    deviations: dict


def family_macro_fields(fam, spec: QuadratureSpec = DEFAULT_SPEC, abs_x: float = 0.0) -> FamilyMacroReport:
    """Quadrature moments of a family plus deviations from its recorded targets."""
    if isinstance(fam, InhomFamily):
        mf = moments(fam.velocity_density(abs_x), spec)
        return FamilyMacroReport(mf, None, {"log_rho_minus_profile": mf.log_rho - float(fam.density_profile(abs_x))})
    mf = moments(fam.density(), spec)
    tgt = fam.targets()
    dev = {"log_rho_minus_target": mf.log_rho - tgt.log_rho,
           "temp_ratio_minus_1": mf.temp / tgt.temp - 1.0}
    if isinstance(fam, TwoBumpFamily):
        lo, hi = fam.u_bracket()
        dev.update(u_norm=mf.speed, u_lower=lo, u_upper=hi, u_in_bracket=lo <= mf.speed <= hi,
                   u_offset=float(np.linalg.norm(mf.u_vec - fam.bump_center)))
    else:
        dev["u_norm"] = mf.speed
    return FamilyMacroReport(mf, tgt, dev)


def _p_token(p: float):
    return "inf" if math.isinf(p) else p


def family_to_dict(fam) -> dict:
    return fam.to_dict()


def family_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind", None)
    if "p" in d:
        d["p"] = math.inf if d["p"] in ("inf", "Infinity", math.inf) else float(d["p"])
    try:
        if kind == "shell":
            return make_shell(**d)
        if kind == "two_bump":
            return make_two_bump(**d)
        if kind == "inhomogeneous":
            return make_inhomogeneous(**d)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for family {kind!r}: {exc}") from exc
    raise ConfigError(f"unknown family kind {kind!r}; expected shell, two_bump or inhomogeneous")
