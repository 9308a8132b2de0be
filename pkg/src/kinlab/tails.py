"""Tail integrals of e^{-alpha r^beta} r^n and their leading-order asymptotics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinetic.extreal import ExtReal
from .kinetic.fields import MacroFields
from .kinetic.quadrature import DEFAULT_SPEC, QuadratureSpec, log_integrate
from .kinetic.special import log_diff_exp, log_sphere_area

# above this value of alpha x^beta the prefactor e^{-alpha x^beta} underflows
RATIO_FORM_THRESHOLD = 700.0


@dataclass(frozen=True)
class TailIntegralQuery:
    alpha: float
    beta: float
    n: float
    x: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.n, self.x)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("tail query parameters must be finite")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if self.n < 0 or self.x < 0:
            raise ValueError("n and x must be nonnegative")

    @property
    def exponent_at_x(self) -> float:
        return self.alpha * self.x ** self.beta

    @property
    def log_prefactor(self) -> float:
        """log of (1/(alpha beta)) e^{-alpha x^beta} x^{n+1-beta}."""
        a, b, n, x = self.alpha, self.beta, self.n, self.x
        return -math.log(a * b) - a * x ** b + (n + 1 - b) * math.log(x)


def _log_ratio(q: TailIntegralQuery, spec: QuadratureSpec) -> float:
    # With X = alpha x^beta and t = alpha r^beta - X the tail becomes
    # prefactor * int_0^inf e^{-t} (1 + t/X)^k dt,  k = (n + 1 - beta)/beta.
    big_x = q.exponent_at_x
    k = (q.n + 1 - q.beta) / q.beta
    if k == 0:
        return 0.0

    def log_g(t):
        t = np.asarray(t, dtype=float)
        return -t + k * np.log1p(t / big_x)

    return log_integrate(log_g, 0.0, None, spec, scale=1e-3)


def _log_direct(q: TailIntegralQuery, spec: QuadratureSpec) -> float:
    a, b, n = q.alpha, q.beta, q.n
    if q.x == 0:
        # complete gamma function
        return -math.log(b) - (n + 1) / b * math.log(a) + math.lgamma((n + 1) / b)

    def log_g(r):
        r = np.asarray(r, dtype=float)
        return -a * r ** b + n * np.log(r)

    peak = ((n / (a * b)) ** (1 / b)) if n > 0 else q.x
    scale = 1e-3 * max(q.x, min(peak, 1.0), 1e-6)
    breaks = (peak,) if peak > q.x else ()
    return log_integrate(log_g, q.x, None, spec, breaks=breaks, scale=scale)


def tail_integral(q: TailIntegralQuery, spec: QuadratureSpec = DEFAULT_SPEC) -> ExtReal:
    """int_x^inf e^{-alpha r^beta} r^n dr as an ExtReal (exact in log space)."""
    if q.x > 0 and q.exponent_at_x > RATIO_FORM_THRESHOLD:
        return ExtReal.from_log(q.log_prefactor + _log_ratio(q, spec))
    return ExtReal.from_log(_log_direct(q, spec))


def segment_integral(alpha: float, beta: float, n: float, lower: float, upper: float,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> ExtReal:
    """int_lower^upper e^{-alpha r^beta} r^n dr as a difference of two tails."""
    if upper <= lower:
        return ExtReal.zero()
    head = tail_integral(TailIntegralQuery(alpha, beta, n, lower), spec).log_value
    if math.isinf(upper):
        return ExtReal.from_log(head)
    rest = tail_integral(TailIntegralQuery(alpha, beta, n, upper), spec).log_value
    return ExtReal.from_log(log_diff_exp(head, min(rest, head)))


def tricomi_ratio(q: TailIntegralQuery, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Tail divided by its leading Tricomi term; tends to 1 as x grows."""
    if q.x <= 0:
        raise ValueError("tricomi_ratio needs x > 0")
    return math.exp(_log_ratio(q, spec))


def shell_macro_asymptotics(alpha: float, beta: float, dim: int, c_n: float, n: float) -> MacroFields:
    """Leading-order (rho, u, T) of c_n e^{-alpha|v|^beta} on a shell starting at |v| = n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    log_rho = (log_sphere_area(dim) + math.log(c_n) + (dim - beta) * math.log(n)
               - alpha * n ** beta - math.log(alpha * beta))
    return MacroFields.from_log(log_rho, np.zeros(dim), n * n / dim)


def max3_gap(alpha_prime: float, beta: float, temp: float) -> float:
    """g(v_T + 1) - g(v_T) for g(x) = alpha' x^beta - x^2/(2T) at its maximiser v_T."""
    if not 0 < beta < 2:
        raise ValueError("max3_gap needs 0 < beta < 2")
    if alpha_prime <= 0 or temp <= 0:
        raise ValueError("alpha_prime and T must be positive")
    v_t = (alpha_prime * beta * temp) ** (1 / (2 - beta))

    def g(x):
        return alpha_prime * x ** beta - x * x / (2 * temp)

    return g(v_t + 1) - g(v_t)
