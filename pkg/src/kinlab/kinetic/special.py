"""Sphere/ball measures and a few log-space helpers."""
from __future__ import annotations

import math

import numpy as np


def log_gamma(x: float) -> float:
    # math.lgamma is accurate to a few ulp on the arguments used here
    return math.lgamma(x)


def log_sphere_area(dim: int) -> float:
    """log |S^{dim-1}| = log(2 pi^{dim/2} / Gamma(dim/2))."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    return math.log(2.0) + 0.5 * dim * math.log(math.pi) - log_gamma(0.5 * dim)


def log_ball_volume(dim: int) -> float:
    """log |B_dim(1)|."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    return 0.5 * dim * math.log(math.pi) - log_gamma(0.5 * dim + 1.0)


def sphere_area(dim: int) -> float:
    return math.exp(log_sphere_area(dim))


def ball_volume(dim: int) -> float:
    return math.exp(log_ball_volume(dim))


def logsumexp(values, axis=None):
    """logsumexp that returns -inf (without warnings) when every entry is -inf."""
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        return -math.inf if axis is None else np.full(np.delete(a.shape, axis), -np.inf)
    m = np.max(a, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sum(np.exp(a - m_safe), axis=axis, keepdims=True)
        out = np.log(s) + m_safe
    out = np.where(np.isneginf(m), -np.inf, out)
    out = np.where(np.isposinf(m), np.inf, out)
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def log_diff_exp(a: float, b: float) -> float:
    """log(e^a - e^b) for a >= b."""
    if b == -math.inf:
        return a
    if b > a:
        raise ValueError("log_diff_exp needs a >= b")
    if a == b:
        return -math.inf
    return a + math.log(-math.expm1(b - a))
