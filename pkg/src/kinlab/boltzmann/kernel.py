"""Cutoff collision kernel B(v-u, sigma) = |v-u|^kappa C|cos theta| and the collision map."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import BadSigma
from ..kinetic.special import log_sphere_area

SIGMA_TOL = 1e-12


def collide(v, u, sigma, tol: float = SIGMA_TOL):
    """Post-collision pair (v', u'); broadcasts over leading axes."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    norm = np.linalg.norm(sigma, axis=-1)
    if np.any(np.abs(norm - 1.0) > tol):
        raise BadSigma(f"sigma must be a unit vector (|sigma| = {np.max(np.abs(norm - 1.0)) + 1:.3e})")
    proj = np.sum((u - v) * sigma, axis=-1, keepdims=True)
    return v + proj * sigma, u - proj * sigma


def angular_mass(dim: int) -> float:
    """Integral of |cos theta| over S^{N-1}: 2|S^{N-2}|/(N-1)."""
    if dim < 2:
        raise ValueError("the angular integral needs N >= 2")
    return 2.0 * math.exp(log_sphere_area(dim - 1)) / (dim - 1)


def orthonormal_complement(axis, rng):
    """Random unit vectors orthogonal to each row of ``axis`` (assumed unit)."""
    z = rng.standard_normal(axis.shape)
    z -= np.sum(z * axis, axis=-1, keepdims=True) * axis
    n = np.linalg.norm(z, axis=-1, keepdims=True)
    bad = n[..., 0] < 1e-12
    while np.any(bad):
        z[bad] = rng.standard_normal((int(bad.sum()), axis.shape[-1]))
        z[bad] -= np.sum(z[bad] * axis[bad], axis=-1, keepdims=True) * axis[bad]
        n = np.linalg.norm(z, axis=-1, keepdims=True)
        bad = n[..., 0] < 1e-12
    return z / n


def sigma_from_cos(axis, cos, rng):
    """sigma = cos * axis + sqrt(1 - cos^2) * e_perp with uniform e_perp."""
    perp = orthonormal_complement(axis, rng)
    c = np.clip(cos, -1.0, 1.0)[..., None]
    s = cos_sin(c)
    out = c * axis + s * perp
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def cos_sin(c):
    return np.sqrt(np.maximum(0.0, (1.0 - c) * (1.0 + c)))


def sample_abs_cos(rng, size, dim: int = 3):
    """|cos theta| for sigma drawn with density proportional to |cos theta| on S^{N-1}.

    cos^2 is Beta(1, (N-1)/2); for N = 3 this is the inverse transform sqrt(U).
    """
    if dim == 3:
        return np.sqrt(rng.random(size))
    return np.sqrt(rng.beta(1.0, (dim - 1) / 2.0, size))


@dataclass(frozen=True)
class CollisionKernel:
    kappa: float
    angular_constant: float = 1.0
    dim: int = 3

    def __post_init__(self):
        if not (-self.dim < self.kappa <= 1):
            raise ValueError("kappa must lie in (-N, 1]")
        if not self.angular_constant > 0:
            raise ValueError("angular constant must be positive")
        if self.dim < 2:
            raise ValueError("collision kernel needs N >= 2")

    @property
    def total_angular(self) -> float:
        """C times the integral of |cos theta| over the sphere."""
        return self.angular_constant * angular_mass(self.dim)

    def __call__(self, relative, sigma):
        relative = np.asarray(relative, dtype=float)
        g = np.linalg.norm(relative, axis=-1)
        dot = np.abs(np.sum(relative * np.asarray(sigma, dtype=float), axis=-1))
        # |g|^kappa |g.sigma|/|g| written without the division
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.angular_constant * dot * np.where(g > 0, g ** (self.kappa - 1.0), 0.0)
        return out

    def rate(self, relative_speed):
        """Angular-integrated kernel |g|^kappa * C * int|cos|."""
        g = np.asarray(relative_speed, dtype=float)
        return self.total_angular * g ** self.kappa

    def sample_sigma(self, relative, rng):
        """sigma distributed proportionally to |cos theta| about the direction of ``relative``."""
        relative = np.atleast_2d(np.asarray(relative, dtype=float))
        g = np.linalg.norm(relative, axis=-1, keepdims=True)
        axis = np.where(g > 0, relative / np.where(g > 0, g, 1.0), 0.0)
        zero = g[:, 0] == 0
        if np.any(zero):
            e = rng.standard_normal((int(zero.sum()), self.dim))
            axis[zero] = e / np.linalg.norm(e, axis=-1, keepdims=True)
        c = sample_abs_cos(rng, len(axis), self.dim)
        c = np.where(rng.random(len(axis)) < 0.5, c, -c)
        return sigma_from_cos(axis, c, rng)

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "angular_constant": self.angular_constant, "dim": self.dim}


def admissibility(dim: int, alpha: float, beta: float, delta: float, kappa: float) -> dict:
    """Index conditions for the weighted gain bound; every failing clause is listed."""
    lower = max(0.0, 2.0 * kappa / (dim - 1) if dim > 1 else math.inf, 2.0 * (1 + kappa) / 3.0)
    clauses = {
        "N >= 2": dim >= 2,
        "alpha > 0": alpha > 0,
        f"beta > {lower:g}": beta > lower,
        "beta <= 2": beta <= 2,
        "2 delta > N + 2": 2 * delta > dim + 2,
    }
    if dim == 2:
        clauses["1 + kappa <= beta"] = 1 + kappa <= beta
    failed = [k for k, ok in clauses.items() if not ok]
    return {"admissible": not failed, "clauses": clauses, "failed": failed}
