"""Energies, forces, the Legendre map and Hamilton's equations for any n.

Kinetic term, with ``J_ij = x_i v_j - x_j v_i``::

    T = (|v|^2 + lam * sum_{i<j} J_ij^2) / (2 (1 + lam r^2))

and the sum over pairs is evaluated through Lagrange's identity
``sum_{i<j} J_ij^2 = r^2 |v|^2 - (x.v)^2``.  The underscored kernels work on
arrays of shape ``(..., n)`` and skip domain checks; they are what the
integrator and the residual checks call in their loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Params, as_vector, check_domain


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _pair_sum(x, v):
    """sum_{i<j} (x_i v_j - x_j v_i)^2."""
    return _dot(x, x) * _dot(v, v) - _dot(x, v) ** 2


def _kinetic(lam, x, v):
    r2 = _dot(x, x)
    return 0.5 * (_dot(v, v) + lam * _pair_sum(x, v)) / (1.0 + lam * r2)


def _potential(lam, alpha2, x):
    r2 = _dot(x, x)
    return 0.5 * alpha2 * r2 / (1.0 + lam * r2)


def _force(lam, alpha2, x, v):
    r2 = _dot(x, x)
    coeff = (-alpha2 + lam * (_dot(v, v) + lam * _pair_sum(x, v))) / (1.0 + lam * r2)
    return np.asarray(coeff)[..., None] * x


def _to_momenta(lam, x, v):
    r2 = _dot(x, x)
    c = lam * _dot(x, v) / (1.0 + lam * r2)
    return v - np.asarray(c)[..., None] * x


def _to_velocities(lam, x, p):
    return p + lam * np.asarray(_dot(x, p))[..., None] * x


def _hamiltonian(lam, alpha2, x, p):
    xp = _dot(x, p)
    return 0.5 * (_dot(p, p) + lam * xp * xp) + _potential(lam, alpha2, x)


def _hamilton_field(lam, alpha2, x, p):
    r2 = _dot(x, x)
    xp = np.asarray(lam * _dot(x, p))[..., None]
    dx = p + xp * x
    dp = -xp * p - np.asarray(alpha2 / (1.0 + lam * r2) ** 2)[..., None] * x
    return dx, dp


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential


def kinetic_energy(params: Params, x, v) -> float:
    x = check_domain(params, x)
    v = as_vector(params, v, "v")
    return float(_kinetic(params.lam, x, v))


def potential_energy(params: Params, x) -> float:
    x = check_domain(params, x)
    return float(_potential(params.lam, params.alpha2, x))


def energy(params: Params, x, v) -> EnergyBreakdown:
    return EnergyBreakdown(kinetic_energy(params, x, v), potential_energy(params, x))


def lagrangian(params: Params, x, v) -> float:
    return kinetic_energy(params, x, v) - potential_energy(params, x)


def force(params: Params, x, v) -> np.ndarray:
    """Acceleration F_k(x, v) of the Euler-Lagrange equations."""
    x = check_domain(params, x)
    v = as_vector(params, v, "v")
    return _force(params.lam, params.alpha2, x, v)


def to_momenta(params: Params, x, v) -> np.ndarray:
    x = check_domain(params, x)
    v = as_vector(params, v, "v")
    return _to_momenta(params.lam, x, v)


def to_velocities(params: Params, x, p) -> np.ndarray:
    x = check_domain(params, x)
    p = as_vector(params, p, "p")
    return _to_velocities(params.lam, x, p)


def hamiltonian(params: Params, x, p) -> float:
    x = check_domain(params, x)
    p = as_vector(params, p, "p")
    return float(_hamiltonian(params.lam, params.alpha2, x, p))


def hamilton_field(params: Params, x, p) -> tuple[np.ndarray, np.ndarray]:
    """(dx/dt, dp/dt) = (dH/dp, -dH/dx), both from closed forms."""
    x = check_domain(params, x)
    p = as_vector(params, p, "p")
    return _hamilton_field(params.lam, params.alpha2, x, p)
