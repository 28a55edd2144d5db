"""Model parameters, phase-space states and the configuration-space domain.

For ``lambda < 0`` the kinetic term is positive definite only inside the
disc ``r^2 < 1/|lambda|``; positions are accepted only while they stay a
``boundary_margin`` away from that circle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimensionMismatch, InvalidParams, NonPositiveAlpha, NonPositiveDim, OutOfDomain

DEFAULT_TOL = 1e-10
MARGIN_FACTOR = 1e-9


@dataclass(frozen=True)
class Params:
    """The model triple (lambda, alpha, n) plus numeric tolerances.

    ``alpha = 0`` is accepted here so that the kinetic-only ("free particle")
    system can share the same code paths; :func:`validate_params` is the
    public constructor and insists on ``alpha > 0``.
    """

    lam: float
    alpha: float
    dim: int
    boundary_margin: float = 0.0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not (self.alpha >= 0.0) or not math.isfinite(self.alpha):
            raise NonPositiveAlpha(f"alpha must be positive, got {self.alpha!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise NonPositiveDim(f"dim must be a positive integer, got {self.dim!r}")
        if not math.isfinite(self.lam):
            raise InvalidParams(f"lambda must be finite, got {self.lam!r}")
        if self.boundary_margin == 0.0:
            object.__setattr__(self, "boundary_margin", default_margin(self.lam))
        if self.boundary_margin <= 0.0 or self.tol <= 0.0:
            raise InvalidParams("boundary_margin and tol must be positive")

    @property
    def alpha2(self) -> float:
        return self.alpha * self.alpha

    @property
    def domain_radius(self) -> float:
        return domain_radius_of(self.lam)

    @property
    def r2_limit(self) -> float:
        """Largest admissible r^2 (infinite for lambda >= 0)."""
        if self.lam >= 0.0:
            return math.inf
        return 1.0 / abs(self.lam) - self.boundary_margin

    @property
    def threshold_energy(self) -> float:
        """E_{alpha,lambda} = alpha^2 / (2 lambda), the bounded/unbounded border for lambda > 0."""
        if self.lam <= 0.0:
            return math.inf
        return self.alpha2 / (2.0 * self.lam)

    def free(self) -> "Params":
        """Same geometry with the potential switched off."""
        return Params(self.lam, 0.0, self.dim, self.boundary_margin, self.tol)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "alpha": self.alpha, "dim": self.dim}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Params":
        return validate_params(float(data["lambda"]), float(data["alpha"]), int(data["dim"]))

    @classmethod
    def from_json(cls, text: str) -> "Params":
        return cls.from_dict(json.loads(text))


def domain_radius_of(lam: float) -> float:
    return 1.0 / math.sqrt(-lam) if lam < 0.0 else math.inf


def default_margin(lam: float) -> float:
    return MARGIN_FACTOR * domain_radius_of(lam) if lam < 0.0 else MARGIN_FACTOR


def validate_params(lam: float, alpha: float, dim: int, *, tol: float = DEFAULT_TOL) -> Params:
    if not alpha > 0.0:
        raise NonPositiveAlpha(f"alpha must be positive, got {alpha!r}")
    if int(dim) != dim or dim < 1:
        raise NonPositiveDim(f"dim must be a positive integer, got {dim!r}")
    return Params(float(lam), float(alpha), int(dim), default_margin(lam), tol)


def as_vector(params: Params, values, name: str = "x") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != params.dim:
        raise DimensionMismatch(f"{name} must have length {params.dim}, got shape {arr.shape}")
    return arr


def in_domain(params: Params, x) -> bool:
    x = as_vector(params, x)
    if params.lam >= 0.0:
        return True
    return float(x @ x) < params.r2_limit


def check_domain(params: Params, x) -> np.ndarray:
    """Return ``x`` as an array, raising OutOfDomain outside the guarded disc."""
    x = as_vector(params, x)
    if params.lam < 0.0:
        r2 = float(x @ x)
        if not r2 < params.r2_limit:
            raise OutOfDomain(f"r^2 = {r2!r} is not below 1/|lambda| - margin = {params.r2_limit!r}")
    return x


@dataclass(frozen=True)
class State:
    """A phase-space point; ``second`` holds velocities or momenta per ``picture``."""

    x: np.ndarray
    second: np.ndarray
    picture: Literal["velocity", "momentum"] = "momentum"

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        s = np.array(self.second, dtype=float)
        if x.shape != s.shape or x.ndim != 1:
            raise DimensionMismatch(f"position shape {x.shape} and {self.picture} shape {s.shape} differ")
        if self.picture not in ("velocity", "momentum"):
            raise ValueError(f"unknown picture {self.picture!r}")
        x.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "second", s)

    @property
    def v(self) -> np.ndarray:
        if self.picture != "velocity":
            raise AttributeError("state is in the momentum picture")
        return self.second

    @property
    def p(self) -> np.ndarray:
        if self.picture != "momentum":
            raise AttributeError("state is in the velocity picture")
        return self.second
