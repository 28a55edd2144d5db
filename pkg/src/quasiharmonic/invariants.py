"""Conserved quantities, Poisson brackets and involutive families.

Axis indices in this module are 1-based so that names match the usual
labels (``I1``, ``J1_2``, ``K1K2*``).  Observables live in the momentum
picture; velocity-picture quantities (Noether momenta, the complex
factors K_i) are rewritten through ``P_i = sqrt(1 + lam r^2) p_i``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dynamics
from .errors import DimensionMismatch
from .model import Params, as_vector, check_domain

FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)

Gradient = Callable[[np.ndarray, np.ndarray], "tuple[np.ndarray, np.ndarray]"]


@dataclass(frozen=True)
class Observable:
    """A named phase-space function f(x, p), optionally with its gradient."""

    name: str
    value: Callable[[np.ndarray, np.ndarray], float]
    grad: Gradient | None = None

    def __call__(self, x, p):
        return self.value(np.asarray(x, dtype=float), np.asarray(p, dtype=float))

    def gradient(self, x, p) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.grad is not None:
            return self.grad(x, p)
        return fd_gradient(self.value, x, p)

    def __add__(self, other):
        other = _lift(other)
        return Observable(
            f"({self.name} + {other.name})",
            lambda x, p: self.value(x, p) + other.value(x, p),
            _combine(self, other, lambda a, b: a + b),
        )

    def __radd__(self, other):
        return _lift(other) + self

    def __sub__(self, other):
        return self + (-1.0) * _lift(other)

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            c = float(other)
            g = None
            if self.grad is not None:
                g = lambda x, p: tuple(c * d for d in self.grad(x, p))  # noqa: E731
            return Observable(f"{c:g}*{self.name}", lambda x, p: c * self.value(x, p), g)
        other = _lift(other)
        g = None
        if self.grad is not None and other.grad is not None:

            def g(x, p):
                fa, fb = self.value(x, p), other.value(x, p)
                (ax, ap), (bx, bp) = self.grad(x, p), other.grad(x, p)
                return fa * bx + fb * ax, fa * bp + fb * ap

        return Observable(f"{self.name}*{other.name}", lambda x, p: self.value(x, p) * other.value(x, p), g)

    __rmul__ = __mul__

    def square(self) -> "Observable":
        sq = self * self
        return Observable(f"{self.name}^2", sq.value, sq.grad)

    def renamed(self, name: str) -> "Observable":
        return Observable(name, self.value, self.grad)


def _lift(obj) -> Observable:
    if isinstance(obj, Observable):
        return obj
    c = float(obj)
    return Observable(f"{c:g}", lambda x, p: c, lambda x, p: (np.zeros_like(x), np.zeros_like(p)))


def _combine(a: Observable, b: Observable, op):
    if a.grad is None or b.grad is None:
        return None

    def g(x, p):
        (ax, ap), (bx, bp) = a.grad(x, p), b.grad(x, p)
        return op(ax, bx), op(ap, bp)

    return g


def fd_gradient(f, x, p, step: float = FD_STEP):
    """Central-difference gradient with h = eps^(1/3) * max(1, |coordinate|)."""
    z = np.concatenate([x, p]).astype(float)
    n = len(x)
    out = np.empty_like(z)
    for k in range(len(z)):
        h = step * max(1.0, abs(z[k]))
        zp = z.copy()
        zm = z.copy()
        zp[k] += h
        zm[k] -= h
        out[k] = (f(zp[:n], zp[n:]) - f(zm[:n], zm[n:])) / (zp[k] - zm[k])
    return out[:n], out[n:]


def poisson_bracket(f: Observable, g: Observable, x, p, params: Params | None = None) -> float:
    """{f, g} = sum_k df/dx_k dg/dp_k - df/dp_k dg/dx_k."""
    if params is not None:
        x = check_domain(params, x)
        p = as_vector(params, p, "p")
    fx, fp = f.gradient(x, p)
    gx, gp = g.gradient(x, p)
    return float(fx @ gp - fp @ gx)


# --------------------------------------------------------------------------
# builders


def _check_index(params_dim: int, *idx: int):
    for i in idx:
        if not 1 <= i <= params_dim:
            raise IndexError(f"axis index {i} outside 1..{params_dim}")


def hamiltonian_observable(params: Params) -> Observable:
    lam, a2 = params.lam, params.alpha2

    def grad(x, p):
        r2 = x @ x
        xp = x @ p
        return lam * xp * p + a2 * x / (1.0 + lam * r2) ** 2, p + lam * xp * x

    return Observable("H", lambda x, p: float(dynamics._hamiltonian(lam, a2, x, p)), grad)


def position_observable(k: int) -> Observable:
    i = k - 1

    def grad(x, p):
        gx = np.zeros_like(x)
        gx[i] = 1.0
        return gx, np.zeros_like(p)

    return Observable(f"x{k}", lambda x, p: float(x[i]), grad)


def momentum_observable(k: int) -> Observable:
    i = k - 1

    def grad(x, p):
        gp = np.zeros_like(p)
        gp[i] = 1.0
        return np.zeros_like(x), gp

    return Observable(f"p{k}", lambda x, p: float(p[i]), grad)


def angular_observable(i: int, j: int) -> Observable:
    """J_ij = x_i p_j - x_j p_i (1-based)."""
    if i == j:
        raise IndexError("angular momentum needs two distinct axes")
    a, b = i - 1, j - 1

    def grad(x, p):
        gx = np.zeros_like(x)
        gp = np.zeros_like(p)
        gx[a] += p[b]
        gx[b] -= p[a]
        gp[b] += x[a]
        gp[a] -= x[b]
        return gx, gp

    return Observable(f"J{i}_{j}", lambda x, p: float(x[a] * p[b] - x[b] * p[a]), grad)


def quadratic_observable(params: Params, i: int, j: int) -> Observable:
    """I_ij = (1 + lam r^2) p_i p_j + alpha^2 x_i x_j / (1 + lam r^2) (1-based)."""
    lam, a2 = params.lam, params.alpha2
    a, b = i - 1, j - 1

    def value(x, p):
        d = 1.0 + lam * (x @ x)
        return float(d * p[a] * p[b] + a2 * x[a] * x[b] / d)

    def grad(x, p):
        d = 1.0 + lam * (x @ x)
        gx = 2.0 * lam * p[a] * p[b] * x - (2.0 * lam * a2 * x[a] * x[b] / d**2) * x
        gx[a] += a2 * x[b] / d
        gx[b] += a2 * x[a] / d
        gp = np.zeros_like(p)
        gp[a] += d * p[b]
        gp[b] += d * p[a]
        return gx, gp

    name = f"I{i}" if i == j else f"I{i}_{j}"
    return Observable(name, value, grad)


def noether_observable(params: Params, i: int) -> Observable:
    """P_i = sqrt(1 + lam r^2) p_i; conserved for the free motion."""
    lam = params.lam
    a = i - 1

    def value(x, p):
        return float(math.sqrt(1.0 + lam * (x @ x)) * p[a])

    def grad(x, p):
        s = math.sqrt(1.0 + lam * (x @ x))
        gx = (lam * p[a] / s) * x
        gp = np.zeros_like(p)
        gp[a] = s
        return gx, gp

    return Observable(f"P{i}", value, grad)


def complex_k_observable(params: Params, i: int) -> Observable:
    """K_i = P_i + i alpha x_i / sqrt(1 + lam r^2); complex valued, no gradient."""
    lam, alpha = params.lam, params.alpha
    a = i - 1

    def value(x, p):
        s = math.sqrt(1.0 + lam * (x @ x))
        return complex(s * p[a], alpha * x[a] / s)

    return Observable(f"K{i}", value)


def kk_observable(params: Params, i: int, j: int) -> Observable:
    ki, kj = complex_k_observable(params, i), complex_k_observable(params, j)
    return Observable(f"K{i}K{j}*", lambda x, p: ki.value(x, p) * kj.value(x, p).conjugate())


def partial_hamiltonians(params: Params) -> tuple[Observable, Observable, Observable]:
    """(H1, H2, H3) with H = H1 + H2 - lam H3 (n = 2)."""
    if params.dim != 2:
        raise DimensionMismatch("the H1 + H2 - lam H3 split is two-dimensional")
    h1 = (0.5 * quadratic_observable(params, 1, 1)).renamed("H1")
    h2 = (0.5 * quadratic_observable(params, 2, 2)).renamed("H2")
    h3 = (0.5 * angular_observable(1, 2).square()).renamed("H3")
    return h1, h2, h3


# --------------------------------------------------------------------------
# point evaluations


def noether_p(params: Params, x, v, i: int) -> float:
    """Noether momentum P_i = (v_i - lam sum_j J_ij x_j) / sqrt(1 + lam r^2)."""
    x = check_domain(params, x)
    v = as_vector(params, v, "v")
    _check_index(params.dim, i)
    a = i - 1
    r2 = x @ x
    jx = x[a] * (x @ v) - v[a] * r2  # sum_j J_aj x_j
    return float((v[a] - params.lam * jx) / math.sqrt(1.0 + params.lam * r2))


def angular_j(x, v_or_p, i: int, j: int) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(v_or_p, dtype=float)
    n = len(x)
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"invalid pair ({i}, {j}) for n = {n}")
    return float(x[i - 1] * y[j - 1] - x[j - 1] * y[i - 1])


def complex_k(params: Params, x, v, i: int) -> complex:
    x = check_domain(params, x)
    _check_index(params.dim, i)
    s = math.sqrt(1.0 + params.lam * (x @ x))
    return complex(noether_p(params, x, v, i), params.alpha * x[i - 1] / s)


def quadratic_i(params: Params, x, p, i: int, j: int) -> float:
    x = check_domain(params, x)
    p = as_vector(params, p, "p")
    _check_index(params.dim, i, j)
    return quadratic_observable(params, i, j)(x, p)


# --------------------------------------------------------------------------
# families


def involutive_sets_n3(params: Params) -> list[tuple[Observable, ...]]:
    """The three commuting triples for n = 3, followed by (I1+I2+I3, J1_2, J^2)."""
    if params.dim != 3:
        raise DimensionMismatch("involutive_sets_n3 needs n = 3")
    lam = params.lam
    i1, i2, i3 = (quadratic_observable(params, k, k) for k in (1, 2, 3))
    j12, j23, j31 = angular_observable(1, 2), angular_observable(2, 3), angular_observable(3, 1)
    s12, s23, s31 = j12.square(), j23.square(), j31.square()

    def shifted(base, *squares):
        total = squares[0] if len(squares) == 1 else squares[0] + squares[1]
        tail = " + ".join(sq.name for sq in squares)
        return (base - lam * total).renamed(f"{base.name} - lam ({tail})")

    return [
        (i1, shifted(i2, s12), shifted(i3, s23, s31)),
        (shifted(i1, s12, s31), i2, shifted(i3, s23)),
        (shifted(i1, s31), shifted(i2, s12, s23), i3),
        ((i1 + i2 + i3).renamed("I1 + I2 + I3"), j12, (s12 + s23 + s31).renamed("J^2")),
    ]


def fundamental_set(params: Params) -> list[Observable]:
    """(I_k, J_{i,i+1}): 2n - 1 functionally independent integrals."""
    n = params.dim
    obs = [quadratic_observable(params, k, k) for k in range(1, n + 1)]
    obs += [angular_observable(i, i + 1) for i in range(1, n)]
    return obs


def jacobian(observables, x, p) -> np.ndarray:
    rows = [np.concatenate(o.gradient(x, p)) for o in observables]
    return np.vstack(rows)


def numeric_rank(matrix: np.ndarray, rel_tol: float = 1e-8) -> int:
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


# --------------------------------------------------------------------------
# identifiers used by trajectories and reports

_ID_PATTERNS = [
    (re.compile(r"^H$"), lambda m, prm: hamiltonian_observable(prm)),
    (re.compile(r"^H([123])$"), lambda m, prm: partial_hamiltonians(prm)[int(m[1]) - 1]),
    (re.compile(r"^P(\d+)$"), lambda m, prm: noether_observable(prm, int(m[1]))),
    (re.compile(r"^I(\d+)$"), lambda m, prm: quadratic_observable(prm, int(m[1]), int(m[1]))),
    (re.compile(r"^I(\d+)_(\d+)$"), lambda m, prm: quadratic_observable(prm, int(m[1]), int(m[2]))),
    (re.compile(r"^J(\d+)_(\d+)$"), lambda m, prm: angular_observable(int(m[1]), int(m[2]))),
    (re.compile(r"^K(\d+)$"), lambda m, prm: complex_k_observable(prm, int(m[1]))),
    (re.compile(r"^K(\d+)K(\d+)\*$"), lambda m, prm: kk_observable(prm, int(m[1]), int(m[2]))),
]


def observable_from_id(params: Params, ident: str) -> Observable:
    """Parse ids such as ``H``, ``H3``, ``P1``, ``I2``, ``I1_3``, ``J1_2``, ``K1``, ``K1K2*``."""
    for pattern, build in _ID_PATTERNS:
        m = pattern.match(ident.strip())
        if m:
            idx = [int(g) for g in m.groups()]
            if not ident.startswith("H"):
                _check_index(params.dim, *idx)
            if ident.startswith("J") and idx[0] == idx[1]:
                raise IndexError("J needs two distinct axes")
            return build(m, params)
    raise ValueError(f"unknown invariant id {ident!r}")


def default_track(params: Params) -> list[str]:
    return ["H"] + [o.name for o in fundamental_set(params)]


@dataclass(frozen=True)
class InvariantValue:
    id: str
    value: float | complex


def evaluate_invariants(params: Params, ids, x, p) -> list[InvariantValue]:
    x = check_domain(params, x)
    p = as_vector(params, p, "p")
    return [InvariantValue(i, observable_from_id(params, i)(x, p)) for i in ids]


def report_json(params: Params, ids, times, xs, ps) -> str:
    """JSON array of {"id", "t", "value"}; complex values become {"re", "im"}."""
    rows = []
    for t, x, p in zip(times, xs, ps):
        for item in evaluate_invariants(params, ids, x, p):
            v = item.value
            value = {"re": v.real, "im": v.imag} if isinstance(v, complex) else float(v)
            rows.append({"id": item.id, "t": float(t), "value": value})
    return json.dumps(rows)
