"""Geometry behind the model: the lambda-metric, its Killing fields,
separable charts, and the map to oscillators on constant-curvature spaces.

Chart ``XZY`` uses ``z_y = y / sqrt(1 + lam x^2)``, the mirror image of
``ZXY``.  Separable potentials follow the convention
``H = (1/2)(p^2 + lam (x.p)^2) + (alpha^2/2) V`` so that ``H = (I1 + I2)/2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dynamics
from .errors import DimensionMismatch, NotSeparableForm, OutOfDomain, PolarOrigin, TangentPole
from .model import Params, as_vector, check_domain

SERIES_LAMBDA = 1e-12
POLE_TOL = 1e-15


def _planar(params: Params, x, y):
    if params.dim != 2:
        raise DimensionMismatch("planar geometry needs dim = 2")
    pos = check_domain(params, [x, y])
    return float(pos[0]), float(pos[1])


@dataclass(frozen=True)
class Metric2:
    g11: float
    g12: float
    g22: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.g11, self.g12], [self.g12, self.g22]])

    @property
    def det(self) -> float:
        return self.g11 * self.g22 - self.g12 * self.g12

    def quadratic(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self.matrix @ v)


def metric(params: Params, x: float, y: float) -> Metric2:
    x, y = _planar(params, x, y)
    lam = params.lam
    d = 1.0 + lam * (x * x + y * y)
    return Metric2((1.0 + lam * y * y) / d, -lam * x * y / d, (1.0 + lam * x * x) / d)


class Killing(enum.Enum):
    X1 = "X1"
    X2 = "X2"
    XJ = "XJ"


def _field(lam, label, x, y):
    s = math.sqrt(1.0 + lam * (x * x + y * y))
    if label is Killing.X1:
        return np.array([s, 0.0])
    if label is Killing.X2:
        return np.array([0.0, s])
    return np.array([-y, x])


def _field_jacobian(lam, label, x, y):
    """d(component_i)/d(coordinate_j)."""
    if label is Killing.XJ:
        return np.array([[0.0, -1.0], [1.0, 0.0]])
    s = math.sqrt(1.0 + lam * (x * x + y * y))
    row = np.array([lam * x / s, lam * y / s])
    jac = np.zeros((2, 2))
    jac[0 if label is Killing.X1 else 1] = row
    return jac


def killing_field(params: Params, label: Killing | str, x: float, y: float) -> np.ndarray:
    x, y = _planar(params, x, y)
    return _field(params.lam, Killing(label), x, y)


def killing_field_jacobian(params: Params, label: Killing | str, x: float, y: float) -> np.ndarray:
    x, y = _planar(params, x, y)
    return _field_jacobian(params.lam, Killing(label), x, y)


def killing_lift(params: Params, label: Killing | str, x: float, y: float, vx: float, vy: float) -> np.ndarray:
    """Tangent lift (xi, (D xi) v) as a 4-vector over (x, y, vx, vy)."""
    x, y = _planar(params, x, y)
    label = Killing(label)
    xi = _field(params.lam, label, x, y)
    return np.concatenate([xi, _field_jacobian(params.lam, label, x, y) @ np.array([vx, vy])])


def kinetic_gradient(params: Params, x, v) -> tuple[np.ndarray, np.ndarray]:
    """(dT/dx, dT/dv) in closed form; dT/dv is the momentum."""
    x = check_domain(params, x)
    v = as_vector(params, v, "v")
    lam = params.lam
    d = 1.0 + lam * (x @ x)
    xv = x @ v
    dx = -lam * xv * v / d + (lam * lam * xv * xv / (d * d)) * x
    return dx, v - (lam * xv / d) * x


def lift_derivative(params: Params, label: Killing | str, x: float, y: float, vx: float, vy: float) -> float:
    """Derivative of the kinetic term along the lifted Killing field (vanishes identically)."""
    lift = killing_lift(params, label, x, y, vx, vy)
    gx, gv = kinetic_gradient(params, [x, y], [vx, vy])
    return float(np.concatenate([gx, gv]) @ lift)


def lie_bracket(params: Params, a: Killing | str, b: Killing | str, x: float, y: float) -> np.ndarray:
    """[X_a, X_b]^i = X_a^j d_j X_b^i - X_b^j d_j X_a^i from analytic Jacobians."""
    x, y = _planar(params, x, y)
    a, b = Killing(a), Killing(b)
    lam = params.lam
    xa, xb = _field(lam, a, x, y), _field(lam, b, x, y)
    return _field_jacobian(lam, b, x, y) @ xa - _field_jacobian(lam, a, x, y) @ xb


def lie_algebra_residuals(params: Params, x: float, y: float) -> dict[str, float]:
    """Max-norm defects of [X1,X2] = lam XJ, [X1,XJ] = X2, [X2,XJ] = -X1."""
    k = Killing
    f = lambda label: killing_field(params, label, x, y)  # noqa: E731
    checks = {
        "[X1,X2]=lam*XJ": lie_bracket(params, k.X1, k.X2, x, y) - params.lam * f(k.XJ),
        "[X1,XJ]=X2": lie_bracket(params, k.X1, k.XJ, x, y) - f(k.X2),
        "[X2,XJ]=-X1": lie_bracket(params, k.X2, k.XJ, x, y) + f(k.X1),
    }
    return {name: float(np.max(np.abs(v))) for name, v in checks.items()}


# --------------------------------------------------------------------------
# separable charts


class Chart(enum.Enum):
    ZXY = "ZxY"
    XZY = "XZy"
    POLAR = "Polar"


def chart_map(params: Params, chart: Chart | str, point, inverse: bool = False) -> np.ndarray:
    """Forward: Cartesian (x, y) -> chart coordinates; ``inverse=True`` goes back."""
    chart = Chart(chart)
    lam = params.lam
    u, w = (float(c) for c in point)
    if chart is Chart.POLAR:
        if inverse:
            return np.array([u * math.cos(w), u * math.sin(w)])
        r = math.hypot(u, w)
        if r == 0.0:
            raise PolarOrigin("polar angle is undefined at the origin")
        return np.array([r, math.atan2(w, u)])
    if chart is Chart.ZXY:
        other = w
        scale = math.sqrt(1.0 + lam * other * other)
        return np.array([u * scale, w]) if inverse else np.array([u / scale, w])
    other = u
    scale = math.sqrt(1.0 + lam * other * other)
    return np.array([u, w * scale]) if inverse else np.array([u, w / scale])


@dataclass(frozen=True)
class SeparablePotential:
    """V in a chart's separable form.

    ZxY: V = first(z_x) / (1 + lam y^2) + second(y)
    XZy: V = first(x) + second(z_y) / (1 + lam x^2)
    Polar: V = first(r) + second(phi) / r^2
    """

    chart: Chart
    first: Callable[[float], float]
    second: Callable[[float], float]


def oscillator_potential(params: Params, chart: Chart | str) -> SeparablePotential:
    """The oscillator's r^2 / (1 + lam r^2) written in each separable chart."""
    chart = Chart(chart)
    lam = params.lam
    rational = lambda s: s * s / (1.0 + lam * s * s)  # noqa: E731
    if chart is Chart.POLAR:
        return SeparablePotential(chart, rational, lambda phi: 0.0)
    return SeparablePotential(chart, rational, rational)


def separable_invariants(
    params: Params, chart: Chart | str, x, p, potential: SeparablePotential | None = None
) -> tuple[float, float]:
    """The two quadratic integrals (I1, I2) attached to a separable chart."""
    chart = Chart(chart)
    if params.dim != 2:
        raise DimensionMismatch("separable charts are two-dimensional")
    x = check_domain(params, x)
    p = as_vector(params, p, "p")
    pot = oscillator_potential(params, chart) if potential is None else potential
    if pot.chart is not chart:
        raise NotSeparableForm(f"potential is written for chart {pot.chart.value}, not {chart.value}")
    lam, a2 = params.lam, params.alpha2
    X, Y = x
    d = 1.0 + lam * (x @ x)
    J = X * p[1] - Y * p[0]
    if chart is Chart.ZXY:
        z = chart_map(params, chart, x)[0]
        w1 = pot.first(z)
        i1 = d * p[0] ** 2 + a2 * w1
        i2 = d * p[1] ** 2 - lam * J * J + a2 * (pot.second(Y) - lam * Y * Y / (1.0 + lam * Y * Y) * w1)
        return float(i1), float(i2)
    if chart is Chart.XZY:
        z = chart_map(params, chart, x)[1]
        w2 = pot.second(z)
        i1 = d * p[0] ** 2 - lam * J * J + a2 * (pot.first(X) - lam * X * X / (1.0 + lam * X * X) * w2)
        i2 = d * p[1] ** 2 + a2 * w2
        return float(i1), float(i2)
    r, phi = chart_map(params, chart, x)
    pr = (x @ p) / r
    c = (1.0 - r * r) / (r * r)
    i1 = d * pr * pr + c * J * J + a2 * (pot.first(r) + c * pot.second(phi))
    i2 = J * J + a2 * pot.second(phi)
    return float(i1), float(i2)


# --------------------------------------------------------------------------
# curvature map (n = 1)


def curvature_map(params: Params, x, inverse: bool = False):
    """q = asinh(sqrt(lam) x)/sqrt(lam) (lam > 0), asin(sqrt|lam| x)/sqrt|lam| (lam < 0).

    Vectorized over ``x``; ``inverse=True`` maps q back to x.
    """
    lam = params.lam
    u = np.asarray(x, dtype=float)
    if abs(lam) < SERIES_LAMBDA:
        out = u + lam * u**3 / 6.0 if inverse else u - lam * u**3 / 6.0
    elif lam > 0.0:
        k = math.sqrt(lam)
        out = np.sinh(k * u) / k if inverse else np.arcsinh(k * u) / k
    else:
        k = math.sqrt(-lam)
        if inverse:
            out = np.sin(k * u) / k
        else:
            if np.any(np.abs(u) > 1.0 / k):
                raise OutOfDomain("curvature_map needs |x| <= 1/sqrt|lambda|")
            out = np.arcsin(k * u) / k
    return float(out) if np.ndim(out) == 0 else out


def curved_force(params: Params, q):
    """F(q) = sinh(kq)/cosh^3(kq) (lam > 0) or sin(kq)/cos^3(kq) (lam < 0), k = sqrt|lam|."""
    k = math.sqrt(abs(params.lam))
    q = np.asarray(q, dtype=float)
    if params.lam > 0.0:
        return np.sinh(k * q) / np.cosh(k * q) ** 3
    return np.sin(k * q) / np.cos(k * q) ** 3


def curved_line_potential(params: Params, q):
    """(alpha^2 / (2|lam|)) tanh^2 or tan^2 of sqrt|lam| q; (alpha^2/2) q^2 at lam = 0."""
    lam, a2 = params.lam, params.alpha2
    q = np.asarray(q, dtype=float)
    if lam == 0.0:
        return 0.5 * a2 * q * q
    k = math.sqrt(abs(lam))
    t = np.tanh(k * q) if lam > 0.0 else np.tan(k * q)
    return a2 / (2.0 * abs(lam)) * t * t


def curved_lagrangian_check(params: Params, x, v, a) -> float:
    """Max residual of sqrt|lam| q'' + alpha^2 F(q) = 0 for a 1-D trajectory.

    ``x, v, a`` are samples of position, velocity and acceleration; q'' follows
    from the chain rule, q' = v / sqrt(1 + lam x^2).
    """
    lam = params.lam
    if lam == 0.0:
        raise ValueError("the curved form needs lambda != 0")
    x = np.asarray(x, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    a = np.asarray(a, dtype=float).reshape(-1)
    d = 1.0 + lam * x * x
    if np.any(d <= 0.0):
        raise OutOfDomain("trajectory leaves 1 + lam x^2 > 0")
    q = curvature_map(params, x)
    qdd = a / np.sqrt(d) - lam * x * v * v / d**1.5
    res = math.sqrt(abs(lam)) * qdd + params.alpha2 * curved_force(params, q)
    return float(np.max(np.abs(res)))


# --------------------------------------------------------------------------
# kappa-tagged trigonometry


def kappa_cos(kappa: float, x):
    x = np.asarray(x, dtype=float)
    if kappa > 0.0:
        return np.cos(math.sqrt(kappa) * x)
    if kappa < 0.0:
        return np.cosh(math.sqrt(-kappa) * x)
    return np.ones_like(x)


def kappa_sin(kappa: float, x):
    x = np.asarray(x, dtype=float)
    if kappa > 0.0:
        k = math.sqrt(kappa)
        return np.sin(k * x) / k
    if kappa < 0.0:
        k = math.sqrt(-kappa)
        return np.sinh(k * x) / k
    return x.copy()


def kappa_trig(kappa: float, x: float) -> tuple[float, float, float]:
    """(Cos_k, Sin_k, Tan_k) at a scalar argument."""
    c = float(kappa_cos(kappa, x))
    s = float(kappa_sin(kappa, x))
    if abs(c) <= POLE_TOL:
        raise TangentPole(f"Tan_kappa has a pole at x = {x!r} (kappa = {kappa!r})")
    return c, s, s / c


def curved_potential(kappa: float, omega0: float, rho: float) -> float:
    """U_k(rho) = omega0^2 Tan_k(rho)^2 / 2 for 0 <= rho below the pole."""
    if rho < 0.0:
        raise ValueError("rho must be nonnegative")
    if kappa > 0.0 and rho >= math.pi / (2.0 * math.sqrt(kappa)) - POLE_TOL:
        raise TangentPole(f"rho = {rho!r} is at or beyond the wall pi/(2 sqrt kappa)")
    _, _, t = kappa_trig(kappa, rho)
    return 0.5 * omega0 * omega0 * t * t


def curved_metric_coefficient(kappa: float, rho) -> np.ndarray:
    """Sin_k(rho)^2, the d(phi)^2 coefficient of ds^2 = d(rho)^2 + Sin_k(rho)^2 d(phi)^2."""
    return kappa_sin(kappa, rho) ** 2
