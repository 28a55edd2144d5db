"""Exact solutions of the oscillator and the free motion, in every regime.

Solutions are stored with actual amplitudes and angle phases::

    TRIG_BOUNDED, FREE_TRIG    x_i = A_i sin(rate t + phi_i)
    HYPER_UNBOUNDED, FREE_HYPER x_i = A_i sinh(rate t + phi_i)
    LINEAR_BORDER              x_i = A_i t + B_i

Pair sums (``sum_{i<j}``) run over unordered pairs, which for n = 2 gives the
single cross term of the two-dimensional formulas.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .errors import (
    Aperiodic,
    BorderConstraint,
    ConstraintViolation,
    DimensionMismatch,
    InconsistentConstants,
    NegativeEnergy,
    NonPositiveM,
    NotUnboundedRegime,
    OutOfDomain,
)
from .model import Params, State, as_vector


class Regime(enum.Enum):
    BOUNDED = "Bounded"
    BORDER = "Border"
    UNBOUNDED = "Unbounded"


class SolutionKind(enum.Enum):
    TRIG_BOUNDED = "TrigBounded"
    HYPER_UNBOUNDED = "HyperUnbounded"
    LINEAR_BORDER = "LinearBorder"
    FREE_TRIG = "FreeTrig"
    FREE_HYPER = "FreeHyper"

    @property
    def is_free(self) -> bool:
        return self in (SolutionKind.FREE_TRIG, SolutionKind.FREE_HYPER)

    @property
    def is_trig(self) -> bool:
        return self in (SolutionKind.TRIG_BOUNDED, SolutionKind.FREE_TRIG)

    @property
    def is_hyper(self) -> bool:
        return self in (SolutionKind.HYPER_UNBOUNDED, SolutionKind.FREE_HYPER)


@dataclass(frozen=True)
class ClosedFormSolution:
    kind: SolutionKind
    A: np.ndarray
    phi: np.ndarray | None = None
    rate: float | None = None
    B: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.A)

    def to_dict(self) -> dict:
        out = {"regime": self.kind.value, "A": [float(a) for a in self.A]}
        if self.kind is SolutionKind.LINEAR_BORDER:
            out["B"] = [float(b) for b in self.B]
        else:
            out["phi"] = [float(f) for f in self.phi]
            out["rate"] = float(self.rate)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ClosedFormSolution":
        kind = SolutionKind(data["regime"])
        A = np.array(data["A"], dtype=float)
        if kind is SolutionKind.LINEAR_BORDER:
            return cls(kind, A, B=np.array(data["B"], dtype=float))
        return cls(kind, A, phi=np.array(data["phi"], dtype=float), rate=float(data["rate"]))

    @classmethod
    def from_json(cls, text: str) -> "ClosedFormSolution":
        return cls.from_dict(json.loads(text))


def _wrap(angle):
    """Reduce to (-pi, pi]."""
    w = np.remainder(angle + np.pi, 2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def _pairs(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def trig_sum(lam: float, A, phi) -> float:
    """P_e = sum A_i^2 + lam sum_{i<j} A_i^2 A_j^2 sin^2(phi_i - phi_j)."""
    A = np.asarray(A, dtype=float)
    phi = np.asarray(phi, dtype=float)
    cross = sum(A[i] ** 2 * A[j] ** 2 * math.sin(_wrap(phi[i] - phi[j])) ** 2 for i, j in _pairs(len(A)))
    return float(A @ A + lam * cross)


def hyper_sum(lam: float, A, phi) -> float:
    """P_h = sum A_i^2 + lam sum_{i<j} A_i^2 A_j^2 sinh^2(phi_i - phi_j)."""
    A = np.asarray(A, dtype=float)
    phi = np.asarray(phi, dtype=float)
    cross = sum(A[i] ** 2 * A[j] ** 2 * math.sinh(phi[i] - phi[j]) ** 2 for i, j in _pairs(len(A)))
    return float(A @ A + lam * cross)


def linear_sum(lam: float, A, B) -> float:
    """P_L = sum A_i^2 + lam sum_{i<j} (A_i B_j - A_j B_i)^2."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    cross = sum((A[i] * B[j] - A[j] * B[i]) ** 2 for i, j in _pairs(len(A)))
    return float(A @ A + lam * cross)


def max_radius2_trig(A, phi) -> float:
    """Exact maximum over t of r^2 = sum A_i^2 sin^2(w t + phi_i).

    r^2 = S/2 - Re(e^{2iwt} Z)/2 with Z = sum A_i^2 e^{2 i phi_i}.
    """
    A = np.asarray(A, dtype=float)
    z = np.sum(A**2 * np.exp(2j * np.asarray(phi, dtype=float)))
    return 0.5 * (float(A @ A) + abs(z))


def _vectors(params: Params, A, phi):
    A = as_vector(params, A, "A")
    phi = as_vector(params, phi, "phi")
    return A, phi


def trig_rate(params: Params, A, phi) -> float:
    """omega = alpha / sqrt(1 + lam P_e) for x_i = A_i sin(omega t + phi_i)."""
    A, phi = _vectors(params, A, phi)
    if params.lam < 0.0:
        peak = max_radius2_trig(A, phi)
        if not peak < params.r2_limit:
            raise NonPositiveM(f"orbit reaches r^2 = {peak:.17g}, outside the disc r^2 < {params.r2_limit:.17g}")
    m = 1.0 + params.lam * trig_sum(params.lam, A, phi)
    if not m > 0.0:
        raise NonPositiveM(f"M = {m!r} is not positive")
    return params.alpha / math.sqrt(m)


def hyper_rate(params: Params, A, phi) -> float:
    A, phi = _vectors(params, A, phi)
    lp = params.lam * hyper_sum(params.lam, A, phi)
    if params.lam <= 0.0 or not lp > 1.0:
        raise NotUnboundedRegime(f"need lambda > 0 and lambda*P_h > 1, got lambda={params.lam!r}, lambda*P_h={lp!r}")
    return params.alpha / math.sqrt(lp - 1.0)


def trig_solution(params: Params, A, phi) -> ClosedFormSolution:
    A, phi = _vectors(params, A, phi)
    return ClosedFormSolution(SolutionKind.TRIG_BOUNDED, A, phi, trig_rate(params, A, phi))


def hyper_solution(params: Params, A, phi) -> ClosedFormSolution:
    A, phi = _vectors(params, A, phi)
    return ClosedFormSolution(SolutionKind.HYPER_UNBOUNDED, A, phi, hyper_rate(params, A, phi))


def linear_solution(params: Params, A, B, *, rtol: float | None = None) -> ClosedFormSolution:
    """Border-line motion; requires alpha^2 = lam P_L within ``rtol`` (default params.tol)."""
    A = as_vector(params, A, "A")
    B = as_vector(params, B, "B")
    if params.lam <= 0.0:
        raise BorderConstraint("border-line motion needs lambda > 0")
    lpl = params.lam * linear_sum(params.lam, A, B)
    rtol = params.tol if rtol is None else rtol
    if abs(lpl - params.alpha2) > rtol * params.alpha2:
        raise BorderConstraint(f"alpha^2 = {params.alpha2!r} but lambda*P_L = {lpl!r}")
    return ClosedFormSolution(SolutionKind.LINEAR_BORDER, A, B=B)


def border_alpha(lam: float, A, B) -> float:
    """The alpha for which x = A t + B is a solution."""
    if lam <= 0.0:
        raise BorderConstraint("border-line motion needs lambda > 0")
    return math.sqrt(lam * linear_sum(lam, A, B))


def free_solution(params: Params, energy: float, P, phi=None) -> ClosedFormSolution:
    """Free motion (potential removed) from the energy and the Noether momenta.

    ``P`` holds (P_1,) or (P_1, P_2); ``phi`` holds time shifts as in
    ``x = a sinh(C (t + phi_1))`` with ``C = sqrt(2 |lam| E)``.  The angular
    momentum is fixed by ``2E = P_1^2 + P_2^2 - lam J^2`` and the amplitude
    restriction then fixes |phi_1 - phi_2|; the sign of the given difference
    (default positive) selects the branch.
    """
    lam = params.lam
    if lam == 0.0:
        raise InconsistentConstants("free solutions in closed form need lambda != 0")
    if not energy > 0.0:
        raise InconsistentConstants(f"energy must be positive, got {energy!r}")
    P = as_vector(params, P, "P")
    if params.dim > 2:
        raise DimensionMismatch("free solutions are available for n = 1 and n = 2")
    shifts = np.zeros(params.dim) if phi is None else as_vector(params, phi, "phi")
    c = math.sqrt(2.0 * abs(lam) * energy)
    if params.dim == 1:
        if abs(P[0] ** 2 - 2.0 * energy) > 1e-9 * max(1.0, 2.0 * energy):
            raise InconsistentConstants("one-dimensional free motion requires P_1^2 = 2E")
        amp = np.array([math.copysign(1.0, P[0]) / math.sqrt(abs(lam))])
        kind = SolutionKind.FREE_HYPER if lam > 0.0 else SolutionKind.FREE_TRIG
        return ClosedFormSolution(kind, amp, c * shifts, c)

    j2 = (P[0] ** 2 + P[1] ** 2 - 2.0 * energy) / lam
    if j2 < -1e-12 * max(1.0, 2.0 * energy / abs(lam)):
        raise InconsistentConstants(f"constants give J^2 = {j2!r} < 0")
    j2 = max(j2, 0.0)
    rad = np.array([P[0] ** 2 - lam * j2, P[1] ** 2 - lam * j2])
    if np.any(rad < -1e-12 * max(1.0, 2.0 * energy)):
        raise InconsistentConstants(f"negative amplitude radicand {rad.tolist()}")
    rad = np.maximum(rad, 0.0)
    # normalized amplitudes (a = A / sqrt|lam|) satisfy the one-line restriction
    norm2 = rad / (2.0 * energy)
    amp = np.sign(np.where(P == 0.0, 1.0, P)) * np.sqrt(rad / (2.0 * abs(lam) * energy))
    angles = c * shifts
    if norm2[0] > 0.0 and norm2[1] > 0.0:
        d = shifts[0] - shifts[1]
        sgn = -1.0 if d < 0.0 else 1.0
        prod = norm2[0] * norm2[1]
        if lam > 0.0:
            s2 = (1.0 - norm2[0] - norm2[1]) / prod
            if s2 < -1e-12:
                raise InconsistentConstants("amplitude restriction cannot be met")
            delta = math.asinh(math.sqrt(max(s2, 0.0)))
        else:
            s2 = (norm2[0] + norm2[1] - 1.0) / prod
            if s2 < -1e-12 or s2 > 1.0 + 1e-12:
                raise InconsistentConstants("amplitude restriction cannot be met")
            delta = math.asin(math.sqrt(min(max(s2, 0.0), 1.0)))
        angles = np.array([angles[0], angles[0] - sgn * delta])
    else:
        if abs(norm2[0] + norm2[1] - 1.0) > 1e-9:
            raise InconsistentConstants("amplitude restriction cannot be met")
    kind = SolutionKind.FREE_HYPER if lam > 0.0 else SolutionKind.FREE_TRIG
    return ClosedFormSolution(kind, amp, angles, c)


def free_constraint(params: Params, solution: ClosedFormSolution) -> float:
    """Residual of the free restriction: lam P_h - 1 (hyper) or 1 + lam P_e (trig)."""
    if solution.kind is SolutionKind.FREE_HYPER:
        return params.lam * hyper_sum(params.lam, solution.A, solution.phi) - 1.0
    return 1.0 + params.lam * trig_sum(params.lam, solution.A, solution.phi)


def constraint_residual(params: Params, solution: ClosedFormSolution) -> float:
    """Relative violation of the frequency/amplitude relation of the solution's regime."""
    lam, a2 = params.lam, params.alpha2
    kind = solution.kind
    if kind is SolutionKind.TRIG_BOUNDED:
        m = 1.0 + lam * trig_sum(lam, solution.A, solution.phi)
        return abs(solution.rate**2 * m - a2) / a2
    if kind is SolutionKind.HYPER_UNBOUNDED:
        m = -1.0 + lam * hyper_sum(lam, solution.A, solution.phi)
        return abs(solution.rate**2 * m - a2) / a2
    if kind is SolutionKind.LINEAR_BORDER:
        return abs(lam * linear_sum(lam, solution.A, solution.B) - a2) / a2
    return abs(free_constraint(params, solution))


def evaluate(solution: ClosedFormSolution, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Positions, velocities and accelerations at time(s) ``t``.

    Scalar ``t`` gives vectors of length n; array ``t`` gives ``(len(t), n)``.
    """
    t_arr = np.asarray(t, dtype=float)
    tt = t_arr[..., None]
    A = solution.A
    kind = solution.kind
    if kind is SolutionKind.LINEAR_BORDER:
        x = A * tt + solution.B
        v = np.broadcast_to(A, x.shape).copy()
        a = np.zeros_like(x)
        return x, v, a
    w = solution.rate
    theta = w * tt + solution.phi
    if kind.is_trig:
        s, c = np.sin(theta), np.cos(theta)
        x = A * s
        return x, A * w * c, -(w * w) * x
    s, c = np.sinh(theta), np.cosh(theta)
    x = A * s
    return x, A * w * c, (w * w) * x


def eval_state(solution: ClosedFormSolution, t: float) -> State:
    x, v, _ = evaluate(solution, float(t))
    return State(x, v, "velocity")


def residual(params: Params, solution: ClosedFormSolution, t_grid) -> float:
    """max over the grid of |x''(t) - F(x, x')|_inf with analytic x''.

    Free solutions are checked against the kinetic-only force (alpha = 0).
    """
    if solution.dim != params.dim:
        raise DimensionMismatch(f"solution has dim {solution.dim}, params dim {params.dim}")
    x, v, a = evaluate(solution, np.atleast_1d(np.asarray(t_grid, dtype=float)))
    if params.lam < 0.0:
        r2 = np.einsum("ij,ij->i", x, x)
        bad = ~(r2 < params.r2_limit)
        if np.any(bad):
            raise OutOfDomain(f"solution leaves the disc at t = {np.asarray(t_grid)[bad][0]!r}")
    alpha2 = 0.0 if solution.kind.is_free else params.alpha2
    f = dynamics._force(params.lam, alpha2, x, v)
    return float(np.max(np.abs(a - f)))


def solution_energy(params: Params, solution: ClosedFormSolution) -> float:
    lam, a2 = params.lam, params.alpha2
    kind = solution.kind
    if kind is SolutionKind.TRIG_BOUNDED:
        pe = trig_sum(lam, solution.A, solution.phi)
        return 0.5 * a2 * pe / (1.0 + lam * pe)
    if kind is SolutionKind.HYPER_UNBOUNDED:
        ph = hyper_sum(lam, solution.A, solution.phi)
        return 0.5 * a2 * ph / (lam * ph - 1.0)
    if kind is SolutionKind.LINEAR_BORDER:
        return a2 / (2.0 * lam)
    return solution.rate**2 / (2.0 * abs(lam))


def classify_regime(params: Params, energy: float) -> Regime:
    if energy < 0.0:
        raise NegativeEnergy(f"energy must be nonnegative, got {energy!r}")
    if params.lam <= 0.0:
        return Regime.BOUNDED
    threshold = params.threshold_energy
    if abs(energy - threshold) <= params.tol:
        return Regime.BORDER
    return Regime.BOUNDED if energy < threshold else Regime.UNBOUNDED


def period(solution: ClosedFormSolution) -> float:
    if not solution.kind.is_trig:
        raise Aperiodic(f"{solution.kind.value} motion is not periodic")
    return 2.0 * math.pi / solution.rate


def solution_from_state(params: Params, x, v) -> ClosedFormSolution:
    """Closed form through a radial (x parallel to v) state of the oscillator.

    Radial motions are one-dimensional along the line through the origin, so
    the 1-D amplitude/phase relations apply with x = s e, v = u e.
    """
    x = as_vector(params, x)
    v = as_vector(params, v, "v")
    s = float(np.linalg.norm(x))
    if s == 0.0:
        e = v / np.linalg.norm(v)
    else:
        e = x / s
    if np.linalg.norm(v - (v @ e) * e) > 1e-12 * max(1.0, float(np.linalg.norm(v))):
        raise ConstraintViolation("solution_from_state handles radial states only")
    u = float(v @ e)
    lam, a2 = params.lam, params.alpha2
    en = dynamics.kinetic_energy(params, x, v) + dynamics.potential_energy(params, x)
    regime = classify_regime(params, en)
    if regime is Regime.BORDER:
        speed = math.sqrt(a2 / lam) * math.copysign(1.0, u)
        return ClosedFormSolution(SolutionKind.LINEAR_BORDER, speed * e, B=s * e)
    if regime is Regime.BOUNDED:
        amp2 = 2.0 * en / (a2 - 2.0 * lam * en)
        amp = math.sqrt(amp2)
        w = params.alpha / math.sqrt(1.0 + lam * amp2)
        ph = math.atan2(s / amp, u / (amp * w))
        return ClosedFormSolution(SolutionKind.TRIG_BOUNDED, amp * e, np.full(params.dim, ph), w)
    amp2 = 2.0 * en / (2.0 * lam * en - a2)
    amp = math.sqrt(amp2)
    w = params.alpha / math.sqrt(lam * amp2 - 1.0)
    sign = math.copysign(1.0, u)
    ph = math.asinh(sign * s / amp)
    return ClosedFormSolution(SolutionKind.HYPER_UNBOUNDED, sign * amp * e, np.full(params.dim, ph), w)
