"""Adaptive Dormand-Prince 5(4) integration of Hamilton's equations.

The flow is always integrated in the momentum picture.  Step size follows a
PI controller; a step whose endpoint leaves the guarded disc (lambda < 0) is
rejected and retried with half the step, and when that shrinks to nothing the
run stops with :class:`DomainEscape` carrying the last valid time.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dynamics import _to_momenta, _to_velocities
from .errors import DomainEscape, IntegrationError, InvalidParams, NotOscillatory, StepUnderflow
from .invariants import observable_from_id
from .model import Params, State, check_domain

DRIFT_FLOOR = 1e-8

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense output: y(t + theta h) = y + h * K^T P [theta, theta^2, theta^3, theta^4]
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_BETA = 0.4 / 5  # PI memory term
_ALPHA = 0.7 / 5
# near the lambda < 0 boundary momenta blow up; a crawling step there counts as escape
_CRAWL = 1e-10
_WALL_ZONE = 1e-4


@dataclass(frozen=True)
class IntegratorConfig:
    t_span: tuple[float, float]
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 2_000_000

    def __post_init__(self):
        for name in ("rtol", "atol"):
            val = getattr(self, name)
            if not (0.0 < val <= 1e-2):
                raise InvalidParams(f"{name} must lie in (0, 1e-2], got {val!r}")
        t0, t1 = (float(t) for t in self.t_span)
        if not (math.isfinite(t0) and math.isfinite(t1) and t1 > t0):
            raise InvalidParams(f"t_span must be increasing and finite, got {self.t_span!r}")
        if not self.max_step > 0.0:
            raise InvalidParams("max_step must be positive")
        object.__setattr__(self, "t_span", (t0, t1))


def _stages(f, t, y, h, k0):
    """Seven DP stages; returns the 5th-order update, error estimate and K."""
    K = np.empty((7, y.size))
    K[0] = k0
    for i in range(1, 7):
        K[i] = f(t + _C[i] * h, y + h * (np.asarray(_A[i]) @ K[:i]))
    y_new = y + h * (_B[:6] @ K[:6])
    # FSAL: stage 7 is f(t + h, y_new)
    err = h * (_E @ K)
    return y_new, err, K


def dopri_step(f, t: float, y, h: float):
    """One fixed Dormand-Prince step of ``y' = f(t, y)``: (y_next, error_estimate)."""
    y = np.asarray(y, dtype=float)
    y_new, err, _ = _stages(f, t, y, h, f(t, y))
    return y_new, err


def _err_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol, max_step):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, max_step)


@dataclass
class _Segment:
    t: float
    h: float
    y: np.ndarray
    Q: np.ndarray  # h * K^T P, shape (m, 4)

    def __call__(self, t):
        theta = (t - self.t) / self.h
        return self.y + self.Q @ (theta ** np.arange(1, 5))


@dataclass
class Trajectory:
    """Recorded states with their invariant values.

    ``x`` and ``p`` have shape ``(N, n)``; ``track`` maps invariant ids to
    arrays of length ``N`` (complex for the K ids).
    """

    params: Params
    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    track: dict = field(default_factory=dict)
    drift: dict = field(default_factory=dict)
    segments: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.times)

    @property
    def v(self) -> np.ndarray:
        return _to_velocities(self.params.lam, self.x, self.p)

    def state(self, i: int) -> State:
        return State(self.x[i], self.p[i], "momentum")

    def states(self) -> list[State]:
        return [self.state(i) for i in range(len(self))]

    def dense(self, t: float) -> np.ndarray:
        """Interpolated ``(x, p)`` vector at time ``t`` inside the run."""
        if not self.segments:
            raise ValueError("trajectory has no dense output")
        starts = [s.t for s in self.segments]
        k = int(np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(starts) - 1))
        return self.segments[k](t)

    def to_csv(self, handle=None) -> str:
        out = io.StringIO() if handle is None else handle
        write_trajectory_csv(self, out)
        return out.getvalue() if handle is None else ""


def _measure_track(params: Params, ids, x, p) -> dict:
    track = {}
    for ident in ids:
        obs = observable_from_id(params, ident)
        vals = [obs(xi, pi) for xi, pi in zip(x, p)]
        track[ident] = np.asarray(vals)
    return track


def drift_of(values) -> float:
    values = np.asarray(values)
    if values.size == 0:
        return 0.0
    v0 = values[0]
    dev = float(np.max(np.abs(values - v0)))
    mag = abs(v0)
    return dev if mag < DRIFT_FLOOR else dev / mag


def trajectory_from_samples(params: Params, times, x, p, track=()) -> Trajectory:
    """Wrap externally produced samples (e.g. a closed-form solution) as a Trajectory."""
    times = np.asarray(times, dtype=float)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    p = np.atleast_2d(np.asarray(p, dtype=float))
    tr = _measure_track(params, list(track), x, p)
    return Trajectory(params, times, x, p, tr, {k: drift_of(v) for k, v in tr.items()})


def _as_momentum(params: Params, initial: State) -> tuple[np.ndarray, np.ndarray]:
    x = check_domain(params, initial.x)
    if initial.picture == "velocity":
        return x, _to_momenta(params.lam, x, np.asarray(initial.v, dtype=float))
    return x, np.asarray(initial.p, dtype=float)


def integrate(params: Params, initial: State, config: IntegratorConfig, track=(), t_eval=None) -> Trajectory:
    """Integrate from ``initial`` over ``config.t_span``.

    Without ``t_eval`` every accepted step is recorded; otherwise the dense
    interpolant is sampled at the requested times (which must lie in the span).
    """
    n = params.dim
    lam, a2 = params.lam, params.alpha2
    r2_limit = params.r2_limit
    t0, t1 = config.t_span
    rtol, atol = config.rtol, config.atol

    def f(t, y):
        # same field as dynamics._hamilton_field, unrolled for a single state
        x, p = y[:n], y[n:]
        d = 1.0 + lam * float(x @ x)
        xp = lam * float(x @ p)
        out = np.empty(2 * n)
        out[:n] = p + xp * x
        out[n:] = -xp * p - (a2 / (d * d)) * x
        return out

    def near_wall(y):
        return lam < 0.0 and 1.0 + lam * float(y[:n] @ y[:n]) < _WALL_ZONE

    def inside(y):
        return bool(np.all(np.isfinite(y))) and float(y[:n] @ y[:n]) < r2_limit

    x0, p0 = _as_momentum(params, initial)
    y = np.concatenate([x0, p0])
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval.ndim != 1 or np.any(np.diff(t_eval) <= 0):
            raise ValueError("t_eval must be strictly increasing")
        if t_eval.size and (t_eval[0] < t0 or t_eval[-1] > t1):
            raise ValueError("t_eval must lie inside t_span")
    rec_t, rec_y = [], []
    if t_eval is None or (t_eval.size and t_eval[0] == t0):
        rec_t.append(t0)
        rec_y.append(y.copy())
    next_eval = 0 if t_eval is None else len(rec_t)

    segments = []
    t = t0
    k0 = f(t, y)
    h = _initial_step(f, t, y, k0, rtol, atol, min(config.max_step, t1 - t0))
    err_prev = 1e-4
    rejected = False
    steps = 0
    with np.errstate(all="ignore"):
        while t < t1:
            steps += 1
            if steps > config.max_steps:
                raise IntegrationError(f"exceeded {config.max_steps} steps at t = {float(t)!r}")
            h = min(h, config.max_step)
            if h < _CRAWL * max(1.0, abs(t)) and near_wall(y):
                raise DomainEscape(f"momenta diverge at the domain boundary near t = {float(t)!r}", last_time=float(t))
            last = t + h >= t1 or t + 1.01 * h >= t1
            if last:
                h = t1 - t
            if h <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
                raise StepUnderflow(f"step size underflow at t = {float(t)!r}")
            y_new, err, K = _stages(f, t, y, h, k0)
            en = _err_norm(err, y, y_new, rtol, atol)
            if not inside(y_new) or not math.isfinite(en):
                if h < 1e-12 * max(1.0, abs(t)):
                    raise DomainEscape(
                        f"trajectory reaches the domain boundary near t = {t!r}", last_time=t
                    )
                h *= 0.5
                rejected = True
                continue
            if en > 1.0:
                h *= max(_MIN_FACTOR, _SAFETY * en ** (-1 / 5))
                rejected = True
                continue
            seg = _Segment(t, h, y.copy(), h * (K.T @ _P))
            segments.append(seg)
            t_new = t1 if last else t + h
            if t_eval is None:
                rec_t.append(t_new)
                rec_y.append(y_new.copy())
            else:
                while next_eval < t_eval.size and t_eval[next_eval] <= t_new:
                    te = t_eval[next_eval]
                    rec_t.append(te)
                    rec_y.append(y_new.copy() if te == t_new else seg(te))
                    next_eval += 1
            en = max(en, 1e-10)
            factor = _SAFETY * en ** (-_ALPHA) * err_prev**_BETA
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            if rejected:
                factor = min(1.0, factor)
            err_prev = en
            rejected = False
            t, y, k0 = t_new, y_new, K[6]
            h *= factor

    Y = np.array(rec_y).reshape(-1, 2 * n)
    traj = Trajectory(params, np.array(rec_t), Y[:, :n], Y[:, n:], segments=segments)
    traj.track = _measure_track(params, list(track), traj.x, traj.p)
    traj.drift = {k: drift_of(v) for k, v in traj.track.items()}
    return traj


def time_reversed(state: State) -> State:
    """Flip momenta (or velocities); the flow is reversible under this map."""
    return State(state.x, -np.asarray(state.second), state.picture)


def estimate_period(traj: Trajectory, coordinate: int = 0) -> float:
    """Mean spacing of upward zero crossings of ``x[coordinate]``.

    Crossings are bracketed on the samples and refined on the dense
    interpolant when one is available, else by linear interpolation.
    """
    q = traj.x[:, coordinate]
    times = traj.times
    idx = np.nonzero((q[:-1] < 0.0) & (q[1:] >= 0.0))[0]
    n_any = int(np.count_nonzero(np.sign(q[:-1]) * np.sign(q[1:]) < 0))
    if len(idx) < 2 or n_any < 3:
        raise NotOscillatory(f"coordinate {coordinate} has too few zero crossings ({n_any})")
    crossings = []
    for i in idx:
        ta, tb = times[i], times[i + 1]
        if traj.segments and q[i + 1] != 0.0:
            crossings.append(brentq(lambda s: traj.dense(s)[coordinate], ta, tb, xtol=1e-15, rtol=1e-15))
        else:
            crossings.append(ta - q[i] * (tb - ta) / (q[i + 1] - q[i]))
    return float((crossings[-1] - crossings[0]) / (len(crossings) - 1))


@dataclass(frozen=True)
class DriftRow:
    id: str
    initial: float | complex
    max_deviation: float
    drift: float


def drift_report(traj: Trajectory) -> list[DriftRow]:
    rows = []
    for ident in sorted(traj.track):
        vals = np.asarray(traj.track[ident])
        rows.append(DriftRow(ident, vals[0], float(np.max(np.abs(vals - vals[0]))), drift_of(vals)))
    return rows


def drift_json(traj: Trajectory) -> str:
    def enc(v):
        if isinstance(v, complex) or np.iscomplexobj(v):
            return {"re": float(np.real(v)), "im": float(np.imag(v))}
        return float(v)

    rows = [
        {"id": r.id, "initial": enc(r.initial), "max_deviation": r.max_deviation, "drift": r.drift}
        for r in drift_report(traj)
    ]
    return json.dumps({"params": traj.params.to_dict(), "t_end": float(traj.times[-1]), "invariants": rows}, indent=2)


# --------------------------------------------------------------------------
# CSV


def _fmt(v: float) -> str:
    return "%.17g" % v


def write_trajectory_csv(traj: Trajectory, handle) -> None:
    n = traj.params.dim
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
    cols = []
    for ident, vals in traj.track.items():
        if np.iscomplexobj(vals):
            header += [f"{ident}.re", f"{ident}.im"]
            cols += [np.real(vals), np.imag(vals)]
        else:
            header.append(ident)
            cols.append(vals)
    w = csv.writer(handle, lineterminator="\n")
    w.writerow(header)
    for k in range(len(traj)):
        row = [traj.times[k], *traj.x[k], *traj.p[k], *(c[k] for c in cols)]
        w.writerow([_fmt(float(v)) for v in row])


def read_trajectory_csv(params: Params, handle) -> Trajectory:
    """Inverse of :func:`write_trajectory_csv`; complex columns are rejoined."""
    rows = list(csv.reader(handle))
    header, body = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    n = params.dim
    expected = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
    if header[: 2 * n + 1] != expected:
        raise ValueError(f"header {header[: 2 * n + 1]} does not match dim {n}")
    track = {}
    k = 2 * n + 1
    while k < len(header):
        name = header[k]
        if name.endswith(".re") and k + 1 < len(header) and header[k + 1] == name[:-3] + ".im":
            track[name[:-3]] = body[:, k] + 1j * body[:, k + 1]
            k += 2
        else:
            track[name] = body[:, k]
            k += 1
    return Trajectory(
        params,
        body[:, 0],
        body[:, 1 : n + 1],
        body[:, n + 1 : 2 * n + 1],
        track,
        {name: drift_of(v) for name, v in track.items()},
    )
