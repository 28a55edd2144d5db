"""Property checks behind ``quasiharmonic verify``.

Each check returns one or more :class:`Claim` rows holding the measured
value, the bound and the comparison.  Every check draws from its own
generator seeded by ``(seed, check number)`` so reports are reproducible
and independent of which checks run.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import closed_form as cf
from . import dynamics as dy
from . import geometry as geo
from . import invariants as inv
from .errors import ConstraintViolation
from .integrate import IntegratorConfig, drift_of, estimate_period, integrate
from .model import Params, State, validate_params
from .profiles import FAR, WALL_GAP, figure_profiles

_OPS = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Claim:
    id: str
    name: str
    measured: float
    relation: str
    bound: float
    passed: bool

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.id:>4} {self.name}: measured {self.measured:.6g} {self.relation} {self.bound:.6g}"


def claim(cid: str, name: str, measured: float, relation: str, bound: float) -> Claim:
    measured = float(measured)
    ok = math.isfinite(measured) and _OPS[relation](measured, bound)
    return Claim(cid, name, measured, relation, float(bound), bool(ok))


def _rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([seed, number])


def _n(default: int, cases: int | None) -> int:
    return default if cases is None else max(1, min(default, cases))


def _random_point(rng, params: Params, fill: float = 0.9) -> np.ndarray:
    """Uniform in the box [-1.5, 1.5]^n, kept inside fill * disc for lambda < 0."""
    while True:
        x = rng.uniform(-1.5, 1.5, params.dim)
        if params.lam >= 0.0 or x @ x < fill * fill / abs(params.lam):
            return x


def random_trig(rng, lam: float, alpha: float, dim: int = 2) -> tuple[Params, cf.ClosedFormSolution]:
    params = validate_params(lam, alpha, dim)
    while True:
        A = rng.uniform(0.1, 1.5, dim) * rng.choice([-1.0, 1.0], dim)
        phi = rng.uniform(-math.pi, math.pi, dim)
        if lam < 0.0:
            target = rng.uniform(0.1, 0.8) / abs(lam)
            A = A * math.sqrt(target / cf.max_radius2_trig(A, phi))
        try:
            return params, cf.trig_solution(params, A, phi)
        except ConstraintViolation:
            continue


def random_hyper(rng, lam: float, alpha: float, dim: int = 2) -> tuple[Params, cf.ClosedFormSolution]:
    params = validate_params(lam, alpha, dim)
    while True:
        A = rng.uniform(0.2, 1.5, dim) * rng.choice([-1.0, 1.0], dim)
        phi = rng.uniform(-1.0, 1.0, dim)
        ph = cf.hyper_sum(lam, A, phi)
        if lam * ph < 1.2:
            A = A * math.sqrt(rng.uniform(1.2, 3.0) / (lam * float(A @ A)))
        try:
            return params, cf.hyper_solution(params, A, phi)
        except ConstraintViolation:
            continue


def random_linear(rng, lam: float, dim: int = 2) -> tuple[Params, cf.ClosedFormSolution]:
    A = rng.normal(size=dim)
    B = rng.normal(size=dim)
    params = validate_params(lam, cf.border_alpha(lam, A, B), dim)
    return params, cf.linear_solution(params, A, B, rtol=1e-12)


def _tight(t1: float, t0: float = 0.0) -> IntegratorConfig:
    return IntegratorConfig((t0, t1), rtol=1e-12, atol=1e-14)


# --------------------------------------------------------------------------


def check_frequency_law(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 1)
    worst = 0.0
    for _ in range(_n(200, cases)):
        params, sol = random_trig(rng, rng.uniform(-0.9, 3.0), rng.uniform(0.5, 2.0))
        T = cf.period(sol)
        traj = integrate(params, cf.eval_state(sol, 0.0), IntegratorConfig((0.0, 2.25 * T), rtol=1e-10, atol=1e-12))
        k = int(np.argmax(np.abs(sol.A)))
        worst = max(worst, abs(estimate_period(traj, k) - T) / T)
    return [claim("1", "period vs 2pi/omega, relative error", worst, "<=", 1e-4)]


def check_brackets(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 2)
    worst = 0.0
    for lam in (-0.5, 0.0, 1.0):
        params = validate_params(lam, 1.0, 2)
        H = inv.hamiltonian_observable(params)
        obs = [inv.observable_from_id(params, i) for i in ("I1", "I2", "J1_2")]
        for _ in range(_n(500, cases)):
            x = _random_point(rng, params)
            p = rng.normal(size=2)
            worst = max(worst, *(abs(inv.poisson_bracket(H, o, x, p)) for o in obs))
    return [claim("2", "{H,I1}, {H,I2}, {H,J} at random states", worst, "<=", 1e-7)]


def check_complex_factorization(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 3)
    worst = 0.0
    lams = (-0.5, 0.5, 1.0, 2.0, -0.8, 0.0)
    for k in range(_n(len(lams), cases)):
        params, sol = random_trig(rng, lams[k], rng.uniform(0.5, 2.0))
        T = cf.period(sol)
        traj = integrate(params, cf.eval_state(sol, 0.0), _tight(20 * T), track=["K1K1*", "K2K2*", "K1K2*"])
        for ident, vals in traj.track.items():
            worst = max(worst, drift_of(np.real(vals)))
            if ident == "K1K2*":
                worst = max(worst, drift_of(np.imag(vals)))
    return [claim("3", "drift of K1K1*, K2K2*, Re/Im K1K2* over 20 periods", worst, "<=", 1e-8)]


def _affine_residual(t, r) -> float:
    coef = np.polyfit(t, r, 1)
    return float(np.max(np.abs(np.polyval(coef, t) - r)))


def check_trichotomy(seed: int, cases: int | None = None) -> list[Claim]:
    params = validate_params(1.0, 1.0, 2)
    x0 = np.array([0.3, 0.0])
    out = []
    for cid, e in (("4a", 0.4), ("4b", 0.5), ("4c", 0.6)):
        # radial speed giving total energy e at x0
        d = 1.0 + params.lam * (x0 @ x0)
        u = math.sqrt(2.0 * d * (e - dy.potential_energy(params, x0)))
        state = State(x0, [u, 0.0], "velocity")
        sol = cf.solution_from_state(params, x0, [u, 0.0])
        regime = cf.classify_regime(params, e)
        t1 = 3.0 * cf.period(sol) if sol.kind.is_trig else 10.0
        ts = np.linspace(0.0, t1, 400)
        traj = integrate(params, state, _tight(t1), t_eval=ts)
        r = np.linalg.norm(traj.x, axis=1)
        if cid == "4a":
            amp = float(np.linalg.norm(sol.A))
            ok = regime is cf.Regime.BOUNDED and sol.kind is cf.SolutionKind.TRIG_BOUNDED
            ok &= bool(r.max() <= amp * (1.0 + 1e-9))
            xa, _, _ = cf.evaluate(sol, ts)
            gap = float(np.max(np.abs(xa - traj.x)))
            out.append(claim(cid, "E=0.4 bounded: gap to periodic closed form", gap if ok else math.inf, "<=", 1e-6))
        elif cid == "4b":
            ok = regime is cf.Regime.BORDER
            out.append(claim(cid, "E=0.5 border: affine fit residual of r(t)", _affine_residual(ts, r) if ok else math.inf, "<=", 1e-6))
        else:
            ok = regime is cf.Regime.UNBOUNDED and sol.kind is cf.SolutionKind.HYPER_UNBOUNDED
            xa, _, _ = cf.evaluate(sol, ts)
            gap = float(np.max(np.abs(xa - traj.x) / np.maximum(1.0, np.abs(xa))))
            out.append(claim(cid, "E=0.6 unbounded: relative gap to sinh growth", gap if ok else math.inf, "<=", 1e-6))
    return out


def check_energy_bound(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 5)
    trig_max, hyper_min = 0.0, math.inf
    for _ in range(_n(200, cases)):
        lam, alpha = rng.uniform(0.1, 3.0), rng.uniform(0.5, 2.0)
        params, sol = random_trig(rng, lam, alpha)
        st = cf.eval_state(sol, rng.uniform(0.0, cf.period(sol)))
        e_state = dy.energy(params, st.x, st.v).total
        trig_max = max(trig_max, max(e_state, cf.solution_energy(params, sol)) / params.threshold_energy)
        params, sol = random_hyper(rng, lam, alpha)
        st = cf.eval_state(sol, 0.0)
        e_state = dy.energy(params, st.x, st.v).total
        hyper_min = min(hyper_min, min(e_state, cf.solution_energy(params, sol)) / params.threshold_energy)
    return [
        claim("5a", "bounded energies / (alpha^2/2lambda), max", trig_max, "<", 1.0),
        claim("5b", "unbounded energies / (alpha^2/2lambda), min", hyper_min, ">", 1.0),
    ]


def check_lie_algebra(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 6)
    worst = 0.0
    for lam in (-0.5, 0.0, 1.0, 2.0):
        params = validate_params(lam, 1.0, 2)
        for _ in range(_n(500, cases)):
            x = _random_point(rng, params)
            worst = max(worst, *geo.lie_algebra_residuals(params, *x).values())
    flat = validate_params(0.0, 1.0, 2)
    zero = max(float(np.max(np.abs(geo.lie_bracket(flat, "X1", "X2", *_random_point(rng, flat))))) for _ in range(50))
    return [
        claim("6a", "Lie algebra relations, max component defect", worst, "<=", 1e-12),
        claim("6b", "lambda=0 bracket [X1,X2], max component", zero, "<=", 1e-12),
    ]


def check_decompositions(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 7)
    sum_err, split_err = 0.0, 0.0
    for _ in range(_n(1000, cases)):
        lam = rng.uniform(-0.9, 3.0)
        for dim in (2, 3):
            params = validate_params(lam, rng.uniform(0.5, 2.0), dim)
            x = _random_point(rng, params)
            p = rng.normal(size=dim)
            H = dy.hamiltonian(params, x, p)
            quad = sum(inv.quadratic_i(params, x, p, k, k) for k in range(1, dim + 1))
            ang = sum(inv.angular_j(x, p, i, j) ** 2 for i in range(1, dim + 1) for j in range(i + 1, dim + 1))
            sum_err = max(sum_err, abs(H - (0.5 * quad - 0.5 * lam * ang)) / max(1.0, abs(H)))
            if dim == 2:
                h1, h2, h3 = inv.partial_hamiltonians(params)
                split_err = max(split_err, abs(H - (h1(x, p) + h2(x, p) - lam * h3(x, p))) / max(1.0, abs(H)))
    return [
        claim("7a", "H = (1/2) sum I_k - (lambda/2) sum J^2, relative", sum_err, "<=", 1e-12),
        claim("7b", "H = H1 + H2 - lambda H3, relative", split_err, "<=", 1e-12),
    ]


def check_involutive_n3(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 8)
    worst = 0.0
    for _ in range(_n(200, cases)):
        params = validate_params(rng.uniform(-0.9, 3.0), rng.uniform(0.5, 2.0), 3)
        sets = inv.involutive_sets_n3(params)[:3]
        x = _random_point(rng, params)
        p = rng.normal(size=3)
        for S in sets:
            for a in range(len(S)):
                for b in range(a + 1, len(S)):
                    worst = max(worst, abs(inv.poisson_bracket(S[a], S[b], x, p)))
    return [claim("8", "pairwise brackets in the three n=3 involutive sets", worst, "<=", 1e-7)]


def check_conjugacy(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 9)
    worst = 0.0
    for k in range(_n(12, cases)):
        lam = (1.0, -1.0)[k % 2]
        params = validate_params(lam, rng.uniform(0.5, 2.0), 1)
        if lam > 0.0 and k % 4 == 0:
            amp = rng.uniform(1.1, 2.0) / math.sqrt(lam)
            sol = cf.hyper_solution(params, [amp], [rng.uniform(-0.5, 0.5)])
            ts = np.linspace(0.0, 2.0 / sol.rate, 400)
        else:
            amp = rng.uniform(0.1, 0.9) / math.sqrt(abs(lam))
            sol = cf.trig_solution(params, [amp], [rng.uniform(-math.pi, math.pi)])
            ts = np.linspace(0.0, cf.period(sol), 400)
        x, v, a = cf.evaluate(sol, ts)
        worst = max(worst, geo.curved_lagrangian_check(params, x, v, a))
    pot = 0.0
    for lam in (1.0, -1.0):
        params = validate_params(lam, 1.0, 1)
        grid = np.linspace(-5.0, 5.0, 2001) if lam > 0.0 else np.linspace(-0.95, 0.95, 2001)
        q = geo.curvature_map(params, grid)
        direct = 0.5 * params.alpha2 * grid**2 / (1.0 + lam * grid**2)
        pot = max(pot, float(np.max(np.abs(geo.curved_line_potential(params, q) - direct))))
    return [
        claim("9a", "transformed equation residual, lambda = +-1", worst, "<=", 1e-8),
        claim("9b", "transformed potential vs original on a grid", pot, "<=", 1e-12),
    ]


def check_rank(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 10)
    out = []
    for cid, dim in (("10a", 2), ("10b", 3)):
        bad = 0
        for _ in range(_n(100, cases)):
            params = validate_params(rng.uniform(-0.9, 3.0), rng.uniform(0.5, 2.0), dim)
            x = _random_point(rng, params)
            p = rng.normal(size=dim)
            rank = inv.numeric_rank(inv.jacobian(inv.fundamental_set(params), x, p))
            bad += rank != 2 * dim - 1
        out.append(claim(cid, f"states where rank(I_k, J_i,i+1) != {2 * dim - 1} (n={dim})", bad, "<=", 0))
    return out


def check_analytic_vs_numeric(seed: int, cases: int | None = None) -> list[Claim]:
    rng = _rng(seed, 11)
    worst = 0.0
    for k in range(_n(50, cases)):
        kind = k % 3
        if kind == 0:
            params, sol = random_trig(rng, rng.uniform(-0.9, 3.0), rng.uniform(0.5, 2.0))
            t1 = cf.period(sol)
        elif kind == 1:
            params, sol = random_hyper(rng, rng.uniform(0.2, 3.0), rng.uniform(0.5, 2.0))
            t1 = 2.0 * math.pi / sol.rate
        else:
            params, sol = random_linear(rng, rng.uniform(0.2, 3.0))
            t1 = 5.0
        ts = np.linspace(0.0, t1, 200)
        traj = integrate(params, cf.eval_state(sol, 0.0), _tight(t1), t_eval=ts)
        xa, va, _ = cf.evaluate(sol, ts)
        worst = max(worst, float(np.max(np.abs(traj.x - xa))), float(np.max(np.abs(traj.v - va))))
    return [claim("11", "closed form vs integration at rtol 1e-12, max abs", worst, "<=", 1e-7)]


def check_figures(seed: int, cases: int | None = None) -> list[Claim]:
    gap = 0.0
    monotone = True
    for fig in ("II", "III"):
        for name, rows in figure_profiles(fig).items():
            lam = float(name.split("lambda")[1])
            if lam <= 0.0:
                continue
            half = rows[rows[:, 0] >= 0.0]
            monotone &= bool(np.all(np.diff(half[:, 1]) > 0.0))
            far = half[np.argmin(np.abs(half[:, 0] - FAR))]
            gap = max(gap, abs(far[1] - 1.0 / (2.0 * lam)))
    wall = figure_profiles("IV")["figIV_kappa1"]
    rho = math.pi / 2.0 - WALL_GAP
    at_wall = wall[np.argmin(np.abs(wall[:, 0] - rho))]
    return [
        claim("12a", "Fig II/III value at r=1000 vs alpha^2/(2lambda)", gap if monotone else math.inf, "<=", 1e-9),
        claim("12b", "Fig IV kappa=1 value at rho=pi/2-1e-3", at_wall[1], ">", 1e6),
    ]


CHECKS = {
    "1": check_frequency_law,
    "2": check_brackets,
    "3": check_complex_factorization,
    "4": check_trichotomy,
    "5": check_energy_bound,
    "6": check_lie_algebra,
    "7": check_decompositions,
    "8": check_involutive_n3,
    "9": check_conjugacy,
    "10": check_rank,
    "11": check_analytic_vs_numeric,
    "12": check_figures,
}


def run_all(seed: int = 0, cases: int | None = None, only=None) -> list[Claim]:
    claims = []
    for key, fn in CHECKS.items():
        if only is None or key in only:
            claims.extend(fn(seed, cases))
    return claims


def report_json(claims, seed: int, cases: int | None) -> str:
    body = {
        "seed": seed,
        "cases": cases,
        "passed": all(c.passed for c in claims),
        "claims": [asdict(c) for c in claims],
    }
    return json.dumps(body, indent=2, sort_keys=True)
