import io
import json
import math

import numpy as np
import pytest

from quasiharmonic import closed_form as cf
from quasiharmonic import dynamics as dy
from quasiharmonic.errors import DomainEscape, InvalidParams, NotOscillatory, OutOfDomain
from quasiharmonic.integrate import (
    IntegratorConfig,
    dopri_step,
    drift_json,
    drift_report,
    estimate_period,
    integrate,
    read_trajectory_csv,
    time_reversed,
    trajectory_from_samples,
    write_trajectory_csv,
)
from quasiharmonic.model import State, validate_params


def P(lam, alpha=1.0, dim=2):
    return validate_params(lam, alpha, dim)


def test_harmonic_returns_after_one_period():
    traj = integrate(P(0.0), State([1.0, 0.0], [0.0, 0.0]), IntegratorConfig((0.0, 2 * math.pi), rtol=1e-12, atol=1e-14), ["H"])
    assert np.max(np.abs(traj.x[-1] - [1.0, 0.0])) <= 1e-8
    assert np.max(np.abs(traj.p[-1])) <= 1e-8
    assert traj.drift["H"] <= 1e-10


def test_recorded_times_increase_and_states_inside():
    traj = integrate(P(-1.0), State([0.0, 0.0], [0.9, 0.3]), IntegratorConfig((0.0, 20.0)), ["H"])
    assert np.all(np.diff(traj.times) > 0)
    assert np.all(1.0 - np.sum(traj.x**2, axis=1) > 0)
    assert all(d >= 0 for d in traj.drift.values())


def test_matches_trig_solution():
    params = P(1.0)
    sol = cf.trig_solution(params, [0.8, 0.5], [0.2, 1.3])
    T = cf.period(sol)
    traj = integrate(params, cf.eval_state(sol, 0.0), IntegratorConfig((0.0, T), rtol=1e-12, atol=1e-14))
    x, v, _ = cf.evaluate(sol, traj.times)
    assert np.max(np.abs(traj.x - x)) <= 1e-7
    assert np.max(np.abs(traj.v - v)) <= 1e-7


def test_velocity_picture_input():
    params = P(0.5)
    x, v = [0.3, 0.1], [0.2, -0.4]
    a = integrate(params, State(x, v, "velocity"), IntegratorConfig((0.0, 1.0)))
    b = integrate(params, State(x, dy.to_momenta(params, x, v)), IntegratorConfig((0.0, 1.0)))
    assert np.max(np.abs(a.x[-1] - b.x[-1])) <= 1e-14


def test_unbounded_energy_escapes_monotonically():
    params = P(1.0)
    x, p = np.array([0.5, 0.0]), np.array([1.2, 0.3])
    e = dy.hamiltonian(params, x, p)
    assert e > 0.5 and cf.classify_regime(params, e) is cf.Regime.UNBOUNDED
    traj = integrate(params, State(x, p), IntegratorConfig((0.0, 50.0)), ["H"])
    r = np.linalg.norm(traj.x, axis=1)
    late = r[traj.times > 5.0]
    assert np.all(np.diff(late) > 0) and late[-1] > 20
    assert traj.drift["H"] <= 1e-8


def test_period_examples():
    traj = integrate(P(0.0), State([0.0, 0.0], [1.0, 0.0]), IntegratorConfig((0.0, 20.0), rtol=1e-12, atol=1e-14))
    assert estimate_period(traj) == pytest.approx(2 * math.pi, abs=1e-6)
    params = P(3.0, 2.0)
    sol = cf.trig_solution(params, [1.0, 0.0], [math.pi / 2, 0.0])
    assert sol.rate == pytest.approx(1.0)
    traj = integrate(params, cf.eval_state(sol, 0.0), IntegratorConfig((0.0, 20.0), rtol=1e-12, atol=1e-14))
    assert estimate_period(traj) == pytest.approx(2 * math.pi, abs=1e-5)


def test_period_sampled_without_dense_output():
    t = np.linspace(0.0, 30.0, 30001)
    traj = trajectory_from_samples(P(0.0, dim=1), t, np.sin(t)[:, None], np.cos(t)[:, None])
    assert estimate_period(traj) == pytest.approx(2 * math.pi, abs=1e-6)


def test_period_rejects_unbounded():
    traj = integrate(P(1.0), State([0.5, 0.0], [1.2, 0.0]), IntegratorConfig((0.0, 30.0)))
    with pytest.raises(NotOscillatory):
        estimate_period(traj)


def test_dopri_order():
    """Fixed-step global error on y'' = -y drops by about 2^5 per halving."""
    f = lambda t, y: np.array([y[1], -y[0]])  # noqa: E731

    def err(steps):
        y, h = np.array([1.0, 0.0]), 2 * math.pi / steps
        for k in range(steps):
            y, _ = dopri_step(f, k * h, y, h)
        return np.max(np.abs(y - [1.0, 0.0]))

    e = [err(n) for n in (20, 40, 80)]
    assert e[0] / e[1] >= 28 and e[1] / e[2] >= 28


def test_adaptive_error_shrinks_with_tolerance():
    def endpoint_error(tol):
        tr = integrate(P(0.0), State([1.0, 0.0], [0.0, 0.0]), IntegratorConfig((0.0, 2 * math.pi), rtol=tol, atol=tol))
        return np.max(np.abs(tr.x[-1] - [1.0, 0.0])), len(tr)

    (e1, n1), (e2, n2) = endpoint_error(1e-6), endpoint_error(1e-6 / 32)
    assert e2 < e1 / 8
    # an order-5 controller needs about 2x the steps for 32x the accuracy
    assert n2 <= 3 * n1


@pytest.mark.parametrize("lam", [-0.5, 0.0, 1.0])
def test_time_reversal(lam):
    params = P(lam, 1.3)
    start = State([0.4, -0.2], [0.3, 0.6])
    cfg = IntegratorConfig((0.0, 5.0), rtol=1e-11, atol=1e-13)
    fwd = integrate(params, start, cfg)
    back = integrate(params, time_reversed(fwd.state(-1)), cfg)
    assert np.max(np.abs(back.x[-1] - start.x)) <= 1e-9
    assert np.max(np.abs(-back.p[-1] - start.p)) <= 1e-9


def test_domain_escape_for_free_motion():
    params = P(-1.0).free()
    with pytest.raises(DomainEscape) as info:
        integrate(params, State([0.0, 0.0], [1.0, 0.0]), IntegratorConfig((0.0, 100.0)))
    assert 0.0 < info.value.last_time < 100.0


def test_initial_state_must_be_inside():
    with pytest.raises(OutOfDomain):
        integrate(P(-1.0), State([1.0, 0.0], [0.0, 0.0]), IntegratorConfig((0.0, 1.0)))


def test_near_boundary_orbit_stays_inside():
    params = P(-1.0)
    sol = cf.trig_solution(params, [0.99, 0.0], [math.pi / 2, 0.0])
    traj = integrate(params, cf.eval_state(sol, 0.0), IntegratorConfig((0.0, 3 * cf.period(sol))))
    assert np.max(np.sum(traj.x**2, axis=1)) < params.r2_limit


@pytest.mark.parametrize("kw", [{"rtol": 0.0}, {"atol": 0.1}, {"rtol": -1e-9}, {"max_step": 0.0}])
def test_config_validation(kw):
    with pytest.raises(InvalidParams):
        IntegratorConfig((0.0, 1.0), **kw)
    with pytest.raises(InvalidParams):
        IntegratorConfig((1.0, 0.0))


def test_t_eval_sampling():
    t = np.linspace(0.0, 2 * math.pi, 50)
    traj = integrate(P(0.0), State([1.0, 0.0], [0.0, 0.0]), IntegratorConfig((0.0, t[-1]), rtol=1e-12, atol=1e-14), t_eval=t)
    assert np.array_equal(traj.times, t)
    assert np.max(np.abs(traj.x[:, 0] - np.cos(t))) <= 1e-9
    with pytest.raises(ValueError):
        integrate(P(0.0), State([1.0, 0.0], [0.0, 0.0]), IntegratorConfig((0.0, 1.0)), t_eval=[0.5, 2.0])


def test_drift_on_exact_samples():
    params = P(0.8, 1.1)
    sol = cf.trig_solution(params, [0.7, 0.4], [0.1, 1.0])
    t = np.linspace(0.0, 3 * cf.period(sol), 300)
    x, v, _ = cf.evaluate(sol, t)
    p = dy._to_momenta(params.lam, x, v)
    ids = ["H", "I1", "I2", "J1_2", "P1", "K1K2*"]
    traj = trajectory_from_samples(params, t, x, p, ids)
    rows = drift_report(traj)
    assert [r.id for r in rows] == sorted(ids)
    # P1 is not conserved under the potential; everything else is
    assert all(r.drift <= 1e-11 for r in rows if r.id != "P1")


def test_long_run_energy_drift():
    params = P(1.0)
    sol = cf.trig_solution(params, [0.6, 0.3], [0.0, 1.0])
    traj = integrate(params, cf.eval_state(sol, 0.0), IntegratorConfig((0.0, 20 * cf.period(sol)), rtol=1e-12, atol=1e-14), ["H"])
    assert traj.drift["H"] <= 1e-8


def test_empty_track():
    traj = integrate(P(0.0), State([1.0, 0.0], [0.0, 0.0]), IntegratorConfig((0.0, 1.0)))
    assert drift_report(traj) == []
    assert json.loads(drift_json(traj))["invariants"] == []


def test_drift_is_absolute_for_tiny_initial_values():
    traj = trajectory_from_samples(P(0.0, dim=1), [0.0, 1.0], [[0.0], [1e-9]], [[0.0], [0.0]], ["H"])
    assert traj.drift["H"] == pytest.approx(0.5e-18)


def test_csv_round_trip():
    params = P(0.5)
    traj = integrate(params, State([0.3, 0.1], [0.2, -0.4]), IntegratorConfig((0.0, 2.0)), ["H", "K1K2*"])
    buf = io.StringIO()
    write_trajectory_csv(traj, buf)
    header = buf.getvalue().splitlines()[0]
    assert header == "t,x1,x2,p1,p2,H,K1K2*.re,K1K2*.im"
    back = read_trajectory_csv(params, io.StringIO(buf.getvalue()))
    assert np.array_equal(back.times, traj.times)
    assert np.array_equal(back.x, traj.x) and np.array_equal(back.p, traj.p)
    assert np.array_equal(back.track["K1K2*"], traj.track["K1K2*"])
    with pytest.raises(ValueError):
        read_trajectory_csv(P(0.5, dim=3), io.StringIO(buf.getvalue()))
