import math

import numpy as np
import pytest
from conftest import fd, phase_points, random_states
from hypothesis import given
from hypothesis import strategies as st

from quasiharmonic import dynamics as dy
from quasiharmonic.errors import DimensionMismatch, OutOfDomain
from quasiharmonic.geometry import metric
from quasiharmonic.model import validate_params

LAMS = [-0.9, -0.5, 0.0, 0.5, 2.0]


def P(lam, alpha=1.0, dim=2):
    return validate_params(lam, alpha, dim)


# ---- worked values


@pytest.mark.parametrize(
    "lam,x,v,expected",
    [(0.0, [0.3, -2.0], [1.0, 0.0], 0.5), (1.0, [1.0, 0.0], [0.0, 1.0], 0.5), (-0.5, [1.0, 0.0], [1.0, 0.0], 1.0)],
)
def test_kinetic_energy_values(lam, x, v, expected):
    assert dy.kinetic_energy(P(lam), x, v) == pytest.approx(expected, abs=1e-15)


def test_potential_energy_values():
    assert dy.potential_energy(P(3.0), [0.0, 0.0]) == 0.0
    assert dy.potential_energy(P(-0.5, 2.0), [1.0, 0.0]) == pytest.approx(4.0, abs=1e-15)
    assert dy.potential_energy(P(1.0), [1e8, 0.0]) == pytest.approx(0.5, rel=1e-12)


def test_force_values():
    assert np.allclose(dy.force(P(0.0), [1.0, 0.0], [3.0, -1.0]), [-1.0, 0.0], atol=0)
    assert np.array_equal(dy.force(P(1.7), [0.0, 0.0], [3.0, -1.0]), [0.0, 0.0])
    assert np.allclose(dy.force(P(1.0), [1.0, 0.0], [0.0, 1.0]), [0.5, 0.0], atol=1e-15)


def test_legendre_values():
    p = dy.to_momenta(P(1.0), [1.0, 0.0], [0.0, 1.0])
    assert np.allclose(p, [0.0, 1.0], atol=1e-15)
    x = np.array([1.0, 0.0])
    assert x[0] * p[1] - x[1] * p[0] == pytest.approx(1.0)
    assert np.allclose(dy.to_velocities(P(1.0), [1.0, 0.0], [1.0, 0.0]), [2.0, 0.0])
    assert np.array_equal(dy.to_momenta(P(0.0), [1.0, 2.0], [3.0, 4.0]), [3.0, 4.0])


def test_hamiltonian_values():
    assert dy.hamiltonian(P(0.4), [0.0, 0.0], [0.0, 0.0]) == 0.0
    assert dy.hamiltonian(P(1.0), [1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.75, abs=1e-15)
    assert dy.hamiltonian(P(0.0), [1.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0, abs=1e-15)


def test_hamilton_field_values():
    dx, dp = dy.hamilton_field(P(0.0), [1.0, 0.0], [0.0, 0.0])
    assert np.array_equal(dx, [0.0, 0.0]) and np.array_equal(dp, [-1.0, 0.0])
    dx, dp = dy.hamilton_field(P(0.8), [0.0, 0.0], [0.0, 0.0])
    assert not dx.any() and not dp.any()
    params = P(1.0)
    x, p = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    dx, dp = dy.hamilton_field(params, x, p)
    assert np.allclose(dx, [0.0, 1.0])
    assert np.allclose(dp, -fd(lambda z: dy.hamiltonian(params, z, p), x), atol=1e-8)


def test_energy_breakdown_total():
    e = dy.energy(P(0.3), [0.4, 0.1], [1.0, -2.0])
    assert e.total == e.kinetic + e.potential
    assert dy.lagrangian(P(0.3), [0.4, 0.1], [1.0, -2.0]) == e.kinetic - e.potential


def test_errors():
    with pytest.raises(OutOfDomain):
        dy.kinetic_energy(P(-1.0), [1.0, 0.0], [0.0, 1.0])
    with pytest.raises(DimensionMismatch):
        dy.force(P(0.0), [1.0, 0.0], [0.0])


# ---- properties


@pytest.mark.parametrize("lam", LAMS)
def test_legendre_round_trip(lam):
    rng = np.random.default_rng(1)
    params = P(lam)
    xs, vs = random_states(rng, lam, 2, 1000)
    for x, v in zip(xs, vs):
        p = dy.to_momenta(params, x, v)
        back = dy.to_velocities(params, x, p)
        assert np.max(np.abs(back - v)) <= 1e-13 * max(1.0, np.max(np.abs(v)))
        assert x[0] * p[1] - x[1] * p[0] == pytest.approx(x[0] * v[1] - x[1] * v[0], abs=1e-13)


@pytest.mark.parametrize("lam", LAMS)
def test_momentum_is_velocity_gradient(lam):
    rng = np.random.default_rng(2)
    params = P(lam, dim=3)
    xs, vs = random_states(rng, lam, 3, 50)
    for x, v in zip(xs, vs):
        g = fd(lambda w: dy.kinetic_energy(params, x, w), v)
        assert np.allclose(dy.to_momenta(params, x, v), g, atol=1e-8)


@pytest.mark.parametrize("lam", LAMS)
def test_hamiltonian_equals_lagrangian_energy(lam):
    rng = np.random.default_rng(3)
    params = P(lam, 1.3, 3)
    xs, ps = random_states(rng, lam, 3, 300)
    for x, p in zip(xs, ps):
        v = dy.to_velocities(params, x, p)
        assert dy.hamiltonian(params, x, p) == pytest.approx(dy.energy(params, x, v).total, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("lam", LAMS)
def test_force_solves_euler_lagrange(lam):
    """d/dt dL/dv - dL/dx = 0 with dL/dv differentiated along (v, F)."""
    rng = np.random.default_rng(4)
    params = P(lam, 1.1)
    xs, vs = random_states(rng, lam, 2, 40, fill=0.7)
    lag = lambda x, v: dy.lagrangian(params, x, v)  # noqa: E731
    for x, v in zip(xs, vs):
        a = dy.force(params, x, v)
        h = 1e-5
        pv = lambda s: dy.to_momenta(params, x + s * v, v + s * a)  # noqa: E731
        ddt = (pv(h) - pv(-h)) / (2 * h)
        dldx = fd(lambda z: lag(z, v), x)
        assert np.max(np.abs(ddt - dldx)) <= 1e-6 * max(1.0, np.max(np.abs(dldx)))


@pytest.mark.parametrize("lam", LAMS)
def test_field_matches_hamiltonian_gradient(lam):
    rng = np.random.default_rng(5)
    params = P(lam, 0.7, 3)
    xs, ps = random_states(rng, lam, 3, 40)
    for x, p in zip(xs, ps):
        dx, dp = dy.hamilton_field(params, x, p)
        assert np.allclose(dx, fd(lambda w: dy.hamiltonian(params, x, w), p), atol=1e-7)
        assert np.allclose(dp, -fd(lambda z: dy.hamiltonian(params, z, p), x), atol=1e-7)


@given(st.sampled_from(LAMS), st.floats(0.0, 2 * math.pi), st.data())
def test_force_rotation_equivariant(lam, theta, data):
    params = P(lam)
    x, v = data.draw(phase_points(lam))
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    lhs = dy.force(params, R @ x, R @ v)
    rhs = R @ dy.force(params, x, v)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


@given(st.sampled_from(LAMS), st.data())
def test_kinetic_matches_metric_form(lam, data):
    params = P(lam)
    x, v = data.draw(phase_points(lam))
    g = metric(params, *x)
    t = dy.kinetic_energy(params, x, v)
    assert 0.5 * g.quadratic(v) == pytest.approx(t, rel=1e-13, abs=1e-13)


@given(st.sampled_from([-0.9, -0.3]), st.data())
def test_kinetic_positive_inside_disc(lam, data):
    x, v = data.draw(phase_points(lam))
    if np.max(np.abs(v)) > 1e-100:
        assert dy.kinetic_energy(P(lam), x, v) > 0.0


def test_potential_bounded_for_positive_lambda():
    params = P(2.0, 1.5)
    r = np.geomspace(1e-3, 1e6, 200)
    vals = [dy.potential_energy(params, [s, 0.0]) for s in r]
    assert max(vals) < params.threshold_energy
    assert np.all(np.diff(vals) > 0)


def test_kernels_broadcast():
    params = P(0.5, 1.0, 2)
    rng = np.random.default_rng(6)
    x, p = rng.normal(size=(7, 2)), rng.normal(size=(7, 2))
    dx, dp = dy._hamilton_field(params.lam, params.alpha2, x, p)
    for k in range(7):
        ex, ep = dy.hamilton_field(params, x[k], p[k])
        assert np.allclose(dx[k], ex) and np.allclose(dp[k], ep)
