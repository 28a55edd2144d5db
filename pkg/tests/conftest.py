import math

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = dict(allow_nan=False, allow_infinity=False)


@st.composite
def phase_points(draw, lam, dim=2, fill=0.9, pmax=3.0):
    """(x, p) with x inside fill * disc when lam < 0."""
    x = np.array(draw(st.lists(st.floats(-1.0, 1.0, **finite), min_size=dim, max_size=dim)))
    if lam < 0.0:
        x = x * fill / math.sqrt(abs(lam) * dim)
    else:
        x = 2.0 * x
    p = np.array(draw(st.lists(st.floats(-pmax, pmax, **finite), min_size=dim, max_size=dim)))
    return x, p


def random_states(rng, lam, dim, count, fill=0.9):
    xs = []
    while len(xs) < count:
        x = rng.uniform(-1.5, 1.5, dim)
        if lam >= 0.0 or x @ x < fill * fill / abs(lam):
            xs.append(x)
    return np.array(xs), rng.normal(size=(count, dim))


def fd(f, z, h=None):
    """Central-difference gradient of a scalar function of a vector."""
    z = np.asarray(z, dtype=float)
    g = np.zeros_like(z)
    for k in range(z.size):
        step = (np.finfo(float).eps ** (1 / 3) * max(1.0, abs(z[k]))) if h is None else h
        e = np.zeros_like(z)
        e[k] = step
        g[k] = (f(z + e) - f(z - e)) / (2 * step)
    return g


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
