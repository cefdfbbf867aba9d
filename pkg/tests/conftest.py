"""Shared fixtures and helpers for the test suite."""
import numpy as np
import pytest

from riemcompat.catalog import random_field, random_metric, sample_points

# Tolerance levels by derivative depth of the identity under test.
ALGEBRAIC = 1e-9
ONE_DERIV = 1e-8
TWO_DERIV = 1e-7


def metric_points(n, seeds, count=10, lorentzian=False):
    """Yield (metric, point) pairs over several seeded random metrics."""
    for seed in seeds:
        m = random_metric(n, seed, lorentzian=lorentzian)
        for p in sample_points(m, count, seed + 1000):
            yield m, p


def assert_small(res, tol):
    __tracebackhide__ = True
    assert res.applicable, res
    assert res.scaled_max <= tol, f"{res.name}: scaled residual {res.scaled_max:.3e} > {tol:.1e}"


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def metric3():
    return random_metric(3, 5)


@pytest.fixture(scope="session")
def metric4():
    return random_metric(4, 6)


@pytest.fixture(scope="session")
def field_b3(metric3):
    return random_field(metric3, 7)


@pytest.fixture(scope="session")
def field_b4(metric4):
    return random_field(metric4, 8)
