"""
Shared fixtures: tolerance policy, canonical states and seeded generators
"""

import numpy as np
import pytest

from distillkit.core import bell_state, maximally_mixed, product_state
from distillkit.core import numkernel as nk
from distillkit.observability import configure_logging
from distillkit.models.settings import SearchBudget, Settings, TolerancePolicy


@pytest.fixture(autouse=True)
def _reset_structlog():
    # Re-bind structlog to the current (per-test captured) stderr so a stream
    # closed by an earlier test's capture is never reused
    configure_logging()
    yield


@pytest.fixture
def pol():
    return TolerancePolicy()


@pytest.fixture
def settings():
    return Settings(search=SearchBudget(restarts=32, max_iters=300, seed=0))


@pytest.fixture
def bell():
    return bell_state()


@pytest.fixture
def mixed():
    return maximally_mixed(3, 3)


@pytest.fixture
def product():
    a = np.diag([0.7, 0.3])
    b = np.array([[0.5, 0.2j], [-0.2j, 0.5]])
    return product_state(a, b)


@pytest.fixture
def rng():
    return nk.rng_for(1234)


def random_psd(rng, d, rank):
    g = rng.standard_normal((rank, d)) + 1j * rng.standard_normal((rank, d))
    m = g.conj().T @ g
    return m / np.trace(m).real


def random_hermitian(rng, d):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (z + z.conj().T) / 2
