import numpy as np
import pytest
from scipy.linalg import expm

from squeezeconc.gauss_core import GaussianState, omega


def random_symplectic(n, rng, scale=0.5):
    """exp(Ω H) with H symmetric is symplectic; used as an independent generator."""
    h = rng.normal(scale=scale, size=(2 * n, 2 * n))
    return expm(omega(n) @ (h + h.T) / 2)


def random_pure_state(n, rng):
    S = random_symplectic(n, rng)
    return GaussianState(rng.normal(size=2 * n), 0.5 * S @ S.T)


def random_mixed_state(n, rng):
    S = random_symplectic(n, rng)
    nu = 0.5 + rng.exponential(0.5, size=n)
    return GaussianState(rng.normal(size=2 * n), S @ np.diag(np.repeat(nu, 2)) @ S.T)


def assert_physical(state, tol=1e-10):
    cov = state.cov
    assert np.max(np.abs(cov - cov.T)) < 1e-12
    assert np.min(np.linalg.eigvalsh(cov)) > 0
    nu = np.abs(np.linalg.eigvals(1j * omega(state.n_modes) @ cov))
    assert np.min(nu) >= 0.5 - tol


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def pytest_terminal_summary(terminalreporter):
    acceptance = __import__("sys").modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
