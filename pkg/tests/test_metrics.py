import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squeezeconc.gauss_core import (
    EprParams,
    GaussianState,
    SymplecticOp,
    embed,
    prepare_epr,
    vacuum,
)
from squeezeconc.metrics import (
    correlations,
    global_purity,
    log_negativity,
    marginal_purity,
    marginal_purity_closed_form,
    partial_transpose,
    sigma_pm,
    symplectic_eigenvalues,
    von_neumann_entropy,
)
from squeezeconc.protocols import concentrate_two_mode

from conftest import random_mixed_state, random_pure_state, random_symplectic

GRID = [0.0, 0.3, 1.0]


def log_negativity_invariants(cov):
    """Two-mode log-negativity from the local symplectic invariants (no eigen-solver)."""
    A, B, C = cov[:2, :2], cov[2:, 2:], cov[:2, 2:]
    delta = np.linalg.det(A) + np.linalg.det(B) - 2 * np.linalg.det(C)
    nu = math.sqrt((delta - math.sqrt(delta**2 - 4 * np.linalg.det(cov))) / 2)
    return max(0.0, -math.log2(2 * nu))


def test_sigma_pm():
    sp, sm = sigma_pm(prepare_epr(EprParams(1, 0.5)))
    assert sp == pytest.approx(7.38905609893065, rel=1e-14)
    assert sm == pytest.approx(0.36787944117144233, rel=1e-14)
    assert sigma_pm(vacuum(2)) == (1.0, 1.0)
    with pytest.raises(ValueError):
        sigma_pm(vacuum(1))


def test_sigma_pm_after_concentration():
    s = prepare_epr(EprParams(0.5, 0.5, 0.0))
    out, _ = concentrate_two_mode(s, s, forced=(0.0, 0.0))
    sp, sm = sigma_pm(out)
    assert sp == pytest.approx(1.3591409142295225, abs=1e-12)
    assert sm == pytest.approx(0.18393972058572117, abs=1e-12)


@pytest.mark.parametrize("r", [0.0, 0.2, 0.5, 1.3])
def test_marginal_purity_symmetric(r):
    assert marginal_purity(prepare_epr(EprParams(r, r))) == pytest.approx(1 / math.cosh(2 * r), rel=1e-12)


def test_marginal_purity_spot_value():
    s = prepare_epr(EprParams(1, 0.5))
    assert marginal_purity(s, 0) == pytest.approx(0.42509603494228043, abs=1e-12)
    assert marginal_purity(s, 1) == pytest.approx(0.42509603494228043, abs=1e-12)


@pytest.mark.parametrize("r1", GRID)
@pytest.mark.parametrize("r2", GRID)
def test_marginal_purity_forms_agree(r1, r2):
    p = EprParams(r1, r2, 0.7)
    closed = marginal_purity_closed_form(p.sigma_plus, p.sigma_minus)
    assert marginal_purity(prepare_epr(p)) == pytest.approx(closed, abs=1e-10)


def test_global_purity():
    assert global_purity(vacuum(3)) == pytest.approx(1.0, abs=1e-15)
    assert global_purity(prepare_epr(EprParams(0.8, -0.3))) == pytest.approx(1.0, abs=1e-10)
    assert global_purity(GaussianState([0, 0], np.eye(2))) == pytest.approx(0.5, abs=1e-15)


def test_symplectic_eigenvalues():
    assert np.allclose(symplectic_eigenvalues(vacuum(3).cov), [0.5] * 3)
    assert np.allclose(symplectic_eigenvalues(prepare_epr(EprParams(1, 0.5)).cov), [0.5, 0.5], atol=1e-12)
    thermal_and_vacuum = np.diag([1.0, 1.0, 0.5, 0.5])
    assert np.allclose(symplectic_eigenvalues(thermal_and_vacuum), [0.5, 1.0])
    with pytest.raises(ValueError):
        symplectic_eigenvalues([[1.0, 0.3], [0.0, 1.0]])


def test_symplectic_eigenvalues_are_invariant(rng):
    nu = np.array([0.5, 0.9, 2.0])
    S = random_symplectic(3, rng)
    cov = S @ np.diag(np.repeat(nu, 2)) @ S.T
    assert np.allclose(symplectic_eigenvalues(cov), nu, atol=1e-9)


def test_eigenvalue_bound_and_purity(rng):
    for _ in range(20):
        s = random_mixed_state(2, rng)
        nu = symplectic_eigenvalues(s.cov)
        assert nu.min() >= 0.5 - 1e-10
        assert global_purity(s) < 1
        p = random_pure_state(2, rng)
        assert np.allclose(symplectic_eigenvalues(p.cov), 0.5, atol=1e-9)
        assert global_purity(p) == pytest.approx(1.0, abs=1e-9)


def test_log_negativity_values():
    assert log_negativity(vacuum(2)) == 0.0
    assert log_negativity(prepare_epr(EprParams(0.5, 0.5))) == pytest.approx(1.4426950408889634, abs=1e-12)
    for r in (0.1, 0.7, 1.2):
        assert log_negativity(prepare_epr(EprParams(r, r))) == pytest.approx(2 * r / math.log(2), abs=1e-10)
    with pytest.raises(ValueError):
        log_negativity(vacuum(3))


@pytest.mark.parametrize("r1", GRID)
@pytest.mark.parametrize("r2", GRID)
def test_log_negativity_matches_invariant_formula(r1, r2):
    s = prepare_epr(EprParams(r1, r2))
    assert log_negativity(s) == pytest.approx(log_negativity_invariants(s.cov), abs=1e-9)


def test_partial_transpose_flips_p_b():
    pt = partial_transpose(np.arange(16.0).reshape(4, 4))
    assert pt[3, 0] == -12 and pt[3, 3] == 15 and pt[0, 3] == -3


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r1=st.floats(-1, 1), r2=st.floats(-1, 1))
def test_log_negativity_local_invariance(seed, r1, r2):
    rng = np.random.default_rng(seed)
    s = prepare_epr(EprParams(r1, r2))
    local = np.zeros((4, 4))
    local[:2, :2] = random_symplectic(1, rng, scale=0.8)
    local[2:, 2:] = random_symplectic(1, rng, scale=0.8)
    out = SymplecticOp(embed(local, [0, 1], 2)).apply(s)
    assert log_negativity(out) == pytest.approx(log_negativity(s), abs=1e-9)


def test_entropy():
    assert von_neumann_entropy(prepare_epr(EprParams(1, 0.2))) == pytest.approx(0.0, abs=1e-9)
    # thermal mode with nu = 1: (3/2) ln(3/2) - (1/2) ln(1/2)
    thermal = GaussianState([0, 0], np.eye(2))
    assert von_neumann_entropy(thermal) == pytest.approx(1.5 * math.log(1.5) + 0.5 * math.log(2), rel=1e-12)


def test_correlation_summary():
    c = correlations(prepare_epr(EprParams(0.5, 0.5, 1.0)))
    assert c.sigma_plus == pytest.approx(math.e)
    assert c.var_p_sum == pytest.approx(1 / math.e)
    assert c.var_p_diff == pytest.approx(math.e)
    assert np.allclose(c.V_X, c.V_X.T) and np.allclose(c.V_P, c.V_P.T)
    assert c.means == ((1.0, 0.0), (0.0, 0.0))
    assert c.epr_product == pytest.approx(1.0)
