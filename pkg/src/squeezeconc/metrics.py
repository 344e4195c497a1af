"""Scalar diagnostics of Gaussian states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gauss_core import GaussianState, omega, quad_variance

EIG_TOL = 1e-10


def _two_mode(state: GaussianState) -> None:
    if state.n_modes != 2:
        raise ValueError(f"expected a two-mode state, got {state.n_modes} modes")


def sigma_pm(state: GaussianState) -> tuple[float, float]:
    """``(Var(X_A + X_B), Var(X_A - X_B))``."""
    _two_mode(state)
    return (
        quad_variance(state, [1, 0, 1, 0]),
        quad_variance(state, [1, 0, -1, 0]),
    )


def symplectic_eigenvalues(cov) -> np.ndarray:
    """Symplectic spectrum, sorted ascending (one value per mode)."""
    cov = np.asarray(cov, float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise ValueError(f"covariance must be square with even dimension, got {cov.shape}")
    if np.max(np.abs(cov - cov.T)) > EIG_TOL * max(1.0, np.max(np.abs(cov))):
        raise ValueError("covariance matrix is not symmetric")
    sym = 0.5 * (cov + cov.T)
    nu = np.sort(np.abs(np.linalg.eigvals(1j * omega(cov.shape[0] // 2) @ sym).real))
    # eigenvalues come in (+nu, -nu) pairs
    return nu[::2]


def global_purity(state: GaussianState) -> float:
    """``Tr rho^2 = 1 / (2^n sqrt(det cov))``."""
    return float(1.0 / (2.0 ** state.n_modes * np.sqrt(np.linalg.det(state.cov))))


def marginal_purity(state: GaussianState, mode: int = 0) -> float:
    """Purity of one party's reduced state, ``1 / (2 sqrt(det cov_mode))``."""
    _two_mode(state)
    return global_purity(state.mode(mode))


def marginal_purity_closed_form(sigma_plus: float, sigma_minus: float) -> float:
    """Marginal purity of a pure displaced two-mode squeezed vacuum from its sum/difference variances."""
    return 2.0 * np.sqrt(sigma_plus * sigma_minus) / (sigma_plus + sigma_minus)


def partial_transpose(cov) -> np.ndarray:
    """Flip the sign of mode B's momentum row and column."""
    cov = np.array(cov, float)
    cov[3, :] *= -1
    cov[:, 3] *= -1
    return cov


def log_negativity(state: GaussianState) -> float:
    """Logarithmic negativity (base 2) of a two-mode state."""
    _two_mode(state)
    nu = symplectic_eigenvalues(partial_transpose(state.cov))
    return float(np.sum(np.maximum(0.0, -np.log2(2 * nu))))


def von_neumann_entropy(state: GaussianState) -> float:
    """Entropy in nats from the symplectic spectrum; pure modes contribute zero."""
    total = 0.0
    for nu in symplectic_eigenvalues(state.cov):
        if nu - 0.5 > EIG_TOL:
            total += (nu + 0.5) * np.log(nu + 0.5) - (nu - 0.5) * np.log(nu - 0.5)
    return float(total)


@dataclass(frozen=True)
class CorrelationSummary:
    sigma_plus: float
    sigma_minus: float
    var_p_sum: float
    var_p_diff: float
    V_X: np.ndarray
    V_P: np.ndarray
    means: tuple

    @property
    def epr_product(self) -> float:
        """``sigma_plus * sigma_minus``, a second entanglement witness."""
        return self.sigma_plus * self.sigma_minus


def correlations(state: GaussianState) -> CorrelationSummary:
    _two_mode(state)
    sp, sm = sigma_pm(state)
    return CorrelationSummary(
        sigma_plus=sp,
        sigma_minus=sm,
        var_p_sum=quad_variance(state, [0, 1, 0, 1]),
        var_p_diff=quad_variance(state, [0, 1, 0, -1]),
        V_X=state.cov[0::2, 0::2].copy(),
        V_P=state.cov[1::2, 1::2].copy(),
        means=tuple((float(state.mean[2 * m]), float(state.mean[2 * m + 1])) for m in range(2)),
    )
