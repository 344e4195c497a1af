"""
Gaussian states in the covariance-matrix formalism.

Conventions used throughout the package:

* quadratures ordered ``(x1, p1, x2, p2, ...)`` ("xpxp"),
* ``[X, P] = i`` (hbar = 1), so the vacuum has variance 1/2 in every quadrature,
* a squeezer with positive ``r`` maps ``x -> exp(-r) x`` and ``p -> exp(r) p``.

All operations are pure: they return new states and never touch their inputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

SCHEMA_VERSION = 1
VACUUM_VARIANCE = 0.5

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10


class PhysicalityError(ValueError):
    """Covariance matrix violates symmetry, positivity or the uncertainty relation."""


@lru_cache(maxsize=32)
def omega(n: int) -> np.ndarray:
    """Symplectic form for ``n`` modes in xpxp ordering (read-only, cached)."""
    om = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    om.setflags(write=False)
    return om


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of an ``n``-mode Gaussian state.

    Construction only checks shapes; call :meth:`validate` for the
    physicality checks (symmetry, positivity, uncertainty relation).
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _readonly(self.mean).reshape(-1)
        cov = _readonly(self.cov)
        if mean.size == 0 or mean.size % 2:
            raise ValueError(f"mean must have even, nonzero length, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def check_mode(self, mode: int) -> int:
        if not 0 <= mode < self.n_modes:
            raise IndexError(f"mode {mode} out of range for {self.n_modes}-mode state")
        return mode

    def validate(self, tol: float = PHYSICALITY_TOL) -> "GaussianState":
        """Raise :class:`PhysicalityError` unless the state is physical; return self."""
        cov = self.cov
        if not np.all(np.isfinite(cov)) or not np.all(np.isfinite(self.mean)):
            raise PhysicalityError("non-finite moments")
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(cov))):
            raise PhysicalityError("covariance matrix is not symmetric")
        sym = 0.5 * (cov + cov.T)
        if np.min(np.linalg.eigvalsh(sym)) <= 0:
            raise PhysicalityError("covariance matrix is not positive definite")
        nu = np.abs(np.linalg.eigvals(1j * omega(self.n_modes) @ sym))
        if np.min(nu) < VACUUM_VARIANCE - tol:
            raise PhysicalityError(
                f"uncertainty relation violated: symplectic eigenvalue {np.min(nu):.3g} < 1/2"
            )
        return self

    def mode(self, mode: int) -> "GaussianState":
        """Reduced single-mode state (partial trace over the other modes)."""
        self.check_mode(mode)
        sl = slice(2 * mode, 2 * mode + 2)
        return GaussianState(self.mean[sl], self.cov[sl, sl])

    def allclose(self, other: "GaussianState", atol: float = 1e-12) -> bool:
        return (
            self.n_modes == other.n_modes
            and np.allclose(self.mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0, atol=atol)
        )

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n_modes": self.n_modes,
            "ordering": "xpxp",
            "hbar": 1,
            "vacuum_variance": VACUUM_VARIANCE,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianState":
        if data.get("ordering", "xpxp") != "xpxp":
            raise ValueError(f"unsupported quadrature ordering {data['ordering']!r}")
        if data.get("hbar", 1) != 1 or data.get("vacuum_variance", VACUUM_VARIANCE) != VACUUM_VARIANCE:
            raise ValueError("only hbar=1 / vacuum variance 1/2 states are supported")
        state = cls(np.asarray(data["mean"], float), np.asarray(data["cov"], float))
        if "n_modes" in data and data["n_modes"] != state.n_modes:
            raise ValueError("n_modes field disagrees with the moment dimensions")
        return state.validate()

    def to_json(self, path=None, indent: int | None = 2) -> str:
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_json(cls, text_or_path) -> "GaussianState":
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            with open(text) as fh:
                text = fh.read()
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SymplecticOp:
    """Affine phase-space map ``r -> S r + d`` acting on all modes of a state."""

    S: np.ndarray
    d: np.ndarray = field(default=None)

    def __post_init__(self):
        S = _readonly(self.S)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise ValueError(f"S must be square with even dimension, got {S.shape}")
        d = np.zeros(S.shape[0]) if self.d is None else np.asarray(self.d, float).reshape(-1)
        if d.size != S.shape[0]:
            raise ValueError("displacement length does not match S")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "d", _readonly(d))

    @property
    def n_modes(self) -> int:
        return self.S.shape[0] // 2

    def symplectic_error(self) -> float:
        """Max-norm of ``S Ω Sᵀ − Ω``."""
        om = omega(self.n_modes)
        return float(np.max(np.abs(self.S @ om @ self.S.T - om)))

    def is_symplectic(self, tol: float = SYMPLECTIC_TOL) -> bool:
        return self.symplectic_error() <= tol

    def apply(self, state: GaussianState) -> GaussianState:
        if state.n_modes != self.n_modes:
            raise ValueError(f"{self.n_modes}-mode map applied to {state.n_modes}-mode state")
        return GaussianState(self.S @ state.mean + self.d, self.S @ state.cov @ self.S.T)

    def then(self, other: "SymplecticOp") -> "SymplecticOp":
        """Composite map: apply ``self`` first, then ``other``."""
        return SymplecticOp(other.S @ self.S, other.S @ self.d + other.d)


@dataclass(frozen=True)
class EprParams:
    """Displaced two-mode squeezed vacuum: ``sigma_plus = e^{2 r1}``, ``sigma_minus = e^{-2 r2}``."""

    r1: float
    r2: float
    x0: float = 0.0

    @property
    def sigma_plus(self) -> float:
        return float(np.exp(2 * self.r1))

    @property
    def sigma_minus(self) -> float:
        return float(np.exp(-2 * self.r2))


@dataclass(frozen=True)
class SingleModeParams:
    """Displaced squeezed vacuum with position variance ``e^{-2r}/2``."""

    r: float
    x0: float = 0.0

    @property
    def sigma_x(self) -> float:
        return float(np.exp(-2 * self.r) / 2)


# -- map builders ------------------------------------------------------------

def embed(local: np.ndarray, modes: Sequence[int], n: int) -> np.ndarray:
    """Place a ``2k x 2k`` local matrix acting on ``modes`` into the ``2n`` identity."""
    idx = np.ravel([[2 * m, 2 * m + 1] for m in modes])
    if len(set(modes)) != len(modes):
        raise ValueError(f"repeated mode in {list(modes)}")
    for m in modes:
        if not 0 <= m < n:
            raise IndexError(f"mode {m} out of range for {n}-mode state")
    S = np.eye(2 * n)
    S[np.ix_(idx, idx)] = local
    return S


def displacement_op(n: int, mode: int, dx: float, dp: float) -> SymplecticOp:
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n}-mode state")
    d = np.zeros(2 * n)
    d[2 * mode : 2 * mode + 2] = dx, dp
    return SymplecticOp(np.eye(2 * n), d)


def squeeze_op(n: int, mode: int, r: float) -> SymplecticOp:
    return SymplecticOp(embed(np.diag([np.exp(-r), np.exp(r)]), [mode], n))


def rotation_op(n: int, mode: int, phi: float) -> SymplecticOp:
    """Phase rotation ``x -> cos(phi) x + sin(phi) p``, ``p -> -sin(phi) x + cos(phi) p``."""
    c, s = np.cos(phi), np.sin(phi)
    return SymplecticOp(embed(np.array([[c, s], [-s, c]]), [mode], n))


def beamsplitter_op(n: int, i: int, j: int, theta: float) -> SymplecticOp:
    """``X_i -> cos X_i + sin X_j``, ``X_j -> sin X_i - cos X_j``, likewise for P."""
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    c, s = np.cos(theta), np.sin(theta)
    return SymplecticOp(embed(np.kron(np.array([[c, s], [s, -c]]), np.eye(2)), [i, j], n))


def sum_gate_op(n: int, source: int, target: int) -> SymplecticOp:
    """QND coupling ``X_T -> X_T - X_S``, ``P_S -> P_S + P_T``.

    The position action writes the source position onto the target; the
    momentum back-action on the source is the only completion that keeps
    the map symplectic.
    """
    if source == target:
        raise ValueError("SUM gate needs distinct source and target modes")
    local = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],  # x_S
            [0.0, 1.0, 0.0, 1.0],  # p_S + p_T
            [-1.0, 0.0, 1.0, 0.0],  # x_T - x_S
            [0.0, 0.0, 0.0, 1.0],  # p_T
        ]
    )
    return SymplecticOp(embed(local, [source, target], n))


# -- states and gates --------------------------------------------------------

def vacuum(n: int) -> GaussianState:
    if n < 1:
        raise ValueError(f"mode count must be >= 1, got {n}")
    return GaussianState(np.zeros(2 * n), VACUUM_VARIANCE * np.eye(2 * n))


def tensor(*states: GaussianState) -> GaussianState:
    """Product state, modes concatenated in argument order."""
    mean = np.concatenate([s.mean for s in states])
    cov = np.zeros((mean.size, mean.size))
    k = 0
    for s in states:
        m = s.mean.size
        cov[k : k + m, k : k + m] = s.cov
        k += m
    return GaussianState(mean, cov)


def displace(state: GaussianState, mode: int, dx: float, dp: float = 0.0) -> GaussianState:
    return displacement_op(state.n_modes, mode, dx, dp).apply(state)


def squeeze(state: GaussianState, mode: int, r: float) -> GaussianState:
    return squeeze_op(state.n_modes, mode, r).apply(state)


def rotate(state: GaussianState, mode: int, phi: float) -> GaussianState:
    return rotation_op(state.n_modes, mode, phi).apply(state)


def beamsplit(state: GaussianState, i: int, j: int, theta: float = np.pi / 4) -> GaussianState:
    return beamsplitter_op(state.n_modes, i, j, theta).apply(state)


def sum_gate(state: GaussianState, source: int, target: int) -> GaussianState:
    return sum_gate_op(state.n_modes, source, target).apply(state)


def prepare_single(params: SingleModeParams) -> GaussianState:
    r = params.r
    return GaussianState([params.x0, 0.0], np.diag([np.exp(-2 * r) / 2, np.exp(2 * r) / 2]))


def prepare_epr(params: EprParams) -> GaussianState:
    """Displaced two-mode squeezed vacuum, built directly from the sum/difference variances.

    ``Var(X_A ± X_B) = sigma_±`` and ``Var(P_A ± P_B) = 1/sigma_±``; only
    ``X_A`` carries the displacement ``x0``.
    """
    sp, sm = params.sigma_plus, params.sigma_minus
    vx = np.array([[sp + sm, sp - sm], [sp - sm, sp + sm]]) / 4
    vp = np.array([[1 / sp + 1 / sm, 1 / sp - 1 / sm], [1 / sp - 1 / sm, 1 / sp + 1 / sm]]) / 4
    cov = np.zeros((4, 4))
    cov[0::2, 0::2] = vx
    cov[1::2, 1::2] = vp
    return GaussianState([params.x0, 0.0, 0.0, 0.0], cov)


def prepare_epr_circuit(params: EprParams) -> GaussianState:
    """Same state via optics: p-squeezed and x-squeezed vacua on a balanced beamsplitter."""
    state = vacuum(2)
    state = squeeze(state, 0, -params.r1)
    state = squeeze(state, 1, params.r2)
    state = beamsplit(state, 0, 1, np.pi / 4)
    return displace(state, 0, params.x0, 0.0)


def quadrature_vector(n: int, coeffs: dict) -> np.ndarray:
    """Weight vector from ``{(mode, "x"|"p"): weight}``."""
    w = np.zeros(2 * n)
    for (mode, quad), c in coeffs.items():
        if not 0 <= mode < n:
            raise IndexError(f"mode {mode} out of range for {n}-mode state")
        w[2 * mode + {"x": 0, "p": 1}[quad.lower()]] += c
    return w


def quad_variance(state: GaussianState, w) -> float:
    w = np.asarray(w, float)
    if w.shape != state.mean.shape:
        raise ValueError(f"weight vector length {w.size} != {state.mean.size}")
    return float(w @ state.cov @ w)


def quad_mean(state: GaussianState, w) -> float:
    w = np.asarray(w, float)
    if w.shape != state.mean.shape:
        raise ValueError(f"weight vector length {w.size} != {state.mean.size}")
    return float(w @ state.mean)
