"""
Brute-force phase-space engine.

Marginal distributions and Wigner functions are sampled on uniform grids and
the protocol's integral transforms are evaluated by direct quadrature.  Nothing
here uses covariance-matrix algebra beyond sampling the input densities, so it
serves as an independent check on the symplectic engine.

Integral transforms use plain Riemann sums on the uniform grid.  Every input
is sampled over at least +-6 standard deviations, so the integrand vanishes at
the truncation points and the sum coincides with the trapezoid rule there.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import fftconvolve

from .gauss_core import GaussianState

DEFAULT_POINTS_1D = 1024
DEFAULT_POINTS_2D = 256
DEFAULT_N_SIGMA = 8.0
MIN_N_SIGMA = 6.0
MAX_2D_POINTS = 512 * 512
MAX_WIGNER_POINTS = 128 * 128
NORM_TOL = 1e-3
MIN_STEPS_PER_SIGMA = 4.0


class GridError(ValueError):
    """Grid too narrow, too large, or incompatible with another grid."""


@dataclass(frozen=True)
class GridDistribution:
    """Density sampled on a uniform tensor grid (1 or 2 dimensions)."""

    axes: tuple
    values: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        axes = tuple(np.asarray(a, float) for a in self.axes)
        values = np.asarray(self.values, float)
        if values.shape != tuple(a.size for a in axes):
            raise GridError(f"values shape {values.shape} does not match axes")
        for a in axes:
            if a.size < 2 or not np.allclose(np.diff(a), a[1] - a[0], rtol=1e-9, atol=0):
                raise GridError("axes must be uniform with at least two points")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"q{i}" for i in range(len(axes))))

    @property
    def dims(self) -> int:
        return len(self.axes)

    @property
    def steps(self) -> tuple:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def norm(self) -> float:
        v = self.values
        for ax in reversed(self.axes):
            v = trapezoid(v, ax, axis=-1)
        return float(v)

    def normalized(self):
        return type(self)(self.axes, self.values / self.norm(), self.labels)

    def marginal(self, keep: int) -> "GridDistribution":
        """Integrate out every axis except ``keep``."""
        v = self.values
        for ax in reversed(range(self.dims)):
            if ax != keep:
                v = trapezoid(v, self.axes[ax], axis=ax)
        return GridDistribution((self.axes[keep],), v, (self.labels[keep],))

    def to_csv(self, path=None) -> str:
        """Header lines ``# axis <label> <lo> <hi> <n>`` followed by values (row-major)."""
        buf = io.StringIO()
        buf.write(f"# kind {type(self).__name__}\n")
        for label, ax in zip(self.labels, self.axes):
            buf.write(f"# axis {label} {float(ax[0])!r} {float(ax[-1])!r} {ax.size}\n")
        np.savetxt(buf, np.atleast_2d(self.values), delimiter=",", fmt="%.17g")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @staticmethod
    def from_csv(text_or_path) -> "GridDistribution":
        text = str(text_or_path)
        if not text.startswith("#"):
            with open(text) as fh:
                text = fh.read()
        kind, axes, labels, rows = "GridDistribution", [], [], []
        for line in text.splitlines():
            if line.startswith("# kind"):
                kind = line.split()[2]
            elif line.startswith("# axis"):
                _, _, label, lo, hi, n = line.split()
                labels.append(label)
                axes.append(np.linspace(float(lo), float(hi), int(n)))
            elif line.strip():
                rows.append([float(v) for v in line.split(",")])
        values = np.array(rows).reshape([a.size for a in axes])
        cls = GridField if kind == "GridField" else GridDistribution
        return cls(tuple(axes), values, tuple(labels))


class GridField(GridDistribution):
    """Wigner function of one mode on an ``(x, p)`` grid; values may be signed in general."""


def _quad_index(q) -> int:
    if isinstance(q, (int, np.integer)):
        return int(q)
    mode, quad = q
    return 2 * int(mode) + {"x": 0, "p": 1}[quad.lower()]


def gaussian_to_grid(
    state: GaussianState,
    quads: Sequence,
    points: int | Sequence[int] | None = None,
    n_sigma: float = DEFAULT_N_SIGMA,
    ranges: Sequence[tuple[float, float]] | None = None,
    field: bool = False,
) -> GridDistribution:
    """Sample the exact Gaussian density of the selected quadratures.

    Parameters
    ----------
    state : GaussianState
    quads : sequence
        One or two quadratures, each a flat index into the xpxp vector or a
        ``(mode, "x"|"p")`` pair.
    points : int or sequence of int
        Points per axis. Defaults to 1024 in 1D and 256 per axis in 2D.
    n_sigma : float
        Half-width of each default axis in marginal standard deviations.
    ranges : sequence of (lo, hi), optional
        Explicit axis ranges; each must reach 6 standard deviations from the mean.
    field : bool
        Return a :class:`GridField` (phase-space Wigner function).

    Raises
    ------
    GridError
        If an axis covers less than 6 standard deviations on either side.
    """
    idx = [_quad_index(q) for q in quads]
    labels = tuple(f"{'xp'[i % 2]}{i // 2}" for i in idx)
    return density_grid(
        state.mean[idx], state.cov[np.ix_(idx, idx)], points, n_sigma, ranges, labels, field
    )


def density_grid(mean, cov, points=None, n_sigma=DEFAULT_N_SIGMA, ranges=None, labels=(), field=False):
    """Sample ``Normal(mean, cov)`` in 1 or 2 dimensions; see :func:`gaussian_to_grid`."""
    mu = np.atleast_1d(np.asarray(mean, float))
    cov = np.atleast_2d(np.asarray(cov, float))
    dim = mu.size
    if dim not in (1, 2) or cov.shape != (dim, dim):
        raise GridError("only 1D and 2D grids are supported")
    if points is None:
        points = DEFAULT_POINTS_1D if dim == 1 else DEFAULT_POINTS_2D
    points = [int(points)] * dim if np.isscalar(points) else [int(p) for p in points]
    if dim == 2 and points[0] * points[1] > MAX_2D_POINTS:
        raise GridError(f"2D grid of {points[0]}x{points[1]} exceeds {MAX_2D_POINTS} points")
    std = np.sqrt(np.diag(cov))
    if ranges is None:
        if n_sigma < MIN_N_SIGMA:
            raise GridError(f"n_sigma={n_sigma} below the required {MIN_N_SIGMA}")
        ranges = [(m - n_sigma * s, m + n_sigma * s) for m, s in zip(mu, std)]
    axes = []
    for (lo, hi), m, s, n in zip(ranges, mu, std, points):
        if m - lo < MIN_N_SIGMA * s * (1 - 1e-12) or hi - m < MIN_N_SIGMA * s * (1 - 1e-12):
            raise GridError(
                f"range [{lo:.4g}, {hi:.4g}] covers less than +-{MIN_N_SIGMA} sigma around {m:.4g} (sigma={s:.4g})"
            )
        axes.append(np.linspace(lo, hi, n))
    mesh = np.meshgrid(*axes, indexing="ij")
    d = np.stack([g - m for g, m in zip(mesh, mu)], axis=-1)
    expo = -0.5 * np.einsum("...i,ij,...j->...", d, np.linalg.inv(cov), d)
    values = np.exp(expo) / np.sqrt((2 * np.pi) ** dim * np.linalg.det(cov))
    cls = GridField if field else GridDistribution
    return cls(tuple(axes), values, tuple(labels)).normalized()


def check_resolution(d: GridDistribution, min_steps: float = MIN_STEPS_PER_SIGMA) -> None:
    """Raise :class:`GridError` unless every axis spans each marginal standard deviation
    with at least ``min_steps`` grid steps."""
    _, cov = grid_moments(d)
    for k, (h, label) in enumerate(zip(d.steps, d.labels)):
        ratio = np.sqrt(cov[k, k]) / h
        if ratio < min_steps:
            raise GridError(
                f"grid too coarse on axis {label}: one standard deviation spans {ratio:.2f} steps, "
                f"need >= {min_steps}"
            )


def wigner_grid(state: GaussianState, mode: int = 0, points=128, n_sigma=DEFAULT_N_SIGMA, ranges=None):
    """Wigner function of one mode (a Gaussian density on phase space)."""
    return gaussian_to_grid(state, [(mode, "x"), (mode, "p")], points, n_sigma, ranges, field=True)


def grid_moments(d: GridDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid-rule mean vector and covariance matrix."""
    norm = d.norm()
    if abs(norm - 1) > NORM_TOL:
        raise GridError(f"distribution norm {norm:.6g} deviates from 1 by more than {NORM_TOL}")
    mesh = np.meshgrid(*d.axes, indexing="ij")

    def integrate(v):
        for ax in reversed(d.axes):
            v = trapezoid(v, ax, axis=-1)
        return float(v) / norm

    mean = np.array([integrate(g * d.values) for g in mesh])
    cov = np.empty((d.dims, d.dims))
    for i in range(d.dims):
        for j in range(i, d.dims):
            cov[i, j] = cov[j, i] = integrate((mesh[i] - mean[i]) * (mesh[j] - mean[j]) * d.values)
    return mean, cov


# -- quadrature kernels --------------------------------------------------------

def _same_grid(a: GridDistribution, b: GridDistribution, axes=None) -> None:
    axes = range(a.dims) if axes is None else axes
    if a.dims != b.dims:
        raise GridError(f"grid dimensions differ: {a.dims} vs {b.dims}")
    for k in axes:
        if a.axes[k].size != b.axes[k].size or not np.allclose(a.axes[k], b.axes[k], rtol=0, atol=1e-12):
            raise GridError(f"axis {k} differs between grids")


def _same_step(a: GridDistribution, b: GridDistribution, axes=None) -> None:
    axes = range(a.dims) if axes is None else axes
    if a.dims != b.dims:
        raise GridError(f"grid dimensions differ: {a.dims} vs {b.dims}")
    for k in axes:
        ha, hb = a.steps[k], b.steps[k]
        if abs(ha - hb) > 1e-12 * max(abs(ha), 1.0):
            raise GridError(f"axis {k} steps differ ({ha} vs {hb})")


def _antidiagonal_sums(G: np.ndarray) -> np.ndarray:
    """``out[s] = sum_{m + n = s} G[m, n]`` for ``s = 0 .. M + N - 2``."""
    m, n = G.shape
    s = np.add.outer(np.arange(m), np.arange(n))
    return np.bincount(s.ravel(), weights=G.ravel(), minlength=m + n - 1)


def _midpoint_pairs(i: int, n: int) -> np.ndarray:
    """Offsets ``k`` with both ``i - k`` and ``i + k`` inside ``[0, n)``."""
    r = min(i, n - 1 - i)
    return np.arange(-r, r + 1)


def _conv_axis(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    h = a[1] - a[0]
    n = a.size + b.size - 1
    return a[0] + b[0] + h * np.arange(n)


def concentrate_position(pS: GridDistribution, pT: GridDistribution, normalize: bool = True) -> GridDistribution:
    """Position (joint-position in 2D) distribution of the concentrated source.

    1D: ``p~(x) = ∫ pS(x - X/2) pT(x + X/2) dX``.
    2D: the same with ``(X, Y)`` integrated jointly over both parties' outcomes.

    The outcome integration step is twice the grid step so ``x -+ X/2`` lands
    on grid nodes; no interpolation is involved.
    """
    _same_grid(pS, pT)
    S, T = pS.values, pT.values
    if pS.dims == 1:
        n = S.size
        h = pS.steps[0]
        out = np.empty(n)
        for i in range(n):
            k = _midpoint_pairs(i, n)
            out[i] = np.sum(S[i - k] * T[i + k]) * 2 * h
    else:
        n, m = S.shape
        ha, hb = pS.steps
        out = np.empty((n, m))
        for i in range(n):
            k = _midpoint_pairs(i, n)
            # G[a, b] = sum_k S[i-k, a] T[i+k, b]; the Y integral pairs a + b = 2j
            G = S[i - k].T @ T[i + k]
            out[i] = _antidiagonal_sums(G)[0::2] * 4 * ha * hb
    res = GridDistribution(pS.axes, out, pS.labels)
    return res.normalized() if normalize else res


def convolve_momentum(
    pS: GridDistribution, pT: GridDistribution, method: str = "direct", normalize: bool = True
) -> GridDistribution:
    """``p~(p) = ∫ pS(p') pT(p - p') dp'`` (1D or 2D) on the full output axis.

    ``method="fft"`` is a fast path checked against the direct sum.
    """
    _same_step(pS, pT)
    S, T = pS.values, pT.values
    cell = float(np.prod(pS.steps))
    if method == "fft":
        out = fftconvolve(S, T, mode="full") * cell
    elif method != "direct":
        raise ValueError(f"unknown method {method!r}")
    elif pS.dims == 1:
        out = np.convolve(S, T) * cell
    else:
        n = S.shape[0]
        rows = n + T.shape[0] - 1
        out = np.empty((rows, S.shape[1] + T.shape[1] - 1))
        for a in range(rows):
            k = np.arange(max(0, a - T.shape[0] + 1), min(a, n - 1) + 1)
            out[a] = _antidiagonal_sums(S[k].T @ T[a - k]) * cell
    axes = tuple(_conv_axis(x, y) for x, y in zip(pS.axes, pT.axes))
    res = GridDistribution(axes, out, pS.labels)
    return res.normalized() if normalize else res


def protocol_marginals_single(pS, pT, method: str = "direct", normalize: bool = True):
    """Output ``(x, p)`` marginals of the concentrated single-mode source.

    ``pS`` and ``pT`` are ``(x_marginal, p_marginal)`` pairs of 1D grids.
    """
    (sx, sp), (tx, tp) = pS, pT
    if sx.dims != 1 or sp.dims != 1:
        raise GridError("single-mode marginals must be 1D")
    return concentrate_position(sx, tx, normalize), convolve_momentum(sp, tp, method, normalize)


def protocol_marginals_two_mode(pS, pT, method: str = "direct", normalize: bool = True):
    """Joint position and joint momentum distributions of the concentrated two-mode source.

    ``pS`` and ``pT`` are ``(joint_x, joint_p)`` pairs of 2D grids.
    """
    (sx, sp), (tx, tp) = pS, pT
    if sx.dims != 2 or sp.dims != 2:
        raise GridError("two-mode joint distributions must be 2D")
    for g in (sx, sp, tx, tp):
        if g.values.size > MAX_2D_POINTS:
            raise GridError(f"grid of {g.values.size} points exceeds guard {MAX_2D_POINTS}")
    return concentrate_position(sx, tx, normalize), convolve_momentum(sp, tp, method, normalize)


def full_wigner_transform_single(WS: GridField, WT: GridField, normalize: bool = True) -> GridField:
    """Output Wigner function of the concentrated source mode.

    ``W~(x, p) = ∫∫ WS(x - X/2, p') WT(x + X/2, p - p') dp' dX`` evaluated point by
    point. The output keeps the input position axis and spans the full
    momentum-convolution axis.
    """
    _same_grid(WS, WT, axes=[0])
    _same_step(WS, WT, axes=[1])
    for W in (WS, WT):
        if W.values.size > MAX_WIGNER_POINTS:
            raise GridError(f"Wigner grid of {W.values.size} points exceeds guard {MAX_WIGNER_POINTS}")
    S, T = WS.values, WT.values
    hx, hp = WS.steps
    nx = S.shape[0]
    out = np.empty((nx, S.shape[1] + T.shape[1] - 1))
    for i in range(nx):
        k = _midpoint_pairs(i, nx)
        out[i] = _antidiagonal_sums(S[i - k].T @ T[i + k]) * 2 * hx * hp
    axes = (WS.axes[0], _conv_axis(WS.axes[1], WT.axes[1]))
    res = GridField(axes, out, WS.labels)
    return res.normalized() if normalize else res


def l1_distance(a: GridDistribution, b: GridDistribution) -> float:
    _same_grid(a, b)
    v = np.abs(a.values - b.values)
    for ax in reversed(a.axes):
        v = trapezoid(v, ax, axis=-1)
    return float(v)
