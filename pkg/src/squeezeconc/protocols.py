"""
Two-copy squeezing concentration and its variants.

Each party couples its source mode to its target mode with a SUM gate,
homodynes the target and displaces the source by ``gain * outcome``.  With
two identical copies and ``gain = 1/2`` the source leaves with half the
position variance, twice the momentum variance and an unchanged mean,
whatever the outcome was.
"""
from __future__ import annotations

import json
import math
from functools import lru_cache
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import metrics
from .gauss_core import (
    EprParams,
    GaussianState,
    SingleModeParams,
    SymplecticOp,
    displacement_op,
    prepare_epr,
    prepare_single,
    rotation_op,
    squeeze_op,
    sum_gate_op,
    tensor,
)
from .measure import HomodyneRecord, as_rng, homodyne

SCHEMA_VERSION = 1
DEFAULT_GAIN = 0.5
BASELINE_SQUEEZE = math.log(math.sqrt(2.0))

_QUAD = {"X": 0, "P": 1}


# -- reports -------------------------------------------------------------------

@dataclass(frozen=True)
class StateSummary:
    n_modes: int
    means: list
    var_x: list
    var_p: list
    global_purity: float
    marginal_purity: float
    entropy: float
    sigma_plus: float | None = None
    sigma_minus: float | None = None
    log_negativity: float | None = None
    min_symplectic_eigenvalue: float = 0.5


def summarize(state: GaussianState) -> StateSummary:
    n = state.n_modes
    diag = np.diag(state.cov)
    extra = {}
    if n == 2:
        sp, sm = metrics.sigma_pm(state)
        extra = dict(
            sigma_plus=sp,
            sigma_minus=sm,
            log_negativity=metrics.log_negativity(state),
            marginal_purity=metrics.marginal_purity(state, 0),
        )
    purity = metrics.global_purity(state)
    return StateSummary(
        n_modes=n,
        means=[[float(state.mean[2 * m]), float(state.mean[2 * m + 1])] for m in range(n)],
        var_x=[float(v) for v in diag[0::2]],
        var_p=[float(v) for v in diag[1::2]],
        global_purity=purity,
        marginal_purity=extra.pop("marginal_purity", purity),
        entropy=metrics.von_neumann_entropy(state),
        min_symplectic_eigenvalue=float(metrics.symplectic_eigenvalues(state.cov)[0]),
        **extra,
    )


@dataclass
class ProtocolReport:
    protocol: str
    quadrature: str
    copies_used: int
    gains: list
    input: StateSummary
    output: StateSummary
    trace: list = field(default_factory=list)
    mean_preservation_error: float = 0.0
    symplectic_error: float = 0.0

    def checks(self) -> dict:
        """Self-checks every run must satisfy: physical output, symplectic maps, sane fields."""
        out = self.output
        return {
            "copies_used": self.copies_used >= 1,
            "variances_positive": min(out.var_x + out.var_p) > 0,
            "purity_in_range": 0 < out.marginal_purity <= 1 + 1e-10,
            "uncertainty_relation": out.min_symplectic_eigenvalue >= 0.5 - 1e-10,
            "maps_symplectic": self.symplectic_error <= 1e-10,
        }

    def ok(self) -> bool:
        return all(self.checks().values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trace"] = [r.to_dict() if isinstance(r, HomodyneRecord) else r for r in self.trace]
        return {"schema_version": SCHEMA_VERSION, **d, "checks": self.checks()}

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class ConcentrateConfig:
    n_copies: int = 2
    pairing: str | None = None
    quadrature: str = "X"
    forced_outcomes: Sequence[float] | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.n_copies < 2:
            raise ValueError(f"n_copies must be >= 2, got {self.n_copies}")
        if self.pairing is None:
            pow2 = self.n_copies & (self.n_copies - 1) == 0
            object.__setattr__(self, "pairing", "binary_tree" if pow2 else "sequential_optimal_gain")
        if self.pairing not in ("binary_tree", "sequential_optimal_gain"):
            raise ValueError(f"unknown pairing {self.pairing!r}")
        if self.pairing == "binary_tree" and self.n_copies & (self.n_copies - 1):
            raise ValueError(f"binary_tree pairing needs a power of two copies, got {self.n_copies}")
        if self.quadrature.upper() not in _QUAD:
            raise ValueError(f"quadrature must be 'X' or 'P', got {self.quadrature!r}")
        object.__setattr__(self, "quadrature", self.quadrature.upper())
        if self.forced_outcomes is not None and len(self.forced_outcomes) != self.n_copies - 1:
            raise ValueError("need exactly n_copies - 1 forced outcomes")


# -- protocol core -------------------------------------------------------------

@lru_cache(maxsize=64)
def coupling_op(n: int, source: int, target: int, quadrature: str = "X") -> SymplecticOp:
    """SUM gate for ``X``; for ``P`` the same gate conjugated by quarter-turn phase rotations.

    The ``P`` variant maps ``P_T -> P_T - P_S`` and ``X_S -> X_S + X_T``.
    """
    gate = sum_gate_op(n, source, target)
    if quadrature == "X":
        return gate
    into = rotation_op(n, source, np.pi / 2).then(rotation_op(n, target, np.pi / 2))
    back = rotation_op(n, source, -np.pi / 2).then(rotation_op(n, target, -np.pi / 2))
    return into.then(gate).then(back)


def _correction(n: int, mode: int, quadrature: str, shift: float) -> SymplecticOp:
    dx, dp = (shift, 0.0) if quadrature == "X" else (0.0, shift)
    return displacement_op(n, mode, dx, dp)


def _check_gain(gain: float) -> float:
    gain = float(gain)
    if not np.isfinite(gain):
        raise ValueError(f"gain must be finite, got {gain}")
    return gain


def _pair_step(source, target, gain, forced, rng, quadrature, check=True):
    """One local round: couple, homodyne the target, correct the source."""
    op = coupling_op(2, 0, 1, quadrature)
    joint = op.apply(tensor(source, target))
    record, post = homodyne(joint, 1, quadrature, forced, rng)
    fix = _correction(1, 0, quadrature, gain * record.outcome)
    err = max(op.symplectic_error(), fix.symplectic_error()) if check else 0.0
    return fix.apply(post), record, err


def _mean_error(before: GaussianState, after: GaussianState, quadrature: str) -> float:
    q = _QUAD[quadrature]
    return float(np.max(np.abs(after.mean[q::2] - before.mean[q::2])))


def _norm_quad(quadrature: str) -> str:
    q = str(quadrature).upper()
    if q not in _QUAD:
        raise ValueError(f"quadrature must be 'X' or 'P', got {quadrature!r}")
    return q


def concentrate_single(
    source: GaussianState,
    target: GaussianState,
    gain: float = DEFAULT_GAIN,
    forced: float | None = None,
    rng=None,
    quadrature: str = "X",
) -> tuple[GaussianState, ProtocolReport]:
    """Two-copy concentration of a single-mode state.

    Parameters
    ----------
    source, target : GaussianState
        Single-mode copies. The source is kept, the target is measured.
    gain : float
        Correction ``x -> x + gain * outcome``; 1/2 for identical copies.
    forced : float, optional
        Use this homodyne outcome instead of sampling one.
    rng : Generator or seed, optional
        Source of randomness for the sampled outcome.
    quadrature : {"X", "P"}
        Quadrature to concentrate.
    """
    if source.n_modes != 1 or target.n_modes != 1:
        raise ValueError("concentrate_single expects single-mode source and target")
    quadrature = _norm_quad(quadrature)
    out, record, err = _pair_step(source, target, _check_gain(gain), forced, rng, quadrature)
    report = ProtocolReport(
        protocol="concentrate_single",
        quadrature=quadrature,
        copies_used=2,
        gains=[float(gain)],
        input=summarize(source),
        output=summarize(out),
        trace=[record],
        mean_preservation_error=_mean_error(source, out, quadrature),
        symplectic_error=err,
    )
    return out, report


def _two_mode_step(source, target, gain, forced, rng, quadrature, check=True):
    # modes: 0 = S_A, 1 = S_B, 2 = T_A, 3 = T_B; each party acts only on its own pair
    forced = (None, None) if forced is None else tuple(forced)
    if len(forced) != 2:
        raise ValueError("forced outcomes for the two-mode protocol must be a pair")
    op = _two_party_coupling(quadrature)
    state = op.apply(tensor(source, target))
    rec_a, state = homodyne(state, 2, quadrature, forced[0], rng)
    rec_b, state = homodyne(state, 2, quadrature, forced[1], rng)
    fix = _correction(2, 0, quadrature, gain * rec_a.outcome).then(
        _correction(2, 1, quadrature, gain * rec_b.outcome)
    )
    err = max(op.symplectic_error(), fix.symplectic_error()) if check else 0.0
    return fix.apply(state), [rec_a, rec_b], err


@lru_cache(maxsize=4)
def _two_party_coupling(quadrature):
    return coupling_op(4, 0, 2, quadrature).then(coupling_op(4, 1, 3, quadrature))


def concentrate_two_mode(
    source: GaussianState,
    target: GaussianState,
    forced: Sequence[float] | None = None,
    rng=None,
    gain: float = DEFAULT_GAIN,
    quadrature: str = "X",
) -> tuple[GaussianState, ProtocolReport]:
    """Both parties run the two-copy round on their halves of two shared two-mode copies.

    Alice holds mode 0 of each copy, Bob mode 1. ``forced`` is the pair
    ``(outcome_A, outcome_B)`` of target homodyne results.
    """
    if source.n_modes != 2 or target.n_modes != 2:
        raise ValueError(
            f"two-mode protocol needs two-mode copies, got {source.n_modes} and {target.n_modes}"
        )
    quadrature = _norm_quad(quadrature)
    out, trace, err = _two_mode_step(source, target, _check_gain(gain), forced, rng, quadrature)
    report = ProtocolReport(
        protocol="concentrate_two_mode",
        quadrature=quadrature,
        copies_used=2,
        gains=[float(gain), float(gain)],
        input=summarize(source),
        output=summarize(out),
        trace=trace,
        mean_preservation_error=_mean_error(source, out, quadrature),
        symplectic_error=err,
    )
    return out, report


def concentrate_n(
    make_copy: Callable[[], GaussianState],
    config: ConcentrateConfig,
    rng=None,
) -> tuple[GaussianState, ProtocolReport]:
    """Concentrate ``config.n_copies`` fresh single-mode copies into one.

    ``binary_tree`` pairs equal states round by round with gain 1/2 and needs
    a power of two. ``sequential_optimal_gain`` folds copies into the running
    source one at a time with gain ``s / (s + t)`` (``s``, ``t`` the source and
    fresh-copy variances), which reaches ``1/N`` of the variance for any N.
    """
    q = config.quadrature
    k = _QUAD[q]
    rng = as_rng(config.seed if rng is None else rng)
    forced = list(config.forced_outcomes) if config.forced_outcomes is not None else None
    trace, gains, err = [], [], 0.0

    def step(s, t, g):
        nonlocal err
        f = forced.pop(0) if forced else None
        out, rec, e = _pair_step(s, t, g, f, rng, q)
        trace.append(rec)
        gains.append(float(g))
        err = max(err, e)
        return out

    first = make_copy()
    if first.n_modes != 1:
        raise ValueError("concentrate_n expects a single-mode copy factory")
    if config.pairing == "binary_tree":
        layer = [first] + [make_copy() for _ in range(config.n_copies - 1)]
        while len(layer) > 1:
            layer = [step(layer[i], layer[i + 1], DEFAULT_GAIN) for i in range(0, len(layer), 2)]
        out = layer[0]
    else:
        out = first
        for _ in range(config.n_copies - 1):
            fresh = make_copy()
            s, t = out.cov[k, k], fresh.cov[k, k]
            out = step(out, fresh, s / (s + t))
    report = ProtocolReport(
        protocol=f"concentrate_n[{config.pairing}]",
        quadrature=q,
        copies_used=config.n_copies,
        gains=gains,
        input=summarize(first),
        output=summarize(out),
        trace=trace,
        mean_preservation_error=_mean_error(first, out, q),
        symplectic_error=err,
    )
    return out, report


def single_copy_squeeze_baseline(state: GaussianState) -> tuple[GaussianState, ProtocolReport]:
    """Squeeze every mode by ``x -> x / sqrt(2)``: same covariance as the two-copy protocol
    but the mean is scaled too, so an unknown displacement is lost."""
    out, err = state, 0.0
    for m in range(state.n_modes):
        op = squeeze_op(state.n_modes, m, BASELINE_SQUEEZE)
        out = op.apply(out)
        err = max(err, op.symplectic_error())
    report = ProtocolReport(
        protocol="single_copy_squeeze_baseline",
        quadrature="X",
        copies_used=1,
        gains=[],
        input=summarize(state),
        output=summarize(out),
        mean_preservation_error=_mean_error(state, out, "X"),
        symplectic_error=err,
    )
    return out, report


# -- Monte Carlo ---------------------------------------------------------------

@dataclass(frozen=True)
class ProtocolSpec:
    """What a Monte Carlo trial runs: ``kind`` is ``"single"`` or ``"two_mode"``."""

    kind: str = "single"
    r: float = 0.0
    r1: float = 0.0
    r2: float = 0.0
    gain: float = DEFAULT_GAIN
    quadrature: str = "X"

    def __post_init__(self):
        if self.kind not in ("single", "two_mode"):
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        object.__setattr__(self, "quadrature", _norm_quad(self.quadrature))

    def copy(self, x0: float) -> GaussianState:
        if self.kind == "single":
            return prepare_single(SingleModeParams(self.r, x0))
        return prepare_epr(EprParams(self.r1, self.r2, x0))


@dataclass
class MonteCarloStats:
    spec: ProtocolSpec
    n_trials: int
    seed: int
    x0: object
    mean_error: float
    mean_error_se: float
    empirical_var: float
    empirical_var_se: float
    analytic_var: float
    analytic_var_spread: float
    analytic_mean_error_max: float
    outcome_mean: float
    outcome_var: float
    outcome_x0_corr: float
    outcome_x0_corr_se: float
    x0s: np.ndarray = field(repr=False, default=None)
    outcomes: np.ndarray = field(repr=False, default=None)
    readouts: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("x0s", "outcomes", "readouts")}
        d["x0"] = list(self.x0) if isinstance(self.x0, tuple) else self.x0
        return {"schema_version": SCHEMA_VERSION, **d}


def _trial(spec: ProtocolSpec, x0_dist, seed: int, index: int):
    rng = np.random.default_rng([seed, index])
    if isinstance(x0_dist, tuple):
        x0 = float(rng.uniform(*x0_dist))
    else:
        x0 = float(x0_dist)
    k = _QUAD[spec.quadrature]
    if spec.kind == "single":
        out, rec, _ = _pair_step(spec.copy(x0), spec.copy(x0), spec.gain, None, rng, spec.quadrature, check=False)
        outcome = rec.outcome
    else:
        out, recs, _ = _two_mode_step(spec.copy(x0), spec.copy(x0), spec.gain, None, rng, spec.quadrature, check=False)
        outcome = recs[0].outcome
    mu, var = out.mean[k], out.cov[k, k]
    # final ideal readout of the concentrated quadrature on mode 0
    readout = float(rng.normal(mu, math.sqrt(var)))
    return x0, outcome, readout, float(mu), float(var)


def _run_chunk(args):
    spec, x0_dist, seed, lo, hi = args
    return np.array([_trial(spec, x0_dist, seed, i) for i in range(lo, hi)])


def monte_carlo_run(
    spec: ProtocolSpec,
    n_trials: int,
    x0=0.0,
    seed: int | None = None,
    workers: int = 1,
    chunk: int = 5000,
) -> MonteCarloStats:
    """Run ``n_trials`` independent protocol executions with sampled homodyne outcomes.

    ``x0`` is either a fixed displacement or a ``(lo, hi)`` range sampled
    uniformly per trial. Trial ``i`` draws from ``default_rng([seed, i])``, so
    results do not depend on ``workers`` or ``chunk``. Each trial ends with an
    ideal readout of the concentrated quadrature of mode 0; its error is taken
    against ``x0`` for ``X`` and against zero for ``P`` (copies carry ``x0`` in ``X``).
    """
    if n_trials < 2:
        raise ValueError(f"n_trials must be >= 2, got {n_trials}")
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**63))
    x0_dist = tuple(float(v) for v in x0) if isinstance(x0, (tuple, list)) else float(x0)
    jobs = [(spec, x0_dist, seed, lo, min(lo + chunk, n_trials)) for lo in range(0, n_trials, chunk)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    data = np.concatenate(parts)
    x0s, outcomes, readouts, mus, vars_ = data.T
    ref = x0s if spec.quadrature == "X" else np.zeros_like(x0s)
    err = readouts - ref
    n = n_trials
    var = float(np.var(err, ddof=1))
    corr = float(np.corrcoef(outcomes, x0s)[0, 1]) if np.ptp(x0s) > 0 else 0.0
    return MonteCarloStats(
        spec=spec,
        n_trials=n,
        seed=seed,
        x0=x0_dist,
        mean_error=float(np.mean(err)),
        mean_error_se=float(np.std(err, ddof=1) / math.sqrt(n)),
        empirical_var=var,
        empirical_var_se=var * math.sqrt(2.0 / (n - 1)),
        analytic_var=float(vars_[0]),
        analytic_var_spread=float(np.ptp(vars_)),
        analytic_mean_error_max=float(np.max(np.abs(mus - ref))),
        outcome_mean=float(np.mean(outcomes)),
        outcome_var=float(np.var(outcomes, ddof=1)),
        outcome_x0_corr=corr,
        outcome_x0_corr_se=1.0 / math.sqrt(n),
        x0s=x0s,
        outcomes=outcomes,
        readouts=readouts,
    )


def ks_critical_value(n: int, m: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample Kolmogorov-Smirnov critical value."""
    return math.sqrt(-math.log(alpha / 2) / 2) * math.sqrt((n + m) / (n * m))


def outcome_independence(
    spec: ProtocolSpec, x0_a: float, x0_b: float, n_trials: int, seed: int = 0, alpha: float = 0.01
) -> dict:
    """Two-sample KS comparison of homodyne outcomes recorded at two displacements."""
    a = monte_carlo_run(spec, n_trials, x0_a, seed=seed).outcomes
    b = monte_carlo_run(spec, n_trials, x0_b, seed=seed + 1).outcomes
    res = stats.ks_2samp(a, b)
    crit = ks_critical_value(len(a), len(b), alpha)
    return {
        "statistic": float(res.statistic),
        "pvalue": float(res.pvalue),
        "critical_value": crit,
        "alpha": alpha,
        "independent": bool(res.statistic < crit),
    }


# -- sweeps --------------------------------------------------------------------

SWEEP_COLUMNS_EPR = (
    "r1", "r2", "x0",
    "sigma_plus_in", "sigma_plus", "sigma_minus_in", "sigma_minus",
    "purity_P_in", "purity_P", "logneg_in", "logneg", "mean_err",
)
SWEEP_COLUMNS_SINGLE = ("r", "x0", "var_x_in", "var_x", "var_p_in", "var_p", "purity_P", "mean_err")


def sweep_two_mode(points: Sequence[tuple[float, float]], x0: float = 0.0) -> list[dict]:
    """Concentrate two copies at every ``(r1, r2)`` and tabulate before/after diagnostics."""
    if len(points) == 0:
        raise ValueError("empty sweep grid")
    rows = []
    for r1, r2 in points:
        s = prepare_epr(EprParams(r1, r2, x0))
        _, rep = concentrate_two_mode(s, prepare_epr(EprParams(r1, r2, x0)), forced=(0.0, 0.0))
        rows.append(dict(
            r1=r1, r2=r2, x0=x0,
            sigma_plus_in=rep.input.sigma_plus, sigma_plus=rep.output.sigma_plus,
            sigma_minus_in=rep.input.sigma_minus, sigma_minus=rep.output.sigma_minus,
            purity_P_in=rep.input.marginal_purity, purity_P=rep.output.marginal_purity,
            logneg_in=rep.input.log_negativity, logneg=rep.output.log_negativity,
            mean_err=rep.mean_preservation_error,
        ))
    return rows


def sweep_single(rs: Sequence[float], x0: float = 0.0) -> list[dict]:
    if len(rs) == 0:
        raise ValueError("empty sweep grid")
    rows = []
    for r in rs:
        p = SingleModeParams(r, x0)
        _, rep = concentrate_single(prepare_single(p), prepare_single(p), forced=0.0)
        rows.append(dict(
            r=r, x0=x0,
            var_x_in=rep.input.var_x[0], var_x=rep.output.var_x[0],
            var_p_in=rep.input.var_p[0], var_p=rep.output.var_p[0],
            purity_P=rep.output.global_purity, mean_err=rep.mean_preservation_error,
        ))
    return rows
