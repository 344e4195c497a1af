"""Ideal homodyne detection on Gaussian states."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .gauss_core import GaussianState

SINGULAR_FLOOR = 1e-12

_QUAD_INDEX = {"X": 0, "P": 1}


class SingularConditioningError(ValueError):
    """The measured quadrature is (numerically) deterministic; conditioning is undefined."""


@dataclass(frozen=True)
class HomodyneRecord:
    mode: int
    quadrature: str
    outcome: float
    predicted_mean: float
    predicted_variance: float
    seed_info: str

    def to_dict(self) -> dict:
        return asdict(self)


def _quad(quadrature: str) -> int:
    try:
        return _QUAD_INDEX[quadrature.upper()]
    except (KeyError, AttributeError):
        raise ValueError(f"quadrature must be 'X' or 'P', got {quadrature!r}") from None


def as_rng(rng) -> np.random.Generator:
    """Accept a Generator, an int/sequence seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def rng_label(rng: np.random.Generator) -> str:
    seq = getattr(rng.bit_generator, "seed_seq", None)
    if seq is None or not hasattr(seq, "entropy"):
        return type(rng.bit_generator).__name__
    label = f"{type(rng.bit_generator).__name__}:{seq.entropy}"
    if seq.spawn_key:
        label += ":" + ",".join(map(str, seq.spawn_key))
    return label


def outcome_distribution(state: GaussianState, mode: int, quadrature: str = "X") -> tuple[float, float]:
    """Mean and variance of the homodyne outcome for ``quadrature`` of ``mode``."""
    k = 2 * state.check_mode(mode) + _quad(quadrature)
    return float(state.mean[k]), float(state.cov[k, k])


def condition(state: GaussianState, mode: int, quadrature: str, outcome: float) -> GaussianState | None:
    """Condition the unmeasured modes on ``quadrature`` of ``mode`` taking value ``outcome``.

    With the covariance split into kept block ``A``, measured block ``B`` and
    cross block ``C``, and ``Π`` the projector onto the measured quadrature::

        cov'  = A - C (Π B Π)^+ Cᵀ
        mean' = a + C (Π B Π)^+ Π (outcome e - b)

    ``(Π B Π)^+`` is rank one, ``e e ᵀ / B_qq``. Returns ``None`` when no mode is left.
    """
    state.check_mode(mode)
    q = _quad(quadrature)
    var = state.cov[2 * mode + q, 2 * mode + q]
    if var < SINGULAR_FLOOR:
        raise SingularConditioningError(
            f"measured quadrature variance {var:.3g} below floor {SINGULAR_FLOOR}"
        )
    if state.n_modes == 1:
        return None
    meas = [2 * mode, 2 * mode + 1]
    keep = [k for k in range(state.mean.size) if k not in meas]
    c = state.cov[keep, meas[q]]
    gain = c / var
    mean = state.mean[keep] + gain * (outcome - state.mean[meas[q]])
    cov = state.cov[np.ix_(keep, keep)] - np.outer(c, gain)
    return GaussianState(mean, cov)


def homodyne(
    state: GaussianState,
    mode: int,
    quadrature: str = "X",
    forced_outcome: float | None = None,
    rng=None,
) -> tuple[HomodyneRecord, GaussianState | None]:
    """Measure one quadrature of ``mode`` and remove that mode from the state.

    The outcome is ``forced_outcome`` when given, otherwise it is drawn from
    :func:`outcome_distribution` using ``rng``. For a single-mode input the
    returned state is ``None``.
    """
    mu, var = outcome_distribution(state, mode, quadrature)
    if forced_outcome is not None:
        outcome = float(forced_outcome)
        if not np.isfinite(outcome):
            raise ValueError(f"forced outcome must be finite, got {forced_outcome}")
        seed_info = "forced"
    else:
        gen = as_rng(rng)
        if var < SINGULAR_FLOOR:
            raise SingularConditioningError(f"measured quadrature variance {var:.3g} below floor")
        outcome = float(gen.normal(mu, np.sqrt(var)))
        seed_info = rng_label(gen)
    post = condition(state, mode, quadrature, outcome)
    record = HomodyneRecord(mode, quadrature.upper(), outcome, mu, var, seed_info)
    return record, post
