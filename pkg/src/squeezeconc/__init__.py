"""
Two-copy squeezing concentration for Gaussian states with an unknown displacement.

Two identical copies of a Gaussian state, a local SUM (QND) coupling, a homodyne
measurement on the target copy and an outcome-dependent displacement of the
source copy halve the position variance while leaving the unknown mean, the
purity and the entanglement untouched.

Modules
-------
gauss_core     states, symplectic maps, preparations
measure        homodyne detection and Gaussian conditioning
protocols      two-copy, two-mode and N-copy concentration, baseline, Monte Carlo
metrics        purities, symplectic spectra, logarithmic negativity
wigner_oracle  grid-based phase-space oracle
crosscheck     agreement report between the two engines
cli            command-line front end
"""
__version__ = "0.1.0"

from .gauss_core import (
    EprParams,
    GaussianState,
    PhysicalityError,
    SingleModeParams,
    SymplecticOp,
    beamsplit,
    displace,
    prepare_epr,
    prepare_epr_circuit,
    prepare_single,
    quad_mean,
    quad_variance,
    rotate,
    squeeze,
    sum_gate,
    tensor,
    vacuum,
)
from .measure import HomodyneRecord, SingularConditioningError, homodyne, outcome_distribution
from .metrics import global_purity, log_negativity, marginal_purity, sigma_pm, symplectic_eigenvalues
from .protocols import (
    ConcentrateConfig,
    ProtocolReport,
    ProtocolSpec,
    concentrate_n,
    concentrate_single,
    concentrate_two_mode,
    monte_carlo_run,
    single_copy_squeeze_baseline,
)

__all__ = [
    "EprParams", "GaussianState", "PhysicalityError", "SingleModeParams", "SymplecticOp",
    "beamsplit", "displace", "prepare_epr", "prepare_epr_circuit", "prepare_single",
    "quad_mean", "quad_variance", "rotate", "squeeze", "sum_gate", "tensor", "vacuum",
    "HomodyneRecord", "SingularConditioningError", "homodyne", "outcome_distribution",
    "global_purity", "log_negativity", "marginal_purity", "sigma_pm", "symplectic_eigenvalues",
    "ConcentrateConfig", "ProtocolReport", "ProtocolSpec", "concentrate_n", "concentrate_single",
    "concentrate_two_mode", "monte_carlo_run", "single_copy_squeeze_baseline",
]
