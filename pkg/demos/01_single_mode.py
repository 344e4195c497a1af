"""
Concentrating two copies of a squeezed state
============================================

Two identical displaced squeezed states are coupled with a SUM gate, the
target is read out with homodyne detection, and the source is nudged by half
the outcome. The source ends up with half the position variance and the
same mean, whatever the detector reads.
"""
import numpy as np

from squeezeconc import SingleModeParams, concentrate_single, prepare_single, single_copy_squeeze_baseline

state = prepare_single(SingleModeParams(r=0.5, x0=1.7))
print("input  mean", state.mean, "\ninput  cov\n", state.cov)

# a random outcome and two forced ones give the same output state
rng = np.random.default_rng(0)
for forced in (None, -3.5, 2.0):
    out, report = concentrate_single(state, state, forced=forced, rng=rng)
    print(f"outcome {report.trace[0].outcome:+.4f}  ->  mean {out.mean[0]:.12f}  var_x {out.cov[0, 0]:.12f}")

print("expected var_x", state.cov[0, 0] / 2)

# squeezing a single copy gets the same variance but shrinks the mean by 1/sqrt(2)
base, _ = single_copy_squeeze_baseline(state)
print(f"baseline squeezer: mean {base.mean[0]:.6f} (x0/sqrt(2) = {1.7 / np.sqrt(2):.6f})")

# the momentum quadrature can be concentrated instead
out, _ = concentrate_single(state, state, forced=0.0, quadrature="P")
print("P variant: var_p", out.cov[1, 1], "=", state.cov[1, 1] / 2)
