"""
Sampling the measurement outcomes
=================================

Many runs with random displacements and sampled homodyne outcomes: the
readout error has zero mean and the predicted variance, and the outcomes
carry no information about the displacement.
"""
from squeezeconc.protocols import ProtocolSpec, monte_carlo_run, outcome_independence

spec = ProtocolSpec("single", r=0.5)
st = monte_carlo_run(spec, 20_000, x0=(-5, 5), seed=3)
print(f"mean error    {st.mean_error:+.2e} +- {st.mean_error_se:.1e}")
print(f"variance      {st.empirical_var:.5f} (predicted {st.analytic_var:.5f})")
print(f"corr(outcome, x0) {st.outcome_x0_corr:+.4f} +- {st.outcome_x0_corr_se:.4f}")

ks = outcome_independence(spec, -4.0, 4.0, 5_000, seed=3)
print(f"KS statistic {ks['statistic']:.4f} vs critical {ks['critical_value']:.4f}")
