"""
Two-mode squeezed states
========================

Each party applies the single-mode procedure to its half of two EPR pairs.
The sum and difference variances both halve, while the marginal purity and
the logarithmic negativity stay put.
"""
from squeezeconc import EprParams, concentrate_two_mode, log_negativity, marginal_purity, prepare_epr, sigma_pm

pair = prepare_epr(EprParams(r1=1.0, r2=0.5, x0=1.0))
out, report = concentrate_two_mode(pair, pair, forced=(0.3, -1.1))

print("sigma_+-  in ", sigma_pm(pair))
print("sigma_+-  out", sigma_pm(out))
print("purity    in  %.5f  out %.5f" % (marginal_purity(pair), marginal_purity(out)))
print("log-neg   in  %.5f  out %.5f" % (log_negativity(pair), log_negativity(out)))
print("mean of party A after the protocol:", out.mean[0])

# the report bundles the same numbers as JSON
print(report.to_json()[:400], "...")
