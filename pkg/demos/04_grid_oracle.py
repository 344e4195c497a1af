"""
Checking the covariance engine on a grid
========================================

The same protocol written as integrals over probability densities, evaluated
by brute-force quadrature, reproduces the covariance-matrix results.
"""
from squeezeconc import wigner_oracle as wo
from squeezeconc.crosscheck import oracle_check
from squeezeconc.gauss_core import SingleModeParams, prepare_single

state = prepare_single(SingleModeParams(r=0.0, x0=1.7))
px = wo.gaussian_to_grid(state, [0])
pp = wo.gaussian_to_grid(state, [1])
out_x, out_p = wo.protocol_marginals_single((px, pp), (px, pp))
print("position: mean %.6f var %.6f" % (wo.grid_moments(out_x)[0][0], wo.grid_moments(out_x)[1][0, 0]))
print("momentum: var %.6f" % wo.grid_moments(out_p)[1][0, 0])

# the full phase-space transform on a 128x128 grid
W = wo.wigner_grid(state, 0, 128)
Wt = wo.full_wigner_transform_single(W, W)
print("Wigner output covariance\n", wo.grid_moments(Wt)[1])

report = oracle_check()
print("largest engine/oracle discrepancy: %.2e  passed: %s" % (report["max_discrepancy"], report["passed"]))
