"""
Using more than two copies
==========================

Repeating the procedure shrinks the variance to 1/N of the input. A binary
tree uses gain 1/2 at every step; a sequential chain folds in one fresh copy
at a time with gain s/(s+t).
"""
from squeezeconc import ConcentrateConfig, SingleModeParams, concentrate_n, prepare_single


def copy():
    return prepare_single(SingleModeParams(r=0.0, x0=-2.0))


for n, pairing in ((4, "binary_tree"), (8, "binary_tree"), (3, "sequential_optimal_gain"), (8, "sequential_optimal_gain")):
    out, rep = concentrate_n(copy, ConcentrateConfig(n, pairing, seed=1))
    gains = ", ".join(f"{g:.3f}" for g in rep.gains)
    print(f"N={n} {pairing:24s} var_x={out.cov[0, 0]:.6f} (0.5/N={0.5 / n:.6f})  gains [{gains}]")
