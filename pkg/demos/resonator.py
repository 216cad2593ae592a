"""
A resonator built from the extremal set
=======================================

Members of the construction are binned on a geometric grid of ratio
1 + 1/T; the resulting Dirichlet polynomial R is used to weight
|zeta|^2-type moments and to pick starting points in a search for large
|zeta(1/2 + it)|.
"""

import numpy as np

from gcdzeta import construction as cons
from gcdzeta import resonance as res

T, beta = 1e3, 0.4
mset = cons.build_set(cons.ConstructionParams(10**6, 0.5, a=1.5, budget=10**5))
spec = res.build_resonator(mset, T, beta)
print(f"{len(mset)} members fall into {len(spec)} bins; R(0) = {res.evaluate_R(spec, 0.0).real:.3f}")

mom = res.moments(spec)
t_max, z_max = res.dense_zeta_max(T, beta)
print(f"M1 = {mom.M1:.2f} (grid bound {res.m1_grid_bound(spec):.2f})")
print(f"|M2|/M1 = {mom.ratio:.4f}; largest |zeta| on [T^beta, T] is {z_max:.4f} at t = {t_max:.3f}")

# the M-uniform bound: ratios rise until M reaches T and then drop
for rec in res.smoothed_sum_fit((1, 10, 100, 1000, 2000), T, beta, dense=20).records:
    print(f"M={rec.M:6.0f}: lhs/bound = {rec.ratio:.4f}")

# guided search against random starts with the same number of zeta evaluations
spec4 = res.build_resonator(mset, 1e4, beta)
for seed in range(3):
    scan = res.guided_scan(spec4, 20_000, seed)
    print(f"seed {seed}: guided {scan.guided_max:.3f}, random {scan.baseline_max:.3f}, {scan.evaluations} evaluations each")

ts = np.linspace(1e4**beta, 1e4, 200_000)
absR = np.abs(res.evaluate_R(spec4, ts))
logz = np.log(np.abs(res.zeta_em(ts)))
top = absR >= np.quantile(absR, 0.99)
print(f"mean log|zeta|: overall {logz.mean():.3f}, where |R| is in its top 1% {logz[top].mean():.3f}")
