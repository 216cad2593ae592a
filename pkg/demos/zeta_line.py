"""
Three ways to evaluate zeta on the critical line
================================================

The truncated Dirichlet sum with its correction term, double-precision
Euler-Maclaurin, and a rigorous Euler-Maclaurin reference in mpmath.
"""

import numpy as np

from gcdzeta import zeta

ts = np.array([0.0, 14.134725141734693, 100.0, 1000.0, 5000.0])
ref = np.array([zeta.zeta_reference(t).value for t in ts])
em = zeta.zeta_em(ts)
approx = zeta.zeta_approx_array(ts, 1e4)

for t, r, e, a in zip(ts, ref, em, approx):
    print(f"t={t:10.4f}  |zeta|={abs(r):.6f}  em err {abs(e - r):.1e}  approx err {abs(a - r):.1e}")

# the truncation error of the main sum scales like T^{-1/2}
for T in (1e2, 1e3, 1e4):
    c = zeta.calibrate_approx_constant(np.linspace(-T, T, 21), T)
    print(f"T={T:.0e}: empirical constant max|approx - ref| sqrt(T) = {c:.3f}")
