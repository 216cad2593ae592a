"""
The Euler product behind the construction
=========================================

The weight f is supported on squarefree products of primes in a window
above e log N log log N.  The averaged divisor sum over the full support
factors over primes; here the factorisation is checked against direct
enumeration and the prime sum against its integral approximation.
"""

import numpy as np

from gcdzeta import construction as cons

params = cons.ConstructionParams(10**6, 0.5, a=1.5)
lo, hi = cons.window_bounds(params)
table = cons.prime_window(params)
print(f"window ({lo:.3f}, {hi:.3f}] holds {len(table)} primes: {table.primes[0]} .. {table.primes[-1]}")

f = np.array([cons.weight_at(p, params) for p in table.primes])
print("f on the window:", np.round(f, 4))

product = cons.a_n_product(params)
direct = cons.a_n_direct(params)
print(f"A_N by product {product:.15f}, by 2^{len(table)} subsets {direct:.15f}")

# the first-order term sum f(p)/sqrt(p) dominates log A_N
first = float(np.sum(f / np.sqrt(table.primes)))
print(f"log A_N = {cons.log_a_n_product(params):.6f}, first-order term {first:.6f}")

for N in (10**6, 10**8, 10**10):
    d = cons.prime_sum_diagnostic(cons.ConstructionParams(N, 0.5))
    print(f"N={N:.0e}: prime sum {d.sum:.4f}, integral {d.integral_quadrature:.4f}, ratio {d.ratio:.4f}")
