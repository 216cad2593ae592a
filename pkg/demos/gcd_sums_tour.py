"""
GCD sums on small and structured sets
=====================================

A walk through the quadratic form sum c_k c_l gcd(m_k, m_l)/sqrt(m_k m_l),
from exhaustive search on tiny sets to the multiplicative construction.
"""

import math

import numpy as np

from gcdzeta import construction as cons
from gcdzeta import gcdsum
from gcdzeta.arith import FactoredInteger, sieve

# the form on three pairwise non-coprime integers
table = sieve(0, 100)
nodes = [table.factor(v) for v in (6, 10, 15)]
print("Gamma({6,10,15}) =", gcdsum.plain_gamma(nodes))

# exhaustive search for the best 2- and 3-element sets below 40
for n in (2, 3):
    best = gcdsum.brute_force_gamma(n, 40)
    print(f"Gamma({n}) over [1, 40]: {best.value:.6f} at {best.witness}")

# the largest eigenvalue bounds every Rayleigh quotient on the same nodes
rng = np.random.default_rng(0)
small = sieve(0, 29)  # ten primes, so masks below 2^10
nodes = [FactoredInteger(int(m), small) for m in np.unique(rng.integers(0, 2**10, 40))]
lam = gcdsum.top_eigenvalue(nodes)
print(f"{len(nodes)} random squarefree nodes: Gamma {gcdsum.plain_gamma(nodes):.4f} <= Lambda {lam:.4f}")

# the multiplicative construction: Rayleigh quotient against its growth scale
for params in (cons.ConstructionParams(10**6, 0.5, a=1.5), cons.ConstructionParams(10**8, 0.9, a=1.05)):
    mset = cons.build_set(params)
    ray = cons.rayleigh_of_set(mset)
    growth = math.exp(params.gamma * math.sqrt(params.log1 * params.log3 / params.log2))
    print(
        f"N={params.N:.0e} gamma={params.gamma}: |M|={len(mset)}, Rayleigh {ray:.4f}, "
        f"divisor bound {cons.divisor_lower_bound(mset):.4f}, exp scale {growth:.4f}"
    )
