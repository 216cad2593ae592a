"""Near-extremal GCD sums and resonance-guided search for large values of zeta(1/2+it)."""

__version__ = "0.1.0"

from .arith import FactoredInteger, PrimeTable, compare, divisors, gcd_exact, sieve
from .construction import (
    ConstructionParams,
    ExtremalSet,
    a_n_direct,
    a_n_product,
    build_set,
    divisor_lower_bound,
    divisor_tail,
    prime_groups,
    prime_sum_diagnostic,
    prime_window,
    rayleigh_of_set,
    weight_at,
)
from .errors import (
    ConstructionError,
    ContractError,
    ConvergenceError,
    DomainError,
    GcdZetaError,
    ResourceBudgetError,
)
from .gcdsum import (
    DivisorLattice,
    GcdForm,
    brute_force_gamma,
    plain_gamma,
    quadratic_form,
    quadratic_form_exact,
    rayleigh,
    top_eigenvalue,
)
from .resonance import (
    ResonatorSpec,
    build_resonator,
    evaluate_R,
    guided_scan,
    m1_grid_bound,
    m1_quadrature,
    m2_quadrature,
    moments,
    smoothed_sum_check,
)
from .zeta import zeta_approx, zeta_em, zeta_reference
