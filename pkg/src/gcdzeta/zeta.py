"""zeta(1/2 + it) on the critical line.

Three evaluators with different jobs:

* `zeta_approx` -- the truncated main sum sum_{n<=T} n^{-1/2-it} minus
  T^{1/2-it}/(1/2-it), valid for |t| <= T with an O(T^{-1/2}) error.
* `zeta_reference` -- Euler-Maclaurin summation in mpmath arithmetic with a
  rigorous remainder bound; the oracle.
* `zeta_em` -- the same Euler-Maclaurin formula vectorised in double
  precision, for dense scans and quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import ContractError, DomainError, ResourceBudgetError

MAIN_SUM_BUDGET = 10**7
REFERENCE_T_MAX = 1e7
REFERENCE_MAX_TERMS = 2 * 10**6
APPROX_CONSTANT = 10.0
_CHUNK = 1 << 22


@dataclass(frozen=True)
class ZetaValue:
    t: float
    value: complex
    abs_error_bound: float

    def __post_init__(self):
        if not (math.isfinite(self.abs_error_bound) and self.abs_error_bound >= 0):
            raise DomainError("error bound must be finite and non-negative")

    def __abs__(self):
        return abs(self.value)


def _dirichlet_block(ts: np.ndarray, n_lo: int, n_hi: int) -> np.ndarray:
    """sum_{n_lo <= n <= n_hi} n^{-1/2 - i t} for each t, pairwise-summed blockwise."""
    out = np.zeros(len(ts), dtype=complex)
    if n_hi < n_lo:
        return out
    width = max(1, _CHUNK // max(1, len(ts)))
    for start in range(n_lo, n_hi + 1, width):
        n = np.arange(start, min(start + width, n_hi + 1), dtype=float)
        logn = np.log(n)
        amp = 1.0 / np.sqrt(n)
        phase = np.outer(ts, logn)
        out += (amp * np.cos(phase)).sum(axis=1) - 1j * (amp * np.sin(phase)).sum(axis=1)
    return out


def main_sum(t: float, T: float, budget: int = MAIN_SUM_BUDGET) -> complex:
    """sum_{n <= T} n^{-1/2 - it}, with exactly rounded real and imaginary sums."""
    if T < 1:
        raise DomainError("T must be at least 1")
    n_max = math.floor(T)
    if n_max > budget:
        raise ResourceBudgetError(f"main sum length {n_max} exceeds budget {budget}")
    re, im = [], []
    for start in range(1, n_max + 1, 1 << 16):
        n = np.arange(start, min(start + (1 << 16), n_max + 1), dtype=float)
        amp = 1.0 / np.sqrt(n)
        phase = t * np.log(n)
        re.extend((amp * np.cos(phase)).tolist())
        im.extend((-amp * np.sin(phase)).tolist())
    return complex(math.fsum(re), math.fsum(im))


def main_sum_array(ts, T: float, budget: int = MAIN_SUM_BUDGET) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if T < 1:
        raise DomainError("T must be at least 1")
    n_max = math.floor(T)
    if n_max > budget:
        raise ResourceBudgetError(f"main sum length {n_max} exceeds budget {budget}")
    return _dirichlet_block(ts, 1, n_max)


def _approx_correction(ts: np.ndarray, T: float) -> np.ndarray:
    s1 = 0.5 - 1j * ts
    return np.exp(s1 * math.log(T)) / s1


def zeta_approx(t: float, T: float, C: float = APPROX_CONSTANT) -> ZetaValue:
    """main_sum(t, T) - T^{1/2-it}/(1/2-it), claimed accurate to C T^{-1/2}."""
    if abs(t) > T:
        raise DomainError(f"|t| = {abs(t)} exceeds T = {T}")
    value = main_sum(t, T) - complex(_approx_correction(np.array([t]), T)[0])
    return ZetaValue(float(t), value, C / math.sqrt(T))


def zeta_approx_array(ts, T: float) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(np.abs(ts) > T):
        raise DomainError("all |t| must be <= T")
    return main_sum_array(ts, T) - _approx_correction(ts, T)


def calibrate_approx_constant(ts, T: float, C: float = APPROX_CONSTANT, tol: float = 1e-10) -> float:
    """Empirical constant max |approx - reference| * sqrt(T) over ts.

    Raises ContractError when it exceeds the configured C, since every error
    bar derived from zeta_approx would then be wrong.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    approx = zeta_approx_array(ts, T)
    ref = np.array([zeta_reference(float(t), tol=tol).value for t in ts])
    c_emp = float(np.max(np.abs(approx - ref))) * math.sqrt(T)
    if c_emp > C:
        raise ContractError(f"empirical constant {c_emp:.4g} exceeds configured C = {C}")
    return c_emp


def _em_bound(s, N: int, K: int, bern) -> mpmath.mpf:
    sigma = mpmath.re(s)
    rising = mpmath.mpf(1)
    for j in range(2 * K + 2):
        rising *= abs(s + j)
    return rising * abs(bern[K + 1]) / mpmath.factorial(2 * K + 2) / (sigma + 2 * K + 1) * mpmath.power(N, -sigma - 2 * K - 1)


def euler_maclaurin(s, N: int, K: int) -> mpmath.mpc:
    """zeta(s) = sum_{n<N} n^-s + N^{1-s}/(s-1) + N^-s/2 + sum_{j<=K} B_2j/(2j)! (s)_{2j-1} N^{-s-2j+1}."""
    s = mpmath.mpmathify(s)
    total = mpmath.fsum(mpmath.power(n, -s) for n in range(1, N))
    total += mpmath.power(N, 1 - s) / (s - 1) + mpmath.power(N, -s) / 2
    rising = s
    Np = mpmath.power(N, -s - 1)
    for j in range(1, K + 1):
        total += mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * rising * Np
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        Np /= N * N
    return total


def euler_maclaurin_plan(s, tol: float, max_terms: int = REFERENCE_MAX_TERMS, k_max: int = 80) -> tuple[int, int, float]:
    """Smallest (N, K) found whose rigorous remainder bound is below tol."""
    s = mpmath.mpmathify(s)
    bern = [mpmath.bernoulli(2 * j) for j in range(k_max + 2)]
    N = max(10, int(abs(mpmath.im(s)) / 4) + 16)
    while N <= max_terms:
        best = (math.inf, 0)
        for K in range(1, k_max + 1):
            b = float(_em_bound(s, N, K, bern))
            if b < best[0]:
                best = (b, K)
            if b <= tol:
                return N, K, b
        N *= 2
    raise ResourceBudgetError(
        f"Euler-Maclaurin needs more than {max_terms} terms for tol={tol}; best bound {best[0]:.3g}"
    )


def zeta_reference(t: float, tol: float = 1e-10, t_max: float = REFERENCE_T_MAX, dps: int = 30) -> ZetaValue:
    """zeta(1/2+it) with a rigorous Euler-Maclaurin remainder bound below tol."""
    if abs(t) > t_max:
        raise DomainError(f"|t| = {abs(t)} exceeds the configured maximum {t_max}")
    with mpmath.workdps(dps):
        s = mpmath.mpc(0.5, t)
        N, K, bound = euler_maclaurin_plan(s, tol / 2)
        value = euler_maclaurin(s, N, K)
        # rounding in the working precision is far below the truncation bound
        return ZetaValue(float(t), complex(value), bound + 10.0 ** (3 - dps) * N)


def _bernoulli_coeffs(K: int) -> np.ndarray:
    return np.array([float(mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j)) for j in range(1, K + 1)])


_EM_K = 14
_EM_COEFFS = _bernoulli_coeffs(_EM_K)


def _em_terms(t: float) -> int:
    return int(abs(t) / 2) + 24


def zeta_em(ts) -> np.ndarray:
    """Vectorised double-precision Euler-Maclaurin for zeta(1/2 + it).

    The cut-off N >= |t|/2 + 24 keeps |s|/(2 pi N) below about 1/pi, so the
    14-term tail is below 1e-13 relative to N^{-1/2}; the absolute error is
    dominated by rounding of the phases t log n (about 1e-12 * t).
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    out = np.empty(len(ts), dtype=complex)
    order = np.argsort(np.abs(ts), kind="stable")
    # batches of similar |t| share one cut-off
    start = 0
    while start < len(ts):
        N = int(_em_terms(ts[order[start]]) * 1.25) + 8
        stop = start
        while stop < len(ts) and _em_terms(ts[order[stop]]) <= N:
            stop += 1
        idx = order[start:stop]
        out[idx] = _em_batch(ts[idx], N)
        start = stop
    return out


def _em_batch(ts: np.ndarray, N: int) -> np.ndarray:
    s = 0.5 + 1j * ts
    total = _dirichlet_block(ts, 1, N - 1)
    n_pow = np.exp(-s * math.log(N))
    total += n_pow * N / (s - 1) + n_pow / 2
    rising = s.copy()
    n_pow = n_pow / N
    for j, c in enumerate(_EM_COEFFS, start=1):
        total += c * rising * n_pow
        rising = rising * (s + 2 * j - 1) * (s + 2 * j)
        n_pow = n_pow / (N * N)
    return total
