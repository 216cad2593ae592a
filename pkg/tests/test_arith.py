import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcdzeta.arith import (
    FactoredInteger,
    PrimeTable,
    compare,
    divisors,
    gcd_exact,
    is_prime,
    masks_to_bits,
    sieve,
)
from gcdzeta.errors import ContractError, DomainError, ResourceBudgetError


def trial_division_primes(lo, hi):
    return [n for n in range(max(lo + 1, 2), hi + 1) if all(n % d for d in range(2, math.isqrt(n) + 1))]


def test_sieve_examples():
    assert sieve(1, 2).primes == (2,)
    assert sieve(10, 20).primes == (11, 13, 17, 19)
    assert sieve(24, 28).primes == ()


def test_sieve_matches_trial_division_up_to_1e4():
    assert list(sieve(0, 10_000).primes) == trial_division_primes(0, 10_000)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 20_000), st.integers(1, 3_000))
def test_sieve_window_property(lo, width):
    assert list(sieve(lo, lo + width, segment=512).primes) == trial_division_primes(lo, lo + width)


def test_sieve_segment_boundaries():
    # segment smaller than the window forces several passes
    assert sieve(900_000, 1_000_000, segment=1000).primes == sieve(900_000, 1_000_000).primes


def test_sieve_errors():
    with pytest.raises(DomainError):
        sieve(10, 10)
    with pytest.raises(ResourceBudgetError):
        sieve(0, 10**6, limit=10**5)


def test_is_prime_large():
    assert is_prime(2**61 - 1)
    assert not is_prime(2**61 + 1)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7


def test_factor_and_value():
    t = sieve(100, 110)
    n = t.factor(101 * 107)
    assert n.value == 101 * 107
    assert n.omega == 2
    assert abs(n.logv - math.log(101 * 107)) <= 1e-12 * (1 + n.logv)
    with pytest.raises(DomainError):
        t.factor(101 * 101)
    with pytest.raises(DomainError):
        t.factor(2 * 101)


def test_mask_out_of_range():
    t = sieve(1, 10)
    with pytest.raises(ContractError):
        FactoredInteger(1 << 4, t)


def test_gcd_examples():
    t = sieve(100, 110)
    p, q, r = (t.factor(x) for x in (101, 103, 107))
    assert gcd_exact(p * q, q * r) == 103
    assert gcd_exact(p * q, t.factor(1)) == 1
    assert gcd_exact(t.factor(101 * 103), t.factor(103 * 107)) == 103


def test_gcd_basis_mismatch():
    with pytest.raises(ContractError):
        gcd_exact(sieve(1, 10).factor(2), sieve(1, 20).factor(2))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**20 - 1), st.integers(0, 2**20 - 1))
def test_gcd_matches_euclid(ma, mb):
    t = sieve(0, 71)  # 20 primes
    a, b = FactoredInteger(ma, t), FactoredInteger(mb, t)
    assert gcd_exact(a, b) == math.gcd(a.value, b.value)


def test_divisors_examples():
    t = sieve(100, 110)
    assert [d.value for d in divisors(t.factor(1))] == [1]
    ds = sorted(d.value for d in divisors(t.factor(101 * 103)))
    assert ds == [1, 101, 103, 10403]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**10 - 1))
def test_divisors_count_and_gcd_closure(mask):
    t = sieve(0, 29)
    n = FactoredInteger(mask, t)
    ds = list(divisors(n))
    assert len(ds) == 2**n.omega == len({d.mask for d in ds})
    assert ds[0].value == 1 and ds[-1] == n
    values = {d.value for d in ds}
    for a in ds[:8]:
        for b in ds[-8:]:
            assert gcd_exact(a, b) in values


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**25 - 1), st.integers(0, 2**25 - 1))
def test_compare_agrees_with_exact(ma, mb):
    t = sieve(0, 100)
    a, b = FactoredInteger(ma, t), FactoredInteger(mb, t)
    expected = (a.value > b.value) - (a.value < b.value)
    assert compare(a, b) == expected


def test_compare_guard_band_uses_exact_values():
    t = sieve(0, 100)
    a, b = t.factor(2 * 3), t.factor(5)
    # a huge guard forces the exact path
    assert compare(a, b, guard=10.0) == 1
    assert compare(a, a, guard=10.0) == 0


def test_prime_table_from_primes():
    t = PrimeTable.from_primes([3, 5, 7])
    assert 5 in t and 4 not in t
    assert t.index[7] == 2
    with pytest.raises(ContractError):
        PrimeTable.from_primes([5, 3])


def test_masks_to_bits():
    bits = masks_to_bits([0, 1, 5, 2**9], 10)
    assert bits.shape == (4, 10)
    assert np.flatnonzero(bits[2]).tolist() == [0, 2]
    assert np.flatnonzero(bits[3]).tolist() == [9]
