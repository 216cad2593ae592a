"""Exact arithmetic over a fixed, ordered prime basis.

Squarefree integers supported on the basis are stored as bit masks over the
basis positions.  Exact values are Python ints computed on demand; ordering
and ratio tests go through the log-value first and fall back to exact integer
comparison inside a small guard band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import ContractError, DomainError, ResourceBudgetError

SIEVE_LIMIT = 10**9
SEGMENT_SIZE = 1 << 20
LOG_GUARD = 1e-9

# Deterministic Miller-Rabin witnesses, valid for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _small_primes(limit: int) -> np.ndarray:
    """Primes <= limit by a plain Eratosthenes sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _segmented_primes(lo: int, hi: int, segment: int) -> np.ndarray:
    """Primes in (lo, hi], sieving one segment of at most `segment` integers at a time."""
    base = _small_primes(math.isqrt(hi))
    chunks = []
    start = lo + 1
    while start <= hi:
        stop = min(start + segment, hi + 1)
        flags = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            first = max(p * p, -(-start // p) * p)
            if first >= stop:
                continue
            flags[first - start :: p] = False
        idx = np.flatnonzero(flags) + start
        chunks.append(idx[idx >= 2])
        start = stop
    if not chunks:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(chunks).astype(np.int64)


@dataclass(frozen=True)
class PrimeTable:
    """The primes in a half-open interval (lo, hi], in increasing order."""

    lo: int
    hi: int
    primes: tuple[int, ...]
    index: dict[int, int] = field(repr=False, compare=False)

    @classmethod
    def from_primes(cls, primes: Sequence[int], lo: int | None = None, hi: int | None = None) -> "PrimeTable":
        ps = tuple(int(p) for p in primes)
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise ContractError("prime basis must be strictly increasing")
        lo = (ps[0] - 1 if ps else 0) if lo is None else lo
        hi = (ps[-1] if ps else lo + 1) if hi is None else hi
        return cls(lo, hi, ps, {p: i for i, p in enumerate(ps)})

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def __contains__(self, p) -> bool:
        return p in self.index

    @cached_property
    def logs(self) -> np.ndarray:
        return np.log(np.asarray(self.primes, dtype=float))

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.primes, dtype=np.int64)

    def same_basis(self, other: "PrimeTable") -> bool:
        return self is other or self.primes == other.primes

    def element(self, mask: int) -> "FactoredInteger":
        return FactoredInteger(mask, self)

    def factor(self, n: int) -> "FactoredInteger":
        """The mask of a squarefree n whose prime factors all lie in the table."""
        if n < 1:
            raise DomainError(f"{n} is not a positive integer")
        mask, rest = 0, n
        for i, p in enumerate(self.primes):
            if rest % p == 0:
                rest //= p
                if rest % p == 0:
                    raise DomainError(f"{n} is not squarefree")
                mask |= 1 << i
            if rest == 1:
                break
        if rest != 1:
            raise DomainError(f"{n} has a prime factor outside the basis")
        return FactoredInteger(mask, self)


def sieve(lo: int, hi: int, limit: int = SIEVE_LIMIT, segment: int = SEGMENT_SIZE) -> PrimeTable:
    """Primes in (lo, hi].

    Raises ResourceBudgetError when hi exceeds `limit`.

    >>> sieve(10, 20).primes
    (11, 13, 17, 19)
    """
    lo, hi = int(lo), int(hi)
    if lo < 0 or hi <= lo:
        raise DomainError(f"need 0 <= lo < hi, got lo={lo}, hi={hi}")
    if hi > limit:
        raise ResourceBudgetError(f"sieve bound {hi} exceeds the configured limit {limit}")
    primes = _segmented_primes(lo, hi, segment)
    return PrimeTable(lo, hi, tuple(int(p) for p in primes), {int(p): i for i, p in enumerate(primes)})


def mask_positions(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class FactoredInteger:
    """A squarefree integer given as a subset of a prime basis."""

    mask: int
    table: PrimeTable = field(repr=False)

    def __post_init__(self):
        if self.mask < 0 or self.mask >> len(self.table.primes):
            raise ContractError("mask refers to positions outside the prime basis")

    def __eq__(self, other):
        if not isinstance(other, FactoredInteger):
            return NotImplemented
        return self.mask == other.mask and self.table.same_basis(other.table)

    def __hash__(self):
        return hash(self.mask)

    @cached_property
    def positions(self) -> list[int]:
        return mask_positions(self.mask)

    @property
    def omega(self) -> int:
        return self.mask.bit_count()

    @cached_property
    def value(self) -> int:
        return math.prod(self.table.primes[i] for i in self.positions)

    @cached_property
    def logv(self) -> float:
        return math.fsum(math.log(self.table.primes[i]) for i in self.positions)

    def __int__(self):
        return self.value

    def __mul__(self, other: "FactoredInteger") -> "FactoredInteger":
        _check_basis(self, other)
        if self.mask & other.mask:
            raise DomainError("product of non-coprime squarefree numbers is not squarefree")
        return FactoredInteger(self.mask | other.mask, self.table)

    def divides(self, other: "FactoredInteger") -> bool:
        _check_basis(self, other)
        return self.mask & ~other.mask == 0


def _check_basis(a: FactoredInteger, b: FactoredInteger) -> None:
    if not a.table.same_basis(b.table):
        raise ContractError("operands are factored over different prime bases")


def gcd_exact(a: FactoredInteger, b: FactoredInteger) -> int:
    """gcd of two squarefree integers over the same basis (product over the shared primes)."""
    _check_basis(a, b)
    return FactoredInteger(a.mask & b.mask, a.table).value


def divisors(n: FactoredInteger) -> Iterator[FactoredInteger]:
    """All 2**omega(n) divisors of n, starting with 1 and ending with n."""
    sub = 0
    while True:
        yield FactoredInteger(sub, n.table)
        if sub == n.mask:
            return
        sub = (sub - n.mask) & n.mask


def compare(a: FactoredInteger, b: FactoredInteger, guard: float = LOG_GUARD) -> int:
    """Sign of a - b, decided in log-domain unless the logs are within `guard`."""
    _check_basis(a, b)
    diff = a.logv - b.logv
    if diff > guard:
        return 1
    if diff < -guard:
        return -1
    return (a.value > b.value) - (a.value < b.value)


def masks_to_bits(masks: Sequence[int], width: int) -> np.ndarray:
    """Boolean matrix whose row k holds the bits of masks[k]."""
    nbytes = max(1, (width + 7) // 8)
    raw = b"".join(int(m).to_bytes(nbytes, "little") for m in masks)
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(len(masks), nbytes)
    bits = np.unpackbits(arr, axis=1, bitorder="little")[:, :width]
    return bits.astype(bool)
