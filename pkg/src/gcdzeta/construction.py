"""The near-extremal weighted set for GCD sums.

A prime window P just above e*log N*loglog N carries the weight

    f(p) = sqrt(log N log_2 N / log_3 N) / (sqrt(p) (log p - log_2 N - log_3 N)),

extended multiplicatively to squarefree integers supported on P.  The set M
keeps the squarefree integers with at most floor(a log N / (k^2 log_3 N))
prime factors in each group P_k of the window.  Here log_j is the j-fold
iterated natural logarithm.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from .arith import FactoredInteger, PrimeTable, mask_positions, sieve
from .errors import ConstructionError, DomainError, ResourceBudgetError
from .gcdsum import DivisorLattice, is_divisor_closed

DIRECT_SUPPORT_CAP = 1 << 22


@dataclass(frozen=True)
class ConstructionParams:
    N: int
    gamma: float
    a: float | None = None
    budget: int = 100_000

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.a is None:
            object.__setattr__(self, "a", 0.5 * (1.0 + 1.0 / self.gamma))
        if not 1 < self.a < 1 / self.gamma:
            raise DomainError(f"a must satisfy 1 < a < 1/gamma = {1 / self.gamma}, got {self.a}")
        if self.N < 2:
            raise DomainError("N must be at least 2")
        if self.budget < 1:
            raise DomainError("budget must be positive")
        if self.log3 <= 0:
            raise ConstructionError(f"log log log N <= 0 for N={self.N}; use N > e^e")

    @property
    def log1(self) -> float:
        return math.log(self.N)

    @property
    def log2(self) -> float:
        return math.log(self.log1)

    @property
    def log3(self) -> float:
        l2 = self.log2
        return math.log(l2) if l2 > 0 else -math.inf

    @property
    def scale(self) -> float:
        """log N * log_2 N, the unit of the prime window."""
        return self.log1 * self.log2

    @property
    def n_groups(self) -> int:
        return math.floor(self.log2**self.gamma)

    def as_dict(self) -> dict:
        return {"N": self.N, "gamma": self.gamma, "a": self.a, "budget": self.budget}


def window_bounds(params: ConstructionParams) -> tuple[float, float]:
    """(e log N log_2 N, log N exp((log_2 N)^gamma) log_2 N)."""
    return math.e * params.scale, params.scale * math.exp(params.log2**params.gamma)


def prime_window(params: ConstructionParams) -> PrimeTable:
    lo, hi = window_bounds(params)
    if hi <= lo:
        raise ConstructionError(
            f"prime window ({lo:.4g}, {hi:.4g}] is empty for N={params.N}; increase N"
        )
    table = sieve(math.floor(lo), math.floor(hi))
    if not table.primes:
        raise ConstructionError(f"no primes in ({lo:.4g}, {hi:.4g}] for N={params.N}; increase N")
    return table


def weight_at(p: int, params: ConstructionParams) -> float:
    """f(p); zero outside the prime window."""
    lo, hi = window_bounds(params)
    if not lo < p <= hi:
        return 0.0
    amp = math.sqrt(params.scale / params.log3)
    return amp / (math.sqrt(p) * (math.log(p) - params.log2 - params.log3))


@dataclass(frozen=True)
class WeightFunction:
    """Multiplicative f supported on squarefree products of the window primes."""

    table: PrimeTable
    values: np.ndarray = field(repr=False)

    @classmethod
    def for_params(cls, params: ConstructionParams, table: PrimeTable | None = None) -> "WeightFunction":
        table = prime_window(params) if table is None else table
        return cls(table, np.array([weight_at(p, params) for p in table.primes]))

    def __call__(self, n) -> float:
        if isinstance(n, FactoredInteger):
            if not n.table.same_basis(self.table):
                return self._from_int(n.value)
            return self.of_mask(n.mask)
        return self._from_int(int(n))

    def _from_int(self, n: int) -> float:
        try:
            return self.of_mask(self.table.factor(n).mask)
        except DomainError:
            return 0.0

    def of_mask(self, mask: int) -> float:
        return math.prod(float(self.values[i]) for i in mask_positions(mask))

    @cached_property
    def log_values(self) -> np.ndarray:
        return np.log(self.values)

    def at(self, p: int) -> float:
        i = self.table.index.get(p)
        return 0.0 if i is None else float(self.values[i])


def prime_groups(params: ConstructionParams, table: PrimeTable | None = None) -> list[PrimeTable]:
    """P_k = P ∩ (e^k L, e^{k+1} L], k = 1..floor((log_2 N)^gamma), clipped to the window.

    Window primes above the last group's top are folded into the last group.
    """
    table = prime_window(params) if table is None else table
    K = params.n_groups
    if K < 1:
        raise ConstructionError(f"no prime groups: (log_2 N)^gamma < 1 for N={params.N}")
    out = []
    for k in range(1, K + 1):
        lo = math.exp(k) * params.scale
        hi = math.inf if k == K else math.exp(k + 1) * params.scale
        ps = [p for p in table.primes if lo < p <= hi]
        out.append(PrimeTable.from_primes(ps, lo=math.floor(lo), hi=table.hi if k == K else math.floor(hi)))
    return out


def group_cap(k: int, params: ConstructionParams) -> int:
    if k < 1:
        raise DomainError("group index starts at 1")
    return math.floor(params.a * params.log1 / (k * k * params.log3))


@dataclass
class ExtremalSet:
    """The divisor-closed set M together with its weight and group structure.

    `masks` are over the positions of `table` (the prime window) and are kept
    in order of decreasing f(n)^2, so masks[0] == 0 is the integer 1.
    """

    params: ConstructionParams
    table: PrimeTable
    weight: WeightFunction
    group_masks: list[int]
    caps: list[int]
    masks: list[int]
    truncated: bool
    full_count: int

    def __len__(self):
        return len(self.masks)

    @cached_property
    def members(self) -> list[FactoredInteger]:
        return [FactoredInteger(m, self.table) for m in self.masks]

    @cached_property
    def lattice(self) -> DivisorLattice:
        return DivisorLattice(self.masks, self.table)

    @cached_property
    def bits(self) -> list[list[int]]:
        return [mask_positions(m) for m in self.masks]

    @cached_property
    def log_values(self) -> np.ndarray:
        logp = self.table.logs
        return np.array([math.fsum(logp[i] for i in pos) for pos in self.bits])

    @cached_property
    def f_values(self) -> np.ndarray:
        lf = self.weight.log_values
        return np.exp(np.array([math.fsum(lf[i] for i in pos) for pos in self.bits]))

    def respects_caps(self, mask: int) -> bool:
        return all((mask & g).bit_count() <= c for g, c in zip(self.group_masks, self.caps))


def _group_structure(params: ConstructionParams, table: PrimeTable) -> tuple[list[int], list[int]]:
    group_masks, caps = [], []
    for k, group in enumerate(prime_groups(params, table), start=1):
        gm = 0
        for p in group.primes:
            gm |= 1 << table.index[p]
        group_masks.append(gm)
        caps.append(group_cap(k, params))
    return group_masks, caps


def _count_capped(group_masks: list[int], caps: list[int]) -> int:
    total = 1
    for gm, cap in zip(group_masks, caps):
        size = gm.bit_count()
        total *= sum(math.comb(size, j) for j in range(0, min(cap, size) + 1))
    return total


def _best_first(order: list[int], logw: np.ndarray, limit: int, valid) -> list[int]:
    """Masks in decreasing total log-weight, `limit` of them passing `valid`.

    `order` lists basis positions by decreasing weight.  Subsets are generated
    once each by the extend/shift successor rule on their last element; the
    pop order is exactly decreasing when every single weight is below 1.
    """
    out = [0]
    if limit <= 1 or not order:
        return out[:limit]
    w = [float(logw[i]) for i in order]
    heap = [(-w[0], 0, 1 << order[0])]
    while heap and len(out) < limit:
        neg, last, mask = heapq.heappop(heap)
        if valid(mask):
            out.append(mask)
        nxt = last + 1
        if nxt < len(order):
            bit_next = 1 << order[nxt]
            heapq.heappush(heap, (neg - w[nxt], nxt, mask | bit_next))
            heapq.heappush(heap, (neg + w[last] - w[nxt], nxt, (mask ^ (1 << order[last])) | bit_next))
    return out


def _trim_to_budget(masks: list[int], logw: np.ndarray, limit: int) -> list[int]:
    """Drop lowest-weight maximal elements until at most `limit` remain (keeps closure)."""
    present = set(masks)

    def weight(m):
        return sum(logw[i] for i in mask_positions(m))

    def is_maximal(m):
        free = ((1 << len(logw)) - 1) & ~m
        while free:
            low = free & -free
            if m | low in present:
                return False
            free ^= low
        return True

    heap = [(weight(m), m) for m in present if is_maximal(m)]
    heapq.heapify(heap)
    while len(present) > limit and heap:
        _, m = heapq.heappop(heap)
        if m not in present or not is_maximal(m):
            continue
        present.discard(m)
        rest = m
        while rest:
            low = rest & -rest
            d = m ^ low
            if d in present and is_maximal(d):
                heapq.heappush(heap, (weight(d), d))
            rest ^= low
    return [m for m in masks if m in present]


def build_set(params: ConstructionParams) -> ExtremalSet:
    """Enumerate M, truncated to min(N, budget) members of largest f(n)^2.

    When M is larger than the budget, members are taken best-first in
    f(n)^2; the result is then closed under divisors and, if closing added
    members beyond the budget, trimmed from the maximal elements down.
    """
    if params.budget <= 0:
        raise DomainError("budget must be positive")
    table = prime_window(params)
    weight = WeightFunction.for_params(params, table)
    group_masks, caps = _group_structure(params, table)
    limit = min(params.N, params.budget)
    full = _count_capped(group_masks, caps)

    def valid(mask):
        return all((mask & g).bit_count() <= c for g, c in zip(group_masks, caps))

    logw2 = 2.0 * weight.log_values
    order = sorted(range(len(table)), key=lambda i: (-logw2[i], i))
    masks = _best_first(order, logw2, min(limit, full), valid)
    if not is_divisor_closed(masks):
        from .gcdsum import divisor_closure

        closed = divisor_closure(masks)
        closed.sort(key=lambda m: (-sum(logw2[i] for i in mask_positions(m)), m))
        masks = _trim_to_budget(closed, logw2, limit)
    return ExtremalSet(params, table, weight, group_masks, caps, masks, truncated=full > len(masks), full_count=full)


def a_n_product(params: ConstructionParams, table: PrimeTable | None = None) -> float:
    """A_N as the Euler product over P, summed in log-domain."""
    return math.exp(log_a_n_product(params, table))


def log_a_n_product(params: ConstructionParams, table: PrimeTable | None = None) -> float:
    table = prime_window(params) if table is None else table
    terms = []
    for p in table.primes:
        f = weight_at(p, params)
        terms.append(math.log1p(f * f + f / math.sqrt(p)) - math.log1p(f * f))
    return math.fsum(terms)


def _subset_products(values: np.ndarray) -> np.ndarray:
    """Array indexed by mask holding prod_{i in mask} values[i]."""
    out = np.ones(1)
    for v in values:
        out = np.concatenate([out, out * v])
    return out


def _subset_sums(values: np.ndarray) -> np.ndarray:
    out = np.zeros(1)
    for v in values:
        out = np.concatenate([out, out + v])
    return out


def a_n_direct(params: ConstructionParams, support_cap: int = DIRECT_SUPPORT_CAP) -> float:
    """A_N by enumerating the whole squarefree support of f.

    Divisor sums sum_{d | n} f(d) sqrt(d) are accumulated by a subset-sum
    transform over all 2^|P| masks; no product formula is used.
    """
    table = prime_window(params)
    size = 1 << len(table)
    if size > support_cap:
        raise ResourceBudgetError(
            f"2^{len(table)} support elements exceed support_cap={support_cap}; use a_n_product"
        )
    f = np.array([weight_at(p, params) for p in table.primes])
    sqrt_p = np.sqrt(np.asarray(table.primes, dtype=float))
    f_n = _subset_products(f)
    sqrt_n = _subset_products(sqrt_p)
    divsum = f_n * sqrt_n
    idx = np.arange(size)
    for b in range(len(table)):
        has = (idx >> b) & 1 == 1
        divsum[has] += divsum[idx[has] ^ (1 << b)]
    num = np.sum(f_n / sqrt_n * divsum)
    den = np.sum(f_n * f_n)
    return float(num / den)


@dataclass(frozen=True)
class PrimeSumDiagnostic:
    sum: float
    integral: float
    integral_quadrature: float
    target: float

    @property
    def ratio(self) -> float:
        return self.sum / self.integral


def prime_sum_diagnostic(params: ConstructionParams) -> PrimeSumDiagnostic:
    """Prime sum sum_P f(p)/sqrt(p) against its logarithmic-integral model.

    With L = log_2 N + log_3 N the integral reduces to
    int dt / (t (t - L)) over [1 + L, L + (log_2 N)^gamma], which is
    (1/L) log((t - L)/t) between the endpoints.
    """
    table = prime_window(params)
    amp = math.sqrt(params.scale / params.log3)
    shift = params.log2 + params.log3
    total = math.fsum(weight_at(p, params) / math.sqrt(p) for p in table.primes)
    t1 = 1.0 + shift
    t2 = shift + params.log2**params.gamma

    def antideriv(t):
        return math.log((t - shift) / t) / shift

    closed = amp * (antideriv(t2) - antideriv(t1))
    lo, hi = window_bounds(params)
    quad, _ = integrate.quad(
        lambda x: 1.0 / (x * math.log(x) * (math.log(x) - shift)), lo, hi, epsabs=0, epsrel=1e-12, limit=200
    )
    target = params.gamma * math.sqrt(params.log1 * params.log3 / params.log2)
    return PrimeSumDiagnostic(total, closed, amp * quad, target)


def sum_f_squared_total(params: ConstructionParams, table: PrimeTable | None = None) -> float:
    """sum over all integers i of f(i)^2 = prod_P (1 + f(p)^2)."""
    table = prime_window(params) if table is None else table
    return math.exp(math.fsum(math.log1p(weight_at(p, params) ** 2) for p in table.primes))


def divisor_tail(mset: ExtremalSet, eps: float) -> float:
    """Share of the divisor sums over M coming from divisors d <= n / N^eps.

    Computed as sum_{k in M, k >= N^eps} g(k) * sum_{n in M, k | n} f(n)^2
    with g(k) = 1/(f(k) sqrt(k)); the inner sums are one superset-sum pass
    over the divisor lattice.  Normalised by A_N * sum_i f(i)^2.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    params = mset.params
    threshold = eps * params.log1
    lat = mset.lattice
    f2 = mset.f_values**2
    sup = lat.superset_sum(f2)
    logf = np.log(mset.f_values)
    log_g = -logf - 0.5 * mset.log_values
    big = mset.log_values >= threshold
    num = math.fsum((np.exp(log_g[big]) * sup[big]).tolist())
    return num / (a_n_product(params, mset.table) * sum_f_squared_total(params, mset.table))


def divisor_tail_direct(mset: ExtremalSet, eps: float) -> float:
    """Oracle for divisor_tail: the d-form, one divisor enumeration per member."""
    params = mset.params
    cut = eps * params.log1
    f = mset.weight.values
    logp = mset.table.logs
    sqrt_p = np.sqrt(np.asarray(mset.table.primes, dtype=float))
    acc = []
    for pos, fn, ln in zip(mset.bits, mset.f_values, mset.log_values):
        if ln < cut:
            continue
        sub_f = _subset_products(f[pos])
        sub_sqrt = _subset_products(sqrt_p[pos])
        keep = _subset_sums(logp[pos]) <= ln - cut
        acc.append(fn / math.exp(0.5 * ln) * math.fsum((sub_f * sub_sqrt)[keep].tolist()))
    return math.fsum(acc) / (a_n_product(params, mset.table) * sum_f_squared_total(params, mset.table))


def divisor_lower_bound(mset: ExtremalSet) -> float:
    """(sum_{n in M} f(n)/sqrt(n) sum_{d | n} f(d) sqrt(d)) / sum_{n in M} f(n)^2.

    For divisor-closed M every divisor is a member, and the summand equals
    f(n)^2 prod_{p | n} (1 + 1/(f(p) sqrt(p))).
    """
    f = mset.weight.values
    sqrt_p = np.sqrt(np.asarray(mset.table.primes, dtype=float))
    log_factor = np.log1p(1.0 / (f * sqrt_p))
    f2 = mset.f_values**2
    boost = np.exp(np.array([math.fsum(log_factor[i] for i in pos) for pos in mset.bits]))
    return math.fsum((f2 * boost).tolist()) / math.fsum(f2.tolist())


def rayleigh_of_set(mset: ExtremalSet) -> float:
    """Rayleigh quotient of the GCD form on (M, f) through the divisor lattice."""
    f = mset.f_values
    return mset.lattice.quadratic(f) / math.fsum((f**2).tolist())
