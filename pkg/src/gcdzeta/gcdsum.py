"""GCD quadratic forms with exponent 1/2.

The Gram matrix of distinct positive integers n_1..n_N has entries
gcd(n_k, n_l) / sqrt(n_k n_l).  This module evaluates the weighted form
sum c_k c_l G_kl, the normalised plain sum, the Rayleigh quotient and the
top eigenvalue, plus brute-force and high-precision oracles.

Divisor-closed node sets get a fast path through `DivisorLattice`, which uses
gcd(m, n) = sum over common divisors d of phi(d) to turn the N^2 double sum
into two sparse zeta transforms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .arith import FactoredInteger, PrimeTable, mask_positions, masks_to_bits
from .errors import ContractError, ConvergenceError, DomainError, ResourceBudgetError

DENSE_LIMIT = 5000
BRUTE_FORCE_BUDGET = 300_000


@dataclass(frozen=True)
class GcdForm:
    nodes: tuple[FactoredInteger, ...]
    weights: np.ndarray

    def __init__(self, nodes: Sequence[FactoredInteger], weights=None):
        nodes = tuple(nodes)
        if not nodes:
            raise DomainError("a GCD form needs at least one node")
        table = nodes[0].table
        if any(not n.table.same_basis(table) for n in nodes):
            raise ContractError("nodes are factored over different prime bases")
        if len({n.mask for n in nodes}) != len(nodes):
            raise ContractError("nodes must be pairwise distinct")
        w = np.ones(len(nodes)) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (len(nodes),):
            raise ContractError("weights must match the nodes one to one")
        if not np.all(w > 0):
            raise DomainError("weights must be strictly positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)

    @property
    def table(self) -> PrimeTable:
        return self.nodes[0].table

    def __len__(self):
        return len(self.nodes)


def gram_matrix(nodes: Sequence[FactoredInteger]) -> np.ndarray:
    """Dense Gram matrix gcd(n_k, n_l)/sqrt(n_k n_l)."""
    table = nodes[0].table
    bits = masks_to_bits([n.mask for n in nodes], len(table)).astype(float)
    logp = table.logs
    logn = bits @ logp
    log_gcd = (bits * logp) @ bits.T
    # exponent = -(1/2) * sum of log p over the symmetric difference
    expo = log_gcd - 0.5 * (logn[:, None] + logn[None, :])
    g = np.exp(expo)
    np.fill_diagonal(g, 1.0)
    return g


def is_divisor_closed(masks) -> bool:
    present = set(masks)
    for m in present:
        rest = m
        while rest:
            low = rest & -rest
            if m ^ low not in present:
                return False
            rest ^= low
    return True


def divisor_closure(masks) -> list[int]:
    """Smallest divisor-closed superset, sorted by mask."""
    seen = set()
    stack = list(set(masks))
    while stack:
        m = stack.pop()
        if m in seen:
            continue
        seen.add(m)
        rest = m
        while rest:
            low = rest & -rest
            if m ^ low not in seen:
                stack.append(m ^ low)
            rest ^= low
    return sorted(seen)


class DivisorLattice:
    """A divisor-closed family of squarefree masks with sparse zeta transforms.

    For every basis position b the lattice stores the pairs (m, m - p_b) with
    p_b | m.  Superset sums walk those pairs from child to parent, subset sums
    from parent to child; each pass is one vectorised update per prime.
    """

    def __init__(self, masks: Sequence[int], table: PrimeTable):
        self.masks = list(masks)
        self.table = table
        index = {m: i for i, m in enumerate(self.masks)}
        if len(index) != len(self.masks):
            raise ContractError("lattice masks must be distinct")
        children: dict[int, list[int]] = {}
        parents: dict[int, list[int]] = {}
        for i, m in enumerate(self.masks):
            for b in mask_positions(m):
                j = index.get(m ^ (1 << b))
                if j is None:
                    raise ContractError("mask family is not divisor closed")
                children.setdefault(b, []).append(i)
                parents.setdefault(b, []).append(j)
        self.index = index
        self._steps = [
            (b, np.asarray(children[b]), np.asarray(parents[b]))
            for b in sorted(children)
        ]
        logp = table.logs
        self.logv = np.array([sum(logp[b] for b in mask_positions(m)) for m in self.masks])
        # phi(d)/d for squarefree d
        log1m = np.log1p(-1.0 / np.asarray(table.primes, dtype=float))
        self.phi_ratio = np.exp(np.array([sum(log1m[b] for b in mask_positions(m)) for m in self.masks]))
        self._inv_sqrt_p = 1.0 / np.sqrt(np.asarray(table.primes, dtype=float))

    def __len__(self):
        return len(self.masks)

    def superset_sum(self, x: np.ndarray, scale: np.ndarray | None = None) -> np.ndarray:
        """S[d] = sum over members n divisible by d of x[n] * prod_{p | n/d} scale[p]."""
        s = np.array(x, dtype=np.result_type(x, float), copy=True)
        for b, child, parent in self._steps:
            f = 1.0 if scale is None else scale[b]
            s[parent] += s[child] * f
        return s

    def subset_sum(self, y: np.ndarray, scale: np.ndarray | None = None) -> np.ndarray:
        """W[m] = sum over divisors d of m of y[d] * prod_{p | m/d} scale[p]."""
        w = np.array(y, dtype=np.result_type(y, float), copy=True)
        for b, child, parent in self._steps:
            f = 1.0 if scale is None else scale[b]
            w[child] += w[parent] * f
        return w

    def quadratic(self, c: np.ndarray) -> float:
        """c^T G c for the Gram matrix of the whole family."""
        s = self.superset_sum(c, self._inv_sqrt_p)
        return float(np.sum(self.phi_ratio * s * s))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        s = self.superset_sum(v, self._inv_sqrt_p)
        return self.subset_sum(self.phi_ratio * s, self._inv_sqrt_p)


def quadratic_form(form: GcdForm) -> float:
    """sum_{k,l} c_k c_l gcd(n_k, n_l)/sqrt(n_k n_l).

    Up to DENSE_LIMIT nodes the Gram matrix is built explicitly and the N^2
    products are summed with math.fsum.  Larger node sets must be divisor
    closed and go through DivisorLattice.
    """
    n = len(form)
    if n <= DENSE_LIMIT:
        g = gram_matrix(form.nodes)
        c = form.weights
        return math.fsum((g * np.outer(c, c)).ravel())
    masks = [x.mask for x in form.nodes]
    if not is_divisor_closed(masks):
        raise ResourceBudgetError(
            f"{n} nodes exceed the dense limit {DENSE_LIMIT} and the set is not divisor closed"
        )
    return DivisorLattice(masks, form.table).quadratic(form.weights)


def quadratic_form_exact(values: Sequence[int], weights: Sequence[float] | None = None, digits: int = 50) -> Decimal:
    """High-precision reference for the weighted GCD form.

    gcd values are exact integers; every weight is converted to Decimal without
    rounding, and 1/sqrt(n) is carried to `digits` significant digits.  No
    binary floating point enters the sum.
    """
    values = [int(v) for v in values]
    if weights is None:
        weights = [1] * len(values)
    with localcontext() as ctx:
        ctx.prec = digits + 10
        c = [Decimal(w) for w in weights]
        inv_root = [1 / Decimal(v).sqrt() for v in values]
        total = Decimal(0)
        for k, nk in enumerate(values):
            inner = Decimal(0)
            for l, nl in enumerate(values):
                inner += c[l] * math.gcd(nk, nl) * inv_root[l]
            total += c[k] * inv_root[k] * inner
        return +total


def plain_gamma(nodes: Sequence[FactoredInteger]) -> float:
    """N^{-1} times the uniform-weight GCD sum."""
    if not nodes:
        raise DomainError("plain_gamma of an empty set")
    return quadratic_form(GcdForm(nodes)) / len(nodes)


def rayleigh(form: GcdForm) -> float:
    return quadratic_form(form) / math.fsum(form.weights**2)


def _matvec_for(nodes: Sequence[FactoredInteger]) -> Callable[[np.ndarray], np.ndarray]:
    if len(nodes) <= DENSE_LIMIT:
        g = gram_matrix(nodes)
        return lambda x: g @ x
    masks = [x.mask for x in nodes]
    closure = divisor_closure(masks)
    lattice = DivisorLattice(closure, nodes[0].table)
    where = np.array([lattice.index[m] for m in masks])

    def matvec(x):
        full = np.zeros(len(lattice))
        full[where] = x
        return lattice.matvec(full)[where]

    return matvec


def top_eigenvalue(nodes: Sequence[FactoredInteger], tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of the Gram matrix by power iteration.

    The Gram matrix has strictly positive entries, so every positive iterate x
    brackets the Perron root between min and max of (Gx)_i / x_i
    (Collatz-Wielandt).  Iteration stops once that bracket is narrower than
    `tol` relative to the Rayleigh quotient, which is returned.

    The iteration runs on G - sigma I.  Gershgorin gives lambda_min >= g with
    g = 2 - max_i (G 1)_i, and lambda_max >= 1 (unit diagonal), so
    sigma = (max(g, 0) + 1) / 2 keeps lambda_max - sigma dominant while
    shrinking the ratio to the next eigenvalue, which matters when the
    spectrum clusters near 1 (nearly coprime nodes).
    """
    if not nodes:
        raise DomainError("top_eigenvalue of an empty set")
    matvec = _matvec_for(nodes)
    x = np.full(len(nodes), 1.0 / math.sqrt(len(nodes)))
    y = matvec(x)
    g_low = 2.0 - float(np.max(y)) * math.sqrt(len(nodes))
    sigma = 0.5 * (max(g_low, 0.0) + 1.0)
    rho = lower = upper = float("nan")
    prev_width = math.inf
    for it in range(max_iter):
        if it:
            y = matvec(x)
        ratio = y / x
        lower, upper = float(ratio.min()), float(ratio.max())
        rho = float(x @ y)
        if upper - lower <= tol * rho:
            return rho
        nxt = y - sigma * x
        nxt /= np.linalg.norm(nxt)
        width = upper - lower
        if width > prev_width:
            # damp a non-monotone bracket by averaging successive iterates
            nxt = 0.5 * (x + nxt)
            nxt /= np.linalg.norm(nxt)
        prev_width = width
        x = nxt
    raise ConvergenceError(
        f"power iteration did not reach tol={tol} in {max_iter} iterations; "
        f"eigenvalue bracket [{lower}, {upper}]",
        last_iterate=x,
        achieved=(upper - lower) / rho,
    )


@dataclass(frozen=True)
class GammaResult:
    """Maximum of the plain GCD sum over N-subsets of [1, bound].

    `terms` is the exact value as sum over squarefree r of terms[r]/sqrt(r).
    """

    value: float
    witness: tuple[int, ...]
    terms: dict[int, Fraction]

    def decimal(self, digits: int = 50) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = digits + 5
            return +sum((Decimal(q.numerator) / q.denominator / Decimal(r).sqrt() for r, q in self.terms.items()), Decimal(0))


def _squarefree_split(q: int) -> tuple[int, int]:
    """q = s^2 * r with r squarefree; returns (s, r)."""
    s, r = 1, 1
    d = 2
    while d * d <= q:
        e = 0
        while q % d == 0:
            q //= d
            e += 1
        s *= d ** (e // 2)
        r *= d ** (e % 2)
        d += 1
    return s, r * q


def exact_gamma_terms(ns: Sequence[int]) -> dict[int, Fraction]:
    """N^{-1} sum gcd(n_k,n_l)/sqrt(n_k n_l) as {squarefree r: rational coefficient of 1/sqrt(r)}."""
    N = len(ns)
    terms: dict[int, Fraction] = {}
    for k, m in enumerate(ns):
        for l, n in enumerate(ns):
            g = math.gcd(m, n)
            s, r = _squarefree_split((m // g) * (n // g))
            terms[r] = terms.get(r, Fraction(0)) + Fraction(1, N * s)
    return {r: q for r, q in sorted(terms.items()) if q}


def brute_force_gamma(N: int, bound: int, budget: int = BRUTE_FORCE_BUDGET) -> GammaResult:
    """Exhaustive max of plain_gamma over all N-element subsets of [1, bound]."""
    if N < 1 or bound < N:
        raise DomainError(f"need 1 <= N <= bound, got N={N}, bound={bound}")
    count = math.comb(bound, N)
    if count > budget:
        raise ResourceBudgetError(f"C({bound}, {N}) = {count} subsets exceeds the budget {budget}")
    ints = np.arange(1, bound + 1)
    g = np.gcd.outer(ints, ints) / np.sqrt(np.outer(ints, ints).astype(float))
    combos = np.array(list(itertools.combinations(range(bound), N)), dtype=np.int64).reshape(count, N)
    vals = np.full(count, float(N))
    for i, j in itertools.combinations(range(N), 2):
        vals += 2.0 * g[combos[:, i], combos[:, j]]
    vals /= N
    best = vals.max()
    # settle near-ties with the exact representation
    near = np.flatnonzero(vals >= best - 1e-9)
    candidates = []
    for idx in near:
        ns = tuple(int(v) + 1 for v in combos[idx])
        res = GammaResult(float(vals[idx]), ns, exact_gamma_terms(ns))
        candidates.append((res.decimal(), ns, res))
    candidates.sort(key=lambda c: (-c[0], c[1]))
    exact_value, _, res = candidates[0]
    return GammaResult(float(exact_value), res.witness, res.terms)
