"""Resonator built on the extremal set, smoothed moments, and resonance-guided scans.

The resonator is R(t) = sum_{m in M'} r(m) m^{-it}.  M' keeps one
representative per multiplicative bin [(1+1/T)^j, (1+1/T)^{j+1}) of M (the
smallest member), and r(m)^2 collects f(n)^2 over members n with
|n/m - 1| <= (log T)^2 / T.  The moments

    M1 = int_{T^beta <= |t| <= T} |R(t)|^2 Phi(t log T / T) dt
    M2 = int_{T^beta <= |t| <= T} zeta(1/2+it) |R(t)|^2 Phi(t log T / T) dt

with the Gaussian Phi(t) = exp(-t^2/2) satisfy
max |zeta(1/2+it)| >= |M2| / M1 over T^beta <= t <= T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf, wofz

from .arith import FactoredInteger, PrimeTable
from .construction import ExtremalSet
from .errors import ConstructionError, DomainError
from .quadrature import QuadResult, adaptive_gl
from .zeta import main_sum_array, zeta_approx_array, zeta_em

PHI_CUTOFF = 1e-16
SQRT_2PI = math.sqrt(2.0 * math.pi)
_CHUNK = 1 << 22


def gaussian(x):
    return np.exp(-0.5 * np.square(x))


def gaussian_hat(x):
    """Fourier transform int Phi(t) e^{-itx} dt = sqrt(2 pi) Phi(x)."""
    return SQRT_2PI * gaussian(x)


def gaussian_hat_numeric(x: float, half_width: float = 40.0) -> float:
    """int Phi(t) e^{-itx} dt by quadrature; the imaginary part vanishes by symmetry."""
    res = adaptive_gl(lambda t: gaussian(t) * np.cos(t * x), -half_width, half_width, width=2.0, rel_tol=1e-14)
    return float(res.value)


def smoothing_scale(T: float) -> float:
    return math.log(T) / T


def kappa_for(beta: float) -> float:
    return min(0.5, 1.0 - beta)


def coupled_N(T: float, beta: float) -> int:
    """N = floor(T^kappa), the cardinality scale tied to T."""
    return math.floor(T ** kappa_for(beta))


@dataclass
class ResonatorSpec:
    T: float
    beta: float
    table: PrimeTable
    bins: np.ndarray
    rep_masks: list[int]
    rep_values: list[int] = field(repr=False)
    rep_logs: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    f_values: np.ndarray = field(repr=False)

    @property
    def kappa(self) -> float:
        return kappa_for(self.beta)

    @property
    def grid_base(self) -> float:
        return 1.0 + 1.0 / self.T

    @property
    def reps(self) -> list[FactoredInteger]:
        return [FactoredInteger(m, self.table) for m in self.rep_masks]

    @property
    def log_spread(self) -> float:
        return float(self.rep_logs.max() - self.rep_logs.min()) if len(self.rep_logs) else 0.0

    @property
    def t_range(self) -> tuple[float, float]:
        return self.T**self.beta, self.T

    def __len__(self):
        return len(self.rep_masks)

    @classmethod
    def from_terms(cls, values: Sequence[int], coeffs: Sequence[float], T: float, beta: float) -> "ResonatorSpec":
        """A resonator with explicit terms, bypassing the construction (for tests and demos)."""
        values = [int(v) for v in values]
        logs = np.array([math.log(v) for v in values])
        order = np.argsort(logs, kind="stable")
        vals = [values[i] for i in order]
        table = PrimeTable.from_primes([])
        bins = np.floor(logs[order] / math.log1p(1.0 / T)).astype(np.int64)
        c = np.asarray(coeffs, dtype=float)[order]
        return cls(T, beta, table, bins, [0] * len(vals), vals, logs[order], c, c.copy())


def _bin_index(value: int, log_value: float, T: float) -> int:
    """floor(log n / log(1 + 1/T)), redone in 60-digit decimals near a bin edge.

    (1 + 1/T)^j is an integer only for j = 0, so for n > 1 the quotient is
    never an exact integer and enough digits always settle the floor.
    """
    step = math.log1p(1.0 / T)
    x = log_value / step
    j = math.floor(x)
    if min(x - j, j + 1 - x) > 1e-12 * (1.0 + x) or value == 1:
        return j
    with localcontext() as ctx:
        ctx.prec = 60
        q = Fraction(T)
        base = Decimal(q.numerator + q.denominator) / Decimal(q.numerator)
        xd = Decimal(value).ln() / base.ln()
        jd = int(xd.to_integral_value(rounding=ROUND_FLOOR))
        if min(xd - jd, jd + 1 - xd) < Decimal(10) ** -40:
            raise ConstructionError(f"cannot place {value} in a bin at T={T}")
        return jd


def _window_sums(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """sum(values[lo_i:hi_i]) for each i, summing each window directly."""
    padded = np.append(values, 0.0)
    idx = np.empty(2 * len(lo), dtype=np.int64)
    idx[0::2] = lo
    idx[1::2] = hi
    return np.add.reduceat(padded, idx)[0::2]


def build_resonator(mset: ExtremalSet, T: float, beta: float) -> ResonatorSpec:
    if not len(mset):
        raise DomainError("the extremal set is empty")
    if T < 10:
        raise DomainError("T must be at least 10")
    if not 0 < beta < 1:
        raise DomainError("beta must lie in (0, 1)")
    values = [m.value for m in mset.members]
    order = sorted(range(len(values)), key=values.__getitem__)
    vals = [values[i] for i in order]
    logs = mset.log_values[order]
    f2 = mset.f_values[order] ** 2
    bins = np.array([_bin_index(v, l, T) for v, l in zip(vals, logs)], dtype=np.int64)
    first = np.flatnonzero(np.diff(bins, prepend=bins[0] - 1))
    delta = math.log(T) ** 2 / T
    lo = np.searchsorted(logs, logs[first] + math.log1p(-delta), side="left")
    hi = np.searchsorted(logs, logs[first] + math.log1p(delta), side="right")
    coeffs = np.sqrt(_window_sums(f2, lo, hi))
    masks = [mset.masks[order[i]] for i in first]
    return ResonatorSpec(
        T=float(T),
        beta=float(beta),
        table=mset.table,
        bins=bins[first],
        rep_masks=masks,
        rep_values=[vals[i] for i in first],
        rep_logs=logs[first],
        coeffs=coeffs,
        f_values=np.sqrt(f2[first]),
    )


def evaluate_R(spec: ResonatorSpec, t):
    """R(t) = sum_m r(m) m^{-it}; scalar in, complex out, or array in, array out."""
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(len(ts), dtype=complex)
    width = max(1, _CHUNK // max(1, len(spec.rep_logs)))
    for start in range(0, len(ts), width):
        phase = np.outer(ts[start : start + width], spec.rep_logs)
        out[start : start + width] = np.cos(phase) @ spec.coeffs - 1j * (np.sin(phase) @ spec.coeffs)
    return complex(out[0]) if scalar else out


def evaluate_R_blocks(spec: ResonatorSpec, starts, offsets) -> np.ndarray:
    """R(starts[p] + offsets[j]) as a (len(starts), len(offsets)) array.

    m^{-i(s+o)} = m^{-is} m^{-io} splits the phase matrix, so only one row of
    exponentials per start is needed and the rest is a matrix product.
    """
    starts = np.atleast_1d(np.asarray(starts, dtype=float))
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    logs = spec.rep_logs
    inner = np.exp(-1j * np.outer(logs, offsets))
    out = np.empty((len(starts), len(offsets)), dtype=complex)
    width = max(1, _CHUNK // max(1, len(logs)))
    for lo in range(0, len(starts), width):
        outer = np.exp(-1j * np.outer(starts[lo : lo + width], logs)) * spec.coeffs
        out[lo : lo + width] = outer @ inner
    return out


def _R_on_grid(spec: ResonatorSpec, t0: float, step: float, count: int, block: int = 64) -> np.ndarray:
    """R(t0 + k step) for k < count, in blocks of equally spaced points."""
    n_blocks = -(-count // block)
    starts = t0 + step * block * np.arange(n_blocks)
    vals = evaluate_R_blocks(spec, starts, step * np.arange(block))
    return vals.ravel()[:count]


def _abs_R_squared(spec: ResonatorSpec, ts: np.ndarray) -> np.ndarray:
    r = evaluate_R(spec, ts)
    return r.real**2 + r.imag**2


def _abs_R_squared_panels(spec: ResonatorSpec, mid: np.ndarray, half: np.ndarray, x: np.ndarray) -> np.ndarray:
    """|R|^2 at Gauss-Legendre nodes mid + half * x, grouped by panel width."""
    out = np.empty((len(mid), len(x)))
    for h in np.unique(half):
        sel = half == h
        r = evaluate_R_blocks(spec, mid[sel], h * x)
        out[sel] = r.real**2 + r.imag**2
    return out


def m1_grid_bound(spec: ResonatorSpec) -> float:
    """sqrt(2 pi) (T/log T) sum_{m,n} r(m) r(n) Phi((T/log T) log(m/n)), Phi < 1e-16 pruned."""
    inv_scale = 1.0 / smoothing_scale(spec.T)
    cut = math.sqrt(-2.0 * math.log(PHI_CUTOFF)) / inv_scale
    r, logs = spec.coeffs, spec.rep_logs
    terms = [float(np.sum(r * r))]
    d = 1
    while d < len(logs):
        diff = logs[d:] - logs[:-d]
        near = diff <= cut
        if not near.any():
            break
        terms.append(2.0 * float(np.sum((r[d:] * r[:-d] * gaussian(inv_scale * diff))[near])))
        d += 1
    return SQRT_2PI * inv_scale * math.fsum(terms)


def _panel_width(spec: ResonatorSpec, extra_freq: float = 0.0) -> float:
    freq = 2.0 * spec.log_spread + extra_freq
    width = spec.T / math.log(spec.T)
    if freq > 0:
        width = min(width, 8.0 * math.pi / freq)
    return width


def m1_quadrature(spec: ResonatorSpec, rel_tol: float = 1e-6) -> QuadResult:
    """M1 by adaptive Gauss-Legendre panels; the integrand is even in t."""
    a = smoothing_scale(spec.T)
    lo, hi = spec.t_range

    def integrand(mid, half, x):
        nodes = mid[:, None] + half[:, None] * x
        return _abs_R_squared_panels(spec, mid, half, x) * gaussian(a * nodes)

    res = adaptive_gl(integrand, lo, hi, width=_panel_width(spec), rel_tol=rel_tol * 1e-3, panelwise=True)
    return QuadResult(2.0 * float(res.value), 2.0 * res.error, 2 * res.panels, res.evaluations)


ZETA_SOURCES = ("em", "approx", "reference")


def zeta_source(name: str, T: float) -> Callable[[np.ndarray], np.ndarray]:
    if name == "em":
        return zeta_em
    if name == "approx":
        return lambda ts: zeta_approx_array(ts, T)
    if name == "reference":
        from .zeta import zeta_reference

        return lambda ts: np.array([zeta_reference(float(t)).value for t in np.atleast_1d(ts)])
    raise DomainError(f"unknown zeta source {name!r}; choose from {ZETA_SOURCES}")


@dataclass(frozen=True)
class MomentResult:
    M1: float
    M2: complex
    M1_error: float
    M2_error: float
    evaluations: int

    @property
    def ratio(self) -> float:
        return abs(self.M2) / self.M1


def m2_quadrature(spec: ResonatorSpec, source: str = "em", rel_tol: float = 1e-6, mass: float | None = None) -> QuadResult:
    """M2 by adaptive quadrature; zeta(1/2-it) = conj zeta(1/2+it) folds the range onto t > 0.

    The error combines the quadrature estimate with the evaluator's error
    times the M1-type mass of the integrand (recomputed unless `mass` is given).
    """
    a = smoothing_scale(spec.T)
    lo, hi = spec.t_range
    zeta = zeta_source(source, spec.T)

    def integrand(mid, half, x):
        nodes = mid[:, None] + half[:, None] * x
        z = zeta(nodes.ravel()).reshape(nodes.shape)
        return z * _abs_R_squared_panels(spec, mid, half, x) * gaussian(a * nodes)

    res = adaptive_gl(
        integrand, lo, hi, width=_panel_width(spec, math.log(spec.T)), rel_tol=rel_tol * 1e-3, panelwise=True,
    )
    half = complex(res.value)
    value = half + half.conjugate()
    zeta_err = {"em": 1e-10, "approx": 10.0 / math.sqrt(spec.T), "reference": 1e-10}[source]
    if mass is None:
        mass = m1_quadrature(spec, rel_tol).value
    return QuadResult(value, 2.0 * res.error + zeta_err * mass, 2 * res.panels, res.evaluations)


def moments(spec: ResonatorSpec, source: str = "em", rel_tol: float = 1e-6) -> MomentResult:
    m1 = m1_quadrature(spec, rel_tol)
    m2 = m2_quadrature(spec, source, rel_tol, mass=float(m1.value))
    return MomentResult(float(m1.value), complex(m2.value), m1.error, m2.error, m1.evaluations + m2.evaluations)


def dense_zeta_max(T: float, beta: float, step: float = 0.02, refine: int = 40, zeta=zeta_em) -> tuple[float, float]:
    """(t, |zeta|) at the largest |zeta(1/2+it)| found on [T^beta, T].

    A uniform grid is followed by golden-section refinement of the `refine`
    best grid points, each within one grid cell.
    """
    lo, hi = T**beta, T
    ts = np.arange(lo, hi, step)
    ts = np.append(ts, hi)
    vals = np.abs(zeta(ts))
    top = np.argsort(vals)[::-1][:refine]
    best_t, best_v = float(ts[top[0]]), float(vals[top[0]])
    a = np.clip(ts[top] - step, lo, hi)
    b = np.clip(ts[top] + step, lo, hi)
    t_ref, v_ref = _golden_max(lambda x: np.abs(zeta(x)), a, b, 30)
    k = int(np.argmax(v_ref))
    if v_ref[k] > best_v:
        best_t, best_v = float(t_ref[k]), float(v_ref[k])
    return best_t, best_v


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, a: np.ndarray, b: np.ndarray, evals: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised golden-section search for a maximum of f on each [a_i, b_i].

    Uses exactly `evals` evaluations per bracket and returns the best point
    evaluated, which need not be the final bracket midpoint.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    if evals <= 0:
        return 0.5 * (a + b), np.full(len(a), -np.inf)
    if evals == 1:
        x = 0.5 * (a + b)
        return x, f(x)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best_t = np.where(fc >= fd, c, d)
    best_v = np.maximum(fc, fd)
    for _ in range(evals - 2):
        left = fc >= fd
        # left probe wins: keep [a, d]; otherwise keep [c, b]
        a, b = np.where(left, a, c), np.where(left, d, b)
        c, d = (
            np.where(left, b - _INV_PHI * (b - a), d),
            np.where(left, c, a + _INV_PHI * (b - a)),
        )
        probe = np.where(left, c, d)
        fp = f(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        better = fp > best_v
        best_t = np.where(better, probe, best_t)
        best_v = np.where(better, fp, best_v)
    return best_t, best_v


def window_integral(lam, X: float, a: float) -> np.ndarray:
    """int_{-X}^{X} e^{i lam t} Phi(a t) dt in closed form.

    Completing the square gives sqrt(2 pi)/a * Re[e^{-mu^2} erf(U - i mu)]
    with U = aX/sqrt 2 and mu = lam/(a sqrt 2); writing erf through the
    Faddeeva function w keeps every factor bounded:
    e^{-mu^2} erf(U - i mu) = e^{-mu^2} - e^{-U^2} e^{i lam X} w(mu + iU).
    That form cancels badly when U and mu are both small, where erf is
    evaluated directly instead.
    """
    lam = np.asarray(lam, dtype=float)
    U = a * X / math.sqrt(2.0)
    mu = lam / (a * math.sqrt(2.0))
    inner = np.exp(-mu * mu) - math.exp(-U * U) * np.real(np.exp(1j * lam * X) * wofz(mu + 1j * U))
    small = mu * mu + U * U < 4.0
    if np.any(small):
        ms = np.where(small, mu, 0.0)
        inner = np.where(small, np.exp(-ms * ms) * np.real(erf(U - 1j * ms)), inner)
    return SQRT_2PI / a * inner


@dataclass(frozen=True)
class SmoothedSumRecord:
    M: float
    lhs: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.bound


def smoothed_sum_bound(T: float, beta: float) -> float:
    return max(T**beta, math.sqrt(T) * math.log(T))


def smoothed_sum_check(M: float, T: float, beta: float) -> SmoothedSumRecord:
    """|sum_{n<=T} n^{-1/2} int_{-T^beta}^{T^beta} (M/n)^{it} Phi(t log T/T) dt| against its bound."""
    if M <= 0:
        raise DomainError("M must be positive")
    if T > 1e6:
        raise DomainError("direct evaluation of the smoothed sum is limited to T <= 1e6")
    n = np.arange(1, math.floor(T) + 1, dtype=float)
    inner = window_integral(np.log(M / n), T**beta, smoothing_scale(T))
    lhs = abs(math.fsum((inner / np.sqrt(n)).tolist()))
    return SmoothedSumRecord(float(M), lhs, smoothed_sum_bound(T, beta))


def smoothed_sum_quadrature(M: float, T: float, beta: float, rel_tol: float = 1e-10) -> float:
    """Oracle for smoothed_sum_check: integrate M^{it} * sum_{n<=T} n^{-1/2-it} * Phi directly."""
    a = smoothing_scale(T)
    X = T**beta
    logM = math.log(M)
    width = min(X, 2.0 * math.pi / (math.log(T) + abs(logM) + 1.0) * 4)
    res = adaptive_gl(
        lambda t: np.exp(1j * t * logM) * main_sum_array(t, T) * gaussian(a * t),
        -X, X, width=width, rel_tol=rel_tol,
    )
    return abs(complex(res.value))


@dataclass(frozen=True)
class SmoothedSumFit:
    records: tuple[SmoothedSumRecord, ...]
    constant: float
    spread: float

    @property
    def stable(self) -> bool:
        return self.spread <= 0.2


def smoothed_sum_fit(Ms: Sequence[float], T: float, beta: float, dense: int = 200) -> SmoothedSumFit:
    """Single constant C = max lhs/bound over the M-grid, with a stability check.

    Stability is the relative amount by which the sup over a dense
    log-spaced M-grid (covering the same range) exceeds C.
    """
    records = tuple(smoothed_sum_check(M, T, beta) for M in Ms)
    C = max(r.ratio for r in records)
    grid = np.geomspace(min(Ms), max(Ms), dense)
    C_dense = max(C, max(smoothed_sum_check(float(M), T, beta).ratio for M in grid))
    return SmoothedSumFit(records, C, C_dense / C - 1.0)


def window_decay_ratios(lams: Sequence[float], T: float, beta: float) -> np.ndarray:
    """|int_{-T^beta}^{T^beta} e^{i lam t} Phi dt| / min(T^beta, 1/|lam|) on a lambda grid."""
    X = T**beta
    lams = np.asarray(lams, dtype=float)
    vals = np.abs(window_integral(lams, X, smoothing_scale(T)))
    ref = np.minimum(X, 1.0 / np.maximum(np.abs(lams), 1e-300))
    return vals / ref


def cauchy_schwarz_check(spec: ResonatorSpec, mset: ExtremalSet) -> float:
    """Largest ratio of sum f(m) f(n) over r(m') r(n') for the windowed pairs.

    For k in M and representatives m', n', the sum runs over m, n = mk in M
    with 0 <= m/m' - 1 <= 1/T and 0 <= n/n' - 1 <= 1/T.  Cauchy-Schwarz
    puts every ratio at or below 1.  Exhaustive; meant for |M| <= a few hundred.
    """
    values = [m.value for m in mset.members]
    fvals = mset.f_values
    by_mask = {m: i for i, m in enumerate(mset.masks)}
    reps = np.array(spec.rep_values, dtype=object)
    rep_logs = spec.rep_logs
    r_of = dict(zip(spec.rep_values, spec.coeffs))
    step = math.log1p(1.0 / spec.T)
    acc: dict[tuple[int, int, int], float] = {}

    def reps_near(v: int, logv: float) -> list[int]:
        lo = np.searchsorted(rep_logs, logv - step - 1e-9, side="left")
        hi = np.searchsorted(rep_logs, logv + 1e-9, side="right")
        out = []
        for i in range(lo, hi):
            w = reps[i]
            if w <= v and v * spec.T <= w * (spec.T + 1):
                out.append(int(w))
        return out

    logs = mset.log_values
    for ik, k in enumerate(mset.masks):
        for im, m in enumerate(mset.masks):
            if k & m:
                continue
            jn = by_mask.get(k | m)
            if jn is None:
                continue
            contrib = float(fvals[im] * fvals[jn])
            for mp in reps_near(values[im], logs[im]):
                for np_ in reps_near(values[jn], logs[jn]):
                    key = (values[ik], mp, np_)
                    acc[key] = acc.get(key, 0.0) + contrib
    return max((v / (r_of[mp] * r_of[np_]) for (k, mp, np_), v in acc.items()), default=0.0)


@dataclass(frozen=True)
class Candidate:
    t: float
    abs_zeta: float
    abs_R: float
    start: float


@dataclass(frozen=True)
class ScanResult:
    guided: tuple[Candidate, ...]
    baseline: tuple[Candidate, ...]
    evaluations: int
    seed: int

    @property
    def guided_max(self) -> float:
        return max((c.abs_zeta for c in self.guided), default=0.0)

    @property
    def baseline_max(self) -> float:
        return max((c.abs_zeta for c in self.baseline), default=0.0)


def _ascent_half_width(t: np.ndarray) -> np.ndarray:
    """Half the mean gap between zeros near t, pi / log(t / 2 pi), floored at 0.25."""
    return np.maximum(math.pi / np.log(np.maximum(t, 20.0) / (2.0 * math.pi)), 0.25)


def guided_scan(
    spec: ResonatorSpec,
    t_budget: int,
    seed: int,
    zeta: Callable[[np.ndarray], np.ndarray] = zeta_em,
    top_fraction: float = 0.01,
    evals_per_candidate: int = 12,
    oversample: float = 1.0,
) -> ScanResult:
    """Search for large |zeta(1/2+it)| on [T^beta, T] starting where |R(t)| is large.

    The guided arm samples |R| on a grid of spacing 2 pi / log(max m) with a
    seeded random offset, keeps the top `top_fraction` of grid points, and
    runs a golden-section ascent of |zeta| around each.  The baseline arm runs
    the same ascent from uniformly random starting points.  Both arms spend
    exactly the same number of zeta evaluations (at most t_budget).
    """
    if t_budget <= 0:
        return ScanResult((), (), 0, seed)
    rng = np.random.default_rng(seed)
    lo, hi = spec.t_range
    log_max = float(spec.rep_logs.max()) if len(spec.rep_logs) else 0.0
    spacing = 2.0 * math.pi / (max(log_max, 1.0) * oversample)
    offset = rng.uniform(0.0, spacing)
    count = int(math.ceil((hi - lo - offset) / spacing))
    grid = lo + offset + spacing * np.arange(count)
    absR = np.abs(_R_on_grid(spec, lo + offset, spacing, count))
    n_top = max(1, int(round(top_fraction * len(grid))))
    per = min(evals_per_candidate, t_budget)
    n_cand = max(1, min(n_top, t_budget // per))
    tie_break = rng.random(len(grid))
    # neighbouring grid points on one |R| peak would repeat the same ascent
    peak = np.ones(len(grid), dtype=bool)
    peak[1:] &= absR[1:] >= absR[:-1]
    peak[:-1] &= absR[:-1] >= absR[1:]
    idx = np.flatnonzero(peak)
    ranked = idx[np.lexsort((tie_break[idx], -absR[idx]))][:n_cand]
    n_cand = len(ranked)
    starts_g = grid[ranked]
    starts_b = np.sort(rng.uniform(lo, hi, n_cand))

    def ascend(starts):
        w = _ascent_half_width(starts)
        a = np.clip(starts - w, lo, hi)
        b = np.clip(starts + w, lo, hi)
        return _golden_max(lambda x: np.abs(zeta(x)), a, b, per)

    tg, vg = ascend(starts_g)
    tb, vb = ascend(starts_b)
    rg = np.abs(evaluate_R(spec, tg))
    rb = np.abs(evaluate_R(spec, tb))
    guided = sorted(
        (Candidate(float(t), float(v), float(r), float(s)) for t, v, r, s in zip(tg, vg, rg, starts_g)),
        key=lambda c: -c.abs_zeta,
    )
    baseline = sorted(
        (Candidate(float(t), float(v), float(r), float(s)) for t, v, r, s in zip(tb, vb, rb, starts_b)),
        key=lambda c: -c.abs_zeta,
    )
    return ScanResult(tuple(guided), tuple(baseline), per * n_cand, seed)
