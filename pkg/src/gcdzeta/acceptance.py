"""Acceptance criteria as callable checks.

Each check returns a CriterionResult with the measured quantity, the
tolerance it is held to, and the wall-clock time.  A check passes only if
the measurement is within tolerance and the runtime is within its limit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import construction as cons
from . import gcdsum, resonance, zeta
from .arith import FactoredInteger, sieve
from .presets import CONSTRUCTION_PRESETS, SMOOTHED_SUM_GRID, RESONANCE_PRESETS


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    measured: str
    tolerance: str
    ok: bool
    runtime: float
    limit: float
    details: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        return self.ok and self.runtime <= self.limit

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.number:2d} {self.name}: measured {self.measured}; "
            f"required {self.tolerance}; {self.runtime:.1f}s (limit {self.limit:g}s)"
        )


def _timed(number: int, name: str, limit: float, body: Callable[[], tuple[str, str, bool, dict]]) -> CriterionResult:
    t0 = time.perf_counter()
    measured, tol, ok, details = body()
    return CriterionResult(number, name, measured, tol, bool(ok), time.perf_counter() - t0, limit, details)


def random_node_sets(count: int, max_nodes: int, prime_bound: int, seed: int, max_omega: int = 4, exact: bool = False):
    """Random sets of distinct squarefree nodes built from primes <= prime_bound.

    Set sizes are uniform on [1, max_nodes], or exactly max_nodes if `exact`.
    """
    rng = np.random.default_rng(seed)
    table = sieve(1, prime_bound)
    out = []
    for _ in range(count):
        size = max_nodes if exact else int(rng.integers(1, max_nodes + 1))
        masks: set[int] = set()
        while len(masks) < size:
            k = int(rng.integers(0, max_omega + 1))
            pos = rng.choice(len(table), size=k, replace=False)
            masks.add(sum(1 << int(i) for i in pos))
        nodes = [FactoredInteger(m, table) for m in sorted(masks)]
        out.append((nodes, rng.uniform(0.05, 1.0, size)))
    return out


def quadratic_form_oracle(seed: int = 1) -> CriterionResult:
    def body():
        worst = 0.0
        for nodes, w in random_node_sets(200, 100, 1000, seed):
            val = gcdsum.quadratic_form(gcdsum.GcdForm(nodes, w))
            ref = gcdsum.quadratic_form_exact([n.value for n in nodes], w)
            worst = max(worst, float(abs((type(ref)(val) - ref) / ref)))
        return f"max rel err {worst:.2e}", "<= 1e-12", worst <= 1e-12, {"max_rel_err": worst}

    return _timed(1, "GCD quadratic form vs exact oracle", 30, body)


def gamma_two_oracle() -> CriterionResult:
    def body():
        res = gcdsum.brute_force_gamma(2, 50)
        exact = res.terms == {1: Fraction(1), 2: Fraction(1)}
        a, b = res.witness
        ok = exact and b == 2 * a
        return (
            f"terms {dict((r, str(q)) for r, q in res.terms.items())}, witness {res.witness}",
            "1 + 1/sqrt(2) exactly, witness (n, 2n)",
            ok,
            {"value": res.value, "witness": list(res.witness)},
        )

    return _timed(2, "Gamma(2) brute force", 10, body)


def euler_product_identity() -> CriterionResult:
    def body():
        params = cons.ConstructionParams(10**6, 0.5, a=1.5)
        prod = cons.a_n_product(params)
        direct = cons.a_n_direct(params)
        rel = abs(prod - direct) / abs(direct)
        return (
            f"rel diff {rel:.2e} (|P|={len(cons.prime_window(params))}, A_N={prod:.12f})",
            "<= 1e-10",
            rel <= 1e-10,
            {"a_n_product": prod, "a_n_direct": direct},
        )

    return _timed(3, "Euler product identity", 300, body)


def construction_invariants() -> CriterionResult:
    def body():
        parts, ok, details = [], True, {}
        for key in ("n1e6", "n1e8"):
            mset = cons.build_set(CONSTRUCTION_PRESETS[key])
            closed = gcdsum.is_divisor_closed(mset.masks)
            capped = all(mset.respects_caps(m) for m in mset.masks)
            sized = len(mset) <= mset.params.budget
            ray = cons.rayleigh_of_set(mset)
            low = cons.divisor_lower_bound(mset)
            good = closed and capped and sized and ray >= low
            ok &= good
            parts.append(f"{key}: |M|={len(mset)} closed={closed} caps={capped} rayleigh {ray:.6f} >= {low:.6f}")
            details[key] = {"size": len(mset), "rayleigh": ray, "lower_bound": low}
        return "; ".join(parts), "closed, capped, |M| <= budget, rayleigh >= lower bound", ok, details

    return _timed(4, "construction invariants", 300, body)


def prime_sum_check() -> CriterionResult:
    def body():
        d = cons.prime_sum_diagnostic(cons.ConstructionParams(10**10, 0.5))
        dev = abs(d.sum / d.integral_quadrature - 1.0)
        return f"|sum/integral - 1| = {dev:.4f}", "<= 0.15", dev <= 0.15, {"sum": d.sum, "integral": d.integral_quadrature}

    return _timed(5, "prime sum vs integral", 60, body)


def divisor_tail_check() -> CriterionResult:
    def body():
        mset = cons.build_set(CONSTRUCTION_PRESETS["n1e6"])
        tail = cons.divisor_tail(mset, 2.0)
        return f"tail ratio {tail:.3e}", "<= 0.1", tail <= 0.1, {"tail": tail}

    return _timed(6, "large-divisor tail", 60, body)


def eigenvalue_chain(seed: int = 7) -> CriterionResult:
    def body():
        worst_chain = -math.inf
        for nodes, _ in random_node_sets(50, 60, 1000, seed):
            g = gcdsum.plain_gamma(nodes)
            r = gcdsum.rayleigh(gcdsum.GcdForm(nodes))
            lam = gcdsum.top_eigenvalue(nodes)
            worst_chain = max(worst_chain, g - r, r - lam - 1e-8)
        worst_eig = 0.0
        for nodes, _ in random_node_sets(50, 10, 1000, seed + 1, exact=True):
            lam = gcdsum.top_eigenvalue(nodes)
            ref = float(np.linalg.eigvalsh(gcdsum.gram_matrix(nodes))[-1])
            worst_eig = max(worst_eig, abs(lam - ref))
        ok = worst_chain <= 0 and worst_eig <= 1e-8
        return (
            f"chain slack {worst_chain:.2e}, eigen err {worst_eig:.2e}",
            "chain slack <= 0, |power - dense| <= 1e-8",
            ok,
            {"chain": worst_chain, "eig": worst_eig},
        )

    return _timed(7, "eigenvalue chain", 120, body)


def zeta_oracle(seed: int = 3) -> CriterionResult:
    def body():
        z0 = zeta.zeta_reference(0.0).value
        e0 = abs(z0 - (-1.4603545088095868))
        zz = abs(zeta.zeta_reference(14.134725141).value)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for t in rng.uniform(10.0, 5e3, 100):
            approx = zeta.zeta_approx(float(t), 1e4)
            ref = zeta.zeta_reference(float(t))
            worst = max(worst, abs(approx.value - ref.value) / (approx.abs_error_bound + ref.abs_error_bound))
        ok = e0 <= 1e-8 and zz <= 1e-5 and worst <= 1.0
        return (
            f"|zeta(1/2)-ref| {e0:.1e}, |zeta at first zero| {zz:.1e}, max err/bound {worst:.3f}",
            "1e-8; 1e-5; <= 1",
            ok,
            {"err0": e0, "first_zero": zz, "approx_ratio": worst},
        )

    return _timed(8, "zeta oracle", 120, body)


def moment_machinery() -> CriterionResult:
    def body():
        preset = RESONANCE_PRESETS["t1e3"]
        spec = resonance.build_resonator(cons.build_set(preset.construction), preset.T, preset.beta)
        mom = resonance.moments(spec)
        bound = resonance.m1_grid_bound(spec)
        _, zmax = resonance.dense_zeta_max(preset.T, preset.beta)
        fourier = max(abs(resonance.gaussian_hat_numeric(x) - float(resonance.gaussian_hat(x))) for x in (0.0, 1.0, 5.0))
        ok = mom.ratio <= zmax and mom.M1 <= bound * (1 + 1e-6) and fourier <= 1e-8
        return (
            f"|M2|/M1 {mom.ratio:.4f} <= max|zeta| {zmax:.4f}; M1/bound {mom.M1 / bound:.4f}; Fourier err {fourier:.1e}",
            "ratio <= scan max; M1 <= bound (1+1e-6); Fourier 1e-8",
            ok,
            {"M1": mom.M1, "M2": [mom.M2.real, mom.M2.imag], "grid_bound": bound, "zeta_max": zmax},
        )

    return _timed(9, "moment machinery", 600, body)


def smoothed_sum_stability() -> CriterionResult:
    def body():
        fit = resonance.smoothed_sum_fit(SMOOTHED_SUM_GRID, 1e3, 0.4)
        bounded = all(r.ratio <= fit.constant for r in fit.records)
        return (
            f"C = {fit.constant:.4f}; ratios {[round(r.ratio, 4) for r in fit.records]}; "
            f"dense sup exceeds C by {100 * fit.spread:.0f}%",
            "single C bounds every ratio, dense sup within 20% of C",
            bounded and fit.stable,
            {"C": fit.constant, "spread": fit.spread, "ratios": [r.ratio for r in fit.records]},
        )

    return _timed(10, "lhs/bound uniform in M", 120, body)


def resonance_efficacy(seeds=(0, 1, 2, 3, 4)) -> CriterionResult:
    def body():
        preset = RESONANCE_PRESETS["t1e4"]
        spec = resonance.build_resonator(cons.build_set(preset.construction), preset.T, preset.beta)
        rows = []
        for seed in seeds:
            res = resonance.guided_scan(spec, preset.scan_budget, seed)
            rows.append((seed, res.guided_max, res.baseline_max))
        wins = sum(g >= b for _, g, b in rows)
        return (
            f"guided >= baseline in {wins}/{len(rows)} seeds "
            + ", ".join(f"{g:.2f} vs {b:.2f}" for _, g, b in rows),
            ">= 4 of 5",
            wins >= 4,
            {"rows": rows},
        )

    return _timed(11, "resonance-guided scan vs random", 900, body)


CRITERIA = (
    quadratic_form_oracle,
    gamma_two_oracle,
    euler_product_identity,
    construction_invariants,
    prime_sum_check,
    divisor_tail_check,
    eigenvalue_chain,
    zeta_oracle,
    moment_machinery,
    smoothed_sum_stability,
    resonance_efficacy,
)


def run_all(select=None, report=print) -> list[CriterionResult]:
    results = []
    for i, check in enumerate(CRITERIA, start=1):
        if select and i not in select:
            continue
        res = check()
        if report:
            report(res.line())
        results.append(res)
    return results
