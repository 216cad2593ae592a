import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcdzeta.arith import FactoredInteger, sieve
from gcdzeta.errors import ContractError, ConvergenceError, DomainError, ResourceBudgetError
from gcdzeta.gcdsum import (
    DivisorLattice,
    GcdForm,
    brute_force_gamma,
    divisor_closure,
    exact_gamma_terms,
    gram_matrix,
    is_divisor_closed,
    plain_gamma,
    quadratic_form,
    quadratic_form_exact,
    rayleigh,
    top_eigenvalue,
)

SMALL = sieve(0, 200)


def nodes_of(*values, table=SMALL):
    return [table.factor(v) for v in values]


def double_loop(values, weights):
    return sum(
        weights[k] * weights[l] * math.gcd(m, n) / math.sqrt(m * n)
        for k, m in enumerate(values)
        for l, n in enumerate(values)
    )


def test_quadratic_form_examples():
    assert quadratic_form(GcdForm(nodes_of(1))) == 1.0
    assert quadratic_form(GcdForm(nodes_of(2, 3))) == pytest.approx(2 + 2 / math.sqrt(6), rel=1e-15)
    assert quadratic_form(GcdForm(nodes_of(2, 3))) == pytest.approx(2.816497, abs=1e-6)
    # 4 is not squarefree, so {1, 2, 4} goes through the integer oracle
    assert float(quadratic_form_exact([1, 2, 4])) == pytest.approx(4 + 2 * math.sqrt(2), rel=1e-15)


def test_form_invariants():
    with pytest.raises(ContractError):
        GcdForm(nodes_of(2, 2))
    with pytest.raises(DomainError):
        GcdForm(nodes_of(2, 3), [1.0, 0.0])
    with pytest.raises(DomainError):
        GcdForm([])
    with pytest.raises(ContractError):
        GcdForm([sieve(0, 10).factor(2), sieve(0, 20).factor(3)])
    g = gram_matrix(nodes_of(1, 2, 3, 6, 35))
    assert np.allclose(g, g.T) and np.all(np.diag(g) == 1.0)


def test_plain_gamma_examples():
    assert plain_gamma(nodes_of(97)) == 1.0
    assert plain_gamma(nodes_of(1, 2)) == pytest.approx(1 + 1 / math.sqrt(2), rel=1e-15)
    expected = (3 + 2 * (2 / math.sqrt(60) + 3 / math.sqrt(90) + 5 / math.sqrt(150))) / 3
    assert plain_gamma(nodes_of(6, 10, 15)) == pytest.approx(expected, rel=1e-15)
    assert plain_gamma(nodes_of(6, 10, 15)) == pytest.approx(1.6551166308185747, rel=1e-15)
    with pytest.raises(DomainError):
        plain_gamma([])


def test_rayleigh_examples():
    assert rayleigh(GcdForm(nodes_of(7), [3.0])) == 1.0
    assert rayleigh(GcdForm(nodes_of(2, 3))) == pytest.approx(1.408248, abs=1e-6)


node_sets = st.lists(st.integers(0, 2**12 - 1), min_size=1, max_size=25, unique=True)
TABLE12 = sieve(0, 40)  # 12 primes


@settings(max_examples=80, deadline=None)
@given(node_sets, st.data())
def test_quadratic_form_matches_exact(masks, data):
    nodes = [FactoredInteger(m, TABLE12) for m in masks]
    w = data.draw(st.lists(st.floats(0.01, 10.0), min_size=len(nodes), max_size=len(nodes)))
    val = quadratic_form(GcdForm(nodes, w))
    ref = quadratic_form_exact([n.value for n in nodes], w)
    assert abs(val - float(ref)) <= 1e-12 * float(ref)
    assert val == pytest.approx(double_loop([n.value for n in nodes], w), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(node_sets, st.randoms(use_true_random=False))
def test_quadratic_form_permutation_invariant(masks, rnd):
    nodes = [FactoredInteger(m, TABLE12) for m in masks]
    w = [rnd.uniform(0.1, 2.0) for _ in nodes]
    perm = list(range(len(nodes)))
    rnd.shuffle(perm)
    a = quadratic_form(GcdForm(nodes, w))
    b = quadratic_form(GcdForm([nodes[i] for i in perm], [w[i] for i in perm]))
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(node_sets, st.floats(0.01, 100.0))
def test_quadratic_scaling_and_rayleigh_invariance(masks, lam):
    nodes = [FactoredInteger(m, TABLE12) for m in masks]
    w = np.linspace(0.5, 1.5, len(nodes))
    f1 = GcdForm(nodes, w)
    f2 = GcdForm(nodes, lam * w)
    assert quadratic_form(f2) == pytest.approx(lam**2 * quadratic_form(f1), rel=1e-12)
    assert rayleigh(f2) == pytest.approx(rayleigh(f1), rel=1e-12)


def test_gram_positive_semidefinite():
    rng = np.random.default_rng(0)
    nodes = [FactoredInteger(int(m), TABLE12) for m in rng.choice(2**12, 60, replace=False)]
    g = gram_matrix(nodes)
    x = rng.standard_normal((1000, len(nodes)))
    assert np.all(np.einsum("ij,jk,ik->i", x, g, x) >= -1e-12)


def test_divisor_lattice_matches_dense():
    rng = np.random.default_rng(3)
    masks = divisor_closure([int(m) for m in rng.choice(2**12, 40, replace=False)])
    assert is_divisor_closed(masks)
    lat = DivisorLattice(masks, TABLE12)
    nodes = [FactoredInteger(m, TABLE12) for m in masks]
    g = gram_matrix(nodes)
    c = rng.uniform(0.1, 1.0, len(masks))
    assert lat.quadratic(c) == pytest.approx(c @ g @ c, rel=1e-12)
    assert np.allclose(lat.matvec(c), g @ c, rtol=1e-12, atol=0)


def test_divisor_closure():
    t = SMALL
    masks = [t.factor(30).mask]
    closed = divisor_closure(masks)
    assert sorted(FactoredInteger(m, t).value for m in closed) == [1, 2, 3, 5, 6, 10, 15, 30]
    assert not is_divisor_closed(masks)


def test_top_eigenvalue_examples():
    assert top_eigenvalue(nodes_of(5)) == pytest.approx(1.0)
    assert top_eigenvalue(nodes_of(1, 2)) == pytest.approx(1 + 1 / math.sqrt(2), abs=1e-10)


def test_top_eigenvalue_dense_oracle_on_10_node_sets():
    rng = np.random.default_rng(11)
    t = sieve(0, 1000)
    for _ in range(20):
        masks = set()
        while len(masks) < 10:
            masks.add(sum(1 << int(i) for i in rng.choice(len(t), int(rng.integers(0, 4)), replace=False)))
        nodes = [FactoredInteger(m, t) for m in masks]
        ref = np.linalg.eigvalsh(gram_matrix(nodes))[-1]
        assert abs(top_eigenvalue(nodes) - ref) <= 1e-8


def test_top_eigenvalue_matrix_free_matches_dense(monkeypatch):
    import gcdzeta.gcdsum as gs

    masks = divisor_closure([TABLE12.factor(v).mask for v in (2 * 3 * 5 * 7, 11 * 13, 17 * 19 * 23, 29 * 31 * 37)])
    nodes = [FactoredInteger(m, TABLE12) for m in masks]
    dense = top_eigenvalue(nodes)
    monkeypatch.setattr(gs, "DENSE_LIMIT", 1)
    assert top_eigenvalue(nodes) == pytest.approx(dense, rel=1e-9)


def test_top_eigenvalue_nonconvergence_carries_iterate():
    with pytest.raises(ConvergenceError) as info:
        top_eigenvalue(nodes_of(1, 2, 3, 5, 7), max_iter=1, tol=1e-15)
    assert info.value.last_iterate is not None


@settings(max_examples=40, deadline=None)
@given(node_sets)
def test_gamma_le_rayleigh_le_eigenvalue(masks):
    nodes = [FactoredInteger(m, TABLE12) for m in masks]
    lam = top_eigenvalue(nodes)
    assert plain_gamma(nodes) <= lam + 1e-8
    w = np.linspace(1.0, 2.0, len(nodes))
    assert rayleigh(GcdForm(nodes, w)) <= lam + 1e-8


def test_brute_force_gamma_examples():
    assert brute_force_gamma(1, 10).value == 1.0
    res = brute_force_gamma(2, 50)
    assert res.terms == {1: Fraction(1), 2: Fraction(1)}
    assert res.witness[1] == 2 * res.witness[0]
    assert res.value == pytest.approx(1 + 1 / math.sqrt(2), rel=1e-15)
    # value and witness frozen from the exhaustive run
    res3 = brute_force_gamma(3, 30)
    assert res3.witness == (1, 2, 4)
    assert res3.terms == {1: Fraction(4, 3), 2: Fraction(4, 3)}
    assert res3.value == pytest.approx((4 + 2 * math.sqrt(2)) / 3, rel=1e-15)


def test_brute_force_matches_naive_enumeration():
    best = max(
        (double_loop(c, [1, 1, 1]) / 3, c) for c in itertools.combinations(range(1, 13), 3)
    )
    res = brute_force_gamma(3, 12)
    assert res.value == pytest.approx(best[0], rel=1e-14)


def test_brute_force_budget():
    with pytest.raises(ResourceBudgetError):
        brute_force_gamma(4, 200)
    with pytest.raises(DomainError):
        brute_force_gamma(5, 3)


def test_exact_gamma_terms_pair():
    # {1, 3}: (2 + 2/sqrt 3)/2
    assert exact_gamma_terms([1, 3]) == {1: Fraction(1), 3: Fraction(1)}


def test_gamma_monotone_on_tiny_n():
    vals = [brute_force_gamma(n, 16).value for n in (1, 2, 3)]
    assert vals == sorted(vals)


def test_eigenvalue_upper_bound_report():
    # Lambda <= (e^2 + 1)(log N + 2) max_{n<=N} Gamma(n) on tiny instances
    for N in (2, 3):
        gam = max(brute_force_gamma(n, 12).value for n in range(1, N + 1))
        for c in itertools.combinations(range(1, 13), N):
            sqf = [v for v in c if all(v % (p * p) for p in (2, 3))]
            if len(sqf) != N:
                continue
            lam = top_eigenvalue(nodes_of(*sqf))
            assert lam <= (math.e**2 + 1) * (math.log(N) + 2) * gam
