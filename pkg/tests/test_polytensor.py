import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylfi.errors import DomainError, ResourceError, ShapeError
from cylfi.polytensor import (
    Polynomial,
    SymTensor,
    compose_linear,
    contract,
    double_factorial,
    fourier_poly,
    multiplicity,
    poly_from_tensors,
    wick_pairings,
)


def test_fourier_poly_examples():
    t = fourier_poly(Polynomial.constant(2))
    assert len(t) == 1 and t[0][()] == 1
    t = fourier_poly(Polynomial(2, {(1, 1): 1}))
    assert t[2][(0, 1)] == Fraction(1, 2)
    assert t[2][(1, 0)] == Fraction(1, 2)
    assert not t[1].entries and not t[0].entries
    t = fourier_poly(Polynomial(1, {(2,): 1, (0,): 3}))
    assert t[0][()] == 3 and t[2][(0, 0)] == 1


def test_poly_from_tensors_examples():
    t2 = SymTensor(2, 2, {(0, 0): 1, (1, 1): 1})
    assert poly_from_tensors([SymTensor(2, 0), SymTensor(2, 1), t2]) == Polynomial(2, {(2, 0): 1, (0, 2): 1})
    assert poly_from_tensors([]).is_zero()
    with pytest.raises(ShapeError):
        poly_from_tensors([SymTensor(2, 0), SymTensor(3, 1)])


def test_polynomial_reconstructs_from_tensors_pointwise(rng):
    poly = Polynomial(3, {(2, 1, 0): 1.5, (0, 0, 3): -2j, (1, 1, 1): 0.25, (0, 0, 0): 4})
    tensors = fourier_poly(poly)
    for _ in range(5):
        s = rng.normal(size=3)
        val = sum(contract(t, [s] * t.rank) for t in tensors)
        assert val == pytest.approx(poly(s), rel=1e-13)


exponents3 = st.tuples(*[st.integers(0, 4)] * 3).filter(lambda a: sum(a) <= 4)
rational_polys = st.dictionaries(
    exponents3,
    st.fractions(min_value=-20, max_value=20, max_denominator=12).filter(lambda f: f != 0),
    max_size=12,
)


@given(rational_polys)
@settings(max_examples=200, deadline=None)
def test_round_trip_is_exact_on_rationals(terms):
    poly = Polynomial(3, terms)
    assert poly_from_tensors(fourier_poly(poly)) == poly


@given(rational_polys)
@settings(max_examples=100, deadline=None)
def test_tensor_side_round_trip(terms):
    tensors = fourier_poly(Polynomial(3, terms))
    back = fourier_poly(poly_from_tensors(tensors))
    assert [t.entries for t in back] == [t.entries for t in tensors]


def test_compose_linear_examples():
    q = compose_linear(Polynomial(1, {(2,): 1}), np.array([[1.0, 1.0]]))
    assert q == Polynomial(2, {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0})
    p = Polynomial(2, {(1, 1): 1, (0, 0): 3})
    assert compose_linear(p, np.eye(2)) == Polynomial(2, {(1, 1): 1.0, (0, 0): 3})
    assert compose_linear(Polynomial(2, {(1, 1): 1}), np.diag([2.0, 3.0])) == Polynomial(2, {(1, 1): 6.0})
    with pytest.raises(ShapeError):
        compose_linear(p, np.ones((3, 2)))


def test_compose_linear_is_functorial(rng):
    for _ in range(20):
        m, n, p = (int(x) for x in rng.integers(1, 4, size=3))
        lam, kappa = rng.normal(size=(m, n)), rng.normal(size=(n, p))
        terms = {tuple(rng.integers(0, 3, size=m)): complex(*rng.normal(size=2)) for _ in range(4)}
        poly = Polynomial(m, terms)
        lhs = compose_linear(poly, lam @ kappa)
        rhs = compose_linear(compose_linear(poly, lam), kappa)
        assert lhs.degree <= poly.degree
        for s in rng.normal(size=(3, p)):
            assert lhs(s) == pytest.approx(rhs(s), rel=1e-10, abs=1e-10)
        keys = set(lhs.terms) | set(rhs.terms)
        for a in keys:
            assert abs(lhs.terms.get(a, 0) - rhs.terms.get(a, 0)) < 1e-10 * (1 + abs(lhs.terms.get(a, 0)))


def test_wick_pairings_examples():
    assert wick_pairings(2).pairings == (((0, 1),),)
    assert wick_pairings(4).pairings == (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))
    assert len(wick_pairings(6)) == 15
    with pytest.raises(DomainError):
        wick_pairings(3)
    with pytest.raises(ResourceError):
        wick_pairings(14)


@pytest.mark.parametrize("k", [2, 4, 6, 8, 10])
def test_wick_pairings_are_all_distinct_perfect_matchings(k):
    ps = wick_pairings(k).pairings
    assert len(ps) == double_factorial(k - 1)
    canon = {frozenset(frozenset(p) for p in m) for m in ps}
    assert len(canon) == len(ps)
    for m in ps:
        assert sorted(x for p in m for x in p) == list(range(k))
    assert list(ps) == sorted(ps)


def test_pairing_count_matches_brute_force_enumeration():
    # count perfect matchings of K_6 by brute force over all permutations
    k = 6
    seen = set()
    for perm in itertools.permutations(range(k)):
        seen.add(frozenset(frozenset(perm[i : i + 2]) for i in range(0, k, 2)))
    assert len(seen) == len(wick_pairings(k))


def test_contract_examples():
    t = SymTensor(2, 2, {(0, 0): 1})
    assert contract(t, [[1, 0], [1, 0]]) == 1
    t = SymTensor(2, 2, {(0, 1): 0.5})
    assert contract(t, [[1, 0], [0, 1]]) == 0.5
    assert contract(t, [[0, 1], [1, 0]]) == 0.5
    with pytest.raises(ShapeError):
        contract(t, [[1, 0]])


def test_contract_matches_dense_triple_loop(rng):
    n = 4
    entries = {i: complex(*rng.normal(size=2)) for i in itertools.combinations_with_replacement(range(n), 3)}
    t = SymTensor(n, 3, entries)
    vs = rng.normal(size=(3, n))
    brute = 0
    for j in itertools.product(range(n), repeat=3):
        brute += entries[tuple(sorted(j))] * vs[0][j[0]] * vs[1][j[1]] * vs[2][j[2]]
    assert abs(contract(t, vs) - brute) < 1e-13 * max(1, abs(brute))
    for perm in itertools.permutations(range(3)):
        assert contract(t, vs[list(perm)]) == pytest.approx(brute, rel=1e-13)


def test_dense_round_trip_and_symmetry(rng):
    entries = {i: complex(*rng.normal(size=2)) for i in itertools.combinations_with_replacement(range(3), 4)}
    t = SymTensor(3, 4, entries)
    assert t.is_symmetric_dense()
    back = SymTensor.from_dense(t.to_dense())
    assert back.entries == t.entries


def test_multiplicity():
    assert multiplicity((0, 0, 1)) == 3
    assert multiplicity((0, 1, 2, 3)) == math.factorial(4)
    assert multiplicity(()) == 1


def test_symtensor_rejects_bad_indices():
    with pytest.raises(ShapeError):
        SymTensor(2, 2, {(0, 2): 1})
    with pytest.raises(ShapeError):
        SymTensor(2, 2, {(0,): 1})
    with pytest.raises(DomainError):
        SymTensor(2, 2, {(0, 1): 1, (1, 0): 2})


def test_polynomial_drops_zero_terms():
    p = Polynomial(2, {(1, 0): 0, (0, 1): 2})
    assert p.terms == {(0, 1): 2}
    with pytest.raises(ShapeError):
        Polynomial(2, {(1,): 1})
