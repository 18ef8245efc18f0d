from math import comb

import pytest
from hypothesis import given, strategies as st

from momsparse.polybasis import (MonomialBasis, degree, evaluate, poly_add, poly_degree,
                                 poly_mul, poly_restrict, product_exponent, support, unit,
                                 zero_exponent)


def test_grlex_order_two_variables():
    b = MonomialBasis(2, [0, 1], 2)
    assert list(b) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_basis_of_subset_keeps_ambient_length():
    b = MonomialBasis(4, [1, 3], 1)
    assert list(b) == [(0, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, 1)]


def test_restrict_examples():
    n = 3
    x1x2 = product_exponent(unit(n, 0), unit(n, 1))
    assert poly_restrict({x1x2: 1.0, unit(n, 0, 2): 1.0}, [0]) == {unit(n, 0, 2): 1.0}
    assert poly_restrict({x1x2: 1.0}, [0, 1]) == {x1x2: 1.0}
    p = {zero_exponent(n): 3.0, unit(n, 1): 2.0, product_exponent(unit(n, 1), unit(n, 2)): 1.0}
    assert poly_restrict(p, [0, 2]) == {zero_exponent(n): 3.0}


def test_product_exponent_examples():
    assert product_exponent((1, 0), (0, 1)) == (1, 1)
    assert product_exponent((0, 0), (2, 0)) == (2, 0)
    assert product_exponent((2, 1, 0), (0, 1, 3)) == (2, 2, 3)


def test_index_of_missing_monomial():
    with pytest.raises(KeyError):
        MonomialBasis(2, [0], 2).index_of((0, 1))


def test_bad_variable_rejected():
    with pytest.raises(ValueError):
        MonomialBasis(2, [2], 1)


def test_poly_mul_and_evaluate():
    n = 2
    p = {zero_exponent(n): 1.0, unit(n, 0): 1.0}           # 1 + x
    q = {zero_exponent(n): -1.0, unit(n, 1): 2.0}          # -1 + 2y
    r = poly_mul(p, q)
    assert poly_degree(r) == 2
    for x in ([0.3, -1.2], [2.0, 5.0]):
        assert evaluate(r, x) == pytest.approx(evaluate(p, x) * evaluate(q, x))
    assert poly_add(p, p, -1.0) == {}


@given(k=st.integers(0, 12), t=st.integers(0, 6))
def test_basis_size_is_binomial(k, t):
    if comb(k + t, t) > 20000:
        return
    b = MonomialBasis(max(k, 1), range(k), t)
    assert len(b) == comb(k + t, t)


@given(n=st.integers(1, 5), t=st.integers(0, 4))
def test_index_of_is_a_bijection(n, t):
    b = MonomialBasis(n, range(n), t)
    assert [b.index_of(e) for e in b] == list(range(len(b)))
    assert len(set(b)) == len(b)


exps = st.integers(1, 5).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 4), min_size=n, max_size=n),
                        st.lists(st.integers(0, 4), min_size=n, max_size=n)))


@given(exps)
def test_degree_is_additive(ab):
    a, b = map(tuple, ab)
    assert degree(product_exponent(a, b)) == degree(a) + degree(b)
    assert support(product_exponent(a, b)) == support(a) | support(b)


@given(n=st.integers(1, 5), data=st.data())
def test_restrict_composes_as_intersection(n, data):
    monos = data.draw(st.lists(st.lists(st.integers(0, 3), min_size=n, max_size=n),
                               min_size=1, max_size=6))
    p = {tuple(m): float(k + 1) for k, m in enumerate(monos)}
    U = data.draw(st.sets(st.integers(0, n - 1)))
    V = data.draw(st.sets(st.integers(0, n - 1)))
    assert poly_restrict(poly_restrict(p, U), V) == poly_restrict(p, U & V)
