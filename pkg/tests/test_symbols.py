import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from lpdo import Dx, Dy, LinearForm, NeedsHint, enumerate_types, factor_symbol, is_coprime, param
from lpdo import symbol, verify_hint, x
from lpdo.symbols import FactorizationType, SymPoly, admissible_pattern, coprime_split

from oracle import brute_force_splits, count_ordered_splits

X = SymPoly.monomial(1, 0)
Y = SymPoly.monomial(0, 1)
alpha = param("alpha")


def test_monomial_symbol():
    f = factor_symbol(X**2 * Y**2)
    assert [(str(form), m) for form, m in f.factors] == [("X", 2), ("Y", 2)]


def test_landau_symbol():
    f = factor_symbol(symbol(Dx**3 + x * Dx**2 * Dy))
    assert str(f) == "X^2(X + x*Y)"
    assert f.multiplicities == (2, 1)


def test_symbol_with_constant_parameter():
    f = factor_symbol(symbol(Dx**2 * Dy * (alpha * Dx + Dy)))
    assert f.multiplicities == (2, 1, 1)
    assert f.expand() == X**2 * Y * SymPoly([alpha, 1])


def test_quadratic_with_square_discriminant():
    f = factor_symbol(symbol(Dx**2 - x**2 * Dy**2))
    assert str(f) == "(X - x*Y)(X + x*Y)"


def test_needs_hint_and_verify_hint():
    p = symbol(Dx**2 + Dy**2)
    with pytest.raises(NeedsHint) as err:
        factor_symbol(p)
    assert str(err.value.residual) == "X^2 + Y^2"
    with pytest.raises(ValueError):
        verify_hint(p, [LinearForm.make(1, 1)])


def test_verify_hint_accepts_correct_forms():
    p = symbol(Dx**2 - Dy**2)
    f = verify_hint(p, [LinearForm.make(1, 1), LinearForm.make(1, -1)])
    assert f.expand() == p


def test_linear_form_scaling():
    assert str(LinearForm.make(2, 4)) == "X + 2*Y"
    assert str(LinearForm.make(0, 3)) == "Y"
    with pytest.raises(ValueError):
        LinearForm.make(0, 0)


def test_coprime():
    assert is_coprime(X, Y)
    assert not is_coprime(X**2, X * Y)
    assert is_coprime(X * Y, SymPoly([alpha, 1]))
    assert not is_coprime(X * Y, X * Y)


def test_types_x4():
    types = enumerate_types(factor_symbol(X**4), 2)
    assert [str(t) for t in types] == ["(X)(X^3)", "(X^2)(X^2)", "(X^3)(X)"]


def test_types_x2y2_k2():
    types = [str(t) for t in enumerate_types(factor_symbol(X**2 * Y**2), 2)]
    assert sorted(types) == sorted(["(X)(XY^2)", "(Y)(X^2Y)", "(XY)(XY)", "(X^2)(Y^2)",
                                    "(Y^2)(X^2)", "(XY^2)(X)", "(X^2Y)(Y)"])


def test_types_x2y2_k3():
    types = [str(t) for t in enumerate_types(factor_symbol(X**2 * Y**2), 3)]
    assert "(X)(Y)(XY)" in types and "(X)(XY)(Y)" in types
    assert len(types) == len(set(types))


def test_invalid_k():
    with pytest.raises(ValueError):
        enumerate_types(factor_symbol(X**2), 3)
    with pytest.raises(ValueError):
        enumerate_types(factor_symbol(X**2), 1)


def test_admissible_tags_and_coprime_split():
    t = FactorizationType.from_parts([X**2, Y**2])
    assert coprime_split(t) == 1 and admissible_pattern(t) is None
    assert admissible_pattern(FactorizationType.from_parts([X * Y, X * Y])) == "(XY)(XY)"
    assert admissible_pattern(FactorizationType.from_parts([X**2, X**2])) == "(X^2)(X^2)"


def test_unique_types_filter():
    f = factor_symbol(X**2 * Y**2)
    kept = [str(t) for t in enumerate_types(f, 2, exclude_unique=True)]
    assert "(X^2)(Y^2)" not in kept and "(XY)(XY)" in kept


@pytest.mark.parametrize("mults", [(4,), (2, 2), (2, 1, 1), (1, 1, 1, 1), (3, 1)])
def test_split_counter_agrees_with_brute_force(mults):
    for k in range(2, sum(mults) + 1):
        assert count_ordered_splits(mults, k) == len(brute_force_splits(mults, k))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=2, max_size=3), st.integers(2, 4))
def test_type_count_matches_counter(exps, k):
    forms = [X, Y, SymPoly([1, 1])][: len(exps)]
    p = SymPoly([1])
    for f, e in zip(forms, exps):
        p = p * f**e
    mults = tuple(e for e in exps if e)
    if not mults or k > sum(mults) or sum(mults) > 4:
        return
    types = enumerate_types(factor_symbol(p), k)
    assert len(types) == count_ordered_splits(mults, k)
    for t in types:
        assert t.product() == p


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_factorization_expands_back(s):
    rng = random.Random(s)
    p = SymPoly([rng.randint(1, 3)])
    for _ in range(rng.randint(1, 4)):
        a, b = rng.choice([(1, 0), (0, 1), (1, rng.randint(-3, 3)), (1, x), (2, -x)])
        p = p * SymPoly([a, b])
    f = factor_symbol(p)
    assert f.expand() == p
    forms = f.forms
    assert all(is_coprime(SymPoly([u.alpha, u.beta]), SymPoly([v.alpha, v.beta]))
               for u, v in product(forms, forms) if u != v)
