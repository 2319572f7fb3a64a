from __future__ import annotations

import random
from fractions import Fraction

import pytest

from thue_mahler_kit.errors import UnsupportedPrimeError, ZeroInputError
from thue_mahler_kit.intervals import RealBall
from thue_mahler_kit.number_field import NumberField
from thue_mahler_kit.places import (
    abs_value,
    archimedean_places,
    height,
    is_p_integral,
    norm_order,
    parse_place_selector,
    places_above,
    product_formula_check,
    supported_places,
    valuation,
)


def test_gaussian_places_above_small_primes() -> None:
    k = NumberField([1, 0, 1])
    five = places_above(k, 5)
    assert [(p.e, p.f, p.norm) for p in five] == [(1, 1, 5), (1, 1, 5)]
    two = places_above(k, 2)
    assert [(p.e, p.f, p.norm) for p in two] == [(2, 1, 2)]
    three = places_above(k, 3)
    assert [(p.e, p.f, p.norm) for p in three] == [(1, 2, 9)]


def test_index_divisor_rejected() -> None:
    k = NumberField([-5, 0, 1])
    with pytest.raises(UnsupportedPrimeError):
        places_above(k, 2)


def test_index_divisor_elements() -> None:
    eisenstein = NumberField([3, 0, 1])
    half = eisenstein.from_scalar(Fraction(1, 2))
    assert supported_places(eisenstein, 2) is None
    assert norm_order(half, 2) == -2
    assert not is_p_integral(half, 2)
    sixth_root = eisenstein.element([Fraction(1, 2), Fraction(1, 2)])
    assert is_p_integral(sixth_root, 2)
    assert height(half).overlaps(RealBall.of(2).log())
    assert height(sixth_root).certainly_lt(Fraction(1, 10**20))
    assert product_formula_check(half).passed
    assert product_formula_check(eisenstein.element([1, 1])).passed
    k = NumberField([-5, 0, 1])
    golden = k.element([Fraction(1, 2), Fraction(1, 2)])
    assert is_p_integral(golden, 2)
    assert norm_order(golden, 2) == 0
    assert height(golden).overlaps(height(NumberField([-1, -1, 1]).alpha()))
    assert product_formula_check(k.element([Fraction(3, 4), Fraction(1, 2)])).passed


def test_local_degrees_sum_to_degree() -> None:
    for poly in ([1, 0, 1], [-2, 0, 1], [-1, -1, 0, 1]):
        k = NumberField(poly)
        assert sum(p.local_degree for p in archimedean_places(k)) == k.degree
        for prime in (3, 7, 11):
            assert sum(p.e * p.f for p in places_above(k, prime)) == k.degree


def test_valuation_examples() -> None:
    q = NumberField([0, 1])
    v2 = places_above(q, 2)[0]
    assert valuation(q.from_scalar(12), v2) == 2
    qi = NumberField([1, 0, 1])
    ramified = places_above(qi, 2)[0]
    assert valuation(qi.from_scalar(2), ramified) == 2
    assert valuation(qi.alpha(), ramified) == 0
    with pytest.raises(ZeroInputError):
        valuation(qi.zero(), ramified)


def test_valuation_is_additive() -> None:
    k = NumberField([-1, -1, 0, 1])
    rng = random.Random(3)
    places = [pl for p in (2, 3, 5, 7) for pl in places_above(k, p)]
    for _ in range(20):
        a = k.element([rng.randint(-20, 20) or 1 for _ in range(3)])
        b = k.element([rng.randint(-20, 20) or 2 for _ in range(3)])
        for pl in places:
            assert valuation(a * b, pl) == valuation(a, pl) + valuation(b, pl)


def test_abs_value_examples() -> None:
    qi = NumberField([1, 0, 1])
    complex_place = archimedean_places(qi)[0]
    val = abs_value(qi.element([1, 1]), complex_place)
    assert isinstance(val, RealBall)
    assert val.contains_exact(2)
    q = NumberField([0, 1])
    assert abs_value(q.from_scalar(12), places_above(q, 2)[0]) == Fraction(1, 4)
    assert abs_value(q.from_scalar(12), places_above(q, 5)[0]) == Fraction(1)


def test_product_formula_passes() -> None:
    q = NumberField([0, 1])
    assert product_formula_check(q.from_scalar(12)).passed
    k = NumberField([-2, 0, 1])
    assert product_formula_check(k.element([1, 1])).passed
    with pytest.raises(ZeroInputError):
        product_formula_check(k.zero())


def test_product_formula_on_random_elements() -> None:
    rng = random.Random(11)
    for poly in ([0, 1], [1, 0, 1], [-2, 0, 1], [-1, -1, 1], [-1, -1, 0, 1]):
        k = NumberField(poly)
        for _ in range(15):
            coords = [Fraction(rng.randint(-50, 50), rng.choice([1, 2, 3, 6])) for _ in poly[1:]]
            a = k.element(coords)
            if not a.is_zero():
                assert product_formula_check(a).passed


def test_height_examples() -> None:
    q = NumberField([0, 1])
    assert height(q.one()).certainly_lt(Fraction(1, 10**20))
    log2 = RealBall.of(2).log()
    assert height(q.from_scalar(2)).overlaps(log2)
    assert height(q.from_scalar(Fraction(1, 2))).overlaps(log2)
    q5 = NumberField([-1, -1, 1])
    h = height(q5.alpha())
    assert h.certainly_gt(Fraction(2405, 10000))
    assert h.certainly_lt(Fraction(2407, 10000))
    qi = NumberField([1, 0, 1])
    assert height(qi.alpha()).certainly_lt(Fraction(1, 10**20))


def test_height_of_powers_scales() -> None:
    k = NumberField([-1, -1, 0, 1])
    a = k.element([2, 1, 0])
    base = height(a)
    for e in (-3, -1, 2, 3):
        assert height(a**e).overlaps(base * abs(e))


def test_place_selector() -> None:
    qi = NumberField([1, 0, 1])
    assert len(parse_place_selector(qi, "5")) == 2
    assert parse_place_selector(qi, "5:1")[0].label == "5:1"
