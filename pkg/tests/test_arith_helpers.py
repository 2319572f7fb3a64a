from __future__ import annotations

from fractions import Fraction

import pytest

from thue_mahler_kit import polys
from thue_mahler_kit.errors import CapExceededError
from thue_mahler_kit.intervals import RealBall, current_precision, log10_of, working_precision
from thue_mahler_kit.lattice import CoordinateBox, check_cap, coordinate_box
from thue_mahler_kit.number_field import NumberField
from thue_mahler_kit.parallel import ordered_map, split_range

F = Fraction


def test_integer_polynomials() -> None:
    assert polys.discriminant([-1, -1, 0, 1]) == -23
    assert polys.real_root_count([-2, 0, 1]) == 2
    assert polys.is_irreducible([-2, 0, 1])
    assert not polys.is_irreducible([-1, 0, 1])


def test_rational_polynomials() -> None:
    assert polys.mul([F(1), F(1)], [F(-1), F(1)]) == (F(-1), F(0), F(1))
    assert polys.invert([F(0), F(1)], [F(-2), F(0), F(1)]) == (F(0), F(1, 2))
    with pytest.raises(ZeroDivisionError):
        polys.invert([F(-1), F(1)], [F(-1), F(0), F(1)])
    assert polys.factor_degrees([F(-1), F(0), F(0), F(1)]) == [(1, 1), (2, 1)]
    assert polys.primitive_integral([F(1, 2), F(-1)]) == (-1, 2)
    assert polys.evaluate([F(1), F(0), F(1)], F(2)) == 5
    assert polys.root_multiplicity([F(1), F(-2), F(1)], F(1)) == 2
    assert polys.root_multiplicity([F(1), F(-2), F(1)], F(2)) == 0


def test_rational_matrices() -> None:
    rows = [[F(1), F(2)], [F(3), F(4)]]
    assert polys.det(rows) == -2
    assert polys.inverse(rows) == [[F(-2), F(1)], [F(3, 2), F(-1, 2)]]
    assert polys.charpoly([[F(0), F(1)], [F(1), F(0)]]) == (F(-1), F(0), F(1))


def test_polynomials_mod_p() -> None:
    assert polys.factor_mod_p([1, 0, 1], 2) == [((1, 1), 2)]
    assert polys.factor_mod_p([1, 0, 1], 5) == [((2, 1), 1), ((3, 1), 1)]
    assert polys.mul_mod_p([1, 1], [1, 1], 2) == (1, 0, 1)


def test_integer_helpers() -> None:
    assert polys.factor_integer(-12) == {2: 2, 3: 1}
    with pytest.raises(ValueError):
        polys.factor_integer(0)
    assert polys.divisors(12) == [1, 2, 3, 4, 6, 12]
    assert polys.primes_up_to(10) == [2, 3, 5, 7]
    assert polys.primes_up_to(1) == []
    assert polys.totient(9) == 6


def test_working_precision_restores() -> None:
    before = current_precision()
    with working_precision(64):
        assert current_precision() == 64
        third = RealBall.of(F(1, 3))
    assert current_precision() == before
    assert third.contains_exact(F(1, 3))
    pi = RealBall.pi()
    assert pi.certainly_gt(3)
    assert pi.certainly_lt(F(22, 7))
    assert log10_of(F(1000)) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        log10_of(F(0))


def _square(n: int) -> int:
    return n * n


def test_ordered_map_keeps_input_order() -> None:
    items = list(range(20))
    assert ordered_map(_square, items, workers=4) == [n * n for n in items]
    assert ordered_map(_square, items) == ordered_map(_square, items, workers=3)


def test_split_range() -> None:
    assert split_range(1, 10, 3) == [(1, 4), (5, 7), (8, 10)]
    assert split_range(0, 1, 5) == [(0, 0), (1, 1)]
    assert split_range(5, 4, 2) == []


def test_coordinate_box_and_cap() -> None:
    box = coordinate_box(NumberField([0, 1]), F(53, 10))
    assert box.bounds == (5,)
    assert box.size == 11
    small = CoordinateBox((1, 2))
    assert small.size == 15
    assert len(list(small.points())) == 15
    assert len(list(small.points(first=(0, 1)))) == 10
    check_cap(small, 15, "lattice walk")
    with pytest.raises(CapExceededError) as info:
        check_cap(small, 14, "lattice walk")
    assert info.value.required == "15"
