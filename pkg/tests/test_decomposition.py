from __future__ import annotations

import random
from fractions import Fraction

import pytest
from _pytest.monkeypatch import MonkeyPatch

from thue_mahler_kit import decomposition as decomposition_mod
from thue_mahler_kit.constants import problem_data
from thue_mahler_kit.decomposition import (
    A1Cache,
    balance_by_units,
    balance_certificate,
    build_a1,
    build_a2,
    clear_s_denominators,
    decompose,
    enumerate_box,
)
from thue_mahler_kit.errors import (
    CapExceededError,
    NotInOSError,
    PrecisionExhaustedError,
    UsageError,
    ZeroInputError,
)
from thue_mahler_kit.intervals import RealBall
from thue_mahler_kit.number_field import NumberField
from thue_mahler_kit.s_arithmetic import s_context, s_norm


def _q() -> NumberField:
    return NumberField([0, 1])


def test_box_over_rationals() -> None:
    box = enumerate_box(_q(), Fraction(53, 10))
    assert len(box.elements) == 11
    assert sorted(g.rational() for g in box.elements) == list(range(-5, 6))


def test_box_over_gaussian_integers() -> None:
    box = enumerate_box(NumberField([1, 0, 1]), Fraction(2))
    assert len(box.elements) == 13
    assert box.bound.certainly_gt(50)
    assert box.bound.certainly_lt(51)


@pytest.mark.parametrize("poly", [[0, 1], [1, 0, 1], [-2, 0, 1], [-1, -1, 1]])
def test_box_count_stays_below_bound(poly: list[int]) -> None:
    k = NumberField(poly)
    for q in range(1, 6):
        box = enumerate_box(k, Fraction(q))
        assert RealBall.of(len(box.elements)).certainly_le(box.bound)


def test_box_rejects_bad_radius_and_cap() -> None:
    with pytest.raises(UsageError):
        enumerate_box(_q(), Fraction(0))
    with pytest.raises(CapExceededError):
        enumerate_box(NumberField([1, 0, 1]), Fraction(100), cap=10)


def test_clear_denominators() -> None:
    q = _q()
    ctx = s_context(q, [2])
    eta1, alpha = clear_s_denominators(q.from_scalar(Fraction(3, 4)), ctx)
    assert alpha.rational() == 3
    assert eta1.rational() == 4
    with pytest.raises(NotInOSError):
        clear_s_denominators(q.from_scalar(Fraction(1, 3)), ctx)


def test_balance_golden_power() -> None:
    k = NumberField([-1, -1, 1])
    ctx = s_context(k, [])
    phi = k.alpha()
    eta2, gamma = balance_by_units(phi**5 * 2, RealBall.of(Fraction(1, 2)), ctx)
    assert abs(gamma.norm()) == 4
    assert gamma == phi**5 * 2 * eta2
    with pytest.raises(ZeroInputError):
        balance_by_units(k.zero(), RealBall.of(Fraction(1, 2)), ctx)


def test_undecided_balance_is_not_certified(monkeypatch: MonkeyPatch) -> None:
    k = NumberField([-2, 0, 1])
    ctx = s_context(k, [])
    gamma = k.element([3, 1])
    monkeypatch.setattr(decomposition_mod, "MAX_SOLVE_PRECISION", 0)
    assert balance_certificate(gamma, RealBall.of(1), ctx) is None
    with pytest.raises(PrecisionExhaustedError):
        balance_by_units(gamma, RealBall.of(1), ctx)


def test_a1_over_rationals() -> None:
    q = _q()
    ctx = s_context(q, [2])
    pd = problem_data(ctx, q.one(), (q.one(), q.one(), q.one()))
    a1 = build_a1(5, pd)
    assert len(a1.gammas) == 20
    assert a1.kappa5m.exact == 40
    assert q.from_scalar(7) in a1
    assert q.zero() not in a1


def test_decompose_clears_s_part() -> None:
    q = _q()
    ctx = s_context(q, [2])
    pd = problem_data(ctx, q.one(), (q.one(), q.one(), q.one()))
    a1 = build_a1(5, pd)
    eps, gamma = decompose(q.from_scalar(-40), a1, ctx)
    assert gamma.rational() == 5
    assert eps.rational() == -8
    with pytest.raises(UsageError):
        decompose(q.from_scalar(3), a1, ctx)


def test_decompose_round_trip_real_quadratic() -> None:
    k = NumberField([-2, 0, 1])
    ctx = s_context(k, [7])
    one = k.one()
    cache = A1Cache(problem_data(ctx, one, (one, one, one)))
    rng = random.Random(3)
    unit = k.element([1, 1])
    prime = k.element([3, 1])
    for _ in range(30):
        gamma = k.element([rng.randint(-4, 4), rng.randint(-4, 4)])
        if gamma.is_zero():
            continue
        beta = gamma * unit ** rng.randint(-3, 3) * prime ** rng.randint(-2, 2)
        eps, g = cache.decompose(beta)
        assert eps * g == beta
        assert g in cache.get(int(s_norm(beta, ctx)))


def test_a2_triples() -> None:
    assert build_a2(1) == [(1, 1, 1)]
    triples = build_a2(12)
    assert len(triples) == 18
    assert all(a * b * c == 12 for a, b, c in triples)
    with pytest.raises(UsageError):
        build_a2(0)
