from __future__ import annotations

from fractions import Fraction

import pytest

from thue_mahler_kit.config import is_json_object
from thue_mahler_kit.constants import (
    CertifiedUpper,
    c3,
    divisor_count,
    evertse_bound,
    kappa_report,
    problem_data,
    small_kappas,
)
from thue_mahler_kit.errors import NotInOSError, UsageError, ZeroInputError
from thue_mahler_kit.intervals import RealBall
from thue_mahler_kit.number_field import NumberField
from thue_mahler_kit.s_arithmetic import s_context


def _q() -> NumberField:
    return NumberField([0, 1])


def test_divisor_count() -> None:
    assert divisor_count(1) == 1
    assert divisor_count(12) == 6
    assert divisor_count(2**10) == 11
    with pytest.raises(UsageError):
        divisor_count(0)


def test_evertse_bound_values() -> None:
    assert evertse_bound(2, 0).exact == 2**24
    assert evertse_bound(2, 2).exact == 2**40
    assert evertse_bound(3, 1).exact == 2**999
    assert evertse_bound(2, 1, "refined").exact == 16 ** (4 * 16 * 4)
    with pytest.raises(UsageError):
        evertse_bound(1, 0)


def test_small_kappas() -> None:
    k3, k4 = small_kappas(1)
    assert k3 == 4294967297
    assert k4 == 1 + 2**4375 * 3**250
    assert small_kappas(0) == (16777217, 2)


def test_c3_by_rank() -> None:
    assert c3(0, None).contains_exact(0)
    assert c3(1, None).contains_exact(Fraction(1, 2))
    assert c3(1, None, "alt", degree=4).contains_exact(Fraction(1, 4))
    with pytest.raises(UsageError):
        c3(2, None)
    with pytest.raises(UsageError):
        c3(1, None, "alt")


def test_certified_upper_arithmetic() -> None:
    four = CertifiedUpper.of_int(4)
    assert four.times(3).exact == 12
    assert four.power(3).exact == 64
    assert four.to_json() == "4"
    fuzzy = CertifiedUpper.of_ball(RealBall.pi())
    assert fuzzy.exact is None
    assert fuzzy.upper > Fraction(314159, 100000)
    assert four.times(fuzzy).upper >= 4 * fuzzy.upper - Fraction(1, 10**20)
    rendered = fuzzy.to_json()
    assert is_json_object(rendered)
    assert rendered["log10"] == "0.497150"


def test_problem_data_denominator_and_norm() -> None:
    q = _q()
    ctx = s_context(q, [2])
    third = q.from_scalar(Fraction(1, 3))
    half = q.from_scalar(Fraction(1, 2))
    pd = problem_data(ctx, q.one(), (third, half, q.one()))
    assert pd.q == 3
    assert pd.k == 1
    assert pd.m == 27


def test_problem_data_rejects_bad_inputs() -> None:
    q = _q()
    ctx = s_context(q, [2])
    ones = (q.one(), q.one(), q.one())
    with pytest.raises(NotInOSError):
        problem_data(ctx, q.from_scalar(Fraction(1, 5)), ones)
    with pytest.raises(ZeroInputError):
        problem_data(ctx, q.zero(), ones)


def test_kappa_report_over_rationals() -> None:
    q = _q()
    pd = problem_data(s_context(q, []), q.one(), (q.one(), q.one(), q.one()))
    report = kappa_report(pd)
    assert report.kappa5.exact == 4
    assert report.kappa6.exact == 64
    assert report.kappa3.exact == 16777217
    assert report.kappa4.exact == 2
    assert report.kappa1.exact == 64 * 16777217**2 * 4
    assert report.kappa2.exact == 4 * 64 * 16777217**2 * 4
    described = report.describe()
    assert described["kappa5"] == "4"
    assert described["notes"] == []


def test_kappa5_grows_with_primes() -> None:
    q = _q()
    pd = problem_data(s_context(q, [2]), q.one(), (q.one(), q.one(), q.one()))
    assert kappa_report(pd).kappa5.exact == 8


def test_kappa5_real_quadratic_is_certified() -> None:
    k = NumberField([-1, -1, 1])
    one = k.one()
    pd = problem_data(s_context(k, []), one, (one, one, one))
    report = kappa_report(pd)
    assert report.kappa5.exact is None
    assert report.kappa5.upper > 0
    assert report.c3.contains_exact(Fraction(1, 2))
