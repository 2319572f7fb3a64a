"""Certified ball arithmetic.

Thin typed wrappers around python-flint's ``arb`` / ``acb``. Every other module
talks to :class:`RealBall` and :class:`ComplexBall` only.

The flint working precision is process-global. Only the coordinating thread
changes it (through :func:`working_precision`); worker threads compute with
whatever precision is current.
"""

from __future__ import annotations

import math
import threading
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from fractions import Fraction

import flint

from .errors import PrecisionExhaustedError

_PREC_LOCK = threading.Lock()

Scalar = int | Fraction


def current_precision() -> int:
    return int(flint.ctx.prec)


@contextmanager
def working_precision(bits: int) -> Iterator[None]:
    with _PREC_LOCK:
        saved = int(flint.ctx.prec)
        flint.ctx.prec = int(bits)
    try:
        yield
    finally:
        with _PREC_LOCK:
            flint.ctx.prec = saved


def _arb_of(value: RealBall | Scalar) -> flint.arb:
    if isinstance(value, RealBall):
        return value.raw
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return flint.arb(value.numerator)
        return flint.arb(value.numerator) / value.denominator
    return flint.arb(value)


def _exact_fraction(x: flint.arb) -> Fraction:
    man, exp = x.man_exp()
    m = int(man)
    e = int(exp)
    if e >= 0:
        return Fraction(m * (1 << e))
    return Fraction(m, 1 << (-e))


class RealBall:
    """A certified enclosure ``[mid - rad, mid + rad]`` of a real number."""

    __slots__ = ("_v",)

    def __init__(self: RealBall, value: flint.arb) -> None:
        self._v = value

    @property
    def raw(self: RealBall) -> flint.arb:
        return self._v

    @classmethod
    def of(cls: type[RealBall], value: Scalar) -> RealBall:
        return cls(_arb_of(value))

    @classmethod
    def hull(cls: type[RealBall], lo: RealBall | Scalar, hi: RealBall | Scalar) -> RealBall:
        return cls(_arb_of(lo).union(_arb_of(hi)))

    @classmethod
    def pi(cls: type[RealBall]) -> RealBall:
        return cls(flint.arb.pi())

    def __add__(self: RealBall, other: RealBall | Scalar) -> RealBall:
        return RealBall(self._v + _arb_of(other))

    def __radd__(self: RealBall, other: Scalar) -> RealBall:
        return RealBall(_arb_of(other) + self._v)

    def __sub__(self: RealBall, other: RealBall | Scalar) -> RealBall:
        return RealBall(self._v - _arb_of(other))

    def __rsub__(self: RealBall, other: Scalar) -> RealBall:
        return RealBall(_arb_of(other) - self._v)

    def __mul__(self: RealBall, other: RealBall | Scalar) -> RealBall:
        return RealBall(self._v * _arb_of(other))

    def __rmul__(self: RealBall, other: Scalar) -> RealBall:
        return RealBall(_arb_of(other) * self._v)

    def __truediv__(self: RealBall, other: RealBall | Scalar) -> RealBall:
        return RealBall(self._v / _arb_of(other))

    def __rtruediv__(self: RealBall, other: Scalar) -> RealBall:
        return RealBall(_arb_of(other) / self._v)

    def __neg__(self: RealBall) -> RealBall:
        return RealBall(-self._v)

    def __abs__(self: RealBall) -> RealBall:
        return RealBall(abs(self._v))

    def __pow__(self: RealBall, k: int) -> RealBall:
        return RealBall(self._v**k)

    def exp(self: RealBall) -> RealBall:
        return RealBall(self._v.exp())

    def log(self: RealBall) -> RealBall:
        return RealBall(self._v.log())

    def sqrt(self: RealBall) -> RealBall:
        return RealBall(self._v.sqrt())

    def max_with(self: RealBall, other: RealBall | Scalar) -> RealBall:
        o = _arb_of(other)
        if self._v >= o:
            return self
        if o >= self._v:
            return RealBall(o)
        return RealBall(self._v.union(o))

    # Comparisons are certain: ``False`` means "not proven", not "the opposite".
    def certainly_lt(self: RealBall, other: RealBall | Scalar) -> bool:
        return bool(self._v < _arb_of(other))

    def certainly_le(self: RealBall, other: RealBall | Scalar) -> bool:
        return bool(self._v <= _arb_of(other))

    def certainly_gt(self: RealBall, other: RealBall | Scalar) -> bool:
        return bool(self._v > _arb_of(other))

    def certainly_ge(self: RealBall, other: RealBall | Scalar) -> bool:
        return bool(self._v >= _arb_of(other))

    def overlaps(self: RealBall, other: RealBall | Scalar) -> bool:
        return bool(self._v.overlaps(_arb_of(other)))

    def contains(self: RealBall, other: RealBall) -> bool:
        return bool(self._v.contains(other.raw))

    def contains_exact(self: RealBall, q: Scalar) -> bool:
        value = Fraction(q)
        return self.lower() <= value <= self.upper()

    def is_finite(self: RealBall) -> bool:
        return bool(self._v.is_finite())

    def upper(self: RealBall) -> Fraction:
        """Exact dyadic upper endpoint."""
        if not self.is_finite():
            raise PrecisionExhaustedError("ball is not finite")
        return _exact_fraction(self._v.upper())

    def lower(self: RealBall) -> Fraction:
        if not self.is_finite():
            raise PrecisionExhaustedError("ball is not finite")
        return _exact_fraction(self._v.lower())

    def radius(self: RealBall) -> Fraction:
        return _exact_fraction(self._v.rad())

    def unique_int(self: RealBall) -> int | None:
        n = self._v.unique_fmpz()
        return None if n is None else int(n)

    def mid_float(self: RealBall) -> float:
        return float(self._v.mid())

    def __repr__(self: RealBall) -> str:
        return f"RealBall({self._v.str(20)})"


class ComplexBall:
    __slots__ = ("_v",)

    def __init__(self: ComplexBall, value: flint.acb) -> None:
        self._v = value

    @property
    def raw(self: ComplexBall) -> flint.acb:
        return self._v

    @classmethod
    def of(cls: type[ComplexBall], value: RealBall | Scalar) -> ComplexBall:
        return cls(flint.acb(_arb_of(value)))

    @property
    def real(self: ComplexBall) -> RealBall:
        return RealBall(self._v.real)

    @property
    def imag(self: ComplexBall) -> RealBall:
        return RealBall(self._v.imag)

    def is_real(self: ComplexBall) -> bool:
        return bool(self._v.imag == 0)

    def __add__(self: ComplexBall, other: ComplexBall) -> ComplexBall:
        return ComplexBall(self._v + other.raw)

    def __sub__(self: ComplexBall, other: ComplexBall) -> ComplexBall:
        return ComplexBall(self._v - other.raw)

    def __mul__(self: ComplexBall, other: ComplexBall) -> ComplexBall:
        return ComplexBall(self._v * other.raw)

    def scale(self: ComplexBall, q: Scalar) -> ComplexBall:
        return ComplexBall(self._v * _arb_of(q))

    def conjugate(self: ComplexBall) -> ComplexBall:
        return ComplexBall(self._v.conjugate())

    def abs(self: ComplexBall) -> RealBall:
        return RealBall(abs(self._v))

    def abs_sq(self: ComplexBall) -> RealBall:
        re = self._v.real
        im = self._v.imag
        return RealBall(re * re + im * im)

    def overlaps(self: ComplexBall, other: ComplexBall) -> bool:
        return bool(self._v.overlaps(other.raw))

    def contains(self: ComplexBall, other: ComplexBall) -> bool:
        return bool(self._v.contains(other.raw))

    def __repr__(self: ComplexBall) -> str:
        return f"ComplexBall({self._v.str(20)})"


def complex_roots(coeffs: Sequence[int]) -> list[tuple[ComplexBall, int]]:
    """Isolated distinct roots (with multiplicity) of an integer polynomial.

    Coefficients are given lowest degree first. Real roots come first in
    ascending order with an exactly zero imaginary part; non-real roots follow
    in conjugate pairs, upper half-plane first.
    """
    poly = flint.fmpz_poly([int(c) for c in coeffs])
    return [(ComplexBall(root), int(mult)) for root, mult in poly.complex_roots()]


def determinant(rows: Sequence[Sequence[RealBall]]) -> RealBall:
    if len(rows) == 0:
        return RealBall.of(1)
    mat = flint.arb_mat([[x.raw for x in row] for row in rows])
    return RealBall(mat.det())


def solve(rows: Sequence[Sequence[RealBall]], rhs: Sequence[RealBall]) -> list[RealBall] | None:
    """Solve ``rows * x = rhs``; ``None`` when the matrix is not provably invertible."""
    n = len(rows)
    if n == 0:
        return []
    mat = flint.arb_mat([[x.raw for x in row] for row in rows])
    vec = flint.arb_mat([[x.raw] for x in rhs])
    try:
        sol = mat.solve(vec)
    except ZeroDivisionError:
        return None
    return [RealBall(sol[i, 0]) for i in range(n)]


def log10_of(value: Fraction) -> float:
    """Decimal logarithm of a positive rational, exact enough for display."""
    if value <= 0:
        raise ValueError("log10 of a non-positive value")
    return math.log10(value.numerator) - math.log10(value.denominator)
