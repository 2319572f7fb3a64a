"""Closed-form bounds shared by the unit, box and constants code."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Literal

from .intervals import RealBall
from .number_field import NumberField

C3Variant = Literal["standard", "alt"]


def c3_value(r: int, delta: RealBall, degree: int, variant: C3Variant = "standard") -> RealBall:
    """Balancing constant for unit rank ``r``.

    ``standard``: ``r^(r+1) / (2 * delta^(r-1))``. ``alt``: 0, ``1/d`` or
    ``29 e r! r sqrt(r-1) log d`` for ``r = 0``, ``r = 1``, ``r >= 2``.
    Callers pass ``delta`` as a certified lower bound.
    """
    if r == 0:
        return RealBall.of(0)
    if variant == "alt":
        if r == 1:
            return RealBall.of(Fraction(1, degree))
        e = RealBall.of(1).exp()
        root = RealBall.of(r - 1).sqrt()
        return e * (29 * math.factorial(r) * r) * root * RealBall.of(degree).log()
    if r == 1:
        return RealBall.of(Fraction(1, 2))
    return RealBall.of(Fraction(r ** (r + 1), 2)) / delta ** (r - 1)


def box_count_bound(
    field: NumberField, q: RealBall | Fraction, *, pi_exponent: int = -1
) -> RealBall:
    """``2^(r+1) pi^r2 (Q + theta)^d |D_K|^(-1/2)``; ``pi_exponent`` overrides ``r2``."""
    r2 = field.signature[1] if pi_exponent < 0 else pi_exponent
    theta = field.theta()
    base = RealBall.of(q) if isinstance(q, Fraction) else q
    value = RealBall.of(2 ** (field.unit_rank + 1)) * RealBall.pi() ** r2
    value = value * (base + theta) ** field.degree
    return value / RealBall.of(abs(field.discriminant)).sqrt()
