"""Places of K, normalized absolute values, valuations and the absolute height.

Normalization: ``|a|_v = |sigma(a)|`` at a real place, ``|sigma(a)|^2`` at a
complex place and ``N(P)^(-ord_P(a))`` at a finite place, so that the product
over all places of a nonzero element is exactly 1.

Finite places are built from the factorization of the monic polynomial of
``theta = c_d * alpha`` modulo ``p`` (Dedekind). Places above a prime dividing the
index of ``Z[theta]`` are not built; what needs them only in aggregate (the
product over all places above ``p``) reads it off the norm and the characteristic
polynomial instead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Final, Literal

from . import polys
from .errors import UnsupportedPrimeError, UsageError, ZeroInputError
from .intervals import RealBall, working_precision
from .number_field import FieldElement, NumberField

_logger = logging.getLogger(__name__)

PlaceKind = Literal["real", "complex", "finite"]
AbsValue = RealBall | Fraction

DEFAULT_TOLERANCE: Final[Fraction] = Fraction(1, 10**20)


@dataclass(frozen=True)
class Place:
    kind: PlaceKind
    index: int
    local_degree: int
    p: int = 0
    e: int = 0
    f: int = 0
    generator: FieldElement | None = None
    tau: FieldElement | None = None

    @property
    def is_archimedean(self: Place) -> bool:
        return self.kind != "finite"

    @property
    def norm(self: Place) -> int:
        return self.p**self.f if self.kind == "finite" else 1

    @property
    def label(self: Place) -> str:
        if self.kind == "finite":
            return f"{self.p}:{self.index}"
        return f"inf{self.index}"

    def describe(self: Place) -> dict[str, object]:
        out: dict[str, object] = {"label": self.label, "kind": self.kind, "d_v": self.local_degree}
        if self.kind == "finite" and self.generator is not None:
            out.update(
                {
                    "p": self.p,
                    "e": self.e,
                    "f": self.f,
                    "norm": str(self.norm),
                    "generators": [str(self.p), self.generator.to_json()],
                }
            )
        return out


def archimedean_places(field: NumberField) -> list[Place]:
    return [
        Place(kind="real" if dv == 1 else "complex", index=i, local_degree=dv)
        for i, dv in field.archimedean_indices()
    ]


def _theta_poly(field: NumberField) -> tuple[int, ...]:
    lc = field.leading
    d = field.degree
    return tuple(c * lc ** (d - 1 - k) if k < d else 1 for k, c in enumerate(field.min_poly))


def _eval_theta(field: NumberField, coeffs: tuple[int, ...]) -> FieldElement:
    theta = field.order_generator
    acc = field.zero()
    for c in reversed(coeffs):
        acc = acc * theta + c
    return acc


def _int_product(factors: list[tuple[tuple[int, ...], int]]) -> tuple[Fraction, ...]:
    acc: tuple[Fraction, ...] = (Fraction(1),)
    for coeffs, e in factors:
        for _ in range(e):
            acc = polys.mul(acc, [Fraction(c) for c in coeffs])
    return acc


@lru_cache(maxsize=512)
def places_above(field: NumberField, p: int) -> tuple[Place, ...]:
    """Finite places above the rational prime ``p``."""
    if not polys.is_prime(p):
        raise UsageError(f"{p} is not a prime")
    if field.order_index % p == 0:
        raise UnsupportedPrimeError(f"p={p} divides the index of Z[theta] in the basis order")
    if field.degree == 1:
        gen = field.from_scalar(p)
        return (Place("finite", 0, 1, p=p, e=1, f=1, generator=gen, tau=field.one()),)
    g = _theta_poly(field)
    factors = polys.factor_mod_p(g, p)
    product = _int_product(factors)
    diff = [Fraction(c) for c in g]
    diff.extend([Fraction(0)] * (len(product) - len(diff)))
    for k, c in enumerate(product):
        diff[k] -= c
    big_f = [int(c / p) for c in diff]
    for gi, ei in factors:
        if ei >= 2 and len(polys.rem_mod_p(big_f, gi, p)) == 0:
            raise UnsupportedPrimeError(
                f"p={p} divides the index of Z[theta] in O_K (Dedekind criterion fails)"
            )
    places: list[Place] = []
    for i, (gi, ei) in enumerate(factors):
        cofactor = [(gj, ej - 1 if j == i else ej) for j, (gj, ej) in enumerate(factors)]
        h = _int_product(cofactor)
        tau = _eval_theta(field, tuple(int(c) for c in h))
        places.append(
            Place(
                "finite",
                i,
                ei * (len(gi) - 1),
                p=p,
                e=ei,
                f=len(gi) - 1,
                generator=_eval_theta(field, gi),
                tau=tau,
            )
        )
    if sum(pl.e * pl.f for pl in places) != field.degree:
        raise UnsupportedPrimeError(f"inconsistent decomposition above {p}")
    return tuple(places)


@lru_cache(maxsize=512)
def supported_places(field: NumberField, p: int) -> tuple[Place, ...] | None:
    """Places above ``p``, or ``None`` when ``p`` divides the index of ``Z[theta]``."""
    try:
        return places_above(field, p)
    except UnsupportedPrimeError as exc:
        _logger.debug("no place data above %d: %s", p, exc)
        return None


def norm_order(a: FieldElement, p: int) -> int:
    """``sum f_P ord_P(a)`` over the places above ``p``: the order of ``N(a)`` at ``p``."""
    if a.is_zero():
        raise ZeroInputError("norm order of zero")
    return _rational_valuation(a.norm(), p)


def is_p_integral(a: FieldElement, p: int) -> bool:
    """``ord_P(a) >= 0`` at every place above ``p``."""
    return all(c.denominator % p != 0 for c in a.charpoly())


def parse_place_selector(field: NumberField, selector: str) -> list[Place]:
    """``"p"`` selects every place above ``p``; ``"p:i"`` selects one of them."""
    head, _, tail = selector.strip().partition(":")
    try:
        p = int(head)
    except ValueError as exc:
        raise UsageError(f"invalid prime selector {selector!r}") from exc
    above = places_above(field, p)
    if tail == "":
        return list(above)
    try:
        idx = int(tail)
    except ValueError as exc:
        raise UsageError(f"invalid place index in {selector!r}") from exc
    if not 0 <= idx < len(above):
        raise UsageError(f"{selector!r}: only {len(above)} place(s) above {p}")
    return [above[idx]]


def _theta_denominator_power(a: FieldElement, p: int) -> int:
    lc = a.field.leading
    worst = 0
    for k, c in enumerate(a.coords):
        if c == 0:
            continue
        b = c / Fraction(lc) ** k
        den = b.denominator
        m = 0
        while den % p == 0:
            den //= p
            m += 1
        worst = max(worst, m)
    return worst


def _p_integral(a: FieldElement, p: int) -> bool:
    return _theta_denominator_power(a, p) == 0


def _rational_valuation(q: Fraction, p: int) -> int:
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def valuation(a: FieldElement, place: Place) -> int:
    if place.kind != "finite" or place.tau is None:
        raise UsageError("valuation needs a finite place")
    if a.is_zero():
        raise ZeroInputError("valuation of zero")
    p = place.p
    if a.field.degree == 1:
        return _rational_valuation(a.coords[0], p)
    m = _theta_denominator_power(a, p)
    b = a * (p**m) if m > 0 else a
    step = place.tau / p
    count = 0
    while True:
        nxt = b * step
        if not _p_integral(nxt, p):
            break
        b = nxt
        count += 1
    return count - place.e * m


def support_primes(a: FieldElement) -> list[int]:
    """Rational primes below every finite place where ``a`` may have nonzero order."""
    if a.is_zero():
        raise ZeroInputError("support of zero")
    n = a.norm()
    primes: set[int] = set()
    for part in (n.numerator, n.denominator):
        if abs(part) > 1:
            primes.update(polys.factor_integer(part))
    lc = a.field.leading
    for k, c in enumerate(a.coords):
        if c != 0:
            den = (c / Fraction(lc) ** k).denominator
            if den > 1:
                primes.update(polys.factor_integer(den))
    return sorted(primes)


def abs_value(a: FieldElement, place: Place, precision: int = 128) -> AbsValue:
    if place.kind == "finite":
        if a.is_zero():
            return Fraction(0)
        return Fraction(place.norm) ** (-valuation(a, place))
    sigma = a.field.embed(a, precision)[place.index]
    with working_precision(precision):
        return sigma.abs() if place.kind == "real" else sigma.abs_sq()


def log_vector(a: FieldElement, precision: int = 128) -> list[RealBall]:
    """``log |a|_v`` for each archimedean place, in place order."""
    if a.is_zero():
        raise ZeroInputError("log vector of zero")
    sigmas = a.field.embed(a, precision)
    with working_precision(precision):
        return [
            sigmas[idx].abs().log() if dv == 1 else sigmas[idx].abs_sq().log()
            for idx, dv in a.field.archimedean_indices()
        ]


@dataclass(frozen=True)
class ProductFormulaReport:
    passed: bool
    finite_product: Fraction
    archimedean_product: RealBall
    log_sum: RealBall
    tolerance: Fraction


def product_formula_check(
    a: FieldElement, tolerance: Fraction = DEFAULT_TOLERANCE, precision: int = 128
) -> ProductFormulaReport:
    if a.is_zero():
        raise ZeroInputError("product formula of zero")
    finite = Fraction(1)
    for p in support_primes(a):
        above = supported_places(a.field, p)
        if above is None:
            finite *= Fraction(p) ** (-norm_order(a, p))
            continue
        for place in above:
            finite *= Fraction(place.norm) ** (-valuation(a, place))
    if finite != 1 / abs(a.norm()):
        _logger.warning("finite product %s disagrees with 1/|N(a)| for %s", finite, a)
    sigmas = a.field.embed(a, precision)
    with working_precision(precision):
        arch = RealBall.of(1)
        for idx, dv in a.field.archimedean_indices():
            arch = arch * (sigmas[idx].abs() if dv == 1 else sigmas[idx].abs_sq())
        log_sum = arch.log() + RealBall.of(finite).log()
        passed = abs(log_sum).certainly_lt(tolerance) and finite == 1 / abs(a.norm())
    return ProductFormulaReport(
        passed=passed,
        finite_product=finite,
        archimedean_product=arch,
        log_sum=log_sum,
        tolerance=tolerance,
    )


def height(a: FieldElement, precision: int = 128) -> RealBall:
    """Absolute logarithmic height, ``(1/d) * sum_v log max(1, |a|_v)``.

    The finite places contribute ``(d / d_a) * log |c|`` in total, ``c`` the leading
    coefficient of the primitive integral minimal polynomial of ``a`` (degree
    ``d_a``), so no prime decomposition is needed.
    """
    field = a.field
    if a.is_zero():
        return RealBall.of(0)
    minimal = polys.primitive_integral(a.minpoly())
    conjugate_sets = field.degree // (len(minimal) - 1)
    sigmas = field.embed(a, precision)
    with working_precision(precision):
        total = RealBall.of(abs(minimal[-1])).log() * conjugate_sets
        for idx, dv in field.archimedean_indices():
            size = sigmas[idx].abs() if dv == 1 else sigmas[idx].abs_sq()
            total = total + size.max_with(1).log()
        return total / field.degree
