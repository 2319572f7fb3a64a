"""The ring O_S, its unit group, the S-norm and the unit/class data of K.

S always contains the archimedean places. Its finite part is a list of prime
ideals; each one gets a generator ``g_i`` of its smallest principal power
``P_i^(k_i)`` (``k_i`` divides ``h_K``), so every S-unit is uniquely
``zeta^a0 * prod u_i^a_i * prod g_j^b_j`` with ``0 <= a0 < w``.

Unit and class data are computed for Q, quadratic fields and rank-one fields;
other fields need a trusted config. Everything is relative to the order spanned
by the configured integral basis.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from typing import Final, Literal

from . import intervals, lattice, polys
from .bounds import c3_value
from .config import FieldConfig
from .errors import (
    CapExceededError,
    ConfigError,
    DependentUnitsError,
    InternalConsistencyError,
    MissingFieldDataError,
    NotInGeneratedGroupError,
    NotSUnitError,
    PrecisionExhaustedError,
    UnsupportedPrimeError,
    UsageError,
    ZeroInputError,
)
from .intervals import RealBall, working_precision
from .number_field import FieldElement, NumberField
from .places import (
    Place,
    archimedean_places,
    is_p_integral,
    log_vector,
    norm_order,
    parse_place_selector,
    places_above,
    support_primes,
    supported_places,
    valuation,
)

_logger = logging.getLogger(__name__)

Provenance = Literal["computed", "trusted-config"]

MAX_SOLVE_PRECISION: Final[int] = 4096
DEFAULT_DELTA_HEIGHT: Final[Fraction] = Fraction(1, 20)


class SMembership(StrEnum):
    OUTSIDE = "outside"
    INTEGER = "s-integer"
    UNIT = "s-unit"


@dataclass(frozen=True)
class UnitGroupData:
    w: int
    zeta: FieldElement
    fundamental_units: tuple[FieldElement, ...]
    regulator: RealBall
    class_number: int
    class_number_provenance: Provenance
    units_provenance: Provenance

    def torsion(self: UnitGroupData) -> list[FieldElement]:
        return [self.zeta**k for k in range(self.w)]

    def describe(self: UnitGroupData) -> dict[str, object]:
        return {
            "w": self.w,
            "zeta": self.zeta.to_json(),
            "fundamental_units": [u.to_json() for u in self.fundamental_units],
            "regulator": self.regulator,
            "h_K": self.class_number,
            "h_K_provenance": self.class_number_provenance,
            "units_provenance": self.units_provenance,
        }


@dataclass(frozen=True)
class DeltaK:
    value: RealBall
    threshold: Fraction
    witness: FieldElement | None
    enumerated: int

    def describe(self: DeltaK) -> dict[str, object]:
        return {
            "delta": self.value,
            "H": str(self.threshold),
            "witness": None if self.witness is None else self.witness.to_json(),
            "enumerated": self.enumerated,
        }


@dataclass(frozen=True)
class ExponentVector:
    torsion: int
    units: tuple[int, ...]
    primes: tuple[int, ...]

    def flat(self: ExponentVector) -> tuple[int, ...]:
        return (self.torsion, *self.units, *self.primes)

    def to_json(self: ExponentVector) -> dict[str, object]:
        return {"a0": self.torsion, "units": list(self.units), "primes": list(self.primes)}


@dataclass(frozen=True)
class SContext:
    field: NumberField
    finite_places: tuple[Place, ...]
    archimedean: tuple[Place, ...]
    unit_data: UnitGroupData
    prime_generators: tuple[FieldElement, ...]
    steps: tuple[int, ...]
    precision: int = 128

    @property
    def t(self: SContext) -> int:
        return len(self.finite_places)

    @property
    def r(self: SContext) -> int:
        return self.field.unit_rank

    @property
    def s(self: SContext) -> int:
        return self.r + self.t

    @property
    def nu(self: SContext) -> int:
        return max((pl.norm for pl in self.finite_places), default=1)

    @property
    def primes(self: SContext) -> tuple[int, ...]:
        return tuple(sorted({pl.p for pl in self.finite_places}))

    def contains(self: SContext, place: Place) -> bool:
        if place.is_archimedean:
            return True
        return any(pl.p == place.p and pl.index == place.index for pl in self.finite_places)

    def generators(self: SContext) -> list[FieldElement]:
        return [self.unit_data.zeta, *self.unit_data.fundamental_units, *self.prime_generators]

    def build(self: SContext, exps: ExponentVector) -> FieldElement:
        if len(exps.units) != self.r or len(exps.primes) != self.t:
            raise UsageError(f"exponent vector must have {self.r} unit and {self.t} prime entries")
        acc = self.unit_data.zeta ** (exps.torsion % self.unit_data.w)
        for u, a in zip(self.unit_data.fundamental_units, exps.units, strict=True):
            if a != 0:
                acc = acc * u**a
        for g, b in zip(self.prime_generators, exps.primes, strict=True):
            if b != 0:
                acc = acc * g**b
        return acc

    def describe(self: SContext) -> dict[str, object]:
        return {
            "places": [pl.describe() for pl in (*self.archimedean, *self.finite_places)],
            "t": self.t,
            "r": self.r,
            "s": self.s,
            "nu": self.nu,
            "steps": list(self.steps),
            "generators": [g.to_json() for g in self.generators()],
            "units": self.unit_data.describe(),
        }


# -- helpers ---------------------------------------------------------------------------


def canonical_pick(elements: Sequence[FieldElement]) -> FieldElement:
    """Smallest coordinate sum of absolute values, then lexicographically largest."""
    if len(elements) == 0:
        raise UsageError("no candidates to choose from")
    field = elements[0].field

    def key(g: FieldElement) -> tuple[Fraction, tuple[Fraction, ...]]:
        coords = field.basis_coordinates(g)
        return sum((abs(c) for c in coords), Fraction(0)), tuple(-c for c in coords)

    return min(elements, key=key)


def _torsion_orders(d: int) -> list[int]:
    return [n for n in range(1, 2 * d * d + 3) if d % polys.totient(n) == 0]


def element_order(g: FieldElement, orders: Sequence[int]) -> int:
    """Multiplicative order among ``orders`` (ascending), 0 when none fits."""
    if g.is_zero() or abs(g.norm()) != 1:
        return 0
    one = g.field.one()
    for n in orders:
        if g**n == one:
            return n
    return 0


def is_root_of_unity(g: FieldElement) -> bool:
    return element_order(g, _torsion_orders(g.field.degree)) > 0


def _torsion(field: NumberField, precision: int, cap: int) -> tuple[int, FieldElement]:
    orders = _torsion_orders(field.degree)
    roots = lattice.scan_box(
        field, Fraction(1), lambda g: element_order(g, orders) > 0, precision=precision, cap=cap
    )
    w = max(element_order(g, orders) for g in roots)
    zeta = [g for g in roots if element_order(g, orders) == w][-1]
    return w, zeta


def _floor_at(x: FieldElement, idx: int, precision: int) -> int:
    prec = precision
    while prec <= MAX_SOLVE_PRECISION:
        value = x.field.embed(x, prec)[idx].real
        lo = math.floor(value.lower())
        if lo == math.floor(value.upper()):
            return lo
        prec *= 2
    raise PrecisionExhaustedError(f"cannot decide the integer part of {x}")


def _square_root_of_discriminant(field: NumberField) -> FieldElement:
    c0, c1, c2 = field.min_poly
    delta = c1 * c1 - 4 * c0 * c2
    ratio = Fraction(field.discriminant, delta)
    num, den = math.isqrt(ratio.numerator), math.isqrt(ratio.denominator)
    if ratio < 0 or num * num != ratio.numerator or den * den != ratio.denominator:
        raise InternalConsistencyError("order discriminant is not a square multiple of disc(f)")
    return (field.alpha() * (2 * c2) + c1) * Fraction(num, den)


def _real_quadratic_unit(field: NumberField, precision: int) -> FieldElement:
    """Fundamental unit from the period of the continued fraction of ``(b + sqrt D)/2``."""
    big_d = field.discriminant
    omega = (_square_root_of_discriminant(field) + big_d % 2) / 2
    if any(c.denominator != 1 for c in field.basis_coordinates(omega)):
        raise InternalConsistencyError("(b + sqrt D)/2 is not in the basis order")
    idx = field.signature[0] - 1
    seen: dict[tuple[Fraction, ...], int] = {}
    quotients: list[FieldElement] = []
    xi = omega
    for step in range(4 * abs(big_d) + 64):
        first = seen.get(xi.coords)
        if first is not None:
            unit = field.one()
            for q in quotients[first:]:
                unit = unit * q
            _logger.debug("continued fraction period %d after %d steps", step - first, step)
            return unit
        seen[xi.coords] = step
        quotients.append(xi)
        xi = 1 / (xi - _floor_at(xi, idx, precision))
    raise CapExceededError("continued fraction period not found", required=str(abs(big_d)))


def _normalize_unit(
    u: FieldElement, torsion: Sequence[FieldElement], precision: int
) -> FieldElement:
    """Pick the associate of ``u^(+-1)`` that is > 1 at the largest real embedding."""
    field = u.field
    r1 = field.signature[0]
    candidates = [z * c for z in torsion for c in (u, u.inverse())]
    if r1 > 0:
        for c in candidates:
            value = field.embed(c, precision)[r1 - 1].real
            with working_precision(precision):
                if value.certainly_gt(1):
                    return c
        raise InternalConsistencyError(f"no associate of {u} exceeds 1")
    large = [c for c in candidates if log_vector(c, precision)[0].certainly_gt(0)]
    return max(large, key=lambda c: c.coords)


def _rank_one_unit(
    field: NumberField, torsion: Sequence[FieldElement], precision: int, cap: int
) -> FieldElement:
    """Doubling search for the unit of smallest nonzero ``|log|sigma_0||``."""
    orders = _torsion_orders(field.degree)

    def keep(g: FieldElement) -> bool:
        return abs(g.norm()) == 1 and element_order(g, orders) == 0

    q = Fraction(2)
    while True:
        found = lattice.scan_box(field, q, keep, precision=precision, cap=cap)
        if found:
            best = min(found, key=lambda g: abs(log_vector(g, precision)[0].mid_float()))
            _logger.debug("rank-one unit found at Q=%s among %d candidates", q, len(found))
            return _normalize_unit(best, torsion, precision)
        q *= 2


def _verify_units(
    field: NumberField, units: Sequence[FieldElement], precision: int
) -> RealBall:
    for u in units:
        if not u.is_integral() or abs(u.norm()) != 1:
            raise ConfigError(f"fundamental unit {u} is not a unit of O_K")
    return regulator_of(field, units, precision)


def regulator_of(field: NumberField, units: Sequence[FieldElement], precision: int) -> RealBall:
    r = field.unit_rank
    if r == 0:
        return RealBall.of(1)
    rows = [log_vector(u, precision)[:r] for u in units]
    with working_precision(precision):
        det = abs(intervals.determinant(rows))
        if not det.certainly_gt(0):
            raise DependentUnitsError("log-embedding matrix of the units is singular")
    return det


# -- class numbers -----------------------------------------------------------------------


def _imaginary_class_number(big_d: int) -> int:
    count = 0
    a = 1
    while 3 * a * a <= -big_d:
        for b in range(-a + 1, a + 1):
            if (b * b - big_d) % (4 * a) != 0:
                continue
            c = (b * b - big_d) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(a, b, c) == 1:
                count += 1
        a += 1
    return count


def _rho(form: tuple[int, int, int], big_d: int, root: int) -> tuple[int, int, int]:
    _, b, c = form
    m = 2 * abs(c)
    lo = root + 1 - m
    b_next = lo + ((-b - lo) % m)
    return c, b_next, (b_next * b_next - big_d) // (4 * c)


def _is_reduced_indefinite(a_abs: int, b: int, big_d: int) -> bool:
    """``sqrt(D) - b < 2|a| < sqrt(D) + b`` in integer arithmetic (``0 < b < sqrt(D)``)."""
    two_a = 2 * a_abs
    if (two_a + b) ** 2 <= big_d:
        return False
    return two_a - b < 0 or (two_a - b) ** 2 < big_d


def _reduced_indefinite_forms(big_d: int, root: int) -> set[tuple[int, int, int]]:
    reduced: set[tuple[int, int, int]] = set()
    for b in range(1, root + 1):
        if (big_d - b * b) % 4 != 0:
            continue
        ac = (b * b - big_d) // 4
        for a_abs in polys.divisors(abs(ac)):
            if not _is_reduced_indefinite(a_abs, b, big_d):
                continue
            for a in (a_abs, -a_abs):
                c = ac // a
                if math.gcd(a, b, c) == 1:
                    reduced.add((a, b, c))
    return reduced


def _narrow_class_number(big_d: int) -> int:
    """Number of rho-cycles of reduced primitive indefinite forms of discriminant ``D``."""
    root = math.isqrt(big_d)
    reduced = _reduced_indefinite_forms(big_d, root)
    cycles = 0
    remaining = set(reduced)
    while remaining:
        start = min(remaining)
        form = start
        while True:
            remaining.discard(form)
            form = _rho(form, big_d, root)
            if form == start:
                break
            if form not in reduced:
                raise InternalConsistencyError(f"rho left the reduced forms at {form}")
        cycles += 1
    return cycles


def _minkowski_bound(field: NumberField, precision: int) -> RealBall:
    d = field.degree
    with working_precision(precision):
        factor = RealBall.of(Fraction(math.factorial(d), d**d))
        pis = (RealBall.of(4) / RealBall.pi()) ** field.signature[1]
        return factor * pis * RealBall.of(abs(field.discriminant)).sqrt()


def _class_number_by_minkowski(
    field: NumberField, regulator: RealBall, precision: int, cap: int
) -> int | None:
    """1 when every prime ideal under the Minkowski bound is principal, else ``None``."""
    bound = _minkowski_bound(field, precision)
    if bound.certainly_lt(2):
        return 1
    if field.unit_rank > 1:
        return None
    c3 = c3_value(field.unit_rank, RealBall.of(1), field.degree)
    limit = math.floor(bound.upper())
    for p in polys.primes_up_to(limit):
        for place in places_above(field, p):
            if place.norm > limit:
                continue
            if principal_generator(field, place, 1, regulator, c3, precision, cap) is None:
                _logger.info("prime %s is not principal", place.label)
                return None
    return 1


def _class_number(
    field: NumberField,
    units: Sequence[FieldElement],
    regulator: RealBall,
    config: FieldConfig | None,
    precision: int,
    cap: int,
) -> tuple[int, Provenance]:
    if config is not None and config.class_number is not None:
        _logger.info("h_K=%d taken from trusted config", config.class_number)
        return config.class_number, "trusted-config"
    d = field.degree
    big_d = field.discriminant
    if d == 1:
        return 1, "computed"
    if d == 2 and big_d < 0:
        return _imaginary_class_number(big_d), "computed"
    if d == 2:
        h_plus = _narrow_class_number(big_d)
        return (h_plus if units[0].norm() == -1 else h_plus // 2), "computed"
    try:
        h = _class_number_by_minkowski(field, regulator, precision, cap)
    except UnsupportedPrimeError as exc:
        raise MissingFieldDataError(f"cannot compute h_K: {exc}") from exc
    if h is None:
        raise MissingFieldDataError("h_K needs a trusted config for this field")
    return h, "computed"


def principal_generator(
    field: NumberField,
    place: Place,
    k: int,
    regulator: RealBall,
    c3: RealBall | None,
    precision: int,
    cap: int,
) -> FieldElement | None:
    """A generator of ``P^k``, or ``None`` when that ideal is not principal.

    A generator balanced by units has every ``|sigma|`` at most
    ``N(P)^(k/d) * e^(c3 R_K)``, which bounds the search. ``c3=None`` means the
    ideal is known to be principal and the search runs until the cap.
    """
    target = place.norm**k
    with working_precision(precision):
        root = (RealBall.of(target).log() / field.degree).exp()
        q_max = None if c3 is None else (root * (c3 * regulator).exp()).upper()
        q = root.upper()

    def keep(g: FieldElement) -> bool:
        return abs(g.norm()) == target and valuation(g, place) == k

    while True:
        found = lattice.scan_box(field, q, keep, precision=precision, cap=cap)
        if found:
            return canonical_pick(found)
        if q_max is not None and q >= q_max:
            return None
        q = 2 * q if q_max is None else min(2 * q, q_max)


# -- operation surface -------------------------------------------------------------------


def unit_class_data(
    field: NumberField,
    config: FieldConfig | None = None,
    *,
    precision: int = 128,
    cap: int = 100_000_000,
) -> UnitGroupData:
    w, zeta = _torsion(field, precision, cap)
    torsion = [zeta**k for k in range(w)]
    r = field.unit_rank
    units: tuple[FieldElement, ...]
    provenance: Provenance = "computed"
    if config is not None and config.fundamental_units is not None:
        given = config.fundamental_units
        if len(given) != r:
            raise ConfigError(f"expected {r} fundamental units, got {len(given)}")
        units = tuple(field.element(list(v)) for v in given)
        provenance = "trusted-config"
    elif r == 0:
        units = ()
    elif r == 1 and field.degree == 2:
        units = (_real_quadratic_unit(field, precision),)
    elif r == 1:
        units = (_rank_one_unit(field, torsion, precision, cap),)
    else:
        raise MissingFieldDataError(f"unit rank {r}: fundamental units need a trusted config")
    regulator = _verify_units(field, units, precision)
    h, h_provenance = _class_number(field, units, regulator, config, precision, cap)
    _logger.info("unit data: w=%d r=%d h_K=%d (%s)", w, r, h, h_provenance)
    return UnitGroupData(
        w=w,
        zeta=zeta,
        fundamental_units=units,
        regulator=regulator,
        class_number=h,
        class_number_provenance=h_provenance,
        units_provenance=provenance,
    )


def balancing_c3(
    field: NumberField, data: UnitGroupData, *, precision: int = 128, cap: int = 100_000_000
) -> RealBall:
    """Standard c3 with ``delta_K`` computed at the default height when ``r >= 2``."""
    r = field.unit_rank
    if r <= 1:
        return c3_value(r, RealBall.of(1), field.degree)
    delta = delta_k(field, DEFAULT_DELTA_HEIGHT, precision=precision, cap=cap)
    with working_precision(precision):
        return c3_value(r, RealBall.of(delta.value.lower()), field.degree)


def s_context(
    field: NumberField,
    selectors: Sequence[str | int],
    *,
    config: FieldConfig | None = None,
    unit_data: UnitGroupData | None = None,
    precision: int = 128,
    cap: int = 100_000_000,
) -> SContext:
    chosen: dict[tuple[int, int], Place] = {}
    for sel in selectors:
        for place in parse_place_selector(field, str(sel)):
            chosen[(place.p, place.index)] = place
    finite = tuple(chosen[key] for key in sorted(chosen))
    data = unit_data if unit_data is not None else unit_class_data(
        field, config, precision=precision, cap=cap
    )
    h = data.class_number
    c3 = balancing_c3(field, data, precision=precision, cap=cap) if h > 1 else None
    generators: list[FieldElement] = []
    steps: list[int] = []
    for place in finite:
        for k in polys.divisors(h):
            bound = c3 if k < h else None
            gen = principal_generator(field, place, k, data.regulator, bound, precision, cap)
            if gen is not None:
                generators.append(gen)
                steps.append(k)
                break
    ctx = SContext(
        field=field,
        finite_places=finite,
        archimedean=tuple(archimedean_places(field)),
        unit_data=data,
        prime_generators=tuple(generators),
        steps=tuple(steps),
        precision=precision,
    )
    _logger.debug("S-context t=%d r=%d s=%d nu=%d", ctx.t, ctx.r, ctx.s, ctx.nu)
    return ctx


def s_membership(a: FieldElement, ctx: SContext) -> SMembership:
    if a.is_zero():
        return SMembership.INTEGER
    unit = True
    for p in support_primes(a):
        above = supported_places(ctx.field, p)
        if above is None:
            # no place of S lies above an index divisor
            if not is_p_integral(a, p):
                return SMembership.OUTSIDE
            unit = unit and norm_order(a, p) == 0
            continue
        for place in above:
            if ctx.contains(place):
                continue
            v = valuation(a, place)
            if v < 0:
                return SMembership.OUTSIDE
            if v > 0:
                unit = False
    return SMembership.UNIT if unit else SMembership.INTEGER


def s_norm(a: FieldElement, ctx: SContext) -> Fraction:
    """Norm of the prime-to-S part of ``(a)``.

    For ``a`` in O_S the product of ``|a|_v`` over ``v`` in S is computed as well
    (``|N(a)|`` times the finite S-part) and must agree exactly.
    """
    if a.is_zero():
        raise ZeroInputError("S-norm of zero")
    ideal_part = Fraction(1)
    integral = True
    for p in support_primes(a):
        above = supported_places(ctx.field, p)
        if above is None:
            integral = integral and is_p_integral(a, p)
            ideal_part *= Fraction(p) ** norm_order(a, p)
            continue
        for place in above:
            if ctx.contains(place):
                continue
            v = valuation(a, place)
            integral = integral and v >= 0
            ideal_part *= Fraction(place.norm) ** v
    if integral:
        over_s = abs(a.norm())
        for place in ctx.finite_places:
            over_s *= Fraction(place.norm) ** (-valuation(a, place))
        if over_s != ideal_part:
            raise InternalConsistencyError(
                f"N_S({a}) disagrees: ideal {ideal_part} vs product over S {over_s}"
            )
    return ideal_part


def _solve_unit_exponents(rest: FieldElement, ctx: SContext) -> tuple[int, ...]:
    units = ctx.unit_data.fundamental_units
    r = ctx.r
    if r == 0:
        return ()
    prec = ctx.precision
    while prec <= MAX_SOLVE_PRECISION:
        columns = [log_vector(u, prec)[:r] for u in units]
        rows = [[columns[i][v] for i in range(r)] for v in range(r)]
        rhs = log_vector(rest, prec)[:r]
        with working_precision(prec):
            solution = intervals.solve(rows, rhs)
        if solution is not None:
            ints = [x.unique_int() for x in solution]
            if all(n is not None for n in ints):
                return tuple(n for n in ints if n is not None)
        _logger.debug("unit exponents undecided at %d bits", prec)
        prec *= 2
    raise PrecisionExhaustedError(f"cannot isolate unit exponents of {rest}")


def sunit_exponents(eps: FieldElement, ctx: SContext) -> ExponentVector:
    if eps.is_zero() or s_membership(eps, ctx) != SMembership.UNIT:
        raise NotSUnitError(f"{eps} is not an S-unit")
    primes: list[int] = []
    rest = eps
    for place, g, step in zip(ctx.finite_places, ctx.prime_generators, ctx.steps, strict=True):
        v = valuation(eps, place)
        if v % step != 0:
            raise NotInGeneratedGroupError(
                f"ord at {place.label} is {v}, not a multiple of the step {step}"
            )
        primes.append(v // step)
        if v != 0:
            rest = rest / g ** (v // step)
    unit_exps = _solve_unit_exponents(rest, ctx)
    torsion_part = rest
    for u, a in zip(ctx.unit_data.fundamental_units, unit_exps, strict=True):
        if a != 0:
            torsion_part = torsion_part / u**a
    for a0, z in enumerate(ctx.unit_data.torsion()):
        if z == torsion_part:
            return ExponentVector(a0, unit_exps, tuple(primes))
    raise NotInGeneratedGroupError(f"{eps} is not in the group generated by the S-unit basis")


def _archimedean_height(g: FieldElement, precision: int) -> RealBall:
    logs = log_vector(g, precision)
    with working_precision(precision):
        total = RealBall.of(0)
        for lv in logs:
            total = total + lv.max_with(0)
        return total / g.field.degree


def delta_k(
    field: NumberField,
    height_bound: Fraction,
    *,
    precision: int = 128,
    cap: int = 100_000_000,
    workers: int = 1,
) -> DeltaK:
    """Certified lower bound ``delta_K`` with ``d*h(a) >= delta_K`` for integral non-torsion ``a``.

    Integers of height at most ``H`` have every ``|sigma| <= e^(d H)``, so that box
    is exhausted.
    """
    if height_bound <= 0:
        raise UsageError("height threshold must be positive")
    d = field.degree
    with working_precision(precision):
        q = (RealBall.of(height_bound) * d).exp().upper()
    elements = lattice.enumerate_integral(
        field, q, precision=precision, cap=cap, workers=workers
    )
    orders = _torsion_orders(d)
    scored: list[tuple[RealBall, FieldElement]] = [
        (_archimedean_height(g, precision), g)
        for g in elements
        if not g.is_zero() and element_order(g, orders) == 0
    ]
    with working_precision(precision):
        limit = RealBall.of(height_bound)
        if not scored:
            return DeltaK(limit * d, height_bound, None, len(elements))
        best = min(scored, key=lambda item: item[0].mid_float())[0]
        group = [(hb, g) for hb, g in scored if hb.overlaps(best)]
        low = best
        for hb, _ in group:
            low = RealBall.hull(low, hb)
        if low.certainly_ge(limit):
            return DeltaK(limit * d, height_bound, None, len(elements))
        witness = canonical_pick([g for _, g in group])
        value = low if low.certainly_lt(limit) else RealBall.hull(low, limit)
        return DeltaK(value * d, height_bound, witness, len(elements))
