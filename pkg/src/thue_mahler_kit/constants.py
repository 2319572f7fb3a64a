"""Explicit constants: d(N), the unit-equation bound, c3, kappa_1 ... kappa_6, q and m.

Integers are kept exact. Everything involving pi, exponentials or square roots
is a :class:`CertifiedUpper`: a dyadic upper bound obtained from a ball that is
rounded outward at every step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

from . import polys
from .bounds import C3Variant, c3_value
from .errors import InternalConsistencyError, NotInOSError, UsageError, ZeroInputError
from .intervals import RealBall, log10_of, working_precision
from .number_field import FieldElement
from .places import places_above, support_primes, valuation
from .s_arithmetic import (
    DEFAULT_DELTA_HEIGHT,
    DeltaK,
    SContext,
    SMembership,
    delta_k,
    s_membership,
    s_norm,
)

_logger = logging.getLogger(__name__)

EvertseVariant = Literal["standard", "refined"]


@dataclass(frozen=True)
class CertifiedUpper:
    upper: Fraction
    exact: int | None = None

    @classmethod
    def of_int(cls: type[CertifiedUpper], n: int) -> CertifiedUpper:
        return cls(upper=Fraction(n), exact=n)

    @classmethod
    def of_ball(cls: type[CertifiedUpper], ball: RealBall) -> CertifiedUpper:
        """Exact when the ball is a point at an integer, otherwise its upper endpoint."""
        top = ball.upper()
        if ball.radius() == 0 and top.denominator == 1:
            return cls(upper=top, exact=top.numerator)
        return cls(upper=top)

    @property
    def log10(self: CertifiedUpper) -> float:
        return log10_of(self.upper)

    def times(self: CertifiedUpper, other: CertifiedUpper | int) -> CertifiedUpper:
        rhs = CertifiedUpper.of_int(other) if isinstance(other, int) else other
        if self.exact is not None and rhs.exact is not None:
            return CertifiedUpper.of_int(self.exact * rhs.exact)
        return CertifiedUpper.of_ball(RealBall.of(self.upper) * RealBall.of(rhs.upper))

    def power(self: CertifiedUpper, k: int) -> CertifiedUpper:
        if self.exact is not None:
            return CertifiedUpper.of_int(self.exact**k)
        return CertifiedUpper.of_ball(RealBall.of(self.upper) ** k)

    def to_json(self: CertifiedUpper) -> object:
        if self.exact is not None:
            return str(self.exact)
        return {"upper": str(self.upper), "log10": f"{self.log10:.6f}"}


def divisor_count(n: int) -> int:
    if n < 1:
        raise UsageError(f"divisor count needs N >= 1, got {n}")
    return polys.divisor_count(n)


def evertse_bound(ell: int, s: int, variant: EvertseVariant = "standard") -> CertifiedUpper:
    """Bound on the number of nondegenerate solutions of an ``ell``-term unit equation."""
    if ell < 2:
        raise UsageError(f"unit equation needs at least two terms, got {ell}")
    if s < 0:
        raise UsageError(f"rank must be non-negative, got {s}")
    if variant == "refined":
        return CertifiedUpper.of_int((8 * ell) ** (4 * ell**4 * (ell + s + 1)))
    if ell == 2:
        return CertifiedUpper.of_int(2 ** (8 * s + 24))
    return CertifiedUpper.of_int((2**33 * (ell + 1) ** 2) ** (ell**3 * s))


def small_kappas(s: int) -> tuple[int, int]:
    """``(kappa_3, kappa_4) = (1 + 2^(8s+24), 1 + (2^4375 * 3^250)^s)``."""
    if s < 0:
        raise UsageError(f"rank must be non-negative, got {s}")
    return 1 + 2 ** (8 * s + 24), 1 + (2**4375 * 3**250) ** s


def c3(
    r: int, delta: DeltaK | None, variant: C3Variant = "standard", *, degree: int | None = None
) -> RealBall:
    """Balancing constant. ``delta`` is read for ``r >= 2`` (standard), ``degree`` for ``alt``."""
    if r < 0:
        raise UsageError(f"unit rank must be non-negative, got {r}")
    if variant == "alt":
        if degree is None:
            raise UsageError("the alt variant of c3 needs the field degree")
        return c3_value(r, RealBall.of(1), degree, variant)
    if r < 2:
        return c3_value(r, RealBall.of(1), r + 1, variant)
    if delta is None:
        raise UsageError("c3 for unit rank >= 2 needs delta_K")
    low = delta.value.lower()
    if low <= 0:
        raise UsageError("delta_K must be certified positive")
    return c3_value(r, RealBall.of(low), r + 1, variant)


def problem_c3(
    ctx: SContext,
    delta: DeltaK | None = None,
    *,
    variant: C3Variant = "standard",
    precision: int = 128,
    cap: int = 100_000_000,
) -> RealBall:
    """c3 for the field of ``ctx``; ``delta_K`` is computed at the default height if needed."""
    if ctx.r >= 2 and delta is None and variant == "standard":
        delta = delta_k(ctx.field, DEFAULT_DELTA_HEIGHT, precision=precision, cap=cap)
    return c3(ctx.r, delta, variant, degree=ctx.field.degree)


# -- problem data -----------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemData:
    ctx: SContext
    mu: FieldElement
    alphas: tuple[FieldElement, FieldElement, FieldElement]
    q: int
    k: Fraction
    m: int

    def describe(self: ProblemData) -> dict[str, object]:
        return {
            "mu": self.mu.to_json(),
            "alphas": [a.to_json() for a in self.alphas],
            "q": str(self.q),
            "k": str(self.k),
            "m": str(self.m),
        }


def _minimal_denominator(alphas: tuple[FieldElement, ...], ctx: SContext) -> int:
    """Least positive integer ``q`` with every ``q * alpha_i`` integral outside S."""
    needed: dict[int, int] = {}
    for a in alphas:
        for p in support_primes(a):
            for place in places_above(ctx.field, p):
                if ctx.contains(place):
                    continue
                v = valuation(a, place)
                if v < 0:
                    exponent = -(v // place.e)
                    needed[p] = max(needed.get(p, 0), exponent)
    q = 1
    for p, e in needed.items():
        q *= p**e
    return q


def problem_data(
    ctx: SContext, mu: FieldElement, alphas: tuple[FieldElement, FieldElement, FieldElement]
) -> ProblemData:
    if mu.is_zero() or any(a.is_zero() for a in alphas):
        raise ZeroInputError("mu and the alphas must be nonzero")
    q = _minimal_denominator(alphas, ctx)
    field_q = ctx.field.from_scalar(q)
    q3mu = mu * q**3
    if s_membership(q3mu, ctx) == SMembership.OUTSIDE:
        raise NotInOSError(f"q^3 * mu = {q3mu} is not in O_S, so the equation has no solution")
    k = s_norm(mu, ctx)
    ns_q = s_norm(field_q, ctx)
    m_frac = s_norm(q3mu, ctx)
    if m_frac != ns_q**3 * k or m_frac.denominator != 1:
        raise InternalConsistencyError(f"m={m_frac} disagrees with N_S(q)^3 k={ns_q**3 * k}")
    if ns_q > Fraction(q) ** ctx.field.degree:
        raise InternalConsistencyError(f"N_S({q})={ns_q} exceeds q^d")
    _logger.debug("problem data: q=%d k=%s m=%s", q, k, m_frac)
    return ProblemData(ctx=ctx, mu=mu, alphas=alphas, q=q, k=k, m=m_frac.numerator)


# -- kappa report -----------------------------------------------------------------------


@dataclass(frozen=True)
class Kappa5Inputs:
    """Field and S data entering kappa_5."""

    r: int
    r2: int
    degree: int
    discriminant: int
    c3: RealBall
    regulator: RealBall
    nu: int
    t: int
    class_number: int
    theta: RealBall
    literal_pi_exponent: bool = False


def kappa5(inputs: Kappa5Inputs, precision: int = 128) -> CertifiedUpper:
    """``2^(r+1) pi^r2 |D|^(-1/2) e^(c3 d R) nu^(t d h) (1 + theta)^d``."""
    pi_exp = inputs.r**2 if inputs.literal_pi_exponent else inputs.r2
    with working_precision(precision):
        value = RealBall.of(2 ** (inputs.r + 1))
        if pi_exp > 0:
            value = value * RealBall.pi() ** pi_exp
        if abs(inputs.discriminant) != 1:
            value = value / RealBall.of(abs(inputs.discriminant)).sqrt()
        if inputs.r > 0:
            value = value * (inputs.c3 * inputs.regulator * inputs.degree).exp()
        value = value * inputs.nu ** (inputs.t * inputs.degree * inputs.class_number)
        value = value * (inputs.theta + 1) ** inputs.degree
        return CertifiedUpper.of_ball(value)


@dataclass(frozen=True)
class ConstantsReport:
    nu: int
    t: int
    r: int
    s: int
    theta: RealBall
    regulator: RealBall
    class_number: int
    c3: RealBall
    q: int
    k: Fraction
    m: int
    kappa3: CertifiedUpper
    kappa4: CertifiedUpper
    kappa5: CertifiedUpper
    kappa6: CertifiedUpper
    kappa1: CertifiedUpper
    kappa2: CertifiedUpper
    notes: list[str] = field(default_factory=list)

    def describe(self: ConstantsReport) -> dict[str, object]:
        return {
            "nu": self.nu,
            "t": self.t,
            "r": self.r,
            "s": self.s,
            "theta": self.theta,
            "R_K": self.regulator,
            "h_K": self.class_number,
            "c3": self.c3,
            "q": str(self.q),
            "k": str(self.k),
            "m": str(self.m),
            "kappa3": self.kappa3.to_json(),
            "kappa4": self.kappa4.to_json(),
            "kappa5": self.kappa5.to_json(),
            "kappa6": self.kappa6.to_json(),
            "kappa1": self.kappa1.to_json(),
            "kappa2": self.kappa2.to_json(),
            "notes": list(self.notes),
        }


def kappa5_inputs(
    pd: ProblemData,
    c3_ball: RealBall,
    *,
    literal_pi_exponent: bool = False,
    precision: int = 128,
) -> Kappa5Inputs:
    ctx = pd.ctx
    fld = ctx.field
    return Kappa5Inputs(
        r=ctx.r,
        r2=fld.signature[1],
        degree=fld.degree,
        discriminant=fld.discriminant,
        c3=c3_ball,
        regulator=ctx.unit_data.regulator,
        nu=ctx.nu,
        t=ctx.t,
        class_number=ctx.unit_data.class_number,
        theta=fld.theta(precision),
        literal_pi_exponent=literal_pi_exponent,
    )


def kappa_report(
    pd: ProblemData,
    delta: DeltaK | None = None,
    *,
    variant: C3Variant = "standard",
    literal_pi_exponent: bool = False,
    precision: int = 128,
    cap: int = 100_000_000,
) -> ConstantsReport:
    ctx = pd.ctx
    notes: list[str] = []
    c3_ball = problem_c3(ctx, delta, variant=variant, precision=precision, cap=cap)
    if literal_pi_exponent and ctx.r**2 != ctx.field.signature[1]:
        _logger.warning("kappa_5 uses pi^(r^2)=pi^%d instead of pi^r2", ctx.r**2)
        notes.append("pi exponent r^2 used literally")
    if ctx.field.theta_exceeds_discriminant_bound(precision):
        _logger.warning("theta exceeds sqrt|D_K| for %s", ctx.field)
        notes.append("theta exceeds sqrt|D_K|")
    k5 = kappa5(
        kappa5_inputs(pd, c3_ball, literal_pi_exponent=literal_pi_exponent, precision=precision),
        precision,
    )
    k3, k4 = small_kappas(ctx.s)
    with working_precision(precision):
        k6 = k5.power(3).times(divisor_count(pd.m) ** 2 * pd.m)
        k1 = k6.times(k3**2 * k4**2)
        k2 = k1.times(4)
    return ConstantsReport(
        nu=ctx.nu,
        t=ctx.t,
        r=ctx.r,
        s=ctx.s,
        theta=ctx.field.theta(precision),
        regulator=ctx.unit_data.regulator,
        class_number=ctx.unit_data.class_number,
        c3=c3_ball,
        q=pd.q,
        k=pd.k,
        m=pd.m,
        kappa3=CertifiedUpper.of_int(k3),
        kappa4=CertifiedUpper.of_int(k4),
        kappa5=k5,
        kappa6=k6,
        kappa1=k1,
        kappa2=k2,
        notes=notes,
    )
