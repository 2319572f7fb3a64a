"""Writing an S-integer as an S-unit times an element of a fixed finite set.

``beta = eps * gamma`` is found in three exact steps: clear the S-part of the
denominator with prime generators, balance the archimedean sizes with units of
O_K, then normalize by torsion. ``gamma`` then lies in the box of integers whose
conjugates are at most ``(nu^(t d h) m)^(1/d) e^(c3 R)``.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction
from typing import Final

from . import intervals, lattice, polys
from .bounds import box_count_bound
from .constants import CertifiedUpper, ProblemData, kappa5, kappa5_inputs, problem_c3
from .errors import (
    BoundViolationError,
    CapExceededError,
    InternalConsistencyError,
    NotInOSError,
    PrecisionExhaustedError,
    UsageError,
    ZeroInputError,
)
from .intervals import RealBall, working_precision
from .number_field import FieldElement, NumberField
from .places import log_vector, valuation
from .s_arithmetic import (
    MAX_SOLVE_PRECISION,
    DeltaK,
    SContext,
    SMembership,
    canonical_pick,
    s_membership,
    s_norm,
)

_logger = logging.getLogger(__name__)

MAX_BALANCE_RADIUS: Final[int] = 6


@dataclass(frozen=True)
class BoxEnumeration:
    q: Fraction
    elements: list[FieldElement]
    bound: RealBall

    def describe(self: BoxEnumeration) -> dict[str, object]:
        return {
            "Q": str(self.q),
            "count": len(self.elements),
            "bound": self.bound,
            "elements": [g.to_json() for g in self.elements],
        }


@dataclass(frozen=True)
class A1Set:
    m: int
    q: Fraction
    gammas: list[FieldElement]
    kappa5m: CertifiedUpper
    c3: RealBall

    def __contains__(self: A1Set, gamma: object) -> bool:
        if not isinstance(gamma, FieldElement):
            return False
        return gamma.coords in {g.coords for g in self.gammas}

    def describe(self: A1Set) -> dict[str, object]:
        return {
            "m": str(self.m),
            "Q": str(self.q),
            "count": len(self.gammas),
            "kappa5m": self.kappa5m.to_json(),
            "gammas": [g.to_json() for g in self.gammas],
        }


# -- denominators and balancing ---------------------------------------------------------


def clear_s_denominators(beta: FieldElement, ctx: SContext) -> tuple[FieldElement, FieldElement]:
    """``(eta1, alpha)`` with ``alpha = eta1 * beta`` integral and ``0 <= ord_Pi(alpha) < k_i``."""
    field = ctx.field
    if beta.is_zero():
        return field.one(), field.zero()
    if s_membership(beta, ctx) == SMembership.OUTSIDE:
        raise NotInOSError(f"{beta} is not in O_S")
    eta1 = field.one()
    for place, g, step in zip(ctx.finite_places, ctx.prime_generators, ctx.steps, strict=True):
        shift = valuation(beta, place) // step
        if shift != 0:
            eta1 = eta1 * g ** (-shift)
    alpha = eta1 * beta
    if not alpha.is_integral():
        raise InternalConsistencyError(f"{alpha} is not integral after clearing S-denominators")
    limit = Fraction(ctx.nu) ** (ctx.t * field.degree * ctx.unit_data.class_number)
    if abs(alpha.norm()) > limit * s_norm(beta, ctx):
        raise BoundViolationError(f"|N({alpha})| exceeds nu^(tdh) N_S({beta})")
    return eta1, alpha


def _offsets(r: int, radius: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors of sup-norm exactly ``radius``, lexicographic."""
    for vec in itertools.product(range(-radius, radius + 1), repeat=r):
        if max((abs(c) for c in vec), default=0) == radius:
            yield vec


def _centre(alpha: FieldElement, ctx: SContext, precision: int) -> tuple[int, ...]:
    """Nearest integer exponents cancelling the log defect of ``alpha`` on the first r places."""
    r = ctx.r
    units = ctx.unit_data.fundamental_units
    big_m = abs(alpha.norm())
    columns = [log_vector(u, precision)[:r] for u in units]
    logs = log_vector(alpha, precision)[:r]
    with working_precision(precision):
        log_m = RealBall.of(big_m).log() / ctx.field.degree
        rows = [[columns[i][v] for i in range(r)] for v in range(r)]
        rhs = [
            (log_m * dv - logs[v]) for v, (_, dv) in enumerate(ctx.field.archimedean_indices()[:r])
        ]
        solution = intervals.solve(rows, rhs)
    if solution is None:
        raise InternalConsistencyError("unit log matrix is singular")
    return tuple(math.floor(x.mid_float() + 0.5) for x in solution)


def _within(value: RealBall, bound: RealBall, precision: int) -> bool | None:
    with working_precision(precision):
        if abs(value).certainly_le(bound):
            return True
        if abs(value).certainly_gt(bound):
            return False
    return None


def balance_certificate(gamma: FieldElement, c3_ball: RealBall, ctx: SContext) -> bool | None:
    """``|log|gamma|_v - (d_v/d) log M| <= c3 R_K`` at every archimedean place.

    ``None`` when no precision up to the solver limit separates a place from the bound.
    """
    field = ctx.field
    big_m = abs(gamma.norm())
    prec = ctx.precision
    while prec <= MAX_SOLVE_PRECISION:
        logs = log_vector(gamma, prec)
        with working_precision(prec):
            log_m = RealBall.of(big_m).log() / field.degree
            bound = c3_ball * ctx.unit_data.regulator
            verdicts = [
                _within(lv - log_m * dv, bound, prec)
                for lv, (_, dv) in zip(logs, field.archimedean_indices(), strict=True)
            ]
        if any(v is False for v in verdicts):
            return False
        if all(v is True for v in verdicts):
            return True
        prec *= 2
    _logger.debug("balance of %s undecided at %d bits", gamma, MAX_SOLVE_PRECISION)
    return None


def balance_by_units(
    alpha: FieldElement, c3_ball: RealBall, ctx: SContext
) -> tuple[FieldElement, FieldElement]:
    """``(eta2, gamma)`` with ``gamma = alpha * eta2`` passing :func:`balance_certificate`."""
    if alpha.is_zero():
        raise ZeroInputError("cannot balance zero")
    field = ctx.field
    if ctx.r == 0:
        return field.one(), alpha
    units = ctx.unit_data.fundamental_units
    centre = _centre(alpha, ctx, ctx.precision)
    undecided = 0
    for radius in range(MAX_BALANCE_RADIUS + 1):
        for offset in _offsets(ctx.r, radius):
            eta2 = field.one()
            for u, a, o in zip(units, centre, offset, strict=True):
                if a + o != 0:
                    eta2 = eta2 * u ** (a + o)
            gamma = alpha * eta2
            verdict = balance_certificate(gamma, c3_ball, ctx)
            if verdict is None:
                undecided += 1
            elif verdict:
                return eta2, gamma
    if undecided:
        raise PrecisionExhaustedError(
            f"{undecided} associate(s) of {alpha} sit on the balance bound at "
            f"{MAX_SOLVE_PRECISION} bits"
        )
    raise CapExceededError(
        f"no balanced associate of {alpha} within exponent radius {MAX_BALANCE_RADIUS}",
        required=str(MAX_BALANCE_RADIUS + 1),
    )


def canonical_factor(
    beta: FieldElement, c3_ball: RealBall, ctx: SContext
) -> tuple[FieldElement, FieldElement]:
    """``(eps, gamma)`` with ``beta = eps * gamma``, gamma balanced and torsion-normalized."""
    if beta.is_zero():
        raise ZeroInputError("cannot decompose zero")
    _, alpha = clear_s_denominators(beta, ctx)
    _, gamma = balance_by_units(alpha, c3_ball, ctx)
    gamma = canonical_pick([z * gamma for z in ctx.unit_data.torsion()])
    return beta / gamma, gamma


# -- boxes and the finite sets ------------------------------------------------------------


def enumerate_box(
    field: NumberField,
    q: Fraction,
    *,
    precision: int = 128,
    cap: int = 100_000_000,
    workers: int = 1,
) -> BoxEnumeration:
    if q <= 0:
        raise UsageError(f"box radius must be positive, got {q}")
    elements = lattice.enumerate_integral(
        field, q, precision=precision, cap=cap, workers=workers
    )
    with working_precision(precision):
        bound = box_count_bound(field, q)
        if RealBall.of(len(elements)).certainly_gt(bound):
            raise BoundViolationError(f"{len(elements)} integers in the box exceed {bound}")
    return BoxEnumeration(q=q, elements=elements, bound=bound)


def _root_times_growth(n: int, degree: int, growth: RealBall, precision: int) -> Fraction:
    """Upper bound for ``n^(1/d) * growth``; exact when both factors are."""
    with working_precision(precision):
        root = (RealBall.of(n).log() / degree).exp()
        guess = root.unique_int()
        if guess is not None and guess**degree == n and growth.radius() == 0:
            return guess * growth.upper()
        return (root * growth).upper()


def build_a1(
    m: int,
    pd: ProblemData,
    delta: DeltaK | None = None,
    *,
    c3_ball: RealBall | None = None,
    precision: int = 128,
    cap: int = 100_000_000,
    workers: int = 1,
) -> A1Set:
    if m < 1:
        raise UsageError(f"A1 needs m >= 1, got {m}")
    ctx = pd.ctx
    field = ctx.field
    if c3_ball is None:
        c3_ball = problem_c3(ctx, delta, precision=precision, cap=cap)
    big_n = ctx.nu ** (ctx.t * field.degree * ctx.unit_data.class_number) * m
    with working_precision(precision):
        growth = (c3_ball * ctx.unit_data.regulator).exp() if ctx.r > 0 else RealBall.of(1)
    q = _root_times_growth(big_n, field.degree, growth, precision)
    box = enumerate_box(field, q, precision=precision, cap=cap, workers=workers)
    gammas = [g for g in box.elements if not g.is_zero()]
    k5m = kappa5(kappa5_inputs(pd, c3_ball, precision=precision), precision).times(m)
    if Fraction(len(gammas)) > k5m.upper:
        raise BoundViolationError(f"|A1({m})| = {len(gammas)} exceeds kappa5 m")
    _logger.info("A1(%d): Q=%s, %d elements", m, q, len(gammas))
    return A1Set(m=m, q=q, gammas=gammas, kappa5m=k5m, c3=c3_ball)


def decompose(
    beta: FieldElement, a1: A1Set, ctx: SContext
) -> tuple[FieldElement, FieldElement]:
    """``(eps, gamma)`` with ``beta = eps * gamma``, eps an S-unit and gamma in ``a1``."""
    if beta.is_zero():
        raise ZeroInputError("cannot decompose zero")
    ns = s_norm(beta, ctx)
    if ns != a1.m:
        raise UsageError(f"N_S({beta}) = {ns} but the A1 set is for m = {a1.m}")
    eps, gamma = canonical_factor(beta, a1.c3, ctx)
    if gamma not in a1:
        raise InternalConsistencyError(f"{gamma} is balanced but missing from A1({a1.m})")
    return eps, gamma


def build_a2(m: int) -> list[tuple[int, int, int]]:
    """Ordered triples of positive integers with product ``m``."""
    if m < 1:
        raise UsageError(f"A2 needs m >= 1, got {m}")
    triples = [
        (k1, k2, m // (k1 * k2))
        for k1 in polys.divisors(m)
        for k2 in polys.divisors(m // k1)
    ]
    if len(triples) > polys.divisor_count(m) ** 2:
        raise InternalConsistencyError(f"|A2({m})| = {len(triples)} exceeds d(m)^2")
    return triples


class A1Cache:
    """Lazily built ``A1(k)`` sets for one problem."""

    def __init__(
        self: A1Cache,
        pd: ProblemData,
        delta: DeltaK | None = None,
        *,
        precision: int = 128,
        cap: int = 100_000_000,
        workers: int = 1,
    ) -> None:
        self._pd = pd
        self.c3 = problem_c3(pd.ctx, delta, precision=precision, cap=cap)
        self._precision = precision
        self._cap = cap
        self._workers = workers
        self._sets: dict[int, A1Set] = {}
        self._canonical: dict[int, list[FieldElement]] = {}

    def get(self: A1Cache, m: int) -> A1Set:
        found = self._sets.get(m)
        if found is None:
            found = build_a1(
                m,
                self._pd,
                c3_ball=self.c3,
                precision=self._precision,
                cap=self._cap,
                workers=self._workers,
            )
            self._sets[m] = found
        return found

    def canonical(self: A1Cache, k: int) -> list[FieldElement]:
        """Distinct canonical factors of the elements of ``A1(k)`` with S-norm ``k``.

        Every S-integer of S-norm ``k`` is an S-unit times one of these.
        """
        found = self._canonical.get(k)
        if found is None:
            ctx = self._pd.ctx
            images: dict[tuple[Fraction, ...], FieldElement] = {}
            for g in self.get(k).gammas:
                if s_norm(g, ctx) == k:
                    _, gamma = canonical_factor(g, self.c3, ctx)
                    images.setdefault(gamma.coords, gamma)
            found = [images[key] for key in sorted(images)]
            self._canonical[k] = found
        return found

    @property
    def problem(self: A1Cache) -> ProblemData:
        return self._pd

    def decompose(self: A1Cache, beta: FieldElement) -> tuple[FieldElement, FieldElement]:
        ns = s_norm(beta, self._pd.ctx)
        if ns.denominator != 1:
            raise NotInOSError(f"N_S({beta}) = {ns} is not an integer")
        return decompose(beta, self.get(ns.numerator), self._pd.ctx)

