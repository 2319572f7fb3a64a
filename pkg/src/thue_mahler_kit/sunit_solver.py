"""Exhaustive S-unit equation solver over exponent boxes.

``delta_1 x_1 + ... + delta_l x_l = 1`` is searched with ``x_1 ... x_(l-1)`` running
over the S-units whose generator exponents lie in ``[-B, B]`` (torsion exponent in
``[0, w)``). The last unknown is solved exactly and kept when it is an S-unit.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .constants import CertifiedUpper, evertse_bound
from .errors import (
    BoundViolationError,
    CapExceededError,
    CardinalityError,
    NotInGeneratedGroupError,
    UsageError,
    ZeroInputError,
)
from .number_field import FieldElement
from .parallel import ordered_map, split_range
from .s_arithmetic import ExponentVector, SContext, SMembership, s_membership, sunit_exponents

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoxedUnit:
    exponents: ExponentVector
    value: FieldElement


def sunit_box(ctx: SContext, bound: int, cap: int = 100_000_000) -> list[BoxedUnit]:
    """S-units with every exponent in ``[-bound, bound]``, lexicographic in the exponents."""
    if bound < 0:
        raise UsageError(f"exponent box must be non-negative, got {bound}")
    w = ctx.unit_data.w
    free = ctx.r + ctx.t
    size = w * (2 * bound + 1) ** free
    if size > cap:
        raise CapExceededError(f"S-unit box has {size} elements, cap is {cap}", required=str(size))
    gens = [*ctx.unit_data.fundamental_units, *ctx.prime_generators]
    powers = [{k: g**k for k in range(-bound, bound + 1)} for g in gens]
    torsion = ctx.unit_data.torsion()
    out: list[BoxedUnit] = []
    for a0 in range(w):
        for exps in itertools.product(range(-bound, bound + 1), repeat=free):
            value = torsion[a0]
            for table, e in zip(powers, exps, strict=True):
                if e != 0:
                    value = value * table[e]
            out.append(
                BoxedUnit(ExponentVector(a0, tuple(exps[: ctx.r]), tuple(exps[ctx.r :])), value)
            )
    return out


@dataclass(frozen=True)
class UnitEquation:
    deltas: tuple[FieldElement, ...]
    ctx: SContext
    box: int


@dataclass(frozen=True)
class UnitSolution:
    values: tuple[FieldElement, ...]
    exponents: tuple[ExponentVector | None, ...]

    def to_json(self: UnitSolution) -> dict[str, object]:
        return {
            "values": [x.to_json() for x in self.values],
            "exponents": [None if e is None else e.to_json() for e in self.exponents],
        }


@dataclass(frozen=True)
class SolutionSetReport:
    solutions: list[UnitSolution]
    degenerate: int
    bound: CertifiedUpper
    searched: int

    def describe(self: SolutionSetReport) -> dict[str, object]:
        return {
            "count": len(self.solutions),
            "degenerate": self.degenerate,
            "searched": self.searched,
            "bound": self.bound.to_json(),
            "solutions": [s.to_json() for s in self.solutions],
        }


def has_vanishing_subsum(terms: Sequence[FieldElement]) -> bool:
    """True when some nonempty strict subset of ``terms`` sums to zero."""
    n = len(terms)
    for mask in range(1, (1 << n) - 1):
        total = terms[0].field.zero()
        for i in range(n):
            if mask >> i & 1:
                total = total + terms[i]
        if total.is_zero():
            return True
    return False


@dataclass(frozen=True)
class _Hit:
    indices: tuple[int, ...]
    last: FieldElement


def _scan(
    eq: UnitEquation, box: list[BoxedUnit], first: tuple[int, int]
) -> tuple[list[_Hit], int]:
    ell = len(eq.deltas)
    hits: list[_Hit] = []
    degenerate = 0
    for i0 in range(first[0], first[1] + 1):
        for rest in itertools.product(range(len(box)), repeat=ell - 2):
            idx = (i0, *rest)
            xs = [box[i].value for i in idx]
            partial = eq.ctx.field.zero()
            for d, x in zip(eq.deltas, xs, strict=False):
                partial = partial + d * x
            last = (1 - partial) / eq.deltas[-1]
            if last.is_zero() or s_membership(last, eq.ctx) != SMembership.UNIT:
                continue
            terms = [d * x for d, x in zip(eq.deltas, [*xs, last], strict=True)]
            if has_vanishing_subsum(terms):
                degenerate += 1
                continue
            hits.append(_Hit(idx, last))
    return hits, degenerate


def _last_exponents(last: FieldElement, ctx: SContext) -> ExponentVector | None:
    try:
        return sunit_exponents(last, ctx)
    except NotInGeneratedGroupError:
        _logger.warning("%s is an S-unit outside the group generated by the basis", last)
        return None


def solve_unit_equation(
    eq: UnitEquation, *, workers: int = 1, cap: int = 100_000_000
) -> SolutionSetReport:
    ell = len(eq.deltas)
    if ell < 2:
        raise UsageError(f"unit equation needs at least two terms, got {ell}")
    if any(d.is_zero() for d in eq.deltas):
        raise ZeroInputError("unit equation coefficients must be nonzero")
    box = sunit_box(eq.ctx, eq.box, cap)
    searched = len(box) ** (ell - 1)
    if searched > cap:
        raise CapExceededError(
            f"unit equation search has {searched} candidates, cap is {cap}", required=str(searched)
        )
    chunks = split_range(0, len(box) - 1, max(1, workers) * 4)

    def scan(first: tuple[int, int]) -> tuple[list[_Hit], int]:
        return _scan(eq, box, first)

    parts = ordered_map(scan, chunks, workers)
    solutions: list[UnitSolution] = []
    degenerate = 0
    for hits, skipped in parts:
        degenerate += skipped
        for hit in hits:
            head = [box[i] for i in hit.indices]
            solutions.append(
                UnitSolution(
                    values=(*(b.value for b in head), hit.last),
                    exponents=(*(b.exponents for b in head), _last_exponents(hit.last, eq.ctx)),
                )
            )
    bound = evertse_bound(ell, eq.ctx.s)
    if Fraction(len(solutions)) > bound.upper:
        raise BoundViolationError(f"{len(solutions)} solutions exceed the unit equation bound")
    _logger.info(
        "unit equation l=%d box=%d: %d solutions, %d degenerate",
        ell,
        eq.box,
        len(solutions),
        degenerate,
    )
    return SolutionSetReport(solutions, degenerate, bound, searched)


def _unique(elements: Sequence[FieldElement]) -> list[FieldElement]:
    seen: dict[tuple[Fraction, ...], FieldElement] = {}
    for x in elements:
        seen.setdefault(x.coords, x)
    return [seen[k] for k in sorted(seen)]


def build_a3(
    deltas: Sequence[FieldElement],
    ctx: SContext,
    box: int,
    *,
    workers: int = 1,
    cap: int = 100_000_000,
) -> list[FieldElement]:
    """``{1}`` together with the first coordinates of the nondegenerate solutions."""
    report = solve_unit_equation(UnitEquation(tuple(deltas), ctx, box), workers=workers, cap=cap)
    return _unique([ctx.field.one(), *(s.values[0] for s in report.solutions)])


def build_a3_tilde(
    deltas: Sequence[FieldElement],
    ctx: SContext,
    box: int,
    *,
    workers: int = 1,
    cap: int = 100_000_000,
) -> list[FieldElement]:
    """Union of A3 over the transpositions ``(1 i)``, closed under inversion."""
    collected: list[FieldElement] = []
    for i in range(len(deltas)):
        permuted = list(deltas)
        permuted[0], permuted[i] = permuted[i], permuted[0]
        for x in build_a3(permuted, ctx, box, workers=workers, cap=cap):
            collected.extend((x, x.inverse()))
    return _unique(collected)


def a4_deltas(
    alphas_primed: tuple[FieldElement, FieldElement, FieldElement],
) -> tuple[FieldElement, FieldElement]:
    a1, a2, a3 = alphas_primed
    if a1 == a2 or a2 == a3 or a1 == a3:
        raise CardinalityError("the three alpha' must be pairwise distinct")
    return (a3 - a1) / (a3 - a2), (a1 - a2) / (a3 - a2)


def build_a4(
    alphas_primed: tuple[FieldElement, FieldElement, FieldElement],
    ctx: SContext,
    box: int,
    *,
    workers: int = 1,
    cap: int = 100_000_000,
) -> list[FieldElement]:
    """``{1}`` with ``t2/t1`` and ``t3/t1`` over the box solutions of the three-term relation."""
    deltas = a4_deltas(alphas_primed)
    report = solve_unit_equation(UnitEquation(deltas, ctx, box), workers=workers, cap=cap)
    found = [ctx.field.one()]
    for sol in report.solutions:
        found.extend(sol.values)
    return _unique(found)
