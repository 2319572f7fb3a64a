"""Family Thue-Mahler equations and their dependence classes.

The family equation is ``(X - a1 E1 Y)(X - a2 E2 Y)(X - a3 E3 Y) Z = mu E`` with
``X, Y, Z`` in O_S and ``E1, E2, E3, E`` S-units. Solvers are exhaustive over
integral coordinate boxes for ``x, y`` and exponent boxes for the twists; only
nontrivial solutions (``xy != 0``) are reported.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

from . import lattice, polys
from .constants import CertifiedUpper, ProblemData
from .decomposition import A1Cache, build_a2, canonical_factor
from .errors import (
    CapExceededError,
    CardinalityError,
    InternalConsistencyError,
    InvalidSolutionError,
    MixedProblemsError,
    TrivialSolutionError,
    UsageError,
    ZeroInputError,
)
from .intervals import RealBall
from .number_field import FieldElement, NumberField
from .parallel import ordered_map, split_range
from .places import norm_order, supported_places, valuation
from .s_arithmetic import SContext, SMembership, s_membership, s_norm
from .sunit_solver import BoxedUnit, sunit_box

_logger = logging.getLogger(__name__)

Triple = tuple[FieldElement, FieldElement, FieldElement]


def is_s_unit(a: FieldElement, ctx: SContext) -> bool:
    return not a.is_zero() and s_membership(a, ctx) == SMembership.UNIT


def xy_points(fld: NumberField, bound: int) -> list[FieldElement]:
    """Integral elements with every integral-basis coordinate in ``[-bound, bound]``."""
    if bound < 0:
        raise UsageError(f"xy box must be non-negative, got {bound}")
    box = lattice.CoordinateBox(tuple(bound for _ in range(fld.degree)))
    return [fld.from_basis(c) for c in box.points()]


# -- solutions --------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilySolution:
    problem: ProblemData = field(compare=False, repr=False)
    x: FieldElement
    y: FieldElement
    z: FieldElement
    epsilons: Triple
    eps: FieldElement
    alpha_tilde: Triple
    beta: Triple
    beta_primed: Triple
    k_primed: tuple[int, int, int]
    trivial: bool

    def seven(self: FamilySolution) -> tuple[FieldElement, ...]:
        return (self.x, self.y, self.z, *self.epsilons, self.eps)

    def key(self: FamilySolution) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(c.coords for c in self.seven())

    def to_json(self: FamilySolution) -> dict[str, object]:
        return {
            "x": self.x.to_json(),
            "y": self.y.to_json(),
            "z": self.z.to_json(),
            "eps1": self.epsilons[0].to_json(),
            "eps2": self.epsilons[1].to_json(),
            "eps3": self.epsilons[2].to_json(),
            "eps": self.eps.to_json(),
            "k_primed": [str(k) for k in self.k_primed],
            "trivial": self.trivial,
        }


def _check_domains(pd: ProblemData, s7: Sequence[FieldElement]) -> None:
    ctx = pd.ctx
    names = ("x", "y", "z", "eps1", "eps2", "eps3", "eps")
    for name, value in zip(names[:3], s7[:3], strict=True):
        if s_membership(value, ctx) == SMembership.OUTSIDE:
            raise InvalidSolutionError(f"{name}={value} is not in O_S")
    for name, value in zip(names[3:], s7[3:], strict=True):
        if not is_s_unit(value, ctx):
            raise InvalidSolutionError(f"{name}={value} is not an S-unit")


def verify_family_solution(pd: ProblemData, s7: Sequence[FieldElement]) -> FamilySolution:
    if len(s7) != 7:
        raise UsageError(f"a family solution has 7 components, got {len(s7)}")
    _check_domains(pd, s7)
    x, y, z, e1, e2, e3, eps = s7
    tilde = (pd.alphas[0] * e1, pd.alphas[1] * e2, pd.alphas[2] * e3)
    if len({a.coords for a in tilde}) != 3:
        raise CardinalityError("alpha_i * eps_i are not pairwise distinct")
    beta = (x - tilde[0] * y, x - tilde[1] * y, x - tilde[2] * y)
    if beta[0] * beta[1] * beta[2] * z != pd.mu * eps:
        raise InvalidSolutionError("the family identity does not hold")
    primed = (beta[0] * pd.q, beta[1] * pd.q, beta[2] * pd.q)
    ks = [s_norm(b, pd.ctx) for b in primed]
    if any(k.denominator != 1 for k in ks):
        raise InternalConsistencyError("q * beta_i is not in O_S")
    k_primed = (ks[0].numerator, ks[1].numerator, ks[2].numerator)
    if Fraction(math.prod(k_primed)) * s_norm(z, pd.ctx) != pd.m:
        raise InternalConsistencyError("k'_1 k'_2 k'_3 N_S(z) differs from m")
    return FamilySolution(
        problem=pd,
        x=x,
        y=y,
        z=z,
        epsilons=(e1, e2, e3),
        eps=eps,
        alpha_tilde=tilde,
        beta=beta,
        beta_primed=primed,
        k_primed=k_primed,
        trivial=(x * y).is_zero(),
    )


# -- dependence ---------------------------------------------------------------------------


@dataclass(frozen=True)
class S3Dependence:
    equivalent: bool
    eta: Triple | None = None

    def to_json(self: S3Dependence) -> dict[str, object]:
        return {
            "equivalent": self.equivalent,
            "eta": None if self.eta is None else [e.to_json() for e in self.eta],
        }


def s3_dependence_test(a: FamilySolution, b: FamilySolution) -> S3Dependence:
    """Is ``b = (x n1, y n1/n3, z n2, eps_i n3, eps n1^3 n2)`` for S-units ``n1, n2, n3``?"""
    if a.trivial or b.trivial:
        raise TrivialSolutionError("S^3-dependence is defined on nontrivial solutions")
    ctx = a.problem.ctx
    eta3 = b.epsilons[0] / a.epsilons[0]
    if any(b.epsilons[i] != a.epsilons[i] * eta3 for i in (1, 2)):
        return S3Dependence(False)
    eta1 = b.x / a.x
    eta2 = b.z / a.z
    if not all(is_s_unit(e, ctx) for e in (eta1, eta2, eta3)):
        return S3Dependence(False)
    if b.y != a.y * eta1 / eta3 or b.eps != a.eps * eta1**3 * eta2:
        return S3Dependence(False)
    return S3Dependence(True, (eta1, eta2, eta3))


@dataclass(frozen=True)
class PairSolution:
    """A solution of the classic or the reduced equation.

    ``twist`` carries ``(eps1, eps2)`` for the reduced equation.
    """

    x: FieldElement
    y: FieldElement
    eps: FieldElement | None = None
    twist: tuple[FieldElement, FieldElement] | None = None

    def key(self: PairSolution) -> tuple[tuple[Fraction, ...], ...]:
        extra = () if self.twist is None else tuple(t.coords for t in self.twist)
        return (self.x.coords, self.y.coords, *extra)

    def to_json(self: PairSolution) -> dict[str, object]:
        out: dict[str, object] = {"x": self.x.to_json(), "y": self.y.to_json()}
        if self.eps is not None:
            out["eps"] = self.eps.to_json()
        if self.twist is not None:
            out["eps1"] = self.twist[0].to_json()
            out["eps2"] = self.twist[1].to_json()
        return out


def s_dependence_test(
    a: PairSolution, b: PairSolution, ctx: SContext, *, degree: int = 3
) -> bool:
    """Same point of P^1 up to an S-unit ``eta``, with ``eps' = eps eta^n``."""
    if (a.x.is_zero() and a.y.is_zero()) or (b.x.is_zero() and b.y.is_zero()):
        return False
    if a.x * b.y != b.x * a.y:
        return False
    eta = b.x / a.x if not a.x.is_zero() else b.y / a.y
    if not is_s_unit(eta, ctx):
        return False
    if a.twist != b.twist:
        return False
    if a.eps is None or b.eps is None:
        return True
    return b.eps == a.eps * eta ** (3 if a.twist is not None else degree)


# -- search -------------------------------------------------------------------------------


PlaceKey = tuple[int, int]


@dataclass(frozen=True)
class _Factor:
    unit: int
    primed: FieldElement
    k: int
    outside: tuple[tuple[PlaceKey, int], ...]


def _outside_orders(
    a: FieldElement, k: int, ctx: SContext
) -> tuple[tuple[PlaceKey, int], ...]:
    """Orders of ``a`` (in O_S, with S-norm ``k``) at the places outside S.

    Above an index divisor only ``sum f_P ord_P`` is known; it is keyed ``(p, -1)``.
    """
    if k == 1:
        return ()
    out: list[tuple[PlaceKey, int]] = []
    for p in polys.factor_integer(k):
        above = supported_places(ctx.field, p)
        if above is None:
            out.append(((p, -1), norm_order(a, p)))
            continue
        for place in above:
            if not ctx.contains(place):
                v = valuation(a, place)
                if v != 0:
                    out.append(((place.p, place.index), v))
    return tuple(out)


def _target_orders(pd: ProblemData) -> dict[PlaceKey, int]:
    return dict(_outside_orders(pd.mu * pd.q**3, pd.m, pd.ctx))


def _factor(pd: ProblemData, primed: FieldElement, unit: int) -> _Factor | None:
    """``b'_i`` with its S-norm when that norm is an integer dividing ``m``."""
    if primed.is_zero():
        return None
    ns = s_norm(primed, pd.ctx)
    if ns.denominator != 1 or pd.m % ns.numerator != 0:
        return None
    k = ns.numerator
    return _Factor(unit, primed, k, _outside_orders(primed, k, pd.ctx))


def _factors(
    pd: ProblemData,
    x: FieldElement,
    y: FieldElement,
    i: int,
    units: list[BoxedUnit],
    allowed: Sequence[int],
) -> list[_Factor]:
    out: list[_Factor] = []
    for idx in allowed:
        found = _factor(pd, (x - pd.alphas[i] * units[idx].value * y) * pd.q, idx)
        if found is not None:
            out.append(found)
    return out


def _fits(pd: ProblemData, parts: Sequence[_Factor], target: dict[PlaceKey, int]) -> bool:
    """``q^3 mu / (b'_1 b'_2 b'_3)`` lies in O_S."""
    if pd.m % math.prod(f.k for f in parts) != 0:
        return False
    total: dict[PlaceKey, int] = {}
    for f in parts:
        for key, v in f.outside:
            total[key] = total.get(key, 0) + v
    if not all(v <= target.get(key, 0) for key, v in total.items()):
        return False
    if any(key[1] < 0 for key in total):
        # summed orders above an index divisor only rule candidates out
        product = parts[0].primed * parts[1].primed * parts[2].primed
        quotient = pd.mu * pd.q**3 / product
        return s_membership(quotient, pd.ctx) != SMembership.OUTSIDE
    return True


@dataclass(frozen=True)
class _Candidate:
    x: FieldElement
    y: FieldElement
    units: tuple[int, int, int]


def _distinct(pd: ProblemData, units: list[BoxedUnit], idx: tuple[int, int, int]) -> bool:
    tilde = {(pd.alphas[i] * units[j].value).coords for i, j in enumerate(idx)}
    return len(tilde) == 3


def _twist_slots(ctx: SContext, units: list[BoxedUnit], normalized: bool) -> list[list[int]]:
    """Allowed unit indices for ``eps1``, ``eps2``, ``eps3``."""
    every = list(range(len(units)))
    if not normalized:
        return [every, every, every]
    one = ctx.field.one()
    return [[j for j in every if units[j].value == one], every, every]


def _scan_pairs(
    pd: ProblemData,
    pairs: list[tuple[FieldElement, FieldElement]],
    units: list[BoxedUnit],
    slots: list[list[int]],
    span: tuple[int, int],
) -> list[_Candidate]:
    target = _target_orders(pd)
    found: list[_Candidate] = []
    for x, y in pairs[span[0] : span[1] + 1]:
        lists = [_factors(pd, x, y, i, units, slots[i]) for i in range(3)]
        for f1, f2, f3 in itertools.product(*lists):
            idx = (f1.unit, f2.unit, f3.unit)
            if _distinct(pd, units, idx) and _fits(pd, (f1, f2, f3), target):
                found.append(_Candidate(x, y, idx))
    return found


def canonical_z(quotient: FieldElement, ctx: SContext, c3_ball: RealBall) -> FieldElement:
    """1 for an S-unit, otherwise the balanced torsion-normalized factor of ``quotient``."""
    if is_s_unit(quotient, ctx):
        return ctx.field.one()
    _, gamma = canonical_factor(quotient, c3_ball, ctx)
    return gamma


def _complete(
    pd: ProblemData, cand: _Candidate, units: list[BoxedUnit], c3_ball: RealBall
) -> FamilySolution:
    eps_triple = tuple(units[j].value for j in cand.units)
    product = pd.ctx.field.one()
    for a, e in zip(pd.alphas, eps_triple, strict=True):
        product = product * (cand.x - a * e * cand.y)
    z = canonical_z(pd.mu / product, pd.ctx, c3_ball)
    eps = product * z / pd.mu
    return verify_family_solution(pd, (cand.x, cand.y, z, *eps_triple, eps))


def _strategy_direct(
    pd: ProblemData,
    pairs: list[tuple[FieldElement, FieldElement]],
    units: list[BoxedUnit],
    slots: list[list[int]],
    workers: int,
) -> list[_Candidate]:
    chunks = split_range(0, len(pairs) - 1, max(1, workers) * 4)

    def scan(span: tuple[int, int]) -> list[_Candidate]:
        return _scan_pairs(pd, pairs, units, slots, span)

    return [c for part in ordered_map(scan, chunks, workers) for c in part]


def _in_box(a: FieldElement, bound: int) -> bool:
    coords = a.field.basis_coordinates(a)
    return all(c.denominator == 1 and abs(c) <= bound for c in coords)


def _associates(a1: A1Cache, k: int, units: list[BoxedUnit]) -> list[FieldElement]:
    """``w * gamma`` for boxed S-units ``w`` and canonical factors ``gamma`` of S-norm ``k``."""
    seen: dict[tuple[Fraction, ...], FieldElement] = {}
    for gamma in a1.canonical(k):
        for u in units:
            b = u.value * gamma
            seen.setdefault(b.coords, b)
    return [seen[key] for key in sorted(seen)]


def _reconstruct(
    pd: ProblemData, t1: FieldElement, b1: FieldElement, t2: FieldElement, b2: FieldElement
) -> tuple[FieldElement, FieldElement]:
    """``(x, y)`` with ``q (x - t1 y) = b1`` and ``q (x - t2 y) = b2``, for ``t1 != t2``."""
    y = (b1 - b2) / ((t2 - t1) * pd.q)
    return b1 / pd.q + t1 * y, y


@dataclass(frozen=True)
class _Rebuilt:
    """Integral candidates rebuilt from factors, split by the ``x, y`` box."""

    inside: list[_Candidate]
    beyond: list[_Candidate]
    reach: dict[int, frozenset[tuple[Fraction, ...]]]

    def reaches(self: _Rebuilt, pd: ProblemData, c: _Candidate, units: list[BoxedUnit]) -> bool:
        """Both ``b'_1`` and ``b'_2`` of ``c`` are among the rebuilt factors."""
        for i in (0, 1):
            primed = (c.x - pd.alphas[i] * units[c.units[i]].value * c.y) * pd.q
            ns = s_norm(primed, pd.ctx)
            rebuilt = self.reach.get(ns.numerator) if ns.denominator == 1 else None
            if rebuilt is None or primed.coords not in rebuilt:
                return False
        return True


@dataclass(frozen=True)
class _RebuildJob:
    ks: tuple[int, int, int]
    first_unit: int


def _rebuild(
    pd: ProblemData,
    units: list[BoxedUnit],
    slots: list[list[int]],
    associates: dict[int, list[FieldElement]],
    job: _RebuildJob,
) -> list[_Candidate]:
    """Candidates with first twist ``units[job.first_unit]`` and S-norms ``job.ks``."""
    target = _target_orders(pd)
    k1, k2, k3 = job.ks
    j1 = job.first_unit
    t1 = pd.alphas[0] * units[j1].value
    found: list[_Candidate] = []
    for j2 in slots[1]:
        t2 = pd.alphas[1] * units[j2].value
        if t1 == t2:
            continue
        for b1, b2 in itertools.product(associates[k1], associates[k2]):
            if b1 == b2:
                continue
            x, y = _reconstruct(pd, t1, b1, t2, b2)
            if x.is_zero() or not (x.is_integral() and y.is_integral()):
                continue
            f1 = _Factor(j1, b1, k1, _outside_orders(b1, k1, pd.ctx))
            f2 = _Factor(j2, b2, k2, _outside_orders(b2, k2, pd.ctx))
            for j3 in slots[2]:
                f3 = _factor(pd, (x - pd.alphas[2] * units[j3].value * y) * pd.q, j3)
                if f3 is None or f3.k != k3:
                    continue
                idx = (j1, j2, j3)
                if _distinct(pd, units, idx) and _fits(pd, (f1, f2, f3), target):
                    found.append(_Candidate(x, y, idx))
    return found


def _strategy_factored(
    pd: ProblemData,
    xy_box: int,
    units: list[BoxedUnit],
    slots: list[list[int]],
    a1: A1Cache,
    workers: int,
    cap: int,
) -> _Rebuilt:
    """Candidates assembled from A2 splittings of the S-norm and A1 decompositions.

    ``b'_1`` and ``b'_2`` run over canonical factors times boxed S-units; ``x, y``
    follow from them and ``eps3`` is searched in the unit box.
    """
    associates = {k: _associates(a1, k, units) for k in polys.divisors(pd.m)}
    splittings = [t for d in polys.divisors(pd.m) for t in build_a2(d)]
    work = sum(
        len(slots[0]) * len(slots[1]) * len(associates[k1]) * len(associates[k2])
        for k1, k2, _ in splittings
    )
    if work > cap:
        raise CapExceededError(
            f"factored search needs {work} reconstructions, cap is {cap}", required=str(work)
        )
    jobs = [_RebuildJob(ks, j1) for ks in splittings for j1 in slots[0]]

    def rebuild(job: _RebuildJob) -> list[_Candidate]:
        return _rebuild(pd, units, slots, associates, job)

    found = {c for part in ordered_map(rebuild, jobs, workers) for c in part}
    ordered = sorted(found, key=lambda c: (c.x.coords, c.y.coords, c.units))
    boxed = [_in_box(c.x, xy_box) and _in_box(c.y, xy_box) for c in ordered]
    return _Rebuilt(
        inside=[c for c, ok in zip(ordered, boxed, strict=True) if ok],
        beyond=[c for c, ok in zip(ordered, boxed, strict=True) if not ok],
        reach={k: frozenset(b.coords for b in bs) for k, bs in associates.items()},
    )


def _cross_check(
    pd: ProblemData, direct: list[_Candidate], rebuilt: _Rebuilt, units: list[BoxedUnit]
) -> None:
    """Both strategies agree on the candidates either one can produce."""
    direct_set = set(direct)
    strays = [c for c in rebuilt.inside if c not in direct_set]
    if strays:
        raise InternalConsistencyError(
            f"factored search found {len(strays)} candidates the direct scan missed"
        )
    reachable = {c for c in direct if rebuilt.reaches(pd, c, units)}
    if reachable != set(rebuilt.inside):
        raise InternalConsistencyError(
            f"search strategies disagree: {len(reachable)} direct candidates have boxed "
            f"factors, the factored search rebuilt {len(rebuilt.inside)}"
        )


Strategy = Literal["direct", "factored", "both"]


@dataclass(frozen=True)
class FamilySearch:
    solutions: list[FamilySolution]
    direct_count: int | None
    factored_count: int | None
    beyond_box: list[FamilySolution] = field(default_factory=list)

    def describe(self: FamilySearch) -> dict[str, object]:
        return {
            "count": len(self.solutions),
            "direct_count": self.direct_count,
            "factored_count": self.factored_count,
            "solutions": [s.to_json() for s in self.solutions],
            "beyond_box": [s.to_json() for s in self.beyond_box],
        }


def solve_family(
    pd: ProblemData,
    xy_box: int,
    eps_box: int,
    *,
    strategy: Strategy = "both",
    normalized: bool = False,
    a1: A1Cache | None = None,
    workers: int = 1,
    cap: int = 100_000_000,
) -> FamilySearch:
    """Nontrivial solutions with ``x, y`` in the coordinate box and twists in the unit box.

    With ``normalized`` only ``eps1 = 1`` is searched; every S^3-class has members
    there. The factored strategy also returns the integral solutions it rebuilds
    outside the ``x, y`` box, each checked by :func:`verify_family_solution`.
    """
    ctx = pd.ctx
    units = sunit_box(ctx, eps_box, cap)
    slots = _twist_slots(ctx, units, normalized)
    points = xy_points(ctx.field, xy_box)
    pairs = [(x, y) for x in points for y in points if not x.is_zero() and not y.is_zero()]
    work = len(pairs) * sum(len(s) for s in slots)
    if work > cap:
        raise CapExceededError(
            f"family search needs {work} factor checks, cap is {cap}", required=str(work)
        )
    cache = a1 if a1 is not None else A1Cache(pd, precision=ctx.precision, cap=cap)
    direct: list[_Candidate] | None = None
    if strategy != "factored":
        direct = _strategy_direct(pd, pairs, units, slots, workers)
    rebuilt: _Rebuilt | None = None
    if strategy != "direct":
        rebuilt = _strategy_factored(pd, xy_box, units, slots, cache, workers, cap)
    if direct is not None and rebuilt is not None:
        _cross_check(pd, direct, rebuilt, units)
    if direct is not None:
        chosen = direct
    else:
        chosen = [] if rebuilt is None else rebuilt.inside
    solutions = sorted(
        (_complete(pd, c, units, cache.c3) for c in chosen), key=FamilySolution.key
    )
    beyond: list[FamilySolution] = []
    if rebuilt is not None:
        beyond = [_complete(pd, c, units, cache.c3) for c in rebuilt.beyond]
    _logger.info(
        "family search: %d solutions over %d (x, y) pairs, %d beyond the box",
        len(solutions),
        len(pairs),
        len(beyond),
    )
    return FamilySearch(
        solutions=solutions,
        direct_count=None if direct is None else len(direct),
        factored_count=None if rebuilt is None else len(rebuilt.inside),
        beyond_box=sorted(beyond, key=FamilySolution.key),
    )


# -- subsum case analysis -------------------------------------------------------------------


CaseLabel = Literal[
    "no-vanishing-subsum",
    "3+3-repeated-beta",
    "3+3-repeated-alpha",
    "3+3-all-distinct",
    "2+4-split",
]

# (beta index, alpha index, sign) of the six terms, relative to the order (1, i, j).
_TERM_SHAPE: tuple[tuple[int, int, int], ...] = (
    (0, 1, 1),
    (0, 2, -1),
    (1, 2, 1),
    (1, 0, -1),
    (2, 0, 1),
    (2, 1, -1),
)


@dataclass(frozen=True)
class CaseCertificate:
    label: CaseLabel
    sigma: tuple[int, int, int]
    sign: int
    terms: tuple[FieldElement, ...]
    vanishing: tuple[tuple[int, ...], ...]

    def describe(self: CaseCertificate) -> dict[str, object]:
        return {
            "case": self.label,
            "sigma": list(self.sigma),
            "sign": self.sign,
            "terms": [t.to_json() for t in self.terms],
            "vanishing": [list(s) for s in self.vanishing],
        }


def _shapes(sigma: tuple[int, int, int]) -> list[tuple[int, int, int]]:
    return [(sigma[b], sigma[a], s) for b, a, s in _TERM_SHAPE]


def _pair_patterns_hold(
    terms: Sequence[FieldElement], shapes: list[tuple[int, int, int]]
) -> bool:
    """Pairs sharing a beta, sharing an alpha, or transposed never cancel."""
    for i, j in itertools.combinations(range(6), 2):
        bi, ai, _ = shapes[i]
        bj, aj, _ = shapes[j]
        related = bi == bj or ai == aj or (bi == aj and ai == bj)
        if related and (terms[i] + terms[j]).is_zero():
            return False
    return True


def _three_pair_split(zero: set[tuple[int, ...]]) -> bool:
    pairs = [s for s in zero if len(s) == 2]
    for a, b, c in itertools.combinations(pairs, 3):
        if len(set(a) | set(b) | set(c)) == 6:
            return True
    return False


def _label_for(
    zero: list[tuple[int, ...]], shapes: list[tuple[int, int, int]]
) -> CaseLabel:
    if not zero:
        return "no-vanishing-subsum"
    if any(len(s) == 2 for s in zero):
        return "2+4-split"
    triple = next(s for s in zero if len(s) == 3)
    betas = [shapes[k][0] for k in triple]
    alphas = [shapes[k][1] for k in triple]
    if len(set(betas)) < 3:
        return "3+3-repeated-beta"
    if len(set(alphas)) < 3:
        return "3+3-repeated-alpha"
    return "3+3-all-distinct"


def _sum(terms: Sequence[FieldElement]) -> FieldElement:
    acc = terms[0].field.zero()
    for t in terms:
        acc = acc + t
    return acc


def _vanishing_subsets(terms: Sequence[FieldElement]) -> list[tuple[int, ...]]:
    """Nonempty proper index subsets with zero sum, by size then lexicographically."""
    n = len(terms)
    zero: list[tuple[int, ...]] = []
    for mask in range(1, (1 << n) - 1):
        subset = tuple(k for k in range(n) if mask >> k & 1)
        if _sum([terms[k] for k in subset]).is_zero():
            zero.append(subset)
    return sorted(zero, key=lambda s: (len(s), s))


def classify_subsums(sol: FamilySolution, i: int) -> CaseCertificate:
    if sol.trivial:
        raise TrivialSolutionError("subsum analysis needs a nontrivial solution")
    if i not in (2, 3):
        raise UsageError(f"the pivot index must be 2 or 3, got {i}")
    sigma = (0, 1, 2) if i == 2 else (0, 2, 1)
    shapes = _shapes(sigma)
    terms = tuple(sol.beta[b] * sol.alpha_tilde[a] * s for b, a, s in shapes)
    if not _sum(terms).is_zero():
        raise InternalConsistencyError("the six-term relation does not vanish")
    zero = _vanishing_subsets(terms)
    if not _pair_patterns_hold(terms, shapes):
        raise InternalConsistencyError("a shared-index pair of terms cancels")
    if _three_pair_split(set(zero)):
        raise InternalConsistencyError("the terms split into three vanishing pairs")
    return CaseCertificate(
        label=_label_for(zero, shapes),
        sigma=(1, sigma[1] + 1, sigma[2] + 1),
        sign=1 if i == 2 else -1,
        terms=terms,
        vanishing=tuple(zero),
    )


# -- canonical representatives ---------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalRep:
    x0: FieldElement
    y0: FieldElement
    eps0: FieldElement
    u: Triple
    k_primed: tuple[int, int, int]
    gammas: Triple
    w: Triple
    v: Triple
    solution: FamilySolution

    def class_key(self: CanonicalRep) -> tuple[object, ...]:
        return (
            self.k_primed,
            tuple(g.coords for g in self.gammas),
            tuple(x.coords for x in self.u),
            tuple(x.coords for x in self.v),
        )

    def describe(self: CanonicalRep) -> dict[str, object]:
        return {
            "x0": self.x0.to_json(),
            "y0": self.y0.to_json(),
            "eps0": self.eps0.to_json(),
            "u2": self.u[1].to_json(),
            "u3": self.u[2].to_json(),
            "k_primed": [str(k) for k in self.k_primed],
            "gammas": [g.to_json() for g in self.gammas],
            "w": [x.to_json() for x in self.w],
            "v": [x.to_json() for x in self.v],
            "representative": self.solution.to_json(),
        }


def canonicalize(sol: FamilySolution, a1: A1Cache) -> CanonicalRep:
    if sol.trivial:
        raise TrivialSolutionError("only nontrivial solutions have a canonical representative")
    pd = sol.problem
    if a1.problem != pd:
        raise MixedProblemsError("the A1 data belongs to another problem")
    parts = [a1.decompose(b) for b in sol.beta_primed]
    w = (parts[0][0], parts[1][0], parts[2][0])
    gammas = (parts[0][1], parts[1][1], parts[2][1])
    e1 = sol.epsilons[0]
    u = (pd.ctx.field.one(), sol.epsilons[1] / e1, sol.epsilons[2] / e1)
    v = (pd.ctx.field.one(), sol.beta[1] / sol.beta[0], sol.beta[2] / sol.beta[0])
    primed = tuple(a * ui for a, ui in zip(pd.alphas, u, strict=True))
    y_candidates = [
        gammas[0] * (1 - v[i]) / ((primed[i] - primed[0]) * pd.q) for i in (1, 2)
    ]
    if y_candidates[0] != y_candidates[1]:
        raise InternalConsistencyError(f"y0 disagrees: {y_candidates[0]} vs {y_candidates[1]}")
    y0 = y_candidates[0]
    x0 = gammas[0] / pd.q + primed[0] * y0
    eps0 = gammas[0] ** 3 * v[1] * v[2] / (pd.mu * pd.q**3)
    z0 = canonical_z(1 / eps0, pd.ctx, a1.c3)
    rep = verify_family_solution(pd, (x0, y0, z0, u[0], u[1], u[2], eps0 * z0))
    if not s3_dependence_test(rep, sol).equivalent:
        raise InternalConsistencyError("representative is not S^3-dependent on its source")
    return CanonicalRep(
        x0=x0,
        y0=y0,
        eps0=eps0,
        u=u,
        k_primed=sol.k_primed,
        gammas=gammas,
        w=w,
        v=v,
        solution=rep,
    )


# -- classes ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassPartition:
    class_ids: list[int]
    count: int
    within_kappa1: bool | None

    def describe(self: ClassPartition) -> dict[str, object]:
        return {
            "class_ids": self.class_ids,
            "count": self.count,
            "within_kappa1": self.within_kappa1,
        }


def union_find_classes(n: int, related: list[tuple[int, int]]) -> list[int]:
    parent = list(range(n))

    def root(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in related:
        ri, rj = root(i), root(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    labels: dict[int, int] = {}
    return [labels.setdefault(root(i), len(labels)) for i in range(n)]


def partition_classes(
    sols: Sequence[FamilySolution], kappa1: CertifiedUpper | None = None
) -> ClassPartition:
    if not sols:
        return ClassPartition([], 0, None if kappa1 is None else True)
    first = sols[0].problem
    if any(s.problem is not first and s.problem != first for s in sols):
        raise MixedProblemsError("solutions come from different problems")
    related = [
        (i, j)
        for i, j in itertools.combinations(range(len(sols)), 2)
        if s3_dependence_test(sols[i], sols[j]).equivalent
    ]
    ids = union_find_classes(len(sols), related)
    count = max(ids) + 1
    within = None if kappa1 is None else Fraction(count) <= kappa1.upper
    return ClassPartition(ids, count, within)


def pair_classes(sols: Sequence[PairSolution], ctx: SContext, degree: int) -> list[int]:
    related = [
        (i, j)
        for i, j in itertools.combinations(range(len(sols)), 2)
        if s_dependence_test(sols[i], sols[j], ctx, degree=degree)
    ]
    return union_find_classes(len(sols), related)


# -- classic and reduced equations ---------------------------------------------------------


@dataclass(frozen=True)
class PairReport:
    solutions: list[PairSolution]
    class_ids: list[int]
    notes: list[str] = field(default_factory=list)

    @property
    def class_count(self: PairReport) -> int:
        return max(self.class_ids, default=-1) + 1

    def describe(self: PairReport) -> dict[str, object]:
        return {
            "count": len(self.solutions),
            "classes": self.class_count,
            "solutions": [
                {**s.to_json(), "class_id": c}
                for s, c in zip(self.solutions, self.class_ids, strict=True)
            ],
            "notes": list(self.notes),
        }


def _coprime_to(x: FieldElement, y: FieldElement, primes: Sequence[int]) -> bool:
    value = (x * y).rational()
    return math.gcd(value.numerator, math.prod(primes)) == 1


def _classic_eps(
    alphas: Sequence[FieldElement], mu: FieldElement, x: FieldElement, y: FieldElement
) -> FieldElement:
    value = x.field.one()
    for a in alphas:
        value = value * (x - a * y)
    return value / mu


def solve_classic(
    alphas: Sequence[FieldElement],
    mu: FieldElement,
    ctx: SContext,
    xy_box: int,
    *,
    coprime: bool = False,
    cap: int = 100_000_000,
) -> PairReport:
    """``prod (x - alpha_i y) = mu * eps`` over the box, ``xy != 0``."""
    if mu.is_zero():
        raise ZeroInputError("mu must be nonzero")
    notes: list[str] = []
    if len({a.coords for a in alphas}) < 3:
        _logger.warning("fewer than three distinct alphas: finiteness is not claimed")
        notes.append("fewer than three distinct alphas")
    if coprime and ctx.field.degree != 1:
        raise UsageError("the coprimality filter applies over Q only")
    points = [p for p in xy_points(ctx.field, xy_box) if not p.is_zero()]
    if len(points) ** 2 > cap:
        raise CapExceededError(
            f"classic search has {len(points) ** 2} pairs, cap is {cap}",
            required=str(len(points) ** 2),
        )
    found: list[PairSolution] = []
    for x, y in itertools.product(points, repeat=2):
        if coprime and not _coprime_to(x, y, ctx.primes):
            continue
        eps = _classic_eps(alphas, mu, x, y)
        if is_s_unit(eps, ctx):
            found.append(PairSolution(x, y, eps))
    return PairReport(found, pair_classes(found, ctx, len(alphas)), notes)


def _unit_factors(
    x: FieldElement, y: FieldElement, units: list[BoxedUnit], ctx: SContext
) -> list[FieldElement]:
    return [u.value for u in units if is_s_unit(x - u.value * y, ctx)]


def solve_reduced(
    ctx: SContext, xy_box: int, eps_box: int, *, cap: int = 100_000_000
) -> PairReport:
    """``(x - y)(x - e1 y)(x - e2 y) = e`` over the boxes, ``xy != 0``."""
    units = sunit_box(ctx, eps_box, cap)
    points = [p for p in xy_points(ctx.field, xy_box) if not p.is_zero()]
    size = len(points) ** 2 * len(units)
    if size > cap:
        raise CapExceededError(
            f"reduced search has {size} candidates, cap is {cap}", required=str(size)
        )
    found: list[PairSolution] = []
    for x, y in itertools.product(points, repeat=2):
        if not is_s_unit(x - y, ctx):
            continue
        good = _unit_factors(x, y, units, ctx)
        for e1, e2 in itertools.product(good, repeat=2):
            eps = (x - y) * (x - e1 * y) * (x - e2 * y)
            found.append(PairSolution(x, y, eps, (e1, e2)))
    return PairReport(found, pair_classes(found, ctx, 3))
