"""Binary forms: twisted forms, twisted Thue-Mahler searches and S-equivalence.

A form of degree ``n`` is stored as ``(a_0, ..., a_n)`` with
``f(X, Y) = a_0 X^n + a_1 X^(n-1) Y + ... + a_n Y^n``.
"""

from __future__ import annotations

import collections
import itertools
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Final, Literal

from . import lattice, polys
from .constants import CertifiedUpper
from .errors import (
    CapExceededError,
    CardinalityError,
    InternalConsistencyError,
    NonIntegralFormError,
    NotInGeneratedGroupError,
    NotSUnitError,
    UsageError,
    ZeroInputError,
)
from .number_field import FieldElement, NumberField, format_poly
from .parallel import ordered_map
from .s_arithmetic import SContext, SMembership, s_membership, s_norm, sunit_exponents
from .sunit_solver import UnitEquation, solve_unit_equation, sunit_box
from .thue_mahler import (
    PairReport,
    PairSolution,
    is_s_unit,
    pair_classes,
    union_find_classes,
    xy_points,
)

_logger = logging.getLogger(__name__)

Matrix = tuple[FieldElement, FieldElement, FieldElement, FieldElement]


def _form_text(coeffs: Sequence[Fraction]) -> str:
    n = len(coeffs) - 1
    terms: list[str] = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        mono = "*".join(p for p in (_power("X", n - i), _power("Y", i)) if p)
        mag = abs(c)
        body = mono if mag == 1 and mono else (f"{mag}*{mono}" if mono else str(mag))
        terms.append(("-" if c < 0 else "+") + body)
    text = "".join(terms) or "0"
    return text[1:] if text.startswith("+") else text


def _power(var: str, k: int) -> str:
    if k == 0:
        return ""
    return var if k == 1 else f"{var}^{k}"


@dataclass(frozen=True)
class BinaryForm:
    coeffs: tuple[Fraction, ...]
    root: FieldElement | None = field(default=None, compare=False)

    @classmethod
    def of(
        cls: type[BinaryForm], coeffs: Sequence[int | Fraction], root: FieldElement | None = None
    ) -> BinaryForm:
        values = tuple(Fraction(c) for c in coeffs)
        if len(values) < 2:
            raise UsageError("a binary form needs degree >= 1")
        if all(c == 0 for c in values):
            raise ZeroInputError("the zero form")
        form = cls(values, root)
        if root is not None and _from_root(values[0], root) != values:
            raise UsageError(f"{root} is not a root of {form}")
        return form

    @property
    def degree(self: BinaryForm) -> int:
        return len(self.coeffs) - 1

    def value(self: BinaryForm, x: int, y: int) -> Fraction:
        n = self.degree
        return sum((c * x ** (n - i) * y**i for i, c in enumerate(self.coeffs)), Fraction(0))

    def at(self: BinaryForm, x: FieldElement, y: FieldElement) -> FieldElement:
        n = self.degree
        acc = x.field.zero()
        for i, c in enumerate(self.coeffs):
            if c != 0:
                acc = acc + x ** (n - i) * y**i * c
        return acc

    def lift(self: BinaryForm, fld: NumberField) -> list[FieldElement]:
        return [fld.from_scalar(c) for c in self.coeffs]

    def is_integral(self: BinaryForm) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def to_json(self: BinaryForm) -> list[str]:
        return [str(c) for c in self.coeffs]

    def __str__(self: BinaryForm) -> str:
        return _form_text(self.coeffs)


def _from_root(leading: Fraction, root: FieldElement) -> tuple[Fraction, ...]:
    """``a_0 * prod (X - sigma_i(root) Y)`` from the characteristic polynomial."""
    cp = root.charpoly()
    return tuple(leading * c for c in reversed(cp))


def make_twisted_form(f: BinaryForm, eps: FieldElement, ctx: SContext) -> BinaryForm:
    if f.root is None:
        raise UsageError("twisting needs a form given with its root")
    if eps.field is not f.root.field or ctx.field is not eps.field:
        raise UsageError("the twist, the root and S must live in one field")
    if not is_s_unit(eps, ctx):
        raise NotSUnitError(f"{eps} is not an S-unit")
    root = f.root * eps
    twisted = BinaryForm(_from_root(f.coeffs[0], root), root)
    if not twisted.is_integral():
        raise NonIntegralFormError(f"twist by {eps} gives {twisted}, not in Z[X, Y]")
    return twisted


# -- homogeneous polynomial algebra over K ------------------------------------------------


def _hom_mul(a: Sequence[FieldElement], b: Sequence[FieldElement]) -> list[FieldElement]:
    out = [a[0].field.zero() for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def _powers(linear: list[FieldElement], n: int) -> list[list[FieldElement]]:
    table = [[linear[0].field.one()]]
    for _ in range(n):
        table.append(_hom_mul(table[-1], linear))
    return table


def compose(coeffs: Sequence[FieldElement], m: Matrix) -> list[FieldElement]:
    """Coefficients of ``f(aX + bY, cX + dY)``."""
    n = len(coeffs) - 1
    left = _powers([m[0], m[1]], n)
    right = _powers([m[2], m[3]], n)
    total = [coeffs[0].field.zero() for _ in range(n + 1)]
    for i, a in enumerate(coeffs):
        if a.is_zero():
            continue
        term = _hom_mul(left[n - i], right[i])
        total = [s + a * t for s, t in zip(total, term, strict=True)]
    return total


def expand_roots(roots: Sequence[FieldElement]) -> list[FieldElement]:
    """Coefficients of ``prod (X - r Y)``."""
    acc = [roots[0].field.one()]
    for r in roots:
        acc = _hom_mul(acc, [r.field.one(), -r])
    return acc


# -- S-equivalence ------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceWitness:
    """``g(X, Y) = eta * f(alpha X + beta Y, gamma X + delta Y)``."""

    alpha: FieldElement
    beta: FieldElement
    gamma: FieldElement
    delta: FieldElement
    eta: FieldElement

    @property
    def matrix(self: EquivalenceWitness) -> Matrix:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def inverse(self: EquivalenceWitness) -> EquivalenceWitness:
        det = self.alpha * self.delta - self.beta * self.gamma
        return EquivalenceWitness(
            self.delta / det, -self.beta / det, -self.gamma / det, self.alpha / det, 1 / self.eta
        )

    def to_json(self: EquivalenceWitness) -> list[list[str]]:
        return [e.to_json() for e in (*self.matrix, self.eta)]


def verify_witness(
    f: Sequence[FieldElement], g: Sequence[FieldElement], w: EquivalenceWitness
) -> bool:
    if len(f) != len(g):
        return False
    image = compose(f, w.matrix)
    return all(gi == w.eta * hi for gi, hi in zip(g, image, strict=True))


EquivalenceStatus = Literal["equivalent", "inequivalent-within-box"]


@dataclass(frozen=True)
class SEquivalence:
    witness: EquivalenceWitness | None
    searched: int

    @property
    def status(self: SEquivalence) -> EquivalenceStatus:
        return "equivalent" if self.witness is not None else "inequivalent-within-box"

    def describe(self: SEquivalence) -> dict[str, object]:
        return {
            "status": self.status,
            "witness": None if self.witness is None else self.witness.to_json(),
            "searched": self.searched,
        }


def entry_order(fld: NumberField, bound: int) -> list[FieldElement]:
    """Integral elements of the box in search order: 1, -1, 0, 2, -2, ..."""
    box = lattice.CoordinateBox(tuple(bound for _ in range(fld.degree)))

    def key(coords: tuple[int, ...]) -> tuple[int, bool, tuple[int, ...]]:
        size = max((abs(c) for c in coords), default=0)
        return (max(1, size), size == 0, tuple(-c for c in coords))

    return [fld.from_basis(c) for c in sorted(box.points(), key=key)]


def _matching_eta(
    g: Sequence[FieldElement],
    image: Sequence[FieldElement],
    units: dict[tuple[Fraction, ...], FieldElement],
) -> FieldElement | None:
    pivot = next(i for i, c in enumerate(g) if not c.is_zero())
    if image[pivot].is_zero():
        return None
    eta = g[pivot] / image[pivot]
    if eta.coords not in units:
        return None
    if all(gi == eta * hi for gi, hi in zip(g, image, strict=True)):
        return eta
    return None


def s_equivalence_test(
    f: BinaryForm,
    g: BinaryForm,
    ctx: SContext,
    box: int,
    *,
    cap: int = 100_000_000,
) -> SEquivalence:
    """First witness in search order with entries in the box and eta an S-unit of the box."""
    if f.degree != g.degree:
        raise UsageError(f"degrees differ: {f.degree} vs {g.degree}")
    fld = ctx.field
    entries = entry_order(fld, box)
    total = len(entries) ** 4
    if total > cap:
        raise CapExceededError(
            f"equivalence search has {total} matrices, cap is {cap}", required=str(total)
        )
    units = {u.value.coords: u.value for u in sunit_box(ctx, box, cap)}
    source = f.lift(fld)
    target = g.lift(fld)
    searched = 0
    for m in itertools.product(entries, repeat=4):
        searched += 1
        if not is_s_unit(m[0] * m[3] - m[1] * m[2], ctx):
            continue
        eta = _matching_eta(target, compose(source, m), units)
        if eta is None:
            continue
        witness = EquivalenceWitness(*m, eta)
        if not verify_witness(target, source, witness.inverse()):
            raise InternalConsistencyError("the inverse transformation does not map g back to f")
        return SEquivalence(witness, searched)
    return SEquivalence(None, searched)


# -- twist vectors --------------------------------------------------------------------------


def check_twist_vector(
    alphas: Sequence[FieldElement], eps: Sequence[FieldElement], ctx: SContext
) -> list[FieldElement]:
    """Validate membership in the admissible twist set and return the twisted roots."""
    if len(alphas) != len(eps):
        raise UsageError(f"{len(eps)} twists for {len(alphas)} roots")
    if any(a.is_zero() for a in alphas):
        raise ZeroInputError("the base roots must be nonzero")
    if eps[0] != ctx.field.one():
        raise UsageError("twist vectors are normalized with eps_1 = 1")
    for e in eps:
        if not is_s_unit(e, ctx):
            raise NotSUnitError(f"{e} is not an S-unit")
    roots = [a * e for a, e in zip(alphas, eps, strict=True)]
    if len({r.coords for r in roots}) < 3:
        raise CardinalityError("fewer than three distinct twisted roots")
    return roots


FamilyCase = Literal["gamma-zero", "antidiagonal"]


@dataclass(frozen=True)
class FamilyEquivalence:
    equivalent: bool
    case: FamilyCase | None
    sigma: tuple[int, ...] | None
    witness: EquivalenceWitness | None
    gamma_zero_checked: int
    antidiagonal_checked: int
    complete: bool

    def describe(self: FamilyEquivalence) -> dict[str, object]:
        return {
            "status": "equivalent" if self.equivalent else "inequivalent-within-box",
            "case": self.case,
            "sigma": None if self.sigma is None else [i + 1 for i in self.sigma],
            "witness": None if self.witness is None else self.witness.to_json(),
            "gamma_zero_checked": self.gamma_zero_checked,
            "antidiagonal_checked": self.antidiagonal_checked,
            "complete": self.complete,
        }


def _gamma_zero(
    roots: Sequence[FieldElement],
    target: Sequence[FieldElement],
    sigma: tuple[int, ...],
    ctx: SContext,
) -> EquivalenceWitness | None:
    """``target_j = roots_sigma(j) t - b`` with t an S-unit and b in O_S."""
    gap = roots[sigma[1]] - roots[sigma[0]]
    if gap.is_zero():
        return None
    t = (target[1] - target[0]) / gap
    b = roots[sigma[0]] * t - target[0]
    if any(target[j] != roots[sigma[j]] * t - b for j in range(len(roots))):
        return None
    if not is_s_unit(t, ctx) or s_membership(b, ctx) == SMembership.OUTSIDE:
        return None
    one = ctx.field.one()
    return EquivalenceWitness(one, b, ctx.field.zero(), t, one)


def _antidiagonal(
    roots: Sequence[FieldElement],
    target: Sequence[FieldElement],
    sigma: tuple[int, ...],
    ctx: SContext,
) -> EquivalenceWitness | None:
    """``target_j * roots_sigma(j) = c`` for one S-unit c."""
    c = roots[sigma[0]] * target[0]
    if any(roots[sigma[j]] * target[j] != c for j in range(len(roots))):
        return None
    lead = ctx.field.one()
    for r in roots:
        lead = lead * -r
    eta = 1 / lead
    if not is_s_unit(c, ctx) or not is_s_unit(eta, ctx):
        return None
    zero = ctx.field.zero()
    return EquivalenceWitness(zero, c, ctx.field.one(), zero, eta)


CaseCheck = Callable[
    [Sequence[FieldElement], Sequence[FieldElement], tuple[int, ...], SContext],
    EquivalenceWitness | None,
]

_CASES: Final[tuple[tuple[FamilyCase, CaseCheck], ...]] = (
    ("gamma-zero", _gamma_zero),
    ("antidiagonal", _antidiagonal),
)


def _units_in_box(w: EquivalenceWitness, ctx: SContext, box: int | None) -> bool:
    if box is None:
        return True
    for u in (w.alpha, w.delta, w.beta, w.gamma, w.eta):
        if u.is_zero() or not is_s_unit(u, ctx):
            continue
        try:
            flat = sunit_exponents(u, ctx).flat()
        except NotInGeneratedGroupError:
            return False
        if any(abs(e) > box for e in flat[1:]):
            return False
    return True


def family_equivalence_test(
    eps: Sequence[FieldElement],
    eps_primed: Sequence[FieldElement],
    alphas: Sequence[FieldElement],
    ctx: SContext,
    *,
    box: int | None = None,
) -> FamilyEquivalence:
    """Is the monic form twisted by ``eps_primed`` S-equivalent to the one twisted by ``eps``?

    Monicity leaves only matrices with ``gamma = 0`` or with ``alpha = delta = 0``; both
    reduce to one exact check per matching of the roots. Without ``box`` the answer is
    complete; with it, witnesses whose unit entries leave the exponent box are rejected.
    """
    roots = check_twist_vector(alphas, eps, ctx)
    target = check_twist_vector(alphas, eps_primed, ctx)
    source_form = expand_roots(roots)
    target_form = expand_roots(target)
    perms = list(itertools.permutations(range(len(roots))))
    found: list[tuple[FamilyCase, tuple[int, ...], EquivalenceWitness]] = []
    for case, check in _CASES:
        for sigma in perms:
            w = check(roots, target, sigma, ctx)
            if w is not None and _units_in_box(w, ctx, box):
                if not verify_witness(source_form, target_form, w):
                    raise InternalConsistencyError(f"{case} witness for {sigma} fails expansion")
                found.append((case, sigma, w))
    if not found:
        return FamilyEquivalence(False, None, None, None, len(perms), len(perms), box is None)
    case, sigma, witness = found[0]
    return FamilyEquivalence(True, case, sigma, witness, len(perms), len(perms), box is None)


@dataclass(frozen=True)
class TwistMatch:
    eps_primed: tuple[FieldElement, ...]
    case: FamilyCase
    sigma: tuple[int, ...]

    def to_json(self: TwistMatch) -> dict[str, object]:
        return {
            "eps": [e.to_json() for e in self.eps_primed],
            "case": self.case,
            "sigma": [i + 1 for i in self.sigma],
        }


def _antidiagonal_candidate(
    alphas: Sequence[FieldElement], roots: Sequence[FieldElement], sigma: tuple[int, ...]
) -> tuple[FieldElement, ...]:
    c = roots[sigma[0]] * alphas[0]
    return tuple(c / (alphas[j] * roots[sigma[j]]) for j in range(len(alphas)))


def _gamma_zero_candidates(
    alphas: Sequence[FieldElement],
    roots: Sequence[FieldElement],
    sigma: tuple[int, ...],
    ctx: SContext,
    box: int,
    cap: int,
) -> list[tuple[FieldElement, ...]]:
    """Solutions of the three-term unit relation ``a_2 e_2 - (r_s2 - r_s1) t = a_1``."""
    gap = roots[sigma[1]] - roots[sigma[0]]
    if gap.is_zero():
        return []
    deltas = (alphas[1] / alphas[0], -gap / alphas[0])
    report = solve_unit_equation(UnitEquation(deltas, ctx, box), cap=cap)
    out: list[tuple[FieldElement, ...]] = []
    for sol in report.solutions:
        e2, t = sol.values
        b = roots[sigma[0]] * t - alphas[0]
        e3 = (roots[sigma[2]] * t - b) / alphas[2]
        out.append((ctx.field.one(), e2, e3))
    return out


def _admissible(
    alphas: Sequence[FieldElement], cand: Sequence[FieldElement], ctx: SContext
) -> bool:
    if not all(is_s_unit(e, ctx) for e in cand):
        return False
    return len({(a * e).coords for a, e in zip(alphas, cand, strict=True)}) >= 3


def equivalent_twists(
    eps: Sequence[FieldElement],
    alphas: Sequence[FieldElement],
    ctx: SContext,
    box: int,
    *,
    cap: int = 100_000_000,
) -> list[TwistMatch]:
    """Twist vectors S-equivalent to ``eps`` for cubic families, each confirmed exactly."""
    if len(alphas) != 3:
        raise UsageError("equivalent twists are searched for cubic families only")
    roots = check_twist_vector(alphas, eps, ctx)
    candidates: list[tuple[FieldElement, ...]] = []
    for sigma in itertools.permutations(range(3)):
        candidates.append(_antidiagonal_candidate(alphas, roots, sigma))
        candidates.extend(_gamma_zero_candidates(alphas, roots, sigma, ctx, box, cap))
    found: dict[tuple[tuple[Fraction, ...], ...], TwistMatch] = {}
    for cand in candidates:
        key = tuple(e.coords for e in cand)
        if key in found or not _admissible(alphas, cand, ctx):
            continue
        result = family_equivalence_test(eps, cand, alphas, ctx)
        if result.equivalent and result.case is not None and result.sigma is not None:
            found[key] = TwistMatch(cand, result.case, result.sigma)
    return [found[k] for k in sorted(found)]


@dataclass(frozen=True)
class ExceptionalTwist:
    eps: tuple[FieldElement, ...]
    x: FieldElement
    y: FieldElement
    count: int

    def to_json(self: ExceptionalTwist) -> dict[str, object]:
        return {
            "eps": [e.to_json() for e in self.eps],
            "x": self.x.to_json(),
            "y": self.y.to_json(),
            "count": self.count,
        }


def _unit_values(
    roots: Sequence[FieldElement], points: list[FieldElement], ctx: SContext
) -> list[tuple[FieldElement, FieldElement]]:
    hits: list[tuple[FieldElement, FieldElement]] = []
    for x, y in itertools.product(points, repeat=2):
        value = ctx.field.one()
        for r in roots:
            value = value * (x - r * y)
        if is_s_unit(value, ctx):
            hits.append((x, y))
    return hits


def exceptional_twists(
    alphas: Sequence[FieldElement],
    ctx: SContext,
    unit_box: int,
    xy_box: int,
    *,
    cap: int = 100_000_000,
) -> list[ExceptionalTwist]:
    """Twist vectors whose monic form takes an S-unit value at a nontrivial point of the box.

    The list witnesses members of the exceptional set; it is not claimed complete.
    """
    units = [u.value for u in sunit_box(ctx, unit_box, cap)]
    points = [p for p in xy_points(ctx.field, xy_box) if not p.is_zero()]
    n = len(alphas)
    work = len(units) ** (n - 1) * len(points) ** 2
    if work > cap:
        raise CapExceededError(
            f"exceptional twist search needs {work} checks, cap is {cap}", required=str(work)
        )
    out: list[ExceptionalTwist] = []
    for rest in itertools.product(units, repeat=n - 1):
        eps = (ctx.field.one(), *rest)
        if not _admissible(alphas, eps, ctx):
            continue
        roots = [a * e for a, e in zip(alphas, eps, strict=True)]
        hits = _unit_values(roots, points, ctx)
        if hits:
            out.append(ExceptionalTwist(eps, hits[0][0], hits[0][1], len(hits)))
    _logger.info("exceptional twists: %d witnessed", len(out))
    return out


# -- twisted Thue-Mahler search -----------------------------------------------------------


@dataclass(frozen=True)
class TwistSolution:
    x: int
    y: int
    eps: FieldElement
    sign: int
    exponents: tuple[int, ...]
    class_id: int = 0

    def value(self: TwistSolution, k: int, primes: Sequence[int]) -> int:
        """``f_eps(x, y) = sign * k * prod p_i^z_i``."""
        return self.sign * k * math.prod(p**z for p, z in zip(primes, self.exponents, strict=True))

    def to_json(self: TwistSolution) -> dict[str, object]:
        return {
            "x": str(self.x),
            "y": str(self.y),
            "eps": self.eps.to_json(),
            "sign": self.sign,
            "z": [str(z) for z in self.exponents],
            "class_id": self.class_id,
        }


@dataclass(frozen=True)
class TwistReport:
    solutions: list[TwistSolution]
    classes: int
    skipped_degree: int
    non_integral: int
    within_kappa2: bool | None

    def describe(self: TwistReport) -> dict[str, object]:
        return {
            "count": len(self.solutions),
            "classes": self.classes,
            "skipped_degree": self.skipped_degree,
            "non_integral": self.non_integral,
            "within_kappa2": self.within_kappa2,
            "solutions": [s.to_json() for s in self.solutions],
        }


def _split_rhs(value: int, k: int, primes: Sequence[int]) -> tuple[int, tuple[int, ...]] | None:
    """``value = sign * k * prod p^z`` with ``z >= 0``, or None."""
    if value == 0 or value % k != 0:
        return None
    rest = value // k
    exps: list[int] = []
    for p in primes:
        z = 0
        while rest % p == 0:
            rest //= p
            z += 1
        exps.append(z)
    if abs(rest) != 1:
        return None
    return rest, tuple(exps)


def _twist_scan(
    form: BinaryForm, eps: FieldElement, k: int, primes: Sequence[int], bound: int
) -> list[TwistSolution]:
    coeffs = [int(c) for c in form.coeffs]
    n = form.degree
    modulus = math.prod(primes)
    found: list[TwistSolution] = []
    for x, y in itertools.product(range(-bound, bound + 1), repeat=2):
        if x == 0 or y == 0 or math.gcd(x * y, modulus) != 1:
            continue
        value = sum(c * x ** (n - i) * y**i for i, c in enumerate(coeffs))
        split = _split_rhs(value, k, primes)
        if split is not None:
            found.append(TwistSolution(x, y, eps, split[0], split[1]))
    return found


@dataclass(frozen=True)
class _TwistJob:
    eps: FieldElement
    form: BinaryForm | None
    reason: Literal["ok", "degree", "non-integral"]


def _twist_job(f: BinaryForm, eps: FieldElement, ctx: SContext) -> _TwistJob:
    if f.root is None:
        raise UsageError("twist search needs a form given with its root")
    if polys.degree((f.root * eps).minpoly()) < 3:
        return _TwistJob(eps, None, "degree")
    try:
        return _TwistJob(eps, make_twisted_form(f, eps, ctx), "ok")
    except NonIntegralFormError:
        _logger.warning("twist by %s is not integral; skipped", eps)
        return _TwistJob(eps, None, "non-integral")


def twist_dependent(a: TwistSolution, b: TwistSolution, k: int, ctx: SContext, n: int) -> bool:
    """``x' - alpha eps' y' = eta~ (x - alpha eps y)`` with rational S-units ``eta~, eps'/eps``."""
    ratio = b.eps / a.eps
    if not (ratio.is_rational() and is_s_unit(ratio, ctx)):
        return False
    eta = ratio.rational()
    tilde = Fraction(b.x, a.x)
    if not is_s_unit(ctx.field.from_scalar(tilde), ctx):
        return False
    if Fraction(b.y) != a.y * tilde / eta:
        return False
    return Fraction(b.value(k, ctx.primes)) == a.value(k, ctx.primes) * tilde**n


def _assign_classes(
    solutions: list[TwistSolution], k: int, ctx: SContext, n: int
) -> tuple[list[TwistSolution], int]:
    related = [
        (i, j)
        for i, j in itertools.combinations(range(len(solutions)), 2)
        if twist_dependent(solutions[i], solutions[j], k, ctx, n)
    ]
    ids = union_find_classes(len(solutions), related)
    sizes = collections.Counter(ids)
    worst = max(sizes.values(), default=0)
    if worst > 4:
        raise InternalConsistencyError(f"an S^3-class holds {worst} twisted solutions")
    out = [
        TwistSolution(s.x, s.y, s.eps, s.sign, s.exponents, cid)
        for s, cid in zip(solutions, ids, strict=True)
    ]
    return out, len(sizes)


def twist_search(
    f: BinaryForm,
    k: int,
    ctx: SContext,
    unit_box: int,
    xy_box: int,
    *,
    kappa2: CertifiedUpper | None = None,
    workers: int = 1,
    cap: int = 100_000_000,
) -> TwistReport:
    """``f_eps(x, y) = +-k prod p_i^z_i`` with ``xy != 0`` and ``gcd(xy, prod p_i) = 1``."""
    if k == 0:
        raise ZeroInputError("k must be nonzero")
    if xy_box < 0:
        raise UsageError(f"xy box must be non-negative, got {xy_box}")
    units = [u.value for u in sunit_box(ctx, unit_box, cap)]
    work = len(units) * (2 * xy_box + 1) ** 2
    if work > cap:
        raise CapExceededError(
            f"twist search needs {work} evaluations, cap is {cap}", required=str(work)
        )
    jobs = [_twist_job(f, e, ctx) for e in units]
    primes = ctx.primes

    def scan(job: _TwistJob) -> list[TwistSolution]:
        if job.form is None:
            return []
        return _twist_scan(job.form, job.eps, abs(k), primes, xy_box)

    found = [s for part in ordered_map(scan, jobs, workers) for s in part]
    solutions, classes = _assign_classes(found, abs(k), ctx, f.degree)
    within = None if kappa2 is None else Fraction(classes) <= kappa2.upper
    _logger.info("twist search: %d solutions in %d classes", len(solutions), classes)
    return TwistReport(
        solutions=solutions,
        classes=classes,
        skipped_degree=sum(1 for j in jobs if j.reason == "degree"),
        non_integral=sum(1 for j in jobs if j.reason == "non-integral"),
        within_kappa2=within,
    )


# -- the N_S inequality -----------------------------------------------------------------------


def ns_inequality_solve(
    f: BinaryForm,
    m: int,
    ctx: SContext,
    box: int,
    *,
    nontrivial_only: bool = False,
    cap: int = 100_000_000,
) -> PairReport:
    """``0 < N_S(f(x, y)) <= m`` over the box, with S-dependence classes."""
    if m < 1:
        raise UsageError(f"m must be a positive integer, got {m}")
    points = xy_points(ctx.field, box)
    pairs = len(points) ** 2
    if pairs > cap:
        raise CapExceededError(f"N_S search has {pairs} pairs, cap is {cap}", required=str(pairs))
    found: list[PairSolution] = []
    for x, y in itertools.product(points, repeat=2):
        if nontrivial_only and (x.is_zero() or y.is_zero()):
            continue
        value = f.at(x, y)
        if value.is_zero():
            continue
        if s_norm(value, ctx) <= m:
            found.append(PairSolution(x, y))
    return PairReport(found, pair_classes(found, ctx, f.degree))


def describe_form(f: BinaryForm) -> dict[str, object]:
    out: dict[str, object] = {"form": str(f), "coefficients": f.to_json(), "degree": f.degree}
    if f.root is not None:
        out["root"] = f.root.to_json()
        out["field"] = format_poly(f.root.field.min_poly)
    return out
