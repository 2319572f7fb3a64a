"""Exact arithmetic in K = Q[x]/(f) with certified complex embeddings.

Elements are stored as rational coordinates in the power basis of a root
``alpha`` of ``f``. The integral basis is kept separately; by default it is the
power basis of ``c_d * alpha`` (``c_d`` the leading coefficient of ``f``), whose
elements are always algebraic integers.

Embeddings are ordered: real embeddings first in ascending order, then one
conjugate pair per complex place, the root in the upper half plane first.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import threading
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Final, Literal

from . import polys
from .errors import (
    DivisionByZeroError,
    InternalConsistencyError,
    NonIntegralBasisError,
    ReduciblePolynomialError,
    UsageError,
)
from .intervals import ComplexBall, RealBall, complex_roots, current_precision, working_precision

_logger = logging.getLogger(__name__)

REFERENCE_PRECISION: Final[int] = 128
MIN_EMBED_PRECISION: Final[int] = 32

Scalar = int | Fraction
ArithOp = Literal["add", "sub", "mul", "div", "pow"]


class NumberField:
    """An exact number field of small degree."""

    def __init__(
        self: NumberField,
        min_poly: Sequence[int],
        basis: Sequence[Sequence[Fraction]] | None = None,
    ) -> None:
        coeffs = tuple(int(c) for c in min_poly)
        while len(coeffs) > 0 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if len(coeffs) < 2:
            raise UsageError("minimal polynomial must have degree >= 1")
        if not polys.is_irreducible(coeffs):
            raise ReduciblePolynomialError(f"polynomial {format_poly(coeffs)} is reducible")
        self.min_poly: Final[tuple[int, ...]] = coeffs
        self.degree: Final[int] = len(coeffs) - 1
        self.leading: Final[int] = coeffs[-1]
        d = self.degree
        r1 = polys.real_root_count(coeffs) if d > 1 else 1
        self.signature: Final[tuple[int, int]] = (r1, (d - r1) // 2)
        self.unit_rank: Final[int] = r1 + (d - r1) // 2 - 1
        self._reduction: Final[tuple[tuple[Fraction, ...], ...]] = self._reduction_table()
        self._power_sums: Final[tuple[Fraction, ...]] = self._newton_power_sums()
        self._cache_lock = threading.Lock()
        self._power_tables: dict[int, tuple[tuple[ComplexBall, ...], ...]] = {}
        self._theta_cache: dict[int, RealBall] = {}
        with working_precision(REFERENCE_PRECISION):
            self._reference_roots: Final[tuple[ComplexBall, ...]] = self._reference_order()

        default = tuple(
            self.element([Fraction(0)] * j + [Fraction(self.leading**j)]) for j in range(d)
        )
        self.order_generator: Final[FieldElement] = self.element([0, self.leading])
        chosen = default
        if basis is not None:
            chosen = tuple(self.element(list(v)) for v in basis)
            self._validate_basis(chosen, default)
        self.integral_basis: Final[tuple[FieldElement, ...]] = chosen
        self.basis_is_default: Final[bool] = basis is None
        basis_rows = [list(w.coords) for w in self.integral_basis]
        self._basis_inverse: Final[list[list[Fraction]]] = polys.inverse(basis_rows)
        self.discriminant: Final[int] = self._compute_discriminant()
        self.order_index: Final[int] = self._order_index(default)
        _logger.debug(
            "field %s: d=%d signature=%s D=%d",
            format_poly(coeffs),
            d,
            self.signature,
            self.discriminant,
        )

    # -- construction helpers ---------------------------------------------------------

    def _reduction_table(self: NumberField) -> tuple[tuple[Fraction, ...], ...]:
        d = self.degree
        lc = Fraction(self.leading)
        tail = [Fraction(-c) / lc for c in self.min_poly[:-1]]
        table: list[tuple[Fraction, ...]] = []
        for k in range(d):
            row = [Fraction(0)] * d
            row[k] = Fraction(1)
            table.append(tuple(row))
        current = list(tail)
        for _ in range(d, 2 * d):
            table.append(tuple(current))
            top = current[-1]
            shifted = [Fraction(0), *current[:-1]]
            current = [shifted[i] + top * tail[i] for i in range(d)]
        return tuple(table)

    def _newton_power_sums(self: NumberField) -> tuple[Fraction, ...]:
        d = self.degree
        lc = Fraction(self.leading)
        b = [Fraction(c) / lc for c in self.min_poly]
        sums: list[Fraction] = [Fraction(d)]
        for k in range(1, d):
            acc = Fraction(k) * b[d - k]
            for j in range(1, k):
                acc += b[d - j] * sums[k - j]
            sums.append(-acc)
        return tuple(sums)

    def _reference_order(self: NumberField) -> tuple[ComplexBall, ...]:
        roots = [r for r, _ in complex_roots(self.min_poly)]
        reals = sorted((r for r in roots if r.is_real()), key=lambda r: r.real.mid_float())
        uppers = sorted(
            (r for r in roots if r.imag.certainly_gt(0)),
            key=lambda r: (r.real.mid_float(), r.imag.mid_float()),
        )
        if len(reals) != self.signature[0] or len(uppers) != self.signature[1]:
            raise InternalConsistencyError("root isolation disagrees with the signature")
        return (*reals, *uppers)

    def _validate_basis(
        self: NumberField, supplied: tuple[FieldElement, ...], default: tuple[FieldElement, ...]
    ) -> None:
        if len(supplied) != self.degree:
            raise NonIntegralBasisError(f"basis must have {self.degree} elements")
        for w in supplied:
            if not w.is_integral():
                raise NonIntegralBasisError(f"basis element {w} is not an algebraic integer")
        rows = [list(w.coords) for w in supplied]
        if polys.det(rows) == 0:
            raise NonIntegralBasisError("basis elements are linearly dependent")
        inv = polys.inverse(rows)
        lattice_vectors = [*default, *(a * b for a in supplied for b in supplied)]
        for v in lattice_vectors:
            coords = _row_times(v.coords, inv)
            if any(c.denominator != 1 for c in coords):
                raise NonIntegralBasisError("basis does not span an order containing Z[c_d*alpha]")

    def _compute_discriminant(self: NumberField) -> int:
        basis = self.integral_basis
        rows = [[(wi * wj).trace() for wj in basis] for wi in basis]
        value = polys.det(rows)
        if value.denominator != 1 or value == 0:
            raise NonIntegralBasisError("trace form of the basis is not a nonzero integer")
        return int(value)

    def _order_index(self: NumberField, default: tuple[FieldElement, ...]) -> int:
        rows = [[(wi * wj).trace() for wj in default] for wi in default]
        ratio = polys.det(rows) / self.discriminant
        root = math.isqrt(int(abs(ratio))) if ratio.denominator == 1 else -1
        if root < 0 or root * root != abs(ratio):
            raise NonIntegralBasisError("discriminant ratio of Z[c_d*alpha] is not a square")
        return root

    # -- element constructors ---------------------------------------------------------

    def element(self: NumberField, coords: Sequence[Scalar]) -> FieldElement:
        d = self.degree
        values = [Fraction(c) for c in coords]
        if len(values) > d:
            return FieldElement(_reduce(values, self._reduction, d), self)
        values.extend([Fraction(0)] * (d - len(values)))
        return FieldElement(tuple(values), self)

    def from_scalar(self: NumberField, q: Scalar) -> FieldElement:
        return self.element([q])

    def zero(self: NumberField) -> FieldElement:
        return self.from_scalar(0)

    def one(self: NumberField) -> FieldElement:
        return self.from_scalar(1)

    def alpha(self: NumberField) -> FieldElement:
        return self.element([0, 1])

    def from_basis(self: NumberField, vector: Sequence[Scalar]) -> FieldElement:
        acc = [Fraction(0)] * self.degree
        for c, w in zip(vector, self.integral_basis, strict=True):
            if c != 0:
                for k in range(self.degree):
                    acc[k] += Fraction(c) * w.coords[k]
        return FieldElement(tuple(acc), self)

    def basis_coordinates(self: NumberField, a: FieldElement) -> tuple[Fraction, ...]:
        return tuple(_row_times(a.coords, self._basis_inverse))

    # -- embeddings -------------------------------------------------------------------

    def _ordered_roots(self: NumberField) -> tuple[ComplexBall, ...]:
        roots = [r for r, _ in complex_roots(self.min_poly)]
        r1, r2 = self.signature
        matched: list[ComplexBall] = []
        for idx, ref in enumerate(self._reference_roots):
            want_real = idx < r1
            hits = [
                r
                for r in roots
                if (r.is_real() if want_real else r.imag.certainly_gt(0)) and r.overlaps(ref)
            ]
            if len(hits) != 1:
                raise InternalConsistencyError("cannot match roots across precisions")
            matched.append(hits[0])
        out = matched[:r1]
        for upper in matched[r1 : r1 + r2]:
            out.extend([upper, upper.conjugate()])
        return tuple(out)

    def _power_table(self: NumberField, precision: int) -> tuple[tuple[ComplexBall, ...], ...]:
        with self._cache_lock:
            cached = self._power_tables.get(precision)
        if cached is not None:
            return cached
        if precision == current_precision():
            table = self._compute_powers()
        else:
            with working_precision(precision):
                table = self._compute_powers()
        with self._cache_lock:
            return self._power_tables.setdefault(precision, table)

    def _compute_powers(self: NumberField) -> tuple[tuple[ComplexBall, ...], ...]:
        rows: list[tuple[ComplexBall, ...]] = []
        for root in self._ordered_roots():
            powers = [ComplexBall.of(1)]
            for _ in range(1, self.degree):
                powers.append(powers[-1] * root)
            rows.append(tuple(powers))
        return tuple(rows)

    def embed(
        self: NumberField, a: FieldElement, precision: int | None = None
    ) -> list[ComplexBall]:
        """Certified enclosures of the ``d`` embeddings of ``a``."""
        prec = current_precision() if precision is None else precision
        if prec < MIN_EMBED_PRECISION:
            raise UsageError(f"precision must be >= {MIN_EMBED_PRECISION} bits")
        table = self._power_table(prec)
        if prec == current_precision():
            return [_combine(a.coords, row) for row in table]
        with working_precision(prec):
            return [_combine(a.coords, row) for row in table]

    def archimedean_indices(self: NumberField) -> list[tuple[int, int]]:
        """(embedding index, d_v) for each archimedean place."""
        r1, r2 = self.signature
        return [(i, 1) for i in range(r1)] + [(r1 + 2 * j, 2) for j in range(r2)]

    def theta(self: NumberField, precision: int | None = None) -> RealBall:
        """max(1, max over embeddings of the sum of |sigma(w_j)| over the integral basis)."""
        prec = current_precision() if precision is None else precision
        with self._cache_lock:
            cached = self._theta_cache.get(prec)
        if cached is not None:
            return cached
        columns = [self.embed(w, prec) for w in self.integral_basis]
        with working_precision(prec):
            best = RealBall.of(1)
            for i in range(self.degree):
                total = RealBall.of(0)
                for col in columns:
                    total = total + col[i].abs()
                best = best.max_with(total)
        with self._cache_lock:
            return self._theta_cache.setdefault(prec, best)

    def theta_exceeds_discriminant_bound(self: NumberField, precision: int | None = None) -> bool:
        prec = current_precision() if precision is None else precision
        th = self.theta(prec)
        with working_precision(prec):
            return th.certainly_gt(RealBall.of(abs(self.discriminant)).sqrt())

    def describe(self: NumberField) -> dict[str, object]:
        return {
            "min_poly": [str(c) for c in self.min_poly],
            "degree": self.degree,
            "r1": self.signature[0],
            "r2": self.signature[1],
            "discriminant": str(self.discriminant),
            "basis": [[str(c) for c in w.coords] for w in self.integral_basis],
        }

    def __repr__(self: NumberField) -> str:
        return f"NumberField({format_poly(self.min_poly)})"


def _row_times(vec: Sequence[Fraction], mat: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    n = len(mat[0]) if mat else 0
    out = [Fraction(0)] * n
    for v, row in zip(vec, mat, strict=True):
        if v != 0:
            for j in range(n):
                out[j] += v * row[j]
    return out


def _reduce(
    values: Sequence[Fraction], table: Sequence[Sequence[Fraction]], d: int
) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * d
    for k, v in enumerate(values):
        if v != 0:
            row = table[k]
            for j in range(d):
                out[j] += v * row[j]
    return tuple(out)


def _combine(coords: Sequence[Fraction], powers: Sequence[ComplexBall]) -> ComplexBall:
    acc = ComplexBall.of(0)
    for c, p in zip(coords, powers, strict=True):
        if c != 0:
            acc = acc + p.scale(c)
    return acc


def format_poly(coeffs: Sequence[int | Fraction], var: str = "x") -> str:
    terms: list[str] = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mag = abs(c)
        sign = "-" if c < 0 else "+"
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        body = str(mag) if mono == "" or mag != 1 else ""
        body = f"{body}*{mono}" if body and mono else body or mono
        terms.append(f"{sign}{body}")
    if not terms:
        return "0"
    text = "".join(terms)
    return text[1:] if text.startswith("+") else text


@dataclass(frozen=True)
class FieldElement:
    coords: tuple[Fraction, ...]
    field: NumberField = dataclasses.field(compare=False, repr=False)

    def _coerce(self: FieldElement, other: FieldElement | Scalar) -> FieldElement:
        if isinstance(other, FieldElement):
            return other
        return self.field.from_scalar(other)

    def __add__(self: FieldElement, other: FieldElement | Scalar) -> FieldElement:
        o = self._coerce(other)
        summed = tuple(a + b for a, b in zip(self.coords, o.coords, strict=True))
        return FieldElement(summed, self.field)

    def __radd__(self: FieldElement, other: Scalar) -> FieldElement:
        return self + other

    def __neg__(self: FieldElement) -> FieldElement:
        return FieldElement(tuple(-a for a in self.coords), self.field)

    def __sub__(self: FieldElement, other: FieldElement | Scalar) -> FieldElement:
        return self + (-self._coerce(other))

    def __rsub__(self: FieldElement, other: Scalar) -> FieldElement:
        return (-self) + other

    def __mul__(self: FieldElement, other: FieldElement | Scalar) -> FieldElement:
        if not isinstance(other, FieldElement):
            q = Fraction(other)
            return FieldElement(tuple(a * q for a in self.coords), self.field)
        d = self.field.degree
        if d == 1:
            return FieldElement((self.coords[0] * other.coords[0],), self.field)
        conv = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.coords):
            if a != 0:
                for j, b in enumerate(other.coords):
                    if b != 0:
                        conv[i + j] += a * b
        return FieldElement(_reduce(conv, self.field._reduction, d), self.field)

    def __rmul__(self: FieldElement, other: Scalar) -> FieldElement:
        return self * other

    def inverse(self: FieldElement) -> FieldElement:
        if self.is_zero():
            raise DivisionByZeroError("division by zero in number field")
        d = self.field.degree
        if d == 1:
            return FieldElement((1 / self.coords[0],), self.field)
        if d == 2:
            f = self.field.min_poly
            u, v = self.coords
            trace_alpha = Fraction(-f[1], f[2])
            n = self.norm()
            return FieldElement(((u + v * trace_alpha) / n, -v / n), self.field)
        inv = polys.invert(self.coords, [Fraction(c) for c in self.field.min_poly])
        return self.field.element(list(inv))

    def __truediv__(self: FieldElement, other: FieldElement | Scalar) -> FieldElement:
        if not isinstance(other, FieldElement):
            if other == 0:
                raise DivisionByZeroError("division by zero in number field")
            return self * (1 / Fraction(other))
        return self * other.inverse()

    def __rtruediv__(self: FieldElement, other: Scalar) -> FieldElement:
        return self.field.from_scalar(other) * self.inverse()

    def __pow__(self: FieldElement, k: int) -> FieldElement:
        base = self if k >= 0 else self.inverse()
        e = abs(k)
        result = self.field.one()
        while e > 0:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_zero(self: FieldElement) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self: FieldElement) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def rational(self: FieldElement) -> Fraction:
        if not self.is_rational():
            raise UsageError(f"{self} is not rational")
        return self.coords[0]

    @cached_property
    def _norm(self: FieldElement) -> Fraction:
        d = self.field.degree
        if d == 1:
            return self.coords[0]
        if d == 2:
            f = self.field.min_poly
            u, v = self.coords
            return u * u - Fraction(f[1], f[2]) * u * v + Fraction(f[0], f[2]) * v * v
        if self.is_zero():
            return Fraction(0)
        a = list(self.coords)
        while a and a[-1] == 0:
            a.pop()
        deg_a = len(a) - 1
        res = polys.resultant([Fraction(c) for c in self.field.min_poly], a)
        return res / Fraction(self.field.leading) ** deg_a

    def norm(self: FieldElement) -> Fraction:
        return self._norm

    def trace(self: FieldElement) -> Fraction:
        return sum(
            (c * s for c, s in zip(self.coords, self.field._power_sums, strict=True)), Fraction(0)
        )

    def multiplication_matrix(self: FieldElement) -> list[list[Fraction]]:
        """Matrix of ``x -> self * x`` on the power basis (row k = coordinates of self*alpha^k)."""
        alpha = self.field.alpha()
        rows: list[list[Fraction]] = []
        current = self
        for _ in range(self.field.degree):
            rows.append(list(current.coords))
            current = current * alpha
        return [[rows[j][i] for j in range(len(rows))] for i in range(len(rows))]

    @cached_property
    def _charpoly(self: FieldElement) -> tuple[Fraction, ...]:
        return polys.charpoly(self.multiplication_matrix())

    def charpoly(self: FieldElement) -> tuple[Fraction, ...]:
        """Monic characteristic polynomial over Q, lowest degree first."""
        return self._charpoly

    def minpoly(self: FieldElement) -> tuple[Fraction, ...]:
        return polys.sqf_part(self._charpoly)

    def is_integral(self: FieldElement) -> bool:
        return all(c.denominator == 1 for c in self._charpoly)

    def sort_key(self: FieldElement) -> tuple[Fraction, ...]:
        return self.coords

    def __str__(self: FieldElement) -> str:
        return format_poly(self.coords, "a")

    def to_json(self: FieldElement) -> list[str]:
        return [str(c) for c in self.coords]


# -- operation surface ----------------------------------------------------------------


def nf_init(
    min_poly: Sequence[int], basis: Sequence[Sequence[Fraction]] | None = None
) -> NumberField:
    return NumberField(min_poly, basis)


def elem_arith(a: FieldElement, b: FieldElement, op: ArithOp, exponent: int = 0) -> FieldElement:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    return a**exponent


def embed(a: FieldElement, precision: int) -> list[ComplexBall]:
    return a.field.embed(a, precision)


def norm_trace(a: FieldElement) -> tuple[Fraction, Fraction]:
    return a.norm(), a.trace()
