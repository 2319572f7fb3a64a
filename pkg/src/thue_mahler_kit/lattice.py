"""Enumeration of integral elements with bounded archimedean size.

An element ``gamma = sum c_j w_j`` of the basis order has coordinates
``c_j = Tr(gamma * w_j^*)`` over the dual basis, so ``|sigma(gamma)| <= Q`` at
every embedding bounds each ``|c_j|`` by ``Q * sum_i |sigma_i(w_j^*)|``. The box
is scanned in lexicographic order; membership is decided with balls and, on the
boundary, exactly.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from fractions import Fraction

from . import polys
from .errors import CapExceededError, PrecisionExhaustedError
from .intervals import ComplexBall, RealBall, working_precision
from .number_field import FieldElement, NumberField
from .parallel import ordered_map, split_range

_logger = logging.getLogger(__name__)

MAX_REFINE_PRECISION = 1 << 14

Coords = tuple[int, ...]


@dataclass(frozen=True)
class CoordinateBox:
    bounds: tuple[int, ...]

    @property
    def size(self: CoordinateBox) -> int:
        return math.prod(2 * b + 1 for b in self.bounds)

    def points(self: CoordinateBox, first: tuple[int, int] | None = None) -> Iterator[Coords]:
        ranges = [range(-b, b + 1) for b in self.bounds]
        if first is not None:
            ranges[0] = range(first[0], first[1] + 1)
        return itertools.product(*ranges)


def _dual_basis(field: NumberField) -> list[FieldElement]:
    basis = field.integral_basis
    gram = [[(wi * wj).trace() for wj in basis] for wi in basis]
    inv = polys.inverse(gram)
    return [field.from_basis(row) for row in inv]


def coordinate_box(field: NumberField, q: Fraction, precision: int = 128) -> CoordinateBox:
    """Coordinate ranges containing every integral element with all ``|sigma| <= q``."""
    if q <= 0:
        return CoordinateBox(tuple(0 for _ in range(field.degree)))
    bounds: list[int] = []
    for dual in _dual_basis(field):
        sigmas = field.embed(dual, precision)
        with working_precision(precision):
            total = RealBall.of(0)
            for s in sigmas:
                total = total + s.abs()
            reach = (total * q).upper()
        bounds.append(math.floor(reach))
    return CoordinateBox(tuple(bounds))


def check_cap(box: CoordinateBox, cap: int, what: str) -> None:
    if box.size > cap:
        raise CapExceededError(
            f"{what}: box {box.bounds} has {box.size} points, cap is {cap}", required=str(box.size)
        )


def _basis_table(field: NumberField, precision: int) -> list[list[ComplexBall]]:
    """``table[i][j] = sigma_i(w_j)`` for one embedding per archimedean place."""
    columns = [field.embed(w, precision) for w in field.integral_basis]
    return [[col[idx] for col in columns] for idx, _ in field.archimedean_indices()]


def _ball_sum(coords: Coords, row: list[ComplexBall]) -> ComplexBall:
    acc = ComplexBall.of(0)
    for c, s in zip(coords, row, strict=True):
        if c != 0:
            acc = acc + s.scale(c)
    return acc


def _pair_partner(field: NumberField, idx: int) -> int:
    return idx if idx < field.signature[0] else idx + 1


def place_size_le(gamma: FieldElement, idx: int, q_sq: Fraction, precision: int) -> bool:
    """Exact decision of ``|sigma_idx(gamma)|^2 <= q_sq``.

    ``|sigma_idx(gamma)|^2`` is the product of two conjugates of ``gamma``, hence a
    root of the product polynomial of its characteristic polynomial. When ``q_sq``
    is such a root, precision is raised until exactly as many ordered pairs of
    embeddings overlap ``q_sq`` as its multiplicity.
    """
    field = gamma.field
    partner = _pair_partner(field, idx)
    product_poly = polys.product_root_poly(gamma.charpoly())
    mult = polys.root_multiplicity(product_poly, q_sq)
    target = ComplexBall.of(q_sq)
    prec = precision
    while prec <= MAX_REFINE_PRECISION:
        sigmas = field.embed(gamma, prec)
        with working_precision(prec):
            size = sigmas[idx] * sigmas[partner]
            if size.real.certainly_lt(q_sq) or size.real.certainly_gt(q_sq):
                return size.real.certainly_lt(q_sq)
            if mult > 0:
                hits = sum(
                    1 for a in sigmas for b in sigmas if (a * b).overlaps(target)
                )
                if hits == mult and size.overlaps(target):
                    return True
        prec *= 2
    raise PrecisionExhaustedError(f"cannot compare |sigma_{idx}({gamma})|^2 with {q_sq}")


def _scan_chunk(
    field: NumberField,
    box: CoordinateBox,
    table: list[list[ComplexBall]],
    q_sq: Fraction,
    first: tuple[int, int],
) -> list[tuple[Coords, bool]]:
    kept: list[tuple[Coords, bool]] = []
    threshold = RealBall.of(q_sq)
    for coords in box.points(first):
        undecided = False
        inside = True
        for row in table:
            size = _ball_sum(coords, row).abs_sq()
            if size.certainly_gt(threshold):
                inside = False
                break
            if not size.certainly_le(threshold):
                undecided = True
        if inside:
            kept.append((coords, undecided))
    return kept


def enumerate_integral(
    field: NumberField,
    q: Fraction,
    *,
    precision: int = 128,
    cap: int = 100_000_000,
    workers: int = 1,
) -> list[FieldElement]:
    """Integral elements with ``|sigma(gamma)| <= q`` at every embedding, lexicographic."""
    if q < 0:
        return []
    box = coordinate_box(field, q, precision)
    check_cap(box, cap, "box enumeration")
    q_sq = q * q
    table = _basis_table(field, precision)
    chunks = split_range(-box.bounds[0], box.bounds[0], max(1, workers) * 4)

    def scan(first: tuple[int, int]) -> list[tuple[Coords, bool]]:
        return _scan_chunk(field, box, table, q_sq, first)

    with working_precision(precision):
        parts = ordered_map(scan, chunks, workers)
    out: list[FieldElement] = []
    undecided_count = 0
    for part in parts:
        for coords, undecided in part:
            gamma = field.from_basis(coords)
            if undecided:
                undecided_count += 1
                if not all(
                    place_size_le(gamma, idx, q_sq, precision)
                    for idx, _ in field.archimedean_indices()
                ):
                    continue
            out.append(gamma)
    _logger.debug(
        "enumerated box %s at Q=%s: %d elements, %d boundary checks",
        box.bounds,
        q,
        len(out),
        undecided_count,
    )
    return out


def scan_box(
    field: NumberField,
    q: Fraction,
    keep: Callable[[FieldElement], bool],
    *,
    precision: int = 128,
    cap: int = 100_000_000,
) -> list[FieldElement]:
    """Elements of the coordinate box for ``q`` passing an exact predicate."""
    box = coordinate_box(field, q, precision)
    check_cap(box, cap, "box scan")
    return [g for g in (field.from_basis(c) for c in box.points()) if keep(g)]
