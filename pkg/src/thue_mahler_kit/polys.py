"""Exact polynomial and integer algebra backed by sympy.

Polynomials cross this boundary as coefficient tuples, lowest degree first.
Rational polynomials use ``Fraction`` coefficients, integer and mod-p
polynomials use ``int``. The zero polynomial is the empty tuple.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from fractions import Fraction
from functools import lru_cache

import sympy
from sympy import QQ, ZZ, Matrix, Poly, Rational, Symbol
from sympy.polys.polyerrors import NotInvertible

Coeffs = tuple[Fraction, ...]
IntCoeffs = tuple[int, ...]

_X = Symbol("x")
_T = Symbol("t")


def _rat(q: Fraction | int) -> Rational:
    f = Fraction(q)
    return Rational(f.numerator, f.denominator)


def _frac(value: object) -> Fraction:
    r = Rational(value)
    return Fraction(int(r.p), int(r.q))


def _strip(values: list[Fraction]) -> Coeffs:
    while values and values[-1] == 0:
        values.pop()
    return tuple(values)


def _strip_int(values: list[int]) -> IntCoeffs:
    while values and values[-1] == 0:
        values.pop()
    return tuple(values)


def _qq(coeffs: Sequence[Fraction | int], var: Symbol = _X) -> Poly:
    if len(coeffs) == 0:
        return Poly(0, var, domain=QQ)
    return Poly([_rat(c) for c in reversed(coeffs)], var, domain=QQ)


def _zz(coeffs: Sequence[int]) -> Poly:
    if len(coeffs) == 0:
        return Poly(0, _X, domain=ZZ)
    return Poly([int(c) for c in reversed(coeffs)], _X, domain=ZZ)


def _gf(coeffs: Sequence[int], p: int) -> Poly:
    if len(coeffs) == 0:
        return Poly(0, _X, modulus=p)
    return Poly([int(c) % p for c in reversed(coeffs)], _X, modulus=p)


def _from_qq(poly: Poly) -> Coeffs:
    return _strip([_frac(c) for c in reversed(poly.all_coeffs())])


def _from_gf(poly: Poly, p: int) -> IntCoeffs:
    return _strip_int([int(c) % p for c in reversed(poly.all_coeffs())])


def degree(coeffs: Sequence[Fraction | int]) -> int:
    return len(coeffs) - 1


# -- integer polynomials -------------------------------------------------------------


def is_irreducible(coeffs: Sequence[int]) -> bool:
    if len(coeffs) <= 2:
        return len(coeffs) == 2
    return bool(_zz(coeffs).is_irreducible)


def real_root_count(coeffs: Sequence[int]) -> int:
    return int(_zz(coeffs).count_roots())


def discriminant(coeffs: Sequence[int]) -> int:
    if len(coeffs) == 2:
        return 1
    return int(_zz(coeffs).discriminant())


# -- rational polynomials ------------------------------------------------------------


def mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> Coeffs:
    if len(a) == 0 or len(b) == 0:
        return ()
    return _from_qq(_qq(a) * _qq(b))


def rem(a: Sequence[Fraction], b: Sequence[Fraction]) -> Coeffs:
    return _from_qq(_qq(a).rem(_qq(b)))


def invert(a: Sequence[Fraction], modulus: Sequence[Fraction]) -> Coeffs:
    """Inverse of ``a`` modulo ``modulus``; raises ``ZeroDivisionError`` when not coprime."""
    try:
        inv = _qq(a).invert(_qq(modulus))
    except NotInvertible as exc:
        raise ZeroDivisionError("polynomial is not invertible modulo the modulus") from exc
    return _from_qq(inv)


def resultant(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    if len(a) == 0 or len(b) == 0:
        return Fraction(0)
    return _frac(_qq(a).resultant(_qq(b)))


def sqf_part(coeffs: Sequence[Fraction]) -> Coeffs:
    return _from_qq(_qq(coeffs).sqf_part().monic())


def factor_degrees(coeffs: Sequence[Fraction]) -> list[tuple[int, int]]:
    """Degrees and multiplicities of the irreducible factors over Q."""
    _, factors = _qq(coeffs).factor_list()
    return sorted((int(f.degree()), int(e)) for f, e in factors)


def primitive_integral(coeffs: Sequence[Fraction]) -> IntCoeffs:
    """Scale to a primitive integer polynomial with positive leading coefficient."""
    if len(coeffs) == 0:
        return ()
    den = math.lcm(*(c.denominator for c in coeffs))
    ints = [int(c * den) for c in coeffs]
    g = math.gcd(*ints)
    sign = -1 if ints[-1] < 0 else 1
    return tuple(sign * v // g for v in ints)


def product_root_poly(coeffs: Sequence[Fraction]) -> Coeffs:
    """Polynomial in ``t`` whose roots are the products ``a_i * a_j`` of roots of ``coeffs``.

    Computed as ``Res_x(c(x), x^d c(t/x))``.
    """
    d = len(coeffs) - 1
    c_x = sum((_rat(c) * _X**k for k, c in enumerate(coeffs)), sympy.Integer(0))
    scaled = sum(
        (_rat(c) * _T**k * _X ** (d - k) for k, c in enumerate(coeffs)), sympy.Integer(0)
    )
    res = sympy.resultant(c_x, scaled, _X)
    return _from_qq(Poly(res, _T, domain=QQ))


def evaluate(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


# -- matrices over Q -----------------------------------------------------------------


def _matrix(rows: Sequence[Sequence[Fraction]]) -> Matrix:
    return Matrix([[_rat(v) for v in row] for row in rows])


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    if len(rows) == 0:
        return Fraction(1)
    return _frac(_matrix(rows).det())


def inverse(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    inv = _matrix(rows).inv()
    n = len(rows)
    return [[_frac(inv[i, j]) for j in range(n)] for i in range(n)]


def charpoly(rows: Sequence[Sequence[Fraction]]) -> Coeffs:
    """Monic characteristic polynomial of a square rational matrix."""
    cp = _matrix(rows).charpoly(_X)
    return _strip([_frac(c) for c in reversed(cp.all_coeffs())])


# -- polynomials over F_p ------------------------------------------------------------


def factor_mod_p(coeffs: Sequence[int], p: int) -> list[tuple[IntCoeffs, int]]:
    """Monic irreducible factors of ``coeffs`` mod ``p`` in a canonical order."""
    _, factors = _gf(coeffs, p).factor_list()
    out = [(_from_gf(f.monic(), p), int(e)) for f, e in factors]
    return sorted(out, key=lambda item: (len(item[0]), tuple(reversed(item[0]))))


def mul_mod_p(a: Sequence[int], b: Sequence[int], p: int) -> IntCoeffs:
    return _from_gf(_gf(a, p) * _gf(b, p), p)


def rem_mod_p(a: Sequence[int], b: Sequence[int], p: int) -> IntCoeffs:
    return _from_gf(_gf(a, p).rem(_gf(b, p)), p)


def quo_mod_p(a: Sequence[int], b: Sequence[int], p: int) -> IntCoeffs:
    return _from_gf(_gf(a, p).quo(_gf(b, p)), p)


# -- integers ------------------------------------------------------------------------


@lru_cache(maxsize=65536)
def _factor_items(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((int(p), int(e)) for p, e in sympy.factorint(n).items())


def factor_integer(n: int) -> dict[int, int]:
    if n == 0:
        raise ValueError("cannot factor zero")
    return dict(_factor_items(abs(n)))


def divisor_count(n: int) -> int:
    return int(sympy.divisor_count(n))


def divisors(n: int) -> list[int]:
    return [int(v) for v in sympy.divisors(n)]


def is_prime(n: int) -> bool:
    return bool(sympy.isprime(n))


def primes_up_to(bound: int) -> list[int]:
    if bound < 2:
        return []
    return [int(p) for p in sympy.primerange(2, bound + 1)]


def totient(n: int) -> int:
    return int(sympy.totient(n))


def root_multiplicity(coeffs: Sequence[Fraction], value: Fraction) -> int:
    """Multiplicity of ``value`` as a root of a nonzero rational polynomial."""
    current = list(coeffs)
    count = 0
    while len(current) > 1:
        quotient = [Fraction(0)] * (len(current) - 1)
        carry = Fraction(0)
        for k in range(len(current) - 1, 0, -1):
            carry = carry * value + current[k]
            quotient[k - 1] = carry
        if carry * value + current[0] != 0:
            break
        current = quotient
        count += 1
    return count
