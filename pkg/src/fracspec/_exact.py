"""Exact rational linear algebra and roots-of-unity arithmetic."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

Matrix = tuple[tuple[Fraction, ...], ...]
Vector = tuple[Fraction, ...]


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"not an exact rational: {v!r}")


def is_exact(v) -> bool:
    return isinstance(v, (int, np.integer, Fraction)) and not isinstance(v, bool)


def identity(d: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols) for row in a)


def matvec(a: Matrix, v: Sequence[Fraction]) -> Vector:
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def matpow(a: Matrix, n: int) -> Matrix:
    result = identity(len(a))
    base = a
    while n:
        if n & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        n >>= 1
    return result


def inverse(a: Sequence[Sequence]) -> Matrix:
    """Gauss-Jordan inverse over the rationals. Raises ZeroDivisionError if singular."""
    d = len(a)
    aug = [[as_fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(d)] for i, row in enumerate(a)]
    for col in range(d):
        pivot = next((r for r in range(col, d) if aug[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[d:]) for row in aug)


def solve(a: Matrix, b: Sequence[Fraction]) -> Vector:
    return matvec(inverse(a), b)


def determinant(a: Sequence[Sequence[int]]) -> int:
    d = len(a)
    m = [[as_fraction(x) for x in row] for row in a]
    det = Fraction(1)
    for col in range(d):
        pivot = next((r for r in range(col, d) if m[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, d):
            f = m[r][col] / m[col][col]
            m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return int(det)


def frac_mod1(x: Fraction) -> Fraction:
    return x - math.floor(x)


def to_float_matrix(a: Matrix) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in a])


# --- vanishing sums of roots of unity -------------------------------------

# Largest root-of-unity order for which exact cyclotomic reduction is attempted.
CYCLOTOMIC_ORDER_CAP = 4096


@lru_cache(maxsize=256)
def cyclotomic(n: int) -> tuple[int, ...]:
    """Integer coefficients (ascending powers) of the n-th cyclotomic polynomial."""
    # Phi_n = prod_{d | n} (z^d - 1)^{mu(n/d)}; multiply the numerator factors,
    # then divide by the denominator ones (exact, since the quotient is a polynomial).
    num = [1]
    dens = []
    for d in range(1, n + 1):
        if n % d:
            continue
        mu = _mobius(n // d)
        if mu == 1:
            num = _mul_xd_minus_1(num, d)
        elif mu == -1:
            dens.append(d)
    for d in dens:
        num = _div_xd_minus_1(num, d)
    return tuple(num)


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def _mul_xd_minus_1(poly: list[int], d: int) -> list[int]:
    out = [0] * (len(poly) + d)
    for i, c in enumerate(poly):
        out[i + d] += c
        out[i] -= c
    return out


def _div_xd_minus_1(poly: list[int], d: int) -> list[int]:
    # poly = q * (z^d - 1); recover q from the top down.
    n = len(poly) - 1 - d
    q = [0] * (n + 1)
    rem = list(poly)
    for i in range(len(poly) - 1, d - 1, -1):
        c = rem[i]
        if c:
            q[i - d] = c
            rem[i] -= c
            rem[i - d] += c
    if any(rem):
        raise ArithmeticError("inexact cyclotomic division")
    return q


def root_of_unity_sum_is_zero(terms: Sequence[tuple[Fraction, Fraction]]) -> bool | None:
    """Decide exactly whether sum c * exp(2 pi i t) vanishes.

    ``terms`` holds pairs ``(c, t)`` with rational weight ``c`` and rational
    phase ``t``. Returns None when the reduced root order exceeds
    :data:`CYCLOTOMIC_ORDER_CAP` and no decision is made.
    """
    if not terms:
        return True
    t0 = terms[0][1]
    shifted = [(as_fraction(c), frac_mod1(as_fraction(t) - t0)) for c, t in terms]
    q = 1
    for _, t in shifted:
        q = q * t.denominator // math.gcd(q, t.denominator)
    if q > CYCLOTOMIC_ORDER_CAP:
        return None
    sparse: dict[int, Fraction] = {}
    for c, t in shifted:
        k = t.numerator * (q // t.denominator)
        sparse[k] = sparse.get(k, 0) + c
    scale = 1
    for c in sparse.values():
        scale = scale * c.denominator // math.gcd(scale, c.denominator)
    poly = [0] * q
    for k, c in sparse.items():
        poly[k] = c.numerator * (scale // c.denominator)
    if q == 1:
        return poly[0] == 0
    phi = cyclotomic(q)
    return not any(_poly_mod_monic(poly, phi))


def _poly_mod_monic(poly: list[int], mod: Sequence[int]) -> list[int]:
    rem = np.array(poly, dtype=object)
    deg = len(mod) - 1
    m = np.array(mod, dtype=object)
    for i in range(len(rem) - 1, deg - 1, -1):
        c = rem[i]
        if c:
            rem[i - deg : i + 1] -= c * m
    return list(rem[:deg])
