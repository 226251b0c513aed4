"""Exact enumeration of periodic orbits of inverse-branch systems.

A cycle of the system ``sigma_l(x) = (A^T)^{-1}(x + l)`` is a finite orbit
``x_1 -> x_2 -> ... -> x_p -> x_1`` with ``sigma_{l_i}(x_i) = x_{i+1}``. It
is extreme for a filter ``m`` when ``|m(x_i)| = 1`` at every point. Every
word of length ``p`` has exactly one such fixed point, obtained by solving a
rational linear system, so enumerating words up to a period bound finds all
cycles of that period or less.

In the wavelet setting cycles live on the torus: points are reduced mod
``Z^d`` and the relation ``sigma_{l_i}(x_i) = x_{i+1}`` holds mod ``Z^d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _exact
from .errors import ComputationError, ValidationError
from .filters import TrigPolynomial
from .ifs_core import AffineIFS, Orientation, RationalVector, check_enumeration


@dataclass(frozen=True)
class Cycle:
    points: tuple[RationalVector, ...]
    word: tuple[tuple[int, ...], ...]
    is_extreme: bool
    on_torus: bool = False

    @property
    def period(self) -> int:
        return len(self.points)

    def is_trivial(self) -> bool:
        return self.period == 1 and all(n == 0 for n in self.points[0].numerators)

    def point_fractions(self) -> list[tuple[Fraction, ...]]:
        return [p.to_fractions() for p in self.points]

    def as_sorted_set(self) -> list[tuple[Fraction, ...]]:
        return sorted(self.point_fractions())

    def to_json(self) -> dict:
        return {
            "points": [[str(f) for f in p.to_fractions()] for p in self.points],
            "word": [list(l) for l in self.word],
            "period": self.period,
            "extreme": self.is_extreme,
            "on_torus": self.on_torus,
        }

    def __str__(self):
        return "{" + ", ".join(str(p) for p in self.points) + "}"


def _fixed_point(ifs: AffineIFS, word: Sequence[int]) -> tuple[Fraction, ...]:
    """Unique ``x`` with ``sigma_{l_p} o ... o sigma_{l_1}(x) = x``.

    ``word`` lists digit indices in orbit order: ``x_2 = sigma_{l_1}(x_1)``.
    """
    lin, offset = ifs.compose_word(tuple(reversed(word)))
    d = ifs.d
    lhs = tuple(
        tuple((Fraction(int(i == j)) - lin[i][j]) for j in range(d)) for i in range(d)
    )
    try:
        return _exact.solve(lhs, offset)
    except ZeroDivisionError:
        raise ComputationError("I - M^p is singular; the matrix cannot be expansive") from None


def _orbit(ifs: AffineIFS, x: tuple[Fraction, ...], word: Sequence[int]) -> list[tuple[Fraction, ...]]:
    pts = [x]
    for idx in word[:-1]:
        pts.append(ifs.apply(idx, pts[-1]))
    closing = ifs.apply(word[-1], pts[-1])
    if closing != x:
        raise ComputationError(f"fixed point residual is not zero for word {word}")
    return pts


def _mod1(p: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    return tuple(_exact.frac_mod1(v) for v in p)


def _canonical(points: list, word: list) -> tuple[tuple, tuple]:
    """Rotate so that the lexicographically least point comes first."""
    i = min(range(len(points)), key=lambda j: points[j])
    return tuple(points[i:] + points[:i]), tuple(word[i:] + word[:i])


def _extreme(m: TrigPolynomial, pts) -> bool:
    for x in pts:
        exact = m.is_unimodular_at(x)
        if exact is None:
            # no exact criterion for this filter class: fall back to floating point
            exact = abs(abs(m.value_exact_phase(x)) - 1) <= 1e-12
        if not exact:
            return False
    return True


def _necklaces(n: int, p: int):
    """Primitive words of length ``p`` that are least among their rotations (FKM order)."""
    a = [0] * (p + 1)

    def gen(t, q):
        if t > p:
            if q == p:
                yield tuple(a[1:])
            return
        a[t] = a[t - q]
        yield from gen(t + 1, q)
        for j in range(a[t - q] + 1, n):
            a[t] = j
            yield from gen(t + 1, t)

    yield from gen(1, 1)


def _phase_test(m: TrigPolynomial):
    """Integer extremeness test ``num -> bool`` for points ``num / det``, or None.

    Valid for positive rational coefficients summing to one, where
    ``|m(x)| = 1`` iff every ``(k - k0) . x`` is an integer.
    """
    if not m.has_positive_rational_coefficients or sum(m.coefficients.values()) != 1:
        return None
    ks = list(m.coefficients)
    diffs = [tuple(a - b for a, b in zip(k, ks[0])) for k in ks[1:]]
    return lambda num, det: all(sum(a * b for a, b in zip(dk, num)) % det == 0 for dk in diffs)


def _int_matmul(a, b):
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in zip(*b)) for row in a)


class _PeriodSolver:
    """Integer form of the period-``p`` fixed-point equation.

    ``x_1 = sigma_{l_p} o ... o sigma_{l_1}(x_1)`` is equivalent to
    ``((A^T)^p - I) x_1 = sum_i (A^T)^{i-1} l_i``, an integer system with a
    common denominator ``det((A^T)^p - I)`` for every orbit point.
    """

    def __init__(self, dual: AffineIFS, p: int):
        AT = dual.matrix.transpose
        d = dual.d
        eye = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))
        self.powers = [eye]
        for _ in range(p):
            self.powers.append(_int_matmul(self.powers[-1], AT))
        B = tuple(tuple(v - e for v, e in zip(r, er)) for r, er in zip(self.powers[p], eye))
        self.det = _exact.determinant(B)
        if self.det == 0:
            raise ComputationError("(A^T)^p - I is singular; the matrix cannot be expansive")
        inv = _exact.inverse(B)
        self.adj = tuple(tuple(int(v * self.det) for v in r) for r in inv)
        self.digits = dual.digits.points
        self.p = p
        # contrib[i][j] = (A^T)^i l_j
        self.contrib = [
            [tuple(sum(P[r][c] * l[c] for c in range(d)) for r in range(d)) for l in self.digits]
            for P in self.powers[:p]
        ]

    def numerators(self, word: Sequence[int]) -> tuple[int, ...]:
        """Integer vector ``num`` with orbit point ``num / det``."""
        d = len(self.adj)
        v = [0] * d
        for i, idx in enumerate(word):
            c = self.contrib[i][idx]
            for r in range(d):
                v[r] += c[r]
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.adj)

    def point(self, word: Sequence[int]) -> tuple[Fraction, ...]:
        return tuple(Fraction(n, self.det) for n in self.numerators(word))

    def orbit(self, word: tuple[int, ...]) -> list[tuple[Fraction, ...]]:
        return [self.point(word[r:] + word[:r]) for r in range(self.p)]


def find_cycles(
    dual: AffineIFS,
    m: TrigPolynomial,
    max_period: int | None = None,
    *,
    all_cycles: bool = False,
    on_torus: bool = False,
    cap: int | None = None,
) -> list[Cycle]:
    """Enumerate cycles of ``dual`` with period up to ``max_period``.

    Only extreme cycles are returned unless ``all_cycles`` is set. With
    ``on_torus`` the orbit points are reduced mod ``Z^d`` (the wavelet
    setting, where ``x`` and ``x + k`` are the same point). Output is sorted
    by period, then by canonical point tuple.
    """
    if dual.orientation is not Orientation.DUAL:
        raise ValidationError("find_cycles expects a dual (sigma) system")
    if max_period is None:
        max_period = 12 if dual.d == 1 else 6
    if max_period < 1:
        raise ValidationError("max_period must be at least 1")
    if m.d != dual.d:
        raise ValidationError("filter dimension does not match the system")
    check_enumeration(dual.N, max_period, cap)
    seen: set[tuple] = set()
    found: list[Cycle] = []
    fast = _phase_test(m)
    for p in range(1, max_period + 1):
        solver = _PeriodSolver(dual, p)
        # one representative per rotation class of primitive words
        for word in _necklaces(dual.N, p):
            if not all_cycles:
                # an extreme cycle is extreme at every point, so test the first one alone
                if fast is not None:
                    if not fast(solver.numerators(word), solver.det):
                        continue
                else:
                    first = solver.point(word)
                    if not _extreme(m, [_mod1(first) if on_torus else first]):
                        continue
            pts = solver.orbit(word)
            if on_torus:
                pts = [_mod1(q) for q in pts]
                if len(set(pts)) != len(pts):
                    # orbit collapses on the torus: a shorter cycle already listed
                    continue
            digits = [dual.digits.points[i] for i in word]
            key_pts, key_word = _canonical(pts, digits)
            if key_pts in seen:
                continue
            seen.add(key_pts)
            extreme = _extreme(m, key_pts)
            if extreme or all_cycles:
                if not on_torus:
                    _orbit(dual, pts[0], word)
                found.append(
                    Cycle(
                        tuple(RationalVector.from_fractions(q) for q in key_pts),
                        key_word,
                        extreme,
                        on_torus,
                    )
                )
    found.sort(key=lambda c: (c.period, c.point_fractions()))
    return found


def wavelet_cycles(m0: TrigPolynomial, A, branches=None, max_period: int | None = None, **kw) -> list[Cycle]:
    """Extreme cycles of ``x -> A^T x mod Z^d`` for a wavelet filter.

    ``branches`` defaults to ``{0, ..., |A| - 1}`` in one dimension.
    """
    from .ifs_core import ExpansiveIntMatrix, dual_ifs

    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    if branches is None:
        if A.d != 1:
            raise ValidationError("branches are required in dimension > 1")
        branches = list(range(A.det_abs))
    return find_cycles(dual_ifs(A, branches), m0, max_period, on_torus=True, **kw)


def numeric_extremeness(m: TrigPolynomial, cycle: Cycle) -> float:
    """``max_i ||m(x_i)| - 1|`` in floating point."""
    vals = [abs(m(p.to_float() if m.d > 1 else float(p.to_float()[0]))) for p in cycle.points]
    return float(np.max(np.abs(np.array(vals) - 1)))


def residual(dual: AffineIFS, cycle: Cycle) -> list[tuple[Fraction, ...]]:
    """Exact ``sigma_{l_i}(x_i) - x_{i+1}`` for each step (reduced mod 1 on the torus)."""
    pts = cycle.point_fractions()
    out = []
    idx = {l: i for i, l in enumerate(dual.digits.points)}
    for i, (x, l) in enumerate(zip(pts, cycle.word)):
        nxt = pts[(i + 1) % len(pts)]
        img = dual.apply(idx[l], x)
        diff = tuple(a - b for a, b in zip(img, nxt))
        if cycle.on_torus:
            diff = tuple(v - round(v) if v.denominator == 1 else v for v in diff)
        out.append(diff)
    return out


def rotate(cycle: Cycle, shift: int) -> tuple[list, list]:
    """Points and word of ``cycle`` started at position ``shift`` (non-canonical)."""
    p = cycle.period
    pts = list(cycle.point_fractions())
    wd = list(cycle.word)
    s = shift % p
    return pts[s:] + pts[:s], wd[s:] + wd[:s]


def canonicalize(points: list, word: list) -> tuple[tuple, tuple]:
    return _canonical(list(points), list(word))


__all__ = [
    "Cycle",
    "find_cycles",
    "wavelet_cycles",
    "numeric_extremeness",
    "residual",
    "rotate",
    "canonicalize",
]
