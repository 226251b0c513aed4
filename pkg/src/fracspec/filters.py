"""Trigonometric-polynomial filters and Hadamard / QMF certification."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import _exact
from .ifs_core import DigitSet, ExpansiveIntMatrix
from .errors import ValidationError

UNITARITY_TOL = 1e-12

Frequency = tuple[int, ...]


class TrigPolynomial:
    """``x -> sum_k a_k exp(2 pi i k.x)`` with finitely many integer frequencies ``k``.

    Coefficients may be exact (``int``/``Fraction``) or complex floats. Exact
    rational coefficients enable the exact zero and unimodularity tests used
    by cycle detection and infinite-product zero witnesses.
    """

    __slots__ = ("coefficients", "d", "_freqs", "_amps")

    def __init__(self, coefficients: Mapping):
        coeffs = {}
        d = None
        for k, a in coefficients.items():
            if isinstance(k, (int, np.integer)):
                k = (int(k),)
            k = tuple(int(x) for x in k)
            if d is None:
                d = len(k)
            elif len(k) != d:
                raise ValidationError("frequencies have mixed dimensions")
            if isinstance(a, (int, np.integer)) and not isinstance(a, bool):
                a = Fraction(int(a))
            elif isinstance(a, float):
                a = complex(a)
            if a == 0:
                continue
            coeffs[k] = coeffs.get(k, 0) + a
        if d is None:
            raise ValidationError("a filter needs at least one frequency (use {0: 0} for zero)")
        self.coefficients = {k: a for k, a in sorted(coeffs.items()) if a != 0}
        self.d = d
        self._freqs = np.array(list(self.coefficients) or [(0,) * d], dtype=float).reshape(-1, d)
        self._amps = np.array([complex(a) for a in self.coefficients.values()] or [0j])

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x) -> np.ndarray | complex:
        """Evaluate at a point or at an array of points of shape ``(..., d)``.

        For ``d = 1`` plain scalars and 1-D arrays are accepted.
        """
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0 or (arr.ndim == 1 and self.d > 1 and arr.shape[0] == self.d)
        if self.d == 1:
            arr = arr[..., None]
        phases = arr @ self._freqs.T
        vals = np.exp(2j * np.pi * phases) @ self._amps
        if scalar:
            return complex(np.asarray(vals).reshape(-1)[0])
        return vals

    def value_exact_phase(self, x: Sequence[Fraction]) -> complex:
        """Evaluate at a rational point, reducing each phase ``k.x`` mod 1 exactly first."""
        total = 0j
        for k, a in self.coefficients.items():
            t = _exact.frac_mod1(sum((ki * xi for ki, xi in zip(k, x)), Fraction(0)))
            total += complex(a) * complex(math.cos(2 * math.pi * t), math.sin(2 * math.pi * t))
        return total

    # -- structure ----------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return all(isinstance(a, Fraction) for a in self.coefficients.values())

    @property
    def has_positive_rational_coefficients(self) -> bool:
        return self.is_rational and all(a > 0 for a in self.coefficients.values())

    def value_at_zero(self) -> complex:
        return complex(sum(complex(a) for a in self.coefficients.values()))

    def degree(self) -> int:
        """Largest absolute frequency coordinate."""
        return max((max(abs(c) for c in k) for k in self.coefficients), default=0)

    def lipschitz_constant(self) -> float:
        """``C`` with ``|m(y) - m(0)| <= C |y|``: ``2 pi sum |a_k| |k|``."""
        return 2 * math.pi * sum(abs(complex(a)) * math.hypot(*k) for k, a in self.coefficients.items())

    def modulus_squared(self) -> "TrigPolynomial":
        """Coefficients of ``|m|^2``; exact when ``m`` is rational."""
        out: dict = {}
        items = list(self.coefficients.items())
        for k, a in items:
            for k2, a2 in items:
                f = tuple(x - y for x, y in zip(k, k2))
                conj = a2 if isinstance(a2, Fraction) else complex(a2).conjugate()
                out[f] = out.get(f, 0) + a * conj
        return TrigPolynomial(out) if out else TrigPolynomial({(0,) * self.d: 0})

    def scaled_frequencies(self, factor: int) -> "TrigPolynomial":
        return TrigPolynomial({tuple(factor * c for c in k): a for k, a in self.coefficients.items()})

    def __eq__(self, other):
        return isinstance(other, TrigPolynomial) and self.coefficients == other.coefficients

    def __repr__(self):
        return f"TrigPolynomial({self.coefficients!r})"

    # -- exact tests at rational points ---------------------------------------

    def is_zero_at(self, x: Sequence) -> bool | None:
        """Exact decision whether ``m(x) = 0`` at a rational point.

        Needs rational coefficients; returns None when no exact decision is
        possible (complex coefficients or root order above the cyclotomic cap).
        """
        if not self.is_rational:
            return None
        x = [_exact.as_fraction(v) for v in x]
        terms = [
            (a, sum((ki * xi for ki, xi in zip(k, x)), Fraction(0)))
            for k, a in self.coefficients.items()
        ]
        return _exact.root_of_unity_sum_is_zero(terms)

    def is_unimodular_at(self, x: Sequence) -> bool | None:
        """Exact decision whether ``|m(x)| = 1`` at a rational point.

        For positive rational coefficients summing to one, ``|m(x)| = 1``
        exactly when all phases ``k.x`` agree mod 1. Returns None for filters
        outside that class.
        """
        if not self.has_positive_rational_coefficients or sum(self.coefficients.values()) != 1:
            return None
        x = [_exact.as_fraction(v) for v in x]
        ks = list(self.coefficients)
        k0 = ks[0]
        for k in ks[1:]:
            t = sum(((a - b) * xi for a, b, xi in zip(k, k0, x)), Fraction(0))
            if t.denominator != 1:
                return False
        return True

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            json.dumps(list(k), separators=(",", ":")): [complex(a).real, complex(a).imag]
            for k, a in self.coefficients.items()
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TrigPolynomial":
        coeffs = {}
        for key, (re_, im) in data.items():
            k = tuple(json.loads(key))
            coeffs[k] = complex(re_, im)
        return cls(coeffs)


def filter_from_digits(B) -> TrigPolynomial:
    """``m_B(x) = (1/N) sum_{b in B} exp(2 pi i b.x)`` with exact coefficients."""
    B = B if isinstance(B, DigitSet) else DigitSet(B)
    return TrigPolynomial({b: Fraction(1, B.N) for b in B})


def haar_filter() -> TrigPolynomial:
    return filter_from_digits([0, 1])


def stretched_haar_filter() -> TrigPolynomial:
    return filter_from_digits([0, 3])


@dataclass(frozen=True)
class HadamardCertificate:
    A: ExpansiveIntMatrix
    B: DigitSet
    L: DigitSet
    matrix_entries: np.ndarray
    unitarity_defect: float

    @property
    def valid(self) -> bool:
        return self.unitarity_defect <= UNITARITY_TOL

    def to_json(self) -> dict:
        m = self.matrix_entries
        return {
            "A": [list(r) for r in self.A.entries],
            "B": [list(b) for b in self.B],
            "L": [list(l) for l in self.L],
            "valid": self.valid,
            "defect": self.unitarity_defect,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
        }


def hadamard_matrix(A: ExpansiveIntMatrix, B: DigitSet, L: DigitSet) -> np.ndarray:
    """``(1/sqrt N) exp(2 pi i A^{-1}b . l)`` with phases reduced mod 1 exactly."""
    N = B.N
    M = np.empty((N, L.N), dtype=complex)
    for i, b in enumerate(B):
        ab = _exact.matvec(A.inverse, b)
        for j, l in enumerate(L):
            t = _exact.frac_mod1(sum((x * y for x, y in zip(ab, l)), Fraction(0)))
            M[i, j] = complex(math.cos(2 * math.pi * t), math.sin(2 * math.pi * t))
    return M / math.sqrt(N)


def unitarity_defect(M: np.ndarray) -> float:
    """``max |M* M - I|`` entrywise."""
    if M.shape[0] != M.shape[1]:
        return math.inf
    return float(np.max(np.abs(M.conj().T @ M - np.eye(M.shape[0]))))


def hadamard_check(A, B, L) -> HadamardCertificate:
    """Certify whether ``(A, B, L)`` is a Hadamard triple.

    Both digit sets must contain zero and have equal size; violations raise
    rather than returning an invalid certificate.
    """
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    B = B if isinstance(B, DigitSet) else DigitSet(B)
    L = L if isinstance(L, DigitSet) else DigitSet(L)
    if B.N != L.N:
        raise ValidationError(f"|B| = {B.N} but |L| = {L.N}; a Hadamard triple needs equal sizes")
    if B.d != A.d or L.d != A.d:
        raise ValidationError("digit dimension does not match the matrix")
    if not B.contains_zero():
        raise ValidationError("B must contain 0")
    if not L.contains_zero():
        raise ValidationError("L must contain 0")
    M = hadamard_matrix(A, B, L)
    return HadamardCertificate(A, B, L, M, unitarity_defect(M))


def _grid(grid: int, d: int) -> np.ndarray:
    axis = np.arange(grid) / grid
    return np.array(list(itertools.product(axis, repeat=d)))


def qmf_sum(m: TrigPolynomial, A: ExpansiveIntMatrix, branches: DigitSet, x: np.ndarray) -> np.ndarray:
    """``sum_l |m((A^T)^{-1}(x + l))|^2`` at points ``x`` of shape ``(n, d)``."""
    M = _exact.to_float_matrix(A.transpose_inverse)
    total = np.zeros(x.shape[0])
    for l in branches:
        y = (x + np.array(l, dtype=float)) @ M.T
        total += np.abs(m(y if m.d > 1 else y[:, 0])) ** 2
    return total


def qmf_defect(m: TrigPolynomial, A, L, grid: int) -> float:
    """Max over a ``grid^d`` uniform grid of ``[0,1)^d`` of ``|sum_l |m(..)|^2 - 1|``."""
    if grid < 1:
        raise ValidationError("grid must be at least 1")
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    L = L if isinstance(L, DigitSet) else DigitSet(L)
    x = _grid(grid, A.d)
    return float(np.max(np.abs(qmf_sum(m, A, L, x) - 1)))


def certify_qmf(m: TrigPolynomial, A, L, tol: float = UNITARITY_TOL) -> tuple[bool, float]:
    """Decide the QMF identity as a polynomial identity.

    Substituting ``x = A^T u`` turns the branch sum into a trigonometric
    polynomial in ``u`` with integer frequencies from the support of
    ``|m|^2``. Sampling it on ``(2 deg + 1)`` points per axis determines it,
    so a vanishing defect on that grid certifies the identity everywhere.
    Returns ``(holds, defect)``.
    """
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    L = L if isinstance(L, DigitSet) else DigitSet(L)
    n = 2 * m.modulus_squared().degree() + 1
    u = _grid(n, A.d)
    x = u @ A.as_array()  # rows of u times A, i.e. (A^T u)^T
    defect = float(np.max(np.abs(qmf_sum(m, A, L, x) - 1)))
    return defect <= tol, defect
