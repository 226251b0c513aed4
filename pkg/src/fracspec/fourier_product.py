"""Fourier transforms of invariant measures and scaling functions as infinite products.

Both transforms are products ``prod_{k>=1} m((A^T)^{-k} x)``. Truncation after
``K`` factors is certified with the tail estimate

    |prod_{k>K} m(y_k) - 1| <= exp(C sum_{k>K} |y_k|) - 1,

where ``C`` bounds the Lipschitz constant of ``m`` at the origin and
``sum_{k>K} |y_k| <= G |y_K|`` with ``G`` from the contraction of
``(A^T)^{-1}``. At rational arguments the product vanishes exactly iff one of
its factors does, and only factors with ``C |y_k| >= 1`` can vanish, so the
exact zero search is complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _exact
from .errors import UnattainableErrorBound, ValidationError
from .filters import TrigPolynomial, filter_from_digits
from .ifs_core import AffineIFS, ExpansiveIntMatrix

DEFAULT_ERR = 1e-12
DEPTH_CAP = 256
NUMERIC_ZERO = 1e-8
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ProductEvaluation:
    value: complex
    truncation_depth: int
    tail_bound: float
    exact_zero: bool = False
    witness: int | None = None

    @property
    def certified_nonzero(self) -> bool:
        return not self.exact_zero and abs(self.value) > self.tail_bound

    def to_json(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "truncation_depth": self.truncation_depth,
            "tail_bound": self.tail_bound,
            "exact_zero": self.exact_zero,
            "witness": self.witness,
        }


@lru_cache(maxsize=64)
def _tail_geometry(A: ExpansiveIntMatrix) -> tuple[float, float]:
    """``(G, P)`` with ``sum_{i>=1} |M^i y| <= G |y|`` and ``sup_i |M^i y| <= P |y|``.

    Here ``M = (A^T)^{-1}``.
    """
    M = _exact.to_float_matrix(A.transpose_inverse)
    norms = []
    P = np.eye(A.d)
    for _ in range(256):
        P = P @ M
        norms.append(np.linalg.norm(P, 2))
        if norms[-1] < 1:
            break
    else:  # pragma: no cover - excluded by expansiveness
        raise ValidationError("no contracting power found")
    rho = norms[-1]
    # |M^{qJ+i} y| <= rho^q ||M^i|| |y|
    return float(sum(norms) / (1 - rho)), float(max(1.0, *norms))


def _check_low_pass(m: TrigPolynomial) -> None:
    if abs(m.value_at_zero() - 1) > 1e-12:
        raise ValidationError(f"filter is not low-pass: m(0) = {m.value_at_zero()}")


def _is_rational_point(x) -> bool:
    return all(_exact.is_exact(v) for v in x)


def _as_vector(x, d: int) -> list:
    if isinstance(x, (int, float, Fraction, np.integer, np.floating)):
        x = [x]
    x = list(x)
    if len(x) != d:
        raise ValidationError(f"expected a {d}-vector, got {x!r}")
    return x


def zero_witness(m: TrigPolynomial, A: ExpansiveIntMatrix, x: Sequence) -> int | None | bool:
    """Index ``k >= 1`` of a factor ``m((A^T)^{-k} x)`` that vanishes exactly.

    Returns None when no factor vanishes (the product is then non-zero), and
    False when the decision could not be made exactly.
    """
    x = [_exact.as_fraction(v) for v in x]
    C = m.lipschitz_constant()
    _, P = _tail_geometry(A)
    M = A.transpose_inverse
    y = x
    undecided = False
    for k in range(1, DEPTH_CAP + 1):
        y = _exact.matvec(M, y)
        # every later factor then stays within distance < 1 of m(0) = 1
        if C * P * math.sqrt(sum(float(v) ** 2 for v in y)) < 1:
            break
        z = m.is_zero_at(y)
        if z is None:
            if abs(m.value_exact_phase(y)) > 1e-9:
                continue
            undecided = True
        elif z:
            return k
    return False if undecided else None


def _infinite_product(
    m: TrigPolynomial, A: ExpansiveIntMatrix, x, target_err: float, depth_cap: int
) -> ProductEvaluation:
    if target_err <= 0:
        raise ValidationError("target_err must be positive")
    x = _as_vector(x, A.d)
    rational = _is_rational_point(x)
    if rational:
        if all(v == 0 for v in x):
            return ProductEvaluation(1.0 + 0j, 0, 0.0)
        w = zero_witness(m, A, x) if m.is_rational else False
        if w:
            return ProductEvaluation(0j, w, 0.0, exact_zero=True, witness=w)
    C = m.lipschitz_constant()
    G, _ = _tail_geometry(A)
    Mf = _exact.to_float_matrix(A.transpose_inverse)
    M = A.transpose_inverse
    y_exact = [_exact.as_fraction(v) for v in x] if rational else None
    y = np.array([float(v) for v in x])
    value = 1.0 + 0j
    for K in range(0, depth_cap + 1):
        if K > 0:
            if rational:
                y_exact = _exact.matvec(M, y_exact)
                y = np.array([float(v) for v in y_exact])
                factor = m.value_exact_phase(y_exact)
            else:
                y = Mf @ y
                factor = m(y if A.d > 1 else y[0])
            value *= factor
        s = C * G * float(np.linalg.norm(y))
        bound = abs(value) * math.expm1(s) + 4 * (K + 1) * _EPS * max(abs(value), 1.0)
        if bound <= target_err:
            return ProductEvaluation(complex(value), K, float(bound))
    raise UnattainableErrorBound(
        f"error {target_err} not reached within {depth_cap} factors (last bound {bound:.3g})"
    )


def mu_hat(ifs: AffineIFS, x, target_err: float = DEFAULT_ERR, *, depth_cap: int = DEPTH_CAP) -> ProductEvaluation:
    """``int exp(2 pi i x.t) d mu_B(t)`` as a certified truncated product."""
    ifs.require_uniform()
    return _infinite_product(filter_from_digits(ifs.digits), ifs.matrix, x, target_err, depth_cap)


def phi_hat(m0: TrigPolynomial, A, x, target_err: float = DEFAULT_ERR, *, depth_cap: int = DEPTH_CAP) -> ProductEvaluation:
    """``prod_k m0((A^T)^{-k} x)`` for a low-pass filter.

    With ``m0 = sum c_k exp(2 pi i k x)`` the product equals
    ``int phi(t) exp(+2 pi i x t) dt`` for the refinable ``phi`` with
    ``phi(t) = |det A| sum_k c_k phi(A t - k)``; evaluate at ``-x`` for the
    ``exp(-2 pi i x t)`` convention.
    """
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    _check_low_pass(m0)
    return _infinite_product(m0, A, x, target_err, depth_cap)


def mu_hat_batch(ifs: AffineIFS, xs: np.ndarray, target_err: float = DEFAULT_ERR) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized floating-point products at many points; no exact zero detection.

    Returns values and per-point tail bounds. ``xs`` has shape ``(n, d)`` (or
    ``(n,)`` in one dimension).
    """
    ifs.require_uniform()
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    m = filter_from_digits(ifs.digits)
    C = m.lipschitz_constant()
    G, _ = _tail_geometry(ifs.matrix)
    Mf = _exact.to_float_matrix(ifs.matrix.transpose_inverse)
    y = xs.copy()
    values = np.ones(xs.shape[0], dtype=complex)
    for K in range(0, DEPTH_CAP + 1):
        if K > 0:
            y = y @ Mf.T
            values *= m(y if ifs.d > 1 else y[:, 0])
        s = C * G * np.linalg.norm(y, axis=1)
        with np.errstate(over="ignore"):
            bounds = np.abs(values) * np.expm1(s) + 4 * (K + 1) * _EPS
        if np.all(bounds <= target_err):
            return values, bounds
    raise UnattainableErrorBound(f"error {target_err} not reached within {DEPTH_CAP} factors")


def exp_inner_product(ifs: AffineIFS, lam1, lam2, target_err: float = DEFAULT_ERR) -> ProductEvaluation:
    """``<e_{lam1}, e_{lam2}>`` in ``L^2(mu_B)``, which equals ``mu_hat(lam2 - lam1)``."""
    a = _as_vector(lam1, ifs.d)
    b = _as_vector(lam2, ifs.d)
    diff = [
        (_exact.as_fraction(q) - _exact.as_fraction(p)) if _exact.is_exact(p) and _exact.is_exact(q) else float(q) - float(p)
        for p, q in zip(a, b)
    ]
    return mu_hat(ifs, diff, target_err)


def exponentials_orthogonal(ifs: AffineIFS, lam1, lam2) -> bool | None:
    """Exact decision whether ``<e_{lam1}, e_{lam2}> = 0`` for rational frequencies.

    The transform vanishes iff one factor of its product vanishes, so no
    numerical product is needed. Returns None when the factor test is
    undecidable (root order above the cyclotomic cap).
    """
    a = _as_vector(lam1, ifs.d)
    b = _as_vector(lam2, ifs.d)
    if not (_is_rational_point(a) and _is_rational_point(b)):
        raise ValidationError("exact orthogonality needs rational frequencies")
    diff = [_exact.as_fraction(q) - _exact.as_fraction(p) for p, q in zip(a, b)]
    if not any(diff):
        return False
    w = zero_witness(filter_from_digits(ifs.digits), ifs.matrix, diff)
    if w is False:
        return None
    return w is not None


def h_function_partial(ifs: AffineIFS, lambdas: Sequence, x, target_err: float = DEFAULT_ERR) -> float:
    """``sum_{lam} |mu_hat(x + lam)|^2`` over a finite set of distinct frequencies."""
    pts = [tuple(_as_vector(l, ifs.d)) for l in lambdas]
    if len(set(pts)) != len(pts):
        raise ValidationError("frequencies must be pairwise distinct")
    if not pts:
        return 0.0
    x = _as_vector(x, ifs.d)
    xs = np.array([[float(p) + float(q) for p, q in zip(lam, x)] for lam in pts])
    vals, _ = mu_hat_batch(ifs, xs, target_err)
    return float(np.sum(np.abs(vals) ** 2))
