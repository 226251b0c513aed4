"""Brolin-measure sampling for polynomial maps and the z^4 Hardy-space split."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ComputationError, ValidationError

ROOT_RESIDUAL = 1e-10
DEFAULT_BURN_IN = 100


class ComplexPolynomial:
    """``R(z) = sum_k coefficients[k] z^k`` (ascending order), degree at least 2."""

    def __init__(self, coefficients: Sequence[complex]):
        c = [complex(v) for v in coefficients]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if len(c) < 3:
            raise ValidationError("polynomial degree must be at least 2")
        self.coefficients = tuple(c)
        lead = abs(c[-1])
        S = sum(abs(v) for v in c[:-1])
        # |R(z)| >= |a_n||z|^n - S|z|^{n-1} >= 2|z| for |z| >= r, with r >= 1
        self.escape_radius = max(1.0, (2 + S) / lead)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coefficients)

    def derivative(self, z):
        return np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(self.coefficients))

    def _raw_roots(self, w: complex) -> np.ndarray:
        c = self.coefficients
        if self.degree == 2:
            # stable quadratic formula: avoid cancellation between -b and the root
            a, b, c0 = c[2], c[1], c[0] - w
            sq = cmath.sqrt(b * b - 4 * a * c0)
            q = -(b + sq) / 2 if (b.conjugate() * sq).real >= 0 else -(b - sq) / 2
            if q == 0:
                return np.array([0j, 0j])
            return np.array([q / a, c0 / q])
        shifted = np.array(c)
        shifted[0] -= w
        return np.polynomial.polynomial.polyroots(shifted)

    def preimages(self, w: complex) -> np.ndarray:
        """All roots of ``R(z) = w``, Newton-polished to residual ``ROOT_RESIDUAL``."""
        c = np.array(self.coefficients)
        c[0] -= w
        roots = self._raw_roots(w)
        tol = ROOT_RESIDUAL * max(1.0, abs(w))
        for _ in range(8):
            res = np.polynomial.polynomial.polyval(roots, c)
            if np.all(np.abs(res) <= tol):
                return roots
            dp = self.derivative(roots)
            safe = np.abs(dp) > 1e-300
            roots = np.where(safe, roots - res / np.where(safe, dp, 1), roots)
        res = np.abs(np.polynomial.polynomial.polyval(roots, c))
        if np.any(res > tol):
            raise ComputationError(f"root polishing failed for R(z) = {w} (residual {res.max():.3g})")
        return roots

    @classmethod
    def parse(cls, text: str, c: complex = 0) -> "ComplexPolynomial":
        """Parse ``"z^2 + c"``-style input: terms ``a*z^k``, ``z^k``, ``z``, constants and ``c``."""
        s = text.replace(" ", "").replace("-", "+-")
        coeffs: dict[int, complex] = {}
        for term in filter(None, s.split("+")):
            sign = -1 if term.startswith("-") else 1
            term = term.lstrip("-")
            if "z" in term:
                head, _, tail = term.partition("z")
                head = head.rstrip("*")
                k = int(tail[1:]) if tail.startswith("^") else 1
                if tail and not tail.startswith("^"):
                    raise ValidationError(f"cannot parse term {term!r}")
                a = complex(head.replace("i", "j")) if head else 1
            else:
                k = 0
                a = c if term == "c" else complex(term.replace("i", "j"))
            coeffs[k] = coeffs.get(k, 0) + sign * a
        n = max(coeffs)
        return cls([coeffs.get(k, 0) for k in range(n + 1)])


def brolin_sample(R: ComplexPolynomial, n_samples: int, burn_in: int = DEFAULT_BURN_IN, seed: int = 0) -> np.ndarray:
    """Random backward orbit of ``R`` with uniformly chosen inverse branches."""
    if n_samples < 0 or burn_in < 0:
        raise ValidationError("sample counts must be non-negative")
    rng = np.random.default_rng(seed)
    out = np.empty(n_samples, dtype=complex)
    z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    choices = rng.integers(0, R.degree, size=burn_in + n_samples)
    for step in range(burn_in + n_samples):
        try:
            z = R.preimages(z)[choices[step]]
        except ComputationError as exc:
            raise ComputationError(f"step {step}: {exc}") from exc
        if step >= burn_in:
            out[step - burn_in] = z
    return out


@dataclass(frozen=True)
class Moments:
    values: np.ndarray
    stderr: np.ndarray


def moments(samples: Sequence[complex], n_max: int) -> Moments:
    """``M_n = mean(z^n)`` for ``n = 0..n_max`` with standard errors."""
    z = np.asarray(samples, dtype=complex)
    if z.size == 0:
        raise ValidationError("moments need at least one sample")
    vals = np.empty(n_max + 1, dtype=complex)
    err = np.empty(n_max + 1)
    p = np.ones_like(z)
    for n in range(n_max + 1):
        vals[n] = p.mean()
        err[n] = float(np.std(p) / math.sqrt(z.size)) if z.size > 1 else 0.0
        p = p * z
    return Moments(vals, err)


def pullback_balance(R: ComplexPolynomial, samples: np.ndarray, f_coeffs: Sequence[complex]) -> tuple[float, float]:
    """Compare ``int f dmu`` with ``(1/deg) sum_branches int f o branch dmu``.

    Returns ``(difference, standard error)`` for the test polynomial with
    ascending coefficients ``f_coeffs``.
    """
    f = lambda z: np.polynomial.polynomial.polyval(z, f_coeffs)
    direct = f(samples)
    pulled = np.array([f(R.preimages(w)).mean() for w in samples])
    diff = direct - pulled
    return float(abs(diff.mean())), float(np.std(diff) / math.sqrt(len(samples)))


def in_lacunary_set(n: int) -> bool:
    """``n`` is a finite sum of distinct powers of 4 (base-4 digits in {0, 1})."""
    if n < 0:
        return False
    while n:
        if n % 4 > 1:
            return False
        n //= 4
    return True


@dataclass
class LacunaryExpansion:
    """``F(z) = sum c_lambda z^lambda`` with every ``lambda`` in the base-4 {0,1}-digit set."""

    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for lam, c in self.coefficients.items():
            lam = int(lam)
            if not in_lacunary_set(lam):
                raise ValidationError(f"frequency {lam} has a base-4 digit outside {{0, 1}}")
            clean[lam] = complex(c)
        self.coefficients = dict(sorted(clean.items()))

    @property
    def norm_sq(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.coefficients.values()))

    def __add__(self, other: "LacunaryExpansion") -> "LacunaryExpansion":
        out = dict(self.coefficients)
        for k, v in other.coefficients.items():
            out[k] = out.get(k, 0) + v
        return LacunaryExpansion(out)

    def scale(self, a: complex) -> "LacunaryExpansion":
        return LacunaryExpansion({k: a * v for k, v in self.coefficients.items()})

    def to_json(self) -> dict:
        return {str(k): [v.real, v.imag] for k, v in self.coefficients.items()}

    @classmethod
    def from_json(cls, data: Mapping) -> "LacunaryExpansion":
        return cls({int(k): complex(*v) if isinstance(v, (list, tuple)) else complex(v) for k, v in data.items()})


def k2_split(f: LacunaryExpansion) -> tuple[LacunaryExpansion, LacunaryExpansion]:
    """``F(z) = F0(z^4) + z F1(z^4)``: route each frequency by its residue mod 4."""
    F0, F1 = {}, {}
    for lam, c in f.coefficients.items():
        if lam % 4 == 0:
            F0[lam // 4] = c
        else:
            F1[(lam - 1) // 4] = c
    return LacunaryExpansion(F0), LacunaryExpansion(F1)


def k2_merge(F0: LacunaryExpansion, F1: LacunaryExpansion) -> LacunaryExpansion:
    out = {4 * k: v for k, v in F0.coefficients.items()}
    out.update({4 * k + 1: v for k, v in F1.coefficients.items()})
    return LacunaryExpansion(out)


def random_lacunary(rng: np.random.Generator, n_terms: int, max_digits: int = 10) -> LacunaryExpansion:
    """Random expansion with ``n_terms`` distinct frequencies of at most ``max_digits`` base-4 digits."""
    if n_terms > 2**max_digits:
        raise ValidationError("not enough frequencies for the requested term count")
    lams = rng.choice(2**max_digits, size=n_terms, replace=False)
    coeffs = rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)
    return LacunaryExpansion({int(sum(4**i for i in range(max_digits) if b >> i & 1)): c for b, c in zip(lams, coeffs)})


def evaluate_Ff(f: LacunaryExpansion, z: complex) -> complex:
    """``sum c_lambda z^lambda`` inside the disk, checked against the Schwarz bound."""
    z = complex(z)
    if abs(z) >= 1 - 1e-6:
        raise ValidationError("|z| must be below 1 - 1e-6")
    val = sum(c * z**lam for lam, c in f.coefficients.items())
    bound = math.sqrt(f.norm_sq) / math.sqrt(1 - abs(z) ** 2)
    if abs(val) > bound * (1 + 1e-12) + 1e-300:
        raise ComputationError(f"|F(z)| = {abs(val)} exceeds the bound {bound}")
    return complex(val)


__all__ = [
    "ComplexPolynomial",
    "brolin_sample",
    "moments",
    "Moments",
    "pullback_balance",
    "in_lacunary_set",
    "LacunaryExpansion",
    "k2_split",
    "k2_merge",
    "random_lacunary",
    "evaluate_Ff",
]
