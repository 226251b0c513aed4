"""Affine iterated function systems, their attractors and invariant measures.

An IFS is given by an expansive integer matrix ``A`` and a finite digit set
``B`` in ``Z^d``. The forward maps are ``tau_b(x) = A^{-1}(x + b)``; the dual
system uses ``sigma_l(x) = (A^T)^{-1}(x + l)``. All geometry is computed in
exact rational arithmetic.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import _exact
from .errors import (
    EnumerationOverflowError,
    NonUniformWeightsError,
    NotExpansiveError,
    ValidationError,
)

DEFAULT_ENUM_CAP = 10**6
EXPANSIVE_TOL = 1e-9


def enumeration_cap() -> int:
    """Cap on enumerated words; the ``FS_ENUM_CAP`` environment variable overrides it."""
    raw = os.environ.get("FS_ENUM_CAP")
    if raw is None:
        return DEFAULT_ENUM_CAP
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"FS_ENUM_CAP must be an integer, got {raw!r}") from None


def check_enumeration(n_letters: int, length: int, cap: int | None = None) -> None:
    cap = enumeration_cap() if cap is None else cap
    if n_letters**length > cap:
        raise EnumerationOverflowError(
            f"{n_letters}^{length} words exceed the enumeration cap {cap}"
        )


def _int_entry(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        if isinstance(v, Fraction) and v.denominator == 1:
            return int(v)
        raise ValidationError(f"{what} must be an integer, got {v!r}")
    return int(v)


@dataclass(frozen=True)
class ExpansiveIntMatrix:
    """Integer matrix whose eigenvalues all have modulus > 1.

    Construct from a nested list or from a plain integer (``d = 1``).
    """

    entries: tuple[tuple[int, ...], ...]
    d: int = field(init=False)
    det_abs: int = field(init=False)
    inverse: _exact.Matrix = field(init=False, repr=False)
    transpose_inverse: _exact.Matrix = field(init=False, repr=False)

    def __init__(self, entries):
        if isinstance(entries, (int, np.integer)) and not isinstance(entries, bool):
            entries = [[int(entries)]]
        if isinstance(entries, ExpansiveIntMatrix):
            entries = entries.entries
        rows = tuple(tuple(_int_entry(x, "matrix entry") for x in row) for row in entries)
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise ValidationError("matrix must be square and non-empty")
        eig = np.linalg.eigvals(np.array(rows, dtype=float))
        if np.min(np.abs(eig)) <= 1 + EXPANSIVE_TOL:
            raise NotExpansiveError(
                f"matrix {rows} is not expansive: eigenvalue moduli {sorted(np.abs(eig).round(12))}"
            )
        inv = _exact.inverse(rows)
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "det_abs", abs(_exact.determinant(rows)))
        object.__setattr__(self, "inverse", inv)
        object.__setattr__(self, "transpose_inverse", _exact.transpose(inv))

    @property
    def transpose(self) -> tuple[tuple[int, ...], ...]:
        return tuple(zip(*self.entries))

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * x for a, x in zip(row, v)) for row in self.entries)

    def apply_transpose(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * x for a, x in zip(row, v)) for row in self.transpose)

    def is_scalar(self) -> bool:
        return self.d == 1

    def __str__(self):
        if self.d == 1:
            return str(self.entries[0][0])
        return ";".join(",".join(map(str, r)) for r in self.entries)


@dataclass(frozen=True)
class DigitSet:
    """Finite set of distinct integer vectors, kept in the order given."""

    points: tuple[tuple[int, ...], ...]

    def __init__(self, points):
        pts = []
        for p in points:
            if isinstance(p, (int, np.integer)) and not isinstance(p, bool):
                p = (int(p),)
            pts.append(tuple(_int_entry(x, "digit coordinate") for x in p))
        if not pts:
            raise ValidationError("digit set must be non-empty")
        dims = {len(p) for p in pts}
        if len(dims) != 1:
            raise ValidationError(f"digits have mixed dimensions {sorted(dims)}")
        if len(set(pts)) != len(pts):
            raise ValidationError(f"digits must be pairwise distinct: {pts}")
        object.__setattr__(self, "points", tuple(pts))

    @property
    def N(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return len(self.points[0])

    def __len__(self):
        return len(self.points)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.points)

    def __contains__(self, item):
        if isinstance(item, (int, np.integer)):
            item = (int(item),)
        return tuple(item) in self.points

    def contains_zero(self) -> bool:
        return (0,) * self.d in self.points

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float)

    def __str__(self):
        if self.d == 1:
            return "{" + ",".join(str(p[0]) for p in self.points) + "}"
        return "{" + ",".join(str(p) for p in self.points) + "}"


class Orientation(enum.Enum):
    FORWARD = "forward"
    DUAL = "dual"


@dataclass(frozen=True)
class RationalVector:
    """Exact point of Q^d stored as integer numerators over one reduced denominator."""

    numerators: tuple[int, ...]
    common_denominator: int

    def __post_init__(self):
        if self.common_denominator <= 0:
            raise ValidationError("denominator must be positive")
        g = self.common_denominator
        for n in self.numerators:
            g = math.gcd(g, n)
        if g != 1:
            object.__setattr__(self, "numerators", tuple(n // g for n in self.numerators))
            object.__setattr__(self, "common_denominator", self.common_denominator // g)

    @classmethod
    def from_fractions(cls, values: Sequence) -> "RationalVector":
        fr = [_exact.as_fraction(v) for v in values]
        den = 1
        for f in fr:
            den = den * f.denominator // math.gcd(den, f.denominator)
        return cls(tuple(int(f * den) for f in fr), den)

    def to_fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(n, self.common_denominator) for n in self.numerators)

    def to_float(self) -> np.ndarray:
        return np.array(self.numerators, dtype=float) / self.common_denominator

    def is_integer(self) -> bool:
        return self.common_denominator == 1

    def __neg__(self):
        return RationalVector(tuple(-n for n in self.numerators), self.common_denominator)

    def __str__(self):
        parts = [str(f) for f in self.to_fractions()]
        return parts[0] if len(parts) == 1 else "(" + ", ".join(parts) + ")"


@dataclass(frozen=True)
class AffineIFS:
    """Affine IFS with maps ``x -> M(x + digit)``.

    ``M`` is ``A^{-1}`` for the forward orientation and ``(A^T)^{-1}`` for the
    dual one. ``weights`` may carry general probabilities; every built-in
    analysis calls :meth:`require_uniform` and rejects them.
    """

    matrix: ExpansiveIntMatrix
    digits: DigitSet
    orientation: Orientation = Orientation.FORWARD
    weights: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.matrix, ExpansiveIntMatrix):
            object.__setattr__(self, "matrix", ExpansiveIntMatrix(self.matrix))
        if not isinstance(self.digits, DigitSet):
            object.__setattr__(self, "digits", DigitSet(self.digits))
        if self.digits.d != self.matrix.d:
            raise ValidationError(
                f"digit dimension {self.digits.d} does not match matrix dimension {self.matrix.d}"
            )
        if self.digits.N >= 2 and self.matrix.det_abs < 2:
            raise ValidationError("|det A| must be at least 2 for a multi-digit IFS")
        if self.weights is not None:
            w = tuple(_exact.as_fraction(x) for x in self.weights)
            if len(w) != self.digits.N or any(x < 0 for x in w) or sum(w) != 1:
                raise ValidationError("weights must be a probability vector over the digits")
            object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return self.matrix.d

    @property
    def N(self) -> int:
        return self.digits.N

    @property
    def contraction(self) -> _exact.Matrix:
        if self.orientation is Orientation.FORWARD:
            return self.matrix.inverse
        return self.matrix.transpose_inverse

    def require_uniform(self) -> None:
        if self.weights is not None and any(w != Fraction(1, self.N) for w in self.weights):
            raise NonUniformWeightsError(
                "non-uniform probabilities are not supported: the Hadamard-triple "
                "machinery needs equal weights 1/N"
            )

    def apply(self, index: int, x: Sequence) -> tuple[Fraction, ...]:
        """Exact image of ``x`` under the map of digit ``index``."""
        b = self.digits.points[index]
        shifted = [_exact.as_fraction(xi) + bi for xi, bi in zip(x, b)]
        return _exact.matvec(self.contraction, shifted)

    def compose_word(self, word: Sequence[int]) -> tuple[_exact.Matrix, tuple[Fraction, ...]]:
        """Linear part and offset of ``f_{w1} o ... o f_{wn}`` (rightmost applied first)."""
        M = self.contraction
        offset = (Fraction(0),) * self.d
        # f_w1(f_w2(...)) = M^n x + sum_k M^k b_{w_k}
        power = _exact.identity(self.d)
        for idx in word:
            power = _exact.matmul(power, M)
            contrib = _exact.matvec(power, self.digits.points[idx])
            offset = tuple(o + c for o, c in zip(offset, contrib))
        return power, offset

    def contraction_factor(self, max_power: int = 64) -> tuple[int, float]:
        """Smallest ``J`` with ``||M^J||_2 < 1`` and that norm.

        This is the empirical contraction certificate used instead of an
        explicitly constructed adapted norm.
        """
        M = _exact.to_float_matrix(self.contraction)
        P = np.eye(self.d)
        for j in range(1, max_power + 1):
            P = P @ M
            nrm = np.linalg.norm(P, 2)
            if nrm < 1:
                return j, float(nrm)
        raise NotExpansiveError("no contracting power of the IFS linear part found")

    def with_orientation(self, orientation: Orientation) -> "AffineIFS":
        return AffineIFS(self.matrix, self.digits, orientation, self.weights)


Box = tuple[tuple[Fraction, Fraction], ...]


def _as_box(seed_box) -> Box:
    box = []
    for lo, hi in seed_box:
        lo, hi = _exact.as_fraction(lo), _exact.as_fraction(hi)
        if hi < lo:
            raise ValidationError(f"empty seed box side [{lo}, {hi}]")
        box.append((lo, hi))
    if not box:
        raise ValidationError("seed box must have at least one side")
    return tuple(box)


def _image_box(lin: _exact.Matrix, offset, box: Box) -> Box:
    out = []
    for row, o in zip(lin, offset):
        lo = hi = o
        for m, (a, b) in zip(row, box):
            lo += min(m * a, m * b)
            hi += max(m * a, m * b)
        out.append((lo, hi))
    return tuple(out)


def words(n_letters: int, length: int) -> Iterator[tuple[int, ...]]:
    """All digit-index words of a given length in lexicographic order."""
    return itertools.product(range(n_letters), repeat=length)


def attractor_boxes(ifs: AffineIFS, depth: int, seed_box, *, cap: int | None = None) -> list[Box]:
    """Bounding boxes of the images of ``seed_box`` under all ``N^depth`` compositions.

    For diagonal matrices the boxes are the exact images; otherwise each
    composed image is replaced by its axis-aligned bounding box. Boxes are
    listed in lexicographic word order.
    """
    if depth < 0:
        raise ValidationError("depth must be non-negative")
    box = _as_box(seed_box)
    if len(box) != ifs.d:
        raise ValidationError("seed box dimension does not match the IFS")
    check_enumeration(ifs.N, depth, cap)
    return [_image_box(*ifs.compose_word(w), box) for w in words(ifs.N, depth)]


def measure_quadrature_points(
    ifs: AffineIFS, depth: int, *, cap: int | None = None
) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """Points ``sum_{k<=depth} A^{-k} b_k`` with equal weights ``N^{-depth}``."""
    if depth < 1:
        raise ValidationError("depth must be at least 1")
    ifs.require_uniform()
    check_enumeration(ifs.N, depth, cap)
    w = Fraction(1, ifs.N**depth)
    return [(ifs.compose_word(word)[1], w) for word in words(ifs.N, depth)]


def quadrature_arrays(ifs: AffineIFS, depth: int, *, cap: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Floating point version of :func:`measure_quadrature_points`.

    Returns an ``(N^depth, d)`` array of points (same word order) and the weights.
    """
    ifs.require_uniform()
    check_enumeration(ifs.N, depth, cap)
    M = _exact.to_float_matrix(ifs.contraction)
    digits = ifs.digits.as_array()
    pts = np.zeros((1, ifs.d))
    power = np.eye(ifs.d)
    for _ in range(depth):
        power = power @ M
        shifts = digits @ power.T
        pts = (pts[:, None, :] + shifts[None, :, :]).reshape(-1, ifs.d)
    n = pts.shape[0]
    return pts, np.full(n, 1.0 / n)


def dual_ifs(matrix, L) -> AffineIFS:
    """The system ``sigma_l(x) = (A^T)^{-1}(x + l)`` for ``l`` in ``L``."""
    return AffineIFS(ExpansiveIntMatrix(matrix), DigitSet(L), Orientation.DUAL)


# --- JSON ingestion ----------------------------------------------------------

_NON_INT_TOKEN = re.compile(r'(-?\d+\.\d*(?:[eE][-+]?\d+)?|-?\d+[eE][-+]?\d+|"[^"]*"|\btrue\b|\bfalse\b|\bnull\b)')


def _line_of_bad_token(text: str, key: str) -> int | None:
    """Line number (1-based) of the first non-integer literal inside ``key``'s value."""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not m:
        return None
    start = m.end()
    depth = 0
    i = start
    while i < len(text):
        ch = text[i]
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth == 0:
                break
        elif depth == 0 and ch in ",}":
            break
        i += 1
    tok = _NON_INT_TOKEN.search(text, start, i + 1)
    if tok is None:
        return None
    return text.count("\n", 0, tok.start()) + 1


def _int_matrix(value, key: str, text: str):
    def bad(detail):
        line = _line_of_bad_token(text, key)
        where = f" (line {line})" if line else ""
        return ValidationError(f"{key}{where}: {detail}")

    if isinstance(value, bool) or (not isinstance(value, (int, list))):
        raise bad(f"expected integers, got {value!r}")
    if isinstance(value, int):
        return value
    out = []
    for row in value:
        if isinstance(row, list):
            for x in row:
                if isinstance(x, bool) or not isinstance(x, int):
                    raise bad(f"non-integer entry {x!r}")
            out.append(list(row))
        elif isinstance(row, bool) or not isinstance(row, int):
            raise bad(f"non-integer entry {row!r}")
        else:
            out.append(row)
    return out


def parse_ifs_json(text: str) -> tuple[ExpansiveIntMatrix, DigitSet, DigitSet | None]:
    """Parse ``{"A": [[...]], "B": [[...]], "L": [[...]]}``; ``L`` is optional.

    One-dimensional inputs may be written with plain integers
    (``{"A": 4, "B": [0, 2]}``).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError("IFS document must be a JSON object")
    for key in ("A", "B"):
        if key not in doc:
            raise ValidationError(f"{key} required")
    A = ExpansiveIntMatrix(_int_matrix(doc["A"], "A", text))
    B = DigitSet(_int_matrix(doc["B"], "B", text))
    L = DigitSet(_int_matrix(doc["L"], "L", text)) if doc.get("L") is not None else None
    return A, B, L


def load_ifs_json(path) -> tuple[ExpansiveIntMatrix, DigitSet, DigitSet | None]:
    with open(path, encoding="utf-8") as fh:
        return parse_ifs_json(fh.read())
