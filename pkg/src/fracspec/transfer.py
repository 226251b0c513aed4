"""Finite matrix realizations of the transfer operator

    (R_m f)(x) = sum_{l} |m(sigma_l x)|^2 f(sigma_l x),   sigma_l x = (A^T)^{-1}(x + l),

with eigenvalue-one analysis and the Lawton and Cohen orthogonality tests.

Two realizations are provided.

* Wavelet setting (branches are a complete residue system mod ``A^T Z^d``):
  ``R_m`` maps trigonometric polynomials to trigonometric polynomials, and
  ``R_m e_k = |det A| sum_{k'} w_{A k' - k} e_{k'}`` where ``w`` are the
  coefficients of ``|m|^2``. A finite window of frequencies is invariant.
* Fractal setting (branches ``L`` of a Hadamard triple, fewer than
  ``|det A|``): exponentials are not mapped into a finite span, so the
  operator is discretized on cylinder functions of the attractor of
  ``{sigma_l}``. A word ``w`` of length ``n`` stands for the cylinder
  ``sigma_{w_1} ... sigma_{w_n}(X_L)``; the weight of the branch ``l`` is
  evaluated at the periodic point of ``w``. Each row then sums to one
  exactly when the QMF identity holds, and the eigenvalue-one eigenspace
  has one dimension per extreme cycle once ``n`` exceeds the cycle periods.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _exact
from .cycles import Cycle, _fixed_point, find_cycles
from .errors import ComputationError, ValidationError
from .filters import TrigPolynomial, certify_qmf
from .fourier_product import _tail_geometry
from .ifs_core import DigitSet, ExpansiveIntMatrix, check_enumeration, dual_ifs, words

WINDOW_CAP = 4096
EIG_TOL = 1e-8

WAVELET = "wavelet"
FRACTAL = "fractal"


def is_complete_residue_system(A: ExpansiveIntMatrix, branches: DigitSet) -> bool:
    """True when ``branches`` has ``|det A|`` elements, pairwise distinct mod ``A^T Z^d``."""
    if branches.N != A.det_abs:
        return False
    M = A.transpose_inverse
    for l, l2 in itertools.combinations(branches, 2):
        diff = [a - b for a, b in zip(l, l2)]
        if all(v.denominator == 1 for v in _exact.matvec(M, diff)):
            return False
    return True


@dataclass
class TransferMatrix:
    """Matrix of ``R_m`` on a finite invariant subspace.

    In the wavelet setting ``frequency_window`` lists the sorted frequencies
    indexing rows and columns. In the fractal setting ``states`` lists the
    cylinder words (lexicographic) and ``frequency_window`` is empty.
    """

    entries: np.ndarray
    source_filter: TrigPolynomial
    scale: ExpansiveIntMatrix
    branch_digits: DigitSet
    setting: str
    frequency_window: tuple = ()
    states: tuple = ()
    periodic_points: tuple = field(default=(), repr=False)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def constant_vector(self) -> np.ndarray:
        """Coordinates of the constant function 1."""
        if self.setting == WAVELET:
            v = np.zeros(self.size, dtype=complex)
            v[self.frequency_window.index((0,) * self.scale.d)] = 1
            return v
        return np.ones(self.size, dtype=complex)

    def constant_defect(self) -> float:
        """``||T 1 - 1||_inf``."""
        one = self.constant_vector()
        return float(np.max(np.abs(self.entries @ one - one)))

    def apply(self, coefficients: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(coefficients, dtype=complex)

    def evaluate(self, coefficients: np.ndarray, x) -> complex:
        """Value at ``x`` of the function with the given coordinates.

        Wavelet setting only: the coordinates are Fourier coefficients.
        """
        if self.setting != WAVELET:
            raise ValidationError("pointwise evaluation of coordinates needs the Fourier realization")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = np.array(self.frequency_window, dtype=float)
        return complex(np.exp(2j * np.pi * (k @ x)) @ np.asarray(coefficients, dtype=complex))

    def eigenvalues(self) -> np.ndarray:
        ev = np.linalg.eigvals(self.entries)
        return ev[np.argsort(-np.abs(ev), kind="stable")]

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues())))

    def to_json(self) -> dict:
        out = {
            "setting": self.setting,
            "A": [list(r) for r in self.scale.entries],
            "branches": [list(l) for l in self.branch_digits],
            "size": self.size,
            "constant_defect": self.constant_defect(),
        }
        if self.setting == WAVELET:
            out["window"] = [list(k) for k in self.frequency_window]
        else:
            out["depth"] = len(self.states[0]) if self.states else 0
        return out


def _frequency_window(w: TrigPolynomial, A: ExpansiveIntMatrix) -> tuple[tuple[int, ...], ...]:
    D = max(math.hypot(*k) for k in w.coefficients) if w.coefficients else 0.0
    if A.d == 1:
        r = math.ceil(round(D, 9) / (A.det_abs - 1))
        return tuple((k,) for k in range(-r, r + 1))
    # Every frequency reached after one step lies within G * D of the origin,
    # so the closure of that box contains all eventual images.
    G, _ = _tail_geometry(A)
    r = math.ceil(G * D)
    start = set(itertools.product(range(-r, r + 1), repeat=A.d))
    if len(start) > WINDOW_CAP:
        raise ComputationError(f"frequency window exceeds {WINDOW_CAP} elements")
    window = set(start)
    frontier = list(start)
    Ainv = A.inverse
    while frontier:
        nxt = []
        for k in frontier:
            for j in w.coefficients:
                img = _exact.matvec(Ainv, [a + b for a, b in zip(j, k)])
                if all(v.denominator == 1 for v in img):
                    img = tuple(int(v) for v in img)
                    if img not in window:
                        window.add(img)
                        nxt.append(img)
        if len(window) > WINDOW_CAP:
            raise ComputationError(f"frequency window exceeds {WINDOW_CAP} elements")
        frontier = nxt
    return tuple(sorted(window))


def _wavelet_matrix(m: TrigPolynomial, A: ExpansiveIntMatrix, branches: DigitSet) -> TransferMatrix:
    w = m.modulus_squared()
    window = _frequency_window(w, A)
    index = {k: i for i, k in enumerate(window)}
    n = len(window)
    T = np.zeros((n, n), dtype=complex)
    coeff = {k: complex(a) for k, a in w.coefficients.items()}
    for i, kp in enumerate(window):
        Akp = A.apply(kp)
        for j, k in enumerate(window):
            T[i, j] = A.det_abs * coeff.get(tuple(a - b for a, b in zip(Akp, k)), 0)
    # invariance: every non-zero image of a window exponential stays inside
    for k in window:
        for jf in w.coefficients:
            img = _exact.matvec(A.inverse, [a + b for a, b in zip(jf, k)])
            if all(v.denominator == 1 for v in img) and tuple(int(v) for v in img) not in index:
                raise ComputationError(f"window is not invariant: {k} leaks to {img}")
    return TransferMatrix(T, m, A, branches, WAVELET, frequency_window=window)


def _fractal_matrix(m: TrigPolynomial, A: ExpansiveIntMatrix, branches: DigitSet, depth: int) -> TransferMatrix:
    if depth < 1:
        raise ValidationError("depth must be at least 1")
    check_enumeration(branches.N, depth)
    dual = dual_ifs(A, branches)
    states = tuple(words(branches.N, depth))
    index = {w: i for i, w in enumerate(states)}
    n = len(states)
    T = np.zeros((n, n))
    pts = []
    for i, w in enumerate(states):
        # periodic point of sigma_{w_1} o ... o sigma_{w_n}, inside the cylinder of w
        x = _fixed_point(dual, tuple(reversed(w)))
        pts.append(x)
        for li in range(branches.N):
            y = dual.apply(li, x)
            T[i, index[(li,) + w[:-1]]] += abs(m.value_exact_phase(y)) ** 2
    return TransferMatrix(T.astype(complex), m, A, branches, FRACTAL, states=states, periodic_points=tuple(pts))


def build_transfer_matrix(
    m: TrigPolynomial,
    A,
    branches=None,
    *,
    setting: str | None = None,
    depth: int = 6,
) -> TransferMatrix:
    """Matrix of ``R_m`` for the filter ``m`` with inverse branches ``branches``.

    ``setting`` is inferred when omitted: complete residue systems give the
    wavelet (Fourier) realization, anything else the fractal (cylinder)
    realization at word length ``depth``. Pass ``setting="fractal"`` to treat
    a complete residue system as the dual digits of a Hadamard triple.
    """
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    if branches is None:
        if A.d != 1:
            raise ValidationError("branches are required in dimension > 1")
        branches = list(range(A.det_abs))
    branches = branches if isinstance(branches, DigitSet) else DigitSet(branches)
    if branches.d != A.d or m.d != A.d:
        raise ValidationError("dimensions of filter, matrix and branches differ")
    complete = is_complete_residue_system(A, branches)
    if setting is None:
        setting = WAVELET if complete else FRACTAL
    if setting == WAVELET:
        if not complete:
            raise ValidationError(
                "branches are not a complete residue system mod A^T Z^d "
                f"(need {A.det_abs} distinct residues, got {branches.N} digits)"
            )
        return _wavelet_matrix(m, A, branches)
    if setting == FRACTAL:
        return _fractal_matrix(m, A, branches, depth)
    raise ValidationError(f"unknown setting {setting!r}")


def apply_pointwise(m: TrigPolynomial, A, branches, f: Callable, x) -> complex:
    """Direct evaluation of ``(R_m f)(x)``."""
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    branches = branches if isinstance(branches, DigitSet) else DigitSet(branches)
    M = _exact.to_float_matrix(A.transpose_inverse)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    total = 0j
    for l in branches:
        y = M @ (x + np.array(l, dtype=float))
        arg = y if A.d > 1 else float(y[0])
        total += abs(m(arg)) ** 2 * f(arg)
    return complex(total)


@dataclass
class EigenReport:
    multiplicity: int
    eigenvectors: np.ndarray  # columns span the eigenvalue-one eigenspace
    eigenvalues: np.ndarray
    singular_values: np.ndarray
    tol: float

    def to_json(self) -> dict:
        return {
            "multiplicity": self.multiplicity,
            "tol": self.tol,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "smallest_singular_values": [float(s) for s in self.singular_values[-max(self.multiplicity + 1, 1):]],
        }


def eigenvalue_one_multiplicity(T: TransferMatrix, tol: float = EIG_TOL) -> EigenReport:
    """Geometric multiplicity of the eigenvalue 1 and a basis of its eigenspace.

    The eigenspace is the numerical null space of ``T - I``: right singular
    vectors whose singular value is at most ``tol``.
    """
    if not 0 < tol < 1e-4:
        raise ValidationError("tol must lie in (0, 1e-4)")
    n = T.size
    try:
        _, s, vh = np.linalg.svd(T.entries - np.eye(n))
        ev = T.eigenvalues()
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ComputationError(f"eigen-solver failed: {exc}") from exc
    null = s <= tol
    basis = vh[null].conj().T
    return EigenReport(int(null.sum()), basis, ev, s, tol)


def _nonconstant_vector(T: TransferMatrix, basis: np.ndarray) -> np.ndarray | None:
    """An eigenvector orthogonal to the constants, normalized to unit max-modulus."""
    if basis.shape[1] == 0:
        return None
    one = T.constant_vector()
    one = one / np.linalg.norm(one)
    proj = basis - np.outer(one, one.conj() @ basis)
    j = int(np.argmax(np.linalg.norm(proj, axis=0)))
    v = proj[:, j]
    if np.linalg.norm(v) < 1e-8:
        return None
    v = v / v[np.argmax(np.abs(v))]
    v[np.abs(v) < 1e-12] = 0
    return v


@dataclass
class LawtonVerdict:
    orthonormal: bool
    report: EigenReport
    matrix: TransferMatrix
    evidence: np.ndarray | None
    qmf_defect: float

    def to_json(self) -> dict:
        out = {
            "test": "lawton",
            "verdict": "orthonormal" if self.orthonormal else "non-orthonormal",
            "qmf_defect": self.qmf_defect,
            "matrix": self.matrix.to_json(),
            **self.report.to_json(),
            "note": "eigenvalue one is tested on the finite invariant subspace of the realization",
        }
        if self.evidence is not None:
            labels = (
                self.matrix.frequency_window if self.matrix.setting == WAVELET else self.matrix.states
            )
            out["eigenvector"] = [
                {"index": list(k), "value": [float(z.real), float(z.imag)]}
                for k, z in zip(labels, self.evidence)
                if z != 0
            ]
        return out


def lawton_test(
    m0: TrigPolynomial,
    A,
    branches=None,
    *,
    setting: str | None = None,
    depth: int = 6,
    tol: float = EIG_TOL,
) -> LawtonVerdict:
    """Orthonormal iff the eigenvalue 1 of ``R_{m0}`` is simple (constants only)."""
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    if abs(m0.value_at_zero() - 1) > 1e-12:
        raise ValidationError(f"filter is not low-pass: m(0) = {m0.value_at_zero()}")
    T = build_transfer_matrix(m0, A, branches, setting=setting, depth=depth)
    holds, defect = certify_qmf(m0, A, T.branch_digits)
    if not holds:
        raise ValidationError(f"QMF identity fails (defect {defect:.3g})")
    rep = eigenvalue_one_multiplicity(T, tol)
    ev = _nonconstant_vector(T, rep.eigenvectors) if rep.multiplicity > 1 else None
    return LawtonVerdict(rep.multiplicity == 1, rep, T, ev, defect)


@dataclass
class CohenVerdict:
    positive: bool
    cycles: list[Cycle]
    setting: str

    @property
    def witnesses(self) -> list[Cycle]:
        return [c for c in self.cycles if not c.is_trivial()]

    def to_json(self) -> dict:
        return {
            "test": "cohen",
            "setting": self.setting,
            "verdict": "orthonormal" if self.positive else "non-orthonormal",
            "cycles": [c.to_json() for c in self.cycles],
        }


def cohen_test(m: TrigPolynomial, A, branches=None, max_period: int | None = None, *, setting: str | None = None) -> CohenVerdict:
    """Positive iff the trivial cycle ``{0}`` is the only extreme cycle."""
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    if branches is None:
        if A.d != 1:
            raise ValidationError("branches are required in dimension > 1")
        branches = list(range(A.det_abs))
    branches = branches if isinstance(branches, DigitSet) else DigitSet(branches)
    if setting is None:
        setting = WAVELET if is_complete_residue_system(A, branches) else FRACTAL
    cyc = find_cycles(dual_ifs(A, branches), m, max_period, on_torus=(setting == WAVELET))
    return CohenVerdict(all(c.is_trivial() for c in cyc), cyc, setting)


__all__ = [
    "TransferMatrix",
    "build_transfer_matrix",
    "apply_pointwise",
    "eigenvalue_one_multiplicity",
    "lawton_test",
    "cohen_test",
    "is_complete_residue_system",
    "EigenReport",
    "LawtonVerdict",
    "CohenVerdict",
    "WAVELET",
    "FRACTAL",
]
