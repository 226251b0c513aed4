"""Cascade construction of scaling functions and wavelet-side orthogonality checks.

Functions are stored as cell averages on the grid ``origin + i / 2^J``. The
refinement operator ``f -> a sum_k c_k f(a x - k)`` maps cell averages to
cell averages exactly, and inner products of such step functions are exact
sums, so the only approximation is the sampling of the limit function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cycles import Cycle
from .errors import DivergenceError, ValidationError
from .filters import TrigPolynomial, certify_qmf

DEFAULT_J = 12


@dataclass
class SampledFunction:
    """Cell averages of a compactly supported function on ``[origin, origin + n/2^J)``."""

    origin: int
    J: int
    samples: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.J < 0:
            raise ValidationError("resolution J must be non-negative")

    @property
    def step(self) -> float:
        return 2.0 ** -self.J

    @property
    def cells_per_unit(self) -> int:
        return 1 << self.J

    @property
    def support_hint(self) -> tuple[float, float]:
        return (float(self.origin), self.origin + len(self.samples) * self.step)

    def grid(self) -> np.ndarray:
        return self.origin + np.arange(len(self.samples)) * self.step

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.samples) ** 2)) * self.step)

    def _aligned(self, other: "SampledFunction") -> tuple[int, np.ndarray, np.ndarray]:
        if other.J != self.J:
            raise ValidationError("functions live on different resolutions")
        H = self.cells_per_unit
        lo = min(self.origin, other.origin)
        hi = max(self.origin * H + len(self.samples), other.origin * H + len(other.samples))
        a = np.zeros(hi - lo * H, dtype=complex)
        b = np.zeros_like(a)
        a[(self.origin - lo) * H:(self.origin - lo) * H + len(self.samples)] = self.samples
        b[(other.origin - lo) * H:(other.origin - lo) * H + len(other.samples)] = other.samples
        return lo, a, b

    def inner(self, other: "SampledFunction") -> complex:
        """``<self, other>``, linear in the first argument."""
        _, a, b = self._aligned(other)
        return complex(np.vdot(b, a) * self.step)

    def distance(self, other: "SampledFunction") -> float:
        _, a, b = self._aligned(other)
        return math.sqrt(float(np.sum(np.abs(a - b) ** 2)) * self.step)

    def scaled(self, factor: complex) -> "SampledFunction":
        return SampledFunction(self.origin, self.J, self.samples * factor)

    def to_csv_rows(self) -> list[tuple[float, float, float]]:
        return [(float(x), float(v.real), float(v.imag)) for x, v in zip(self.grid(), self.samples)]

    @classmethod
    def indicator(cls, a: Fraction, b: Fraction, J: int = DEFAULT_J, height: complex = 1.0) -> "SampledFunction":
        """``height * chi_[a, b)`` for endpoints on the grid."""
        H = 1 << J
        a, b = Fraction(a), Fraction(b)
        if (a * H).denominator != 1 or (b * H).denominator != 1:
            raise ValidationError("indicator endpoints must lie on the grid")
        origin = math.floor(a)
        end = math.ceil(b)
        s = np.zeros((end - origin) * H, dtype=complex)
        s[int((a - origin) * H):int((b - origin) * H)] = height
        return cls(origin, J, s)

    @classmethod
    def zero(cls, J: int = DEFAULT_J) -> "SampledFunction":
        return cls(0, J, np.zeros(1 << J))


def _refine(f: SampledFunction, coeffs: dict, a: int, origin: int, n_units: int) -> SampledFunction:
    """Cell averages of ``x -> sum_k coeffs[k] f(a x - k)`` on ``[origin, origin + n_units)``."""
    H = f.cells_per_unit
    n = n_units * H
    out = np.zeros(n, dtype=complex)
    i = np.arange(n)
    for k, c in coeffs.items():
        # the new cell i covers a consecutive cells of f starting here
        start = a * i + (a * origin - k - f.origin) * H
        acc = np.zeros(n, dtype=complex)
        for off in range(a):
            idx = start + off
            ok = (idx >= 0) & (idx < len(f.samples))
            acc[ok] += f.samples[idx[ok]]
        out += c * acc / a
    return SampledFunction(origin, f.J, out)


def _coefficients(m0: TrigPolynomial) -> dict[int, complex]:
    if m0.d != 1:
        raise ValidationError("wavelet constructions are one-dimensional")
    return {k[0]: complex(c) for k, c in m0.coefficients.items()}


def _scaling_support(coeffs: dict, a: int) -> tuple[int, int]:
    lo = math.floor(min(coeffs) / (a - 1))
    hi = math.ceil(max(coeffs) / (a - 1))
    return min(lo, 0), max(hi, 1)


def cascade(m0: TrigPolynomial, A: int = 2, iterations: int = 3 * DEFAULT_J, J: int = DEFAULT_J) -> SampledFunction:
    """Iterate ``phi <- a sum_k c_k phi(a x - k)`` from ``chi_[0,1)``.

    Here ``m0(x) = sum_k c_k exp(2 pi i k x)`` and ``a = |A|``. The result
    carries ``info["distances"]``, the L2 distances between successive
    iterates, and ``info["residual"]``, the distance of the final iterate
    from its own refinement.
    """
    a = abs(int(A))
    if a < 2:
        raise ValidationError("dilation must have modulus at least 2")
    if iterations < 0:
        raise ValidationError("iterations must be non-negative")
    coeffs = _coefficients(m0)
    if abs(m0.value_at_zero() - 1) > 1e-12:
        raise ValidationError(f"filter is not low-pass: m(0) = {m0.value_at_zero()}")
    holds, defect = certify_qmf(m0, a, list(range(a)))
    if not holds:
        raise ValidationError(f"QMF identity fails (defect {defect:.3g})")
    lo, hi = _scaling_support(coeffs, a)
    scaled = {k: a * c for k, c in coeffs.items()}
    phi = SampledFunction.indicator(0, 1, J)
    phi = SampledFunction(lo, J, np.concatenate([np.zeros(-lo << J), phi.samples, np.zeros((hi - 1) << J)]))
    distances = []
    norms = [phi.norm()]
    for _ in range(iterations):
        nxt = _refine(phi, scaled, a, lo, hi - lo)
        distances.append(nxt.distance(phi))
        phi = nxt
        norms.append(phi.norm())
        if len(norms) > 5 and norms[-1] > 10 * norms[-6]:
            raise DivergenceError(f"cascade norm grew from {norms[-6]:.3g} to {norms[-1]:.3g} in 5 iterations")
    residual = _refine(phi, scaled, a, lo, hi - lo).distance(phi)
    phi.info = {"iterations": iterations, "distances": distances, "residual": residual, "filter_qmf_defect": defect}
    return phi


def translate_gram(phi: SampledFunction, shifts: Sequence[int]) -> np.ndarray:
    """``G[k, k'] = <phi(. - k), phi(. - k')>`` for ``k, k'`` in ``shifts``."""
    shifts = list(shifts)
    if sorted(shifts) != sorted(-s for s in shifts):
        raise ValidationError("shifts must be symmetric around 0")
    lags = {k - kp for k in shifts for kp in shifts}
    a = {m: autocorrelation(phi, m) for m in lags}
    return np.array([[a[k - kp] for kp in shifts] for k in shifts])


def autocorrelation(phi: SampledFunction, lag: int) -> complex:
    """``<phi(. - lag), phi> = int phi(y) conj(phi(y + lag)) dy``."""
    H = phi.cells_per_unit
    s = phi.samples
    sh = abs(lag) * H
    if sh >= len(s):
        return 0j
    if lag >= 0:
        return complex(np.vdot(s[sh:], s[:len(s) - sh]) * phi.step)
    return complex(np.vdot(s[:len(s) - sh], s[sh:]) * phi.step)


def periodization_polynomial(phi: SampledFunction) -> TrigPolynomial:
    """``h_phi(x) = sum_k |phi_hat(x + k)|^2`` as the trigonometric polynomial ``sum_m a(m) e_m``.

    ``a(m) = <phi, phi(. - m)>``; the lags are limited by the support length.
    """
    n_units = -(-len(phi.samples) // phi.cells_per_unit)
    coeffs = {}
    for m in range(-n_units, n_units + 1):
        v = autocorrelation(phi, -m)
        if abs(v) > 1e-15:
            coeffs[(m,)] = v
    return TrigPolynomial(coeffs or {(0,): 0})


def highpass_coefficients(m0: TrigPolynomial) -> dict[int, complex]:
    """``d_j = (-1)^j conj(c_{K - j})`` with ``K`` the smallest odd number ``>= kmin + kmax``."""
    c = _coefficients(m0)
    K = min(c) + max(c)
    if K % 2 == 0:
        K += 1
    return {K - k: (-1) ** ((K - k) % 2) * complex(v).conjugate() for k, v in c.items()}


def wavelet_from_mra(m0: TrigPolynomial, phi: SampledFunction, A: int = 2) -> SampledFunction:
    """``psi(x) = 2 sum_j d_j phi(2x - j)`` for the unitary high-pass partner of ``m0``."""
    if abs(int(A)) != 2:
        raise ValidationError("only dilation 2 is supported for wavelet construction")
    d = highpass_coefficients(m0)
    lo = math.floor((phi.origin + min(d)) / 2)
    hi = math.ceil((phi.origin + len(phi.samples) * phi.step + max(d)) / 2)
    return _refine(phi, {j: 2 * v for j, v in d.items()}, 2, lo, hi - lo)


def _cell_index(points: np.ndarray, f: SampledFunction) -> np.ndarray:
    """Index of the cell of ``f`` containing each point (``-1`` outside), exact on dyadic input."""
    idx = np.floor((points - f.origin) * f.cells_per_unit).astype(np.int64)
    idx[(idx < 0) | (idx >= len(f.samples))] = -1
    return idx


def _gather(f: SampledFunction, idx: np.ndarray) -> np.ndarray:
    out = np.zeros(idx.shape, dtype=complex)
    ok = idx >= 0
    out[ok] = f.samples[idx[ok]]
    return out


def frame_coefficients(f: SampledFunction, psi: SampledFunction, j: int, ks: np.ndarray) -> np.ndarray:
    """``<f, 2^{j/2} psi(2^j . - k)>`` for each ``k`` in ``ks``; exact for step functions on a common grid."""
    if f.J != psi.J:
        raise ValidationError("f and psi must share the resolution")
    ks = np.asarray(ks)
    if j >= 0:
        # substitute y = 2^j x - k: f is constant on every psi cell
        y = psi.grid()
        x = (y[None, :] + ks[:, None]) * 2.0 ** -j
        vals = _gather(f, _cell_index(x, f))
        return 2.0 ** (-j / 2) * (vals @ psi.samples.conj()) * psi.step
    x = f.grid()
    y = 2.0 ** j * x[None, :] - ks[:, None]
    vals = _gather(psi, _cell_index(y, psi))
    return 2.0 ** (j / 2) * (vals.conj() @ f.samples) * f.step


def parseval_defect(psi: SampledFunction, test_functions: Sequence[SampledFunction], j_range: Sequence[int], k_range: Sequence[int]) -> float:
    """``max_f | ||f||^2 - sum_{j,k} |<f, psi_{j,k}>|^2 |`` over the truncated index set."""
    ks = np.array(list(k_range))
    worst = 0.0
    for f in test_functions:
        total = 0.0
        for j in j_range:
            total += float(np.sum(np.abs(frame_coefficients(f, psi, j, ks)) ** 2))
        worst = max(worst, abs(f.norm() ** 2 - total))
    return worst


@dataclass
class SuperFunction:
    """Vector of functions indexed by the points of one or more torus cycles.

    Translation acts on component ``i`` as ``f_i -> exp(2 pi i x_i) f_i(. - 1)``.
    """

    components: list[SampledFunction]
    points: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.components) != len(self.points):
            raise ValidationError("component count must equal the number of cycle points")

    @property
    def phases(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.array([float(p) for p in self.points]))

    def gram(self, shifts: Sequence[int]) -> np.ndarray:
        """``<T^k F, T^k' F> = sum_i w_i^{k-k'} <f_i(. - k), f_i(. - k')>``."""
        shifts = list(shifts)
        w = self.phases
        G = np.zeros((len(shifts), len(shifts)), dtype=complex)
        for f, wi in zip(self.components, w):
            G += translate_gram(f, shifts) * np.power(wi, np.subtract.outer(shifts, shifts))
        return G

    def first_component(self) -> SampledFunction:
        return self.components[0]


def _cycle_points(cycles) -> tuple[Fraction, ...]:
    if isinstance(cycles, Cycle):
        cycles = [cycles]
    pts = []
    for c in cycles:
        if len(c.points[0].numerators) != 1:
            raise ValidationError("super constructions are one-dimensional")
        pts.extend(p.to_fractions()[0] % 1 for p in c.points)
    if len(set(pts)) != len(pts):
        raise ValidationError("cycles overlap")
    return tuple(pts)


def super_function(cycles, phi: SampledFunction, m0: TrigPolynomial | None = None) -> SuperFunction:
    """Equal-component super scaling function over the points of ``cycles``.

    With ``m0`` given, each cycle must be extreme for it. Passing the
    trivial cycle first makes the first component the classical ``phi``.
    """
    if isinstance(cycles, Cycle):
        cycles = [cycles]
    if m0 is not None:
        for c in cycles:
            if not all(abs(abs(m0(float(p.to_fractions()[0]))) - 1) < 1e-12 for p in c.points):
                raise ValidationError(f"cycle {c} is not extreme for the filter")
    pts = _cycle_points(cycles)
    return SuperFunction([phi] * len(pts), pts)


def super_gram(cycles, phi: SampledFunction, shifts: Sequence[int], m0: TrigPolynomial | None = None) -> np.ndarray:
    """Gram matrix of the translates of the super scaling function.

    Entry ``(k, k')`` is ``a(k - k') sum_i w_i^{k - k'}`` with
    ``a(m) = <phi, phi(. - m)>`` and ``w_i = exp(2 pi i x_i)`` over all
    cycle points.
    """
    return super_function(cycles, phi, m0).gram(shifts)


def super_scaling_residual(F: SuperFunction, m0: TrigPolynomial) -> float:
    """Largest component residual of ``F_{pi(i)}(x) = 2 sum_k c_k w_i^k F_i(2x - k)``.

    ``pi(i)`` is the index of ``2 x_i mod 1``; this is the refinement
    equation of the super space, with dilation permuting components.
    """
    c = _coefficients(m0)
    index = {p: i for i, p in enumerate(F.points)}
    w = F.phases
    worst = 0.0
    for i, (f, x) in enumerate(zip(F.components, F.points)):
        j = index.get((2 * x) % 1)
        if j is None:
            raise ValidationError("cycle points are not closed under doubling")
        target = F.components[j]
        rhs = _refine(f, {k: 2 * v * w[i] ** k for k, v in c.items()}, 2, target.origin, -(-len(target.samples) // target.cells_per_unit))
        worst = max(worst, rhs.distance(target))
    return worst


__all__ = [
    "SampledFunction",
    "SuperFunction",
    "cascade",
    "translate_gram",
    "autocorrelation",
    "periodization_polynomial",
    "highpass_coefficients",
    "wavelet_from_mra",
    "frame_coefficients",
    "parseval_defect",
    "super_function",
    "super_gram",
    "super_scaling_residual",
]
