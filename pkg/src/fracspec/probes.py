"""Evidence gathering for open questions about spectral self-affine measures.

Nothing here decides a question. Every row carries ``"status": "evidence-only"``.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .filters import hadamard_check
from .fourier_product import _tail_geometry
from .ifs_core import AffineIFS, attractor_boxes

EVIDENCE = "evidence-only"


def _rational(v, what: str, max_den: int = 10**6) -> Fraction:
    try:
        f = Fraction(v) if not isinstance(v, float) else Fraction(v).limit_denominator(max_den)
    except (TypeError, ValueError):
        raise ValidationError(f"{what} must be a real number, got {v!r}") from None
    return f


def probe_scaling_rules(rho, B: Sequence, p: Sequence | None = None, *, search_radius: int = 16) -> list[dict]:
    """Check the necessary conditions conjectured for a spectral ``mu_{B,p}``.

    The IFS is ``x -> rho (x + beta)`` on the line. Rows report whether
    ``rho = 1/P`` for an integer ``P``, whether the weights are uniform, and,
    when ``0`` is a digit, whether ``B`` rescales to integers admitting a
    Hadamard partner ``L`` with entries in ``[-search_radius, search_radius]``.
    """
    r = _rational(rho, "rho")
    if not 0 < abs(r) < 1:
        raise ValidationError("|rho| must lie in (0, 1)")
    digits = [_rational(b, "digit") for b in B]
    if len(set(digits)) != len(digits) or len(digits) < 2:
        raise ValidationError("digits must be at least two distinct numbers")
    N = len(digits)
    weights = [Fraction(1, N)] * N if p is None else [_rational(w, "weight") for w in p]
    if len(weights) != N or any(w <= 0 for w in weights) or sum(weights) != 1:
        raise ValidationError("weights must be a positive probability vector over the digits")
    rows = []

    inv = 1 / r
    P = int(inv) if inv.denominator == 1 else None
    rows.append({
        "check": "contraction is 1/P for an integer P",
        "passed": P is not None,
        "detail": f"1/rho = {inv}" + ("" if P is not None else "; not an integer, so no integer scale exists"),
        "status": EVIDENCE,
    })

    uniform = len(set(weights)) == 1
    rows.append({
        "check": "weights are uniform",
        "passed": uniform,
        "detail": "all weights 1/N" if uniform else
        f"weights {[str(w) for w in weights]} differ; non-uniform weights break the Hadamard condition and are not expected to give spectra",
        "status": EVIDENCE,
    })

    if Fraction(0) in digits and P is not None and abs(P) >= 2:
        nz = [b for b in digits if b != 0]
        # alpha = gcd of the nonzero digits as rationals
        num = math.gcd(*[b.numerator for b in nz])
        den = math.lcm(*[b.denominator for b in nz])
        alpha = Fraction(num, den)
        Bint = sorted(int(b / alpha) for b in digits)
        found = None
        cands = sorted((l for l in range(-search_radius, search_radius + 1) if l != 0), key=lambda l: (abs(l), l < 0))
        for rest in itertools.combinations(cands, N - 1):
            try:
                cert = hadamard_check(P, Bint, [0, *rest])
            except ValidationError:
                continue
            if cert.valid:
                found = [0, *rest]
                break
        rows.append({
            "check": "digits rescale to an integer set with a Hadamard partner",
            "passed": found is not None,
            "detail": f"B = {alpha} * {Bint}; " + (f"L = {found}" if found else f"no L found with entries in [-{search_radius}, {search_radius}]"),
            "status": EVIDENCE,
        })
    return rows


def attractor_radius(ifs: AffineIFS) -> Fraction:
    """Rational ``r`` with the attractor inside the ball of radius ``r``."""
    G, _ = _tail_geometry(ifs.matrix)
    bmax = max(math.hypot(*b) for b in ifs.digits)
    return Fraction(math.ceil(G * bmax * 1024 + 1), 1024)


def probe_overlap(ifs: AffineIFS, depths: Sequence[int]) -> list[dict]:
    """Upper bounds for ``mu(tau_b X cap tau_b' X)`` from cylinder boxes.

    At depth ``n`` the intersection lies in the union of the depth-``n``
    cylinders under ``b`` whose bounding box meets a cylinder box under
    ``b'``; that union has measure ``count / N^n``. Decay towards zero is
    evidence for measure-disjoint pieces.
    """
    ifs.require_uniform()
    r = attractor_radius(ifs)
    seed = [(-r, r)] * ifs.d
    rows = []
    N = ifs.N
    for n in depths:
        if n < 1:
            raise ValidationError("depths must be positive")
        boxes = attractor_boxes(ifs, n, seed)
        arr = np.array([[(float(lo), float(hi)) for lo, hi in b] for b in boxes])  # (N^n, d, 2)
        per = N ** (n - 1)
        for i, j in itertools.combinations(range(N), 2):
            bi = arr[i * per:(i + 1) * per]
            bj = arr[j * per:(j + 1) * per]
            meet = np.all(
                (bi[:, None, :, 0] <= bj[None, :, :, 1]) & (bj[None, :, :, 0] <= bi[:, None, :, 1]), axis=2
            )
            hit_i = int(meet.any(axis=1).sum())
            hit_j = int(meet.any(axis=0).sum())
            rows.append({
                "depth": n,
                "pair": [list(ifs.digits.points[i]), list(ifs.digits.points[j])],
                "overlap_upper_bound": min(hit_i, hit_j) / N**n,
                "touching_cylinders": [hit_i, hit_j],
                "status": EVIDENCE,
            })
    return rows


__all__ = ["probe_scaling_rules", "probe_overlap", "attractor_radius", "EVIDENCE"]
