"""Candidate and completed spectra, with orthogonality and completeness checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _exact
from .cycles import Cycle
from .errors import NonIntegerSeedError, ValidationError
from .fourier_product import NUMERIC_ZERO, exp_inner_product, exponentials_orthogonal, mu_hat_batch
from .ifs_core import AffineIFS, DigitSet, ExpansiveIntMatrix, check_enumeration

GRAM_CAP = 256

Vec = tuple[int, ...]


@dataclass(frozen=True)
class SpectrumSet:
    """Leveled frequency set.

    ``levels[v]`` is the smallest truncation level containing ``v``: seeds
    and their first images have level 0, and each further application of
    ``v -> A^T v + l`` adds one. ``provenance[v] = (cycle_index, digit_word)``
    records how it was reached (the lexicographically least route when there
    are several).
    """

    elements: tuple[Vec, ...]
    levels: dict = field(compare=False)
    provenance: dict = field(compare=False)
    level: int
    A: ExpansiveIntMatrix
    L: DigitSet
    cycles: tuple = ()

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, v):
        if isinstance(v, int):
            v = (v,)
        return tuple(v) in self.levels

    def as_set(self) -> set[Vec]:
        return set(self.elements)

    def scalars(self) -> list[int]:
        """Sorted elements of a one-dimensional spectrum as plain integers."""
        return sorted(v[0] for v in self.elements)

    def sorted(self) -> list[Vec]:
        return sorted(self.elements)

    def truncate(self, level: int) -> "SpectrumSet":
        keep = tuple(v for v in self.elements if self.levels[v] <= level)
        return SpectrumSet(
            keep,
            {v: self.levels[v] for v in keep},
            {v: self.provenance[v] for v in keep},
            min(level, self.level),
            self.A,
            self.L,
            self.cycles,
        )

    def to_json(self) -> dict:
        return {
            "A": [list(r) for r in self.A.entries],
            "L": [list(l) for l in self.L],
            "level": self.level,
            "elements": [
                {
                    "value": list(v),
                    "level": self.levels[v],
                    "cycle": self.provenance[v][0],
                    "word": [list(l) for l in self.provenance[v][1]],
                }
                for v in self.sorted()
            ],
            "cycles": [c.to_json() for c in self.cycles],
        }


def _closure(A: ExpansiveIntMatrix, L: DigitSet, seeds: list[tuple[Vec, int]], generations: int, cycles=()) -> SpectrumSet:
    """Breadth-first closure of ``seeds`` under ``v -> A^T v + l``."""
    levels: dict[Vec, int] = {}
    prov: dict[Vec, tuple] = {}
    order: list[Vec] = []

    def add(v, lev, p):
        if v not in levels:
            levels[v] = lev
            prov[v] = p
            order.append(v)
        elif levels[v] == lev and len(p[1]) == len(prov[v][1]) and p < prov[v]:
            prov[v] = p

    for v, ci in seeds:
        add(v, 0, (ci, ()))
    frontier = list(order)
    for gen in range(1, generations + 1):
        new_front = []
        for v in frontier:
            ci, word = prov[v]
            base = A.apply_transpose(v)
            for l in L:
                w = tuple(a + b for a, b in zip(base, l))
                fresh = w not in levels
                add(w, gen - 1, (ci, word + (l,)))
                if fresh:
                    new_front.append(w)
        frontier = new_front
    return SpectrumSet(tuple(order), levels, prov, generations, A, L, tuple(cycles))


def lambda0(A, L, level: int, *, cap: int | None = None) -> SpectrumSet:
    """All sums ``sum_{k=0}^{n} (A^T)^k l_k`` with ``n <= level`` and ``l_k`` in ``L``."""
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    L = L if isinstance(L, DigitSet) else DigitSet(L)
    if level < 0:
        raise ValidationError("level must be non-negative")
    if not L.contains_zero():
        raise ValidationError("L must contain 0")
    check_enumeration(L.N, level + 1, cap)
    zero = (0,) * A.d
    # Seeding with 0 and running level+1 generations produces exactly these sums.
    s = _closure(A, L, [(zero, 0)], level + 1)
    return SpectrumSet(s.elements, s.levels, s.provenance, level, A, L, ())


def spectrum_seeds(cycles: Sequence[Cycle]) -> list[tuple[Vec, int]]:
    """Negated cycle points, which must be integer vectors."""
    seeds = []
    for ci, c in enumerate(cycles):
        for p in c.points:
            if not p.is_integer():
                raise NonIntegerSeedError(
                    f"cycle {c} has non-integer point {p}; it cannot seed a frequency set", cycle=c
                )
            seeds.append((tuple(-n for n in p.numerators), ci))
    return seeds


def spectrum_from_cycles(A, L, cycles: Sequence[Cycle], level: int, *, cap: int | None = None) -> SpectrumSet:
    """Smallest set containing ``-C`` for each cycle and closed under ``A^T v + L``.

    Truncated to ``level`` in the same digit-count convention as
    :func:`lambda0`: elements are reached from a seed by at most ``level + 1``
    applications of ``v -> A^T v + l``. With only the trivial cycle the
    result coincides with ``lambda0(A, L, level)``.
    """
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    L = L if isinstance(L, DigitSet) else DigitSet(L)
    if not cycles:
        raise ValidationError("at least one cycle (the trivial one) is required")
    if level < 0:
        raise ValidationError("level must be non-negative")
    seeds = spectrum_seeds(cycles)
    check_enumeration(L.N, level + 1, None if cap is None else max(1, cap // len(seeds)))
    s = _closure(A, L, seeds, level + 1, cycles)
    return SpectrumSet(s.elements, s.levels, s.provenance, level, A, L, tuple(cycles))


@dataclass
class GramReport:
    elements: list
    matrix: np.ndarray
    exact_zero: np.ndarray  # boolean, off-diagonal entries certified zero
    max_offdiag: float
    n_exact_zero: int
    n_numeric_zero: int
    n_nonzero: int
    diag_deviation: float

    @property
    def n_pairs(self) -> int:
        n = len(self.elements)
        return n * (n - 1) // 2

    @property
    def orthogonal(self) -> bool:
        """Every off-diagonal pair is a certified exact zero."""
        return self.n_exact_zero == self.n_pairs and self.diag_deviation == 0

    def to_json(self) -> dict:
        return {
            "size": len(self.elements),
            "pairs": self.n_pairs,
            "max_offdiag": self.max_offdiag,
            "exact_zero_pairs": self.n_exact_zero,
            "numeric_zero_pairs": self.n_numeric_zero,
            "nonzero_pairs": self.n_nonzero,
            "diag_deviation": self.diag_deviation,
            "certified_orthogonal": self.orthogonal,
        }


def verify_orthogonality(ifs: AffineIFS, spectrum: Iterable, *, cap: int = GRAM_CAP, target_err: float = 1e-12) -> GramReport:
    """Gram matrix ``<e_i, e_j> = mu_hat(l_j - l_i)`` of the exponentials."""
    elems = [tuple(v) if not isinstance(v, (int, Fraction)) else (v,) for v in spectrum]
    n = len(elems)
    if n > cap:
        raise ValidationError(f"{n} frequencies exceed the Gram cap {cap}")
    G = np.eye(n, dtype=complex)
    Z = np.zeros((n, n), dtype=bool)
    n_exact = n_num = n_non = 0
    for i, j in itertools.combinations(range(n), 2):
        ev = exp_inner_product(ifs, elems[i], elems[j], target_err)
        G[i, j] = ev.value
        G[j, i] = np.conj(ev.value)
        if ev.exact_zero:
            Z[i, j] = Z[j, i] = True
            n_exact += 1
        elif abs(ev.value) <= NUMERIC_ZERO:
            n_num += 1
        else:
            n_non += 1
    off = np.abs(G - np.diag(np.diag(G)))
    return GramReport(
        elems,
        G,
        Z,
        float(off.max()) if n > 1 else 0.0,
        n_exact,
        n_num,
        n_non,
        float(np.max(np.abs(np.diag(G) - 1))) if n else 0.0,
    )


def orthogonal_candidates(ifs: AffineIFS, base: Sequence, candidates: Iterable) -> list:
    """Candidates whose exponential is certified orthogonal to every element of ``base``."""
    out = []
    for c in candidates:
        cv = c if isinstance(c, (tuple, list)) else (c,)
        if tuple(cv) in {tuple(b) if isinstance(b, (tuple, list)) else (b,) for b in base}:
            continue
        if all(exponentials_orthogonal(ifs, b, cv) for b in base):
            out.append(c)
    return out


@dataclass(frozen=True)
class CompletenessRow:
    x: tuple[float, ...]
    level: int
    partial_sum: float
    n_terms: int
    error_bound: float


def verify_completeness(
    ifs: AffineIFS,
    spectrum: SpectrumSet,
    grid: Sequence,
    level_schedule: Sequence[int],
    *,
    check_orthogonality: bool = True,
    target_err: float = 1e-12,
) -> tuple[list[CompletenessRow], GramReport | None]:
    """Partial sums of ``h(x) = sum |mu_hat(x + l)|^2`` over leveled truncations.

    Terms are accumulated level by level, so each row's partial sum is
    non-decreasing in the level. Orthogonality is certified first on the
    largest truncation that fits the Gram cap; its report is returned with
    the table.
    """
    gram = None
    if check_orthogonality:
        fit = [lev for lev in sorted(set(level_schedule)) if len(spectrum.truncate(lev)) <= GRAM_CAP]
        if fit:
            gram = verify_orthogonality(ifs, spectrum.truncate(fit[-1]).elements)
            if not gram.orthogonal and gram.n_nonzero:
                raise ValidationError("frequency set is not orthogonal; completeness scan is meaningless")
    schedule = sorted(set(level_schedule))
    if schedule and schedule[-1] > spectrum.level:
        raise ValidationError(f"schedule level {schedule[-1]} exceeds spectrum level {spectrum.level}")
    rows: list[CompletenessRow] = []
    for x in grid:
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        total = 0.0
        err = 0.0
        prev_level = -1
        n_terms = 0
        for lev in schedule:
            new = [v for v in spectrum.elements if prev_level < spectrum.levels[v] <= lev]
            if new:
                pts = np.array(new, dtype=float) + xv
                vals, bounds = mu_hat_batch(ifs, pts, target_err)
                total += float(np.sum(np.abs(vals) ** 2))
                # | |a|^2 - |b|^2 | <= (2|a| + e) e for |a - b| <= e
                err += float(np.sum((2 * np.abs(vals) + bounds) * bounds))
                n_terms += len(new)
            rows.append(CompletenessRow(tuple(float(v) for v in xv), lev, total, n_terms, err))
            prev_level = lev
    return rows, gram


def rationals_in_window(max_den: int, radius: Fraction) -> list[Fraction]:
    """All reduced ``p/q`` with ``q <= max_den`` and ``|p/q| <= radius``, sorted."""
    out = set()
    for q in range(1, max_den + 1):
        pmax = int(radius * q)
        for p in range(-pmax, pmax + 1):
            out.add(Fraction(p, q))
    return sorted(out)


def lambda0_decomposition_holds(A, L, level: int) -> bool:
    """Check ``Lambda_0 = union_l (l + A^T Lambda_0)`` (disjointly) on a truncation.

    The level-``n`` truncation must equal the disjoint union of
    ``l + A^T (level n-1 truncation)``.
    """
    A = A if isinstance(A, ExpansiveIntMatrix) else ExpansiveIntMatrix(A)
    L = L if isinstance(L, DigitSet) else DigitSet(L)
    if level < 1:
        raise ValidationError("level must be at least 1")
    big = lambda0(A, L, level).as_set()
    small = lambda0(A, L, level - 1).as_set()
    pieces = [{tuple(a + b for a, b in zip(A.apply_transpose(v), l)) for v in small} for l in L]
    union = set().union(*pieces)
    disjoint = sum(len(p) for p in pieces) == len(union)
    return disjoint and union == big


def lambda3_reference(level: int) -> set[int]:
    """Truncation of the two-branch set for ``A = 4``, ``L = {0, 3}``.

    ``{sum 4^k l_k : l_k in {0,3}} U {-1 + sum 4^k l_k : l_k in {0,-3}}`` with
    ``k = 0..level``.
    """
    pos = {sum(4**k * l for k, l in enumerate(w)) for w in itertools.product((0, 3), repeat=level + 1)}
    neg = {-1 + sum(4**k * l for k, l in enumerate(w)) for w in itertools.product((0, -3), repeat=level + 1)}
    return pos | neg


def probe_odd_digit_spectra(p_values: Iterable[int], level: int = 3, max_period: int = 8) -> list[dict]:
    """Evidence for ``A = 4, B = {0,2}, L = {0,p}``: cycles and a Gram check per ``p``."""
    from .cycles import find_cycles
    from .filters import filter_from_digits, hadamard_check
    from .ifs_core import dual_ifs

    ifs = AffineIFS(ExpansiveIntMatrix(4), DigitSet([0, 2]))
    mB = filter_from_digits([0, 2])
    rows = []
    for p in p_values:
        cert = hadamard_check(4, [0, 2], [0, p])
        row = {"p": p, "hadamard": cert.valid, "status": "evidence-only"}
        if cert.valid:
            cyc = find_cycles(dual_ifs(4, [0, p]), mB, max_period)
            row["cycles"] = [[str(q[0]) for q in c.as_sorted_set()] for c in cyc]
            try:
                spec = spectrum_from_cycles(4, [0, p], cyc, level)
                g = verify_orthogonality(ifs, spec.elements)
                row.update(size=len(spec), certified_orthogonal=g.orthogonal)
            except NonIntegerSeedError as exc:
                row["error"] = str(exc)
        rows.append(row)
    return rows
