"""The eleven acceptance criteria, each with its tolerance and runtime budget.

Every test appends one PASS/FAIL line that the terminal summary prints.
Runtimes are the fastest of several runs for sub-second criteria.
"""

import json
import math
import pathlib
from fractions import Fraction as F
from itertools import combinations, product

import numpy as np

from _acceptance import record, timed
from _corpus import CORPUS
from fracspec.complex_dyn import ComplexPolynomial, brolin_sample, k2_merge, k2_split, moments, random_lacunary
from fracspec.cycles import find_cycles, wavelet_cycles
from fracspec.filters import (
    certify_qmf,
    filter_from_digits,
    hadamard_check,
    hadamard_matrix,
    haar_filter,
    stretched_haar_filter,
    unitarity_defect,
)
from fracspec.fourier_product import exponentials_orthogonal
from fracspec.ifs_core import AffineIFS, DigitSet, ExpansiveIntMatrix, dual_ifs
from fracspec.spectra import (
    lambda0,
    orthogonal_candidates,
    rationals_in_window,
    spectrum_from_cycles,
    verify_completeness,
    verify_orthogonality,
)
from fracspec.transfer import WAVELET, apply_pointwise, build_transfer_matrix, cohen_test, lawton_test
from fracspec.wavelet import (
    SampledFunction,
    cascade,
    parseval_defect,
    super_gram,
    translate_gram,
    wavelet_from_mra,
)

FIXTURE = pathlib.Path(__file__).parent / "fixtures" / "completeness_decay.json"
QUARTER = AffineIFS(4, [0, 2])
MIDDLE = AffineIFS(3, [0, 2])
M02 = filter_from_digits([0, 2])


def test_criterion_01_hadamard_certificate():
    cert, t = timed(lambda: hadamard_check(4, [0, 2], [0, 1]), repeats=20)
    expected = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    record(1, "Hadamard triple (4,{0,2},{0,1})", {
        "certified": cert.valid,
        "unitarity defect <= 1e-12": cert.unitarity_defect <= 1e-12,
        "matrix entries within 1e-12": np.max(np.abs(cert.matrix_entries - expected)) <= 1e-12,
    }, t, 1e-3)


def test_criterion_02_scale_four_spectrum():
    def run():
        s = lambda0(4, [0, 1], 2)
        return s, verify_orthogonality(QUARTER, s.elements)

    (s, gram), t = timed(run, repeats=5)
    record(2, "lambda0(4,{0,1},2) and its exact Gram", {
        "set equals {0,1,4,5,16,17,20,21}": set(s.scalars()) == {0, 1, 4, 5, 16, 17, 20, 21},
        "28 off-diagonal pairs": gram.n_pairs == 28,
        "all 28 certified exact zeros": gram.n_exact_zero == 28 and bool(gram.exact_zero[np.triu_indices(8, 1)].all()),
    }, t, 1.0)


def test_criterion_03_completeness_scan():
    fixture = json.loads(FIXTURE.read_text())
    grid = list(np.arange(16) / 16)

    def run():
        return verify_completeness(QUARTER, lambda0(4, [0, 1], 8), grid, range(2, 9))

    (rows, gram), t = timed(run)
    by_x = {}
    for r in rows:
        by_x.setdefault(r.x, []).append(r)
    monotone = all(all(b.partial_sum >= a.partial_sum for a, b in zip(rs, rs[1:])) for rs in by_x.values())
    top = max(r.partial_sum + r.error_bound for r in rows)
    level8 = [r for r in rows if r.level == 8]
    gap8 = max(1 - r.partial_sum for r in level8)
    record(3, "completeness scan for (4,{0,2},{0,1}), levels 2..8", {
        "16 grid points x 7 levels": len(by_x) == 16 and len(rows) == 16 * 7,
        "partial sums nondecreasing": monotone,
        "partial sums <= 1 + 1e-8": top <= 1 + 1e-8,
        "level 8 reaches >= 1 - 1e-3": gap8 <= 1e-3,
        "level 8 gap within calibrated bound": gap8 <= fixture["level8_gap_bound"],
        "truncation certified orthogonal": gram is not None and gram.orthogonal,
    }, t, 30.0)


def test_criterion_04_middle_third_negative():
    A, B = ExpansiveIntMatrix(3), DigitSet([0, 2])

    def run():
        hadamard_pairs = [
            (a, b) for a, b in combinations(range(-50, 51), 2)
            if unitarity_defect(hadamard_matrix(A, B, DigitSet([a, b]))) <= 1e-12
        ]
        pair_orth = exponentials_orthogonal(MIDDLE, 0, F(3, 4))
        cands = [r for r in rationals_in_window(64, F(8)) if r not in (0, F(3, 4))]
        joint = orthogonal_candidates(MIDDLE, [0, F(3, 4)], cands)
        return hadamard_pairs, pair_orth, joint, len(cands)

    (pairs, pair_orth, joint, n_cands), t = timed(run)
    record(4, "middle-third scale 3 admits no two-element spectrum extension", {
        "no Hadamard partner L in [-50,50]^2": pairs == [],
        "e_0 and e_{3/4} certified orthogonal": pair_orth is True,
        "no rational p/q (q<=64, |r|<=8) orthogonal to both": joint == [] and n_cands > 10000,
    }, t, 60.0)


def test_criterion_05_cycle_detection():
    def run():
        return (
            find_cycles(dual_ifs(4, [0, 1]), M02),
            find_cycles(dual_ifs(4, [0, 3]), M02),
            wavelet_cycles(stretched_haar_filter(), 2),
        )

    (c01, c03, csh), t = timed(run)
    sets = lambda cs: [sorted(p[0] for p in c.point_fractions()) for c in cs]
    exact = all(isinstance(p[0], F) for cs in (c01, c03, csh) for c in cs for p in c.point_fractions())
    record(5, "extreme cycles", {
        "(4,{0,2},{0,1}) gives only {0}": sets(c01) == [[0]],
        "(4,{0,2},{0,3}) gives {0} and {1}": sets(c03) == [[0], [1]],
        "stretched Haar gives {0} and {1/3,2/3}": sets(csh) == [[0], [F(1, 3), F(2, 3)]],
        "exact rational points": exact,
        "periods <= 12": all(c.period <= 12 for cs in (c01, c03, csh) for c in cs),
    }, t, 10.0)


def test_criterion_06_completed_spectrum():
    pos = {sum(4**k * l for k, l in enumerate(w)) for w in product((0, 3), repeat=4)}
    neg = {-1 + sum(4**k * l for k, l in enumerate(w)) for w in product((0, -3), repeat=4)}

    def run():
        cyc = find_cycles(dual_ifs(4, [0, 3]), M02)
        s = spectrum_from_cycles(4, [0, 3], cyc, 3)
        return s, verify_orthogonality(QUARTER, s.elements)

    (s, gram), t = timed(run)
    record(6, "completed spectrum for L={0,3} at level 3", {
        "equals the two-branch truncation": set(s.scalars()) == pos | neg,
        "Gram certified identity": gram.orthogonal and gram.diag_deviation == 0,
    }, t, 5.0)


def test_criterion_07_lawton_cohen_concordance():
    def run():
        return (
            lawton_test(haar_filter(), 2), cohen_test(haar_filter(), 2),
            lawton_test(stretched_haar_filter(), 2), cohen_test(stretched_haar_filter(), 2),
        )

    (lh, ch, ls, cs), t = timed(run, repeats=3)
    witness = [sorted(p[0] for p in c.point_fractions()) for c in cs.witnesses]
    record(7, "Lawton and Cohen agree on Haar and stretched Haar", {
        "Haar orthonormal by both": lh.orthonormal and ch.positive,
        "stretched Haar non-orthonormal by both": not ls.orthonormal and not cs.positive,
        "eigenvalue-1 multiplicity >= 2": ls.report.multiplicity >= 2,
        "eigenvector evidence attached": ls.evidence is not None,
        "cycle witness {1/3,2/3}": witness == [[F(1, 3), F(2, 3)]],
    }, t, 1.0)


def test_criterion_08_wavelet_numerics():
    m = stretched_haar_filter()

    def run():
        phi = cascade(m, J=12)
        err = phi.distance(SampledFunction.indicator(0, 3, 12, 1 / 3))
        lag1 = translate_gram(phi, [-1, 0, 1])[1, 2]
        G = super_gram(wavelet_cycles(m, 2), phi, range(-4, 5), m)
        psi = wavelet_from_mra(m, phi)
        d = parseval_defect(psi, [SampledFunction.indicator(0, 1, 12)], range(-8, 9), range(-64, 2**8 + 64))
        return err, lag1, G, d

    (err, lag1, G, d), t = timed(run)
    record(8, "stretched Haar cascade, Gram, super Gram and Parseval", {
        "cascade L2 error < 1e-2": err < 1e-2,
        "lag-1 Gram entry 2/9 +- 1e-3": abs(lag1 - 2 / 9) <= 1e-3,
        "super Gram identity +- 1e-3": np.max(np.abs(G - np.eye(len(G)))) <= 1e-3 and len(G) == 9,
        "Parseval defect < 1e-2": d < 1e-2,
    }, t, 60.0)


def test_criterion_09_k2_split():
    def run():
        rng = np.random.default_rng(2024)
        worst, roundtrip = 0.0, True
        for _ in range(100):
            f = random_lacunary(rng, 8)
            F0, F1 = k2_split(f)
            worst = max(worst, abs(f.norm_sq - F0.norm_sq - F1.norm_sq) / f.norm_sq)
            roundtrip &= k2_merge(F0, F1) == f and k2_split(k2_merge(F0, F1)) == (F0, F1)
        return worst, roundtrip

    (worst, roundtrip), t = timed(run, repeats=3)
    record(9, "z^4 split of 100 random 8-term lacunary expansions", {
        "norm identity relative error < 1e-12": worst < 1e-12,
        "split and merge are inverse": roundtrip,
    }, t, 1.0)


def test_criterion_10_brolin_circle():
    n = 10**5

    def run():
        z = brolin_sample(ComplexPolynomial([0, 0, 1]), n, seed=0)
        return z, moments(z, 8)

    (z, mo), t = timed(run)
    bound = 3 / math.sqrt(n)
    record(10, "Brolin samples for z^2 on the unit circle", {
        "max ||z| - 1| < 1e-6": np.max(np.abs(np.abs(z) - 1)) < 1e-6,
        "|M_n| < 3/sqrt(1e5) for n = 1..8": bool(np.all(np.abs(mo.values[1:9]) < bound)),
    }, t, 10.0)


def test_criterion_11_transfer_identities():
    certified = [c for c in CORPUS if certify_qmf(c[1], c[2], c[3])[0]]

    def run():
        defects = [build_transfer_matrix(m, A, L).constant_defect() for _, m, A, L, _ in certified]
        rng = np.random.default_rng(11)
        wave = [build_transfer_matrix(m, A, L) for _, m, A, L, _ in certified]
        wave = [(T, c) for T, c in zip(wave, certified) if T.setting == WAVELET]
        worst = 0.0
        for i in range(100):
            T, (_, m, A, L, _) = wave[i % len(wave)]
            coef = rng.normal(size=T.size) + 1j * rng.normal(size=T.size)
            x = rng.uniform(-2, 2, size=T.scale.d)
            x = x if T.scale.d > 1 else float(x[0])
            direct = apply_pointwise(m, A, L, lambda y: T.evaluate(coef, y), x)
            worst = max(worst, abs(T.evaluate(T.apply(coef), x) - direct))
        return defects, worst

    (defects, worst), t = timed(run, repeats=3)
    record(11, "transfer operator identities over the filter corpus", {
        f"||T1 - 1|| <= 1e-12 for all {len(certified)} certified filters": max(defects) <= 1e-12,
        "matrix action equals pointwise R_m to 1e-10 on 100 pairs": worst <= 1e-10,
    }, t, 5.0)
