from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest

from fracspec.cycles import find_cycles
from fracspec.errors import NonIntegerSeedError, ValidationError
from fracspec.filters import filter_from_digits, stretched_haar_filter
from fracspec.ifs_core import AffineIFS, dual_ifs
from fracspec.cycles import wavelet_cycles
from fracspec.spectra import (
    lambda0,
    lambda0_decomposition_holds,
    orthogonal_candidates,
    probe_odd_digit_spectra,
    rationals_in_window,
    spectrum_from_cycles,
    verify_completeness,
    verify_orthogonality,
)

QUARTER = AffineIFS(4, [0, 2])
M02 = filter_from_digits([0, 2])


def _digit_sums(scale, digits, n_digits, offset=0):
    return {offset + sum(scale**k * l for k, l in enumerate(w)) for w in product(digits, repeat=n_digits)}


def test_lambda0_small_levels():
    assert set(lambda0(4, [0, 1], 0).scalars()) == {0, 1}
    assert set(lambda0(4, [0, 1], 2).scalars()) == {0, 1, 4, 5, 16, 17, 20, 21}
    for level in range(5):
        assert set(lambda0(4, [0, 1], level).scalars()) == _digit_sums(4, (0, 1), level + 1)


def test_levels_are_nested():
    s = lambda0(4, [0, 1], 4)
    for lev in range(4):
        assert s.truncate(lev).as_set() == lambda0(4, [0, 1], lev).as_set()
    assert s.levels[(0,)] == 0 and s.levels[(21,)] == 2


def test_decomposition():
    for level in range(1, 5):
        assert lambda0_decomposition_holds(4, [0, 1], level)
        assert lambda0_decomposition_holds([[4, 0], [0, 4]], [(0, 0), (1, 0), (0, 1), (1, 1)], min(level, 3))


def test_lambda0_gram_exact():
    rep = verify_orthogonality(QUARTER, lambda0(4, [0, 1], 2).elements)
    assert rep.n_pairs == 28 and rep.n_exact_zero == 28 and rep.orthogonal
    assert np.allclose(rep.matrix, np.eye(8), atol=0)


def test_non_orthogonal_set_detected():
    rep = verify_orthogonality(QUARTER, [0, 2])
    assert not rep.orthogonal and rep.n_nonzero == 1


def test_cycle_spectrum_matches_two_branch_form():
    cyc = find_cycles(dual_ifs(4, [0, 3]), M02)
    for level in range(4):
        s = spectrum_from_cycles(4, [0, 3], cyc, level)
        expected = _digit_sums(4, (0, 3), level + 1) | _digit_sums(4, (0, -3), level + 1, offset=-1)
        assert set(s.scalars()) == expected
    assert verify_orthogonality(QUARTER, s.elements).orthogonal


def test_trivial_cycle_reproduces_lambda0():
    cyc = find_cycles(dual_ifs(4, [0, 1]), M02)
    assert spectrum_from_cycles(4, [0, 1], cyc, 3).as_set() == lambda0(4, [0, 1], 3).as_set()


def test_non_integer_seed_rejected():
    with pytest.raises(NonIntegerSeedError):
        spectrum_from_cycles(2, [0, 1], wavelet_cycles(stretched_haar_filter(), 2), 2)


def test_lambda0_requires_zero():
    with pytest.raises(ValidationError, match="contain 0"):
        lambda0(4, [1, 2], 2)


def test_completeness_rows_monotone():
    spec = lambda0(4, [0, 1], 5)
    rows, gram = verify_completeness(QUARTER, spec, [0.1, 0.6], range(6))
    assert gram.orthogonal
    for x in (0.1, 0.6):
        sums = [r.partial_sum for r in rows if r.x == (x,)]
        assert all(b >= a for a, b in zip(sums, sums[1:]))
        assert sums[-1] <= 1 + 1e-8
    assert rows[-1].n_terms == 64


def test_completeness_refuses_non_orthogonal():
    with pytest.raises(ValidationError, match="not orthogonal"):
        verify_completeness(AffineIFS(3, [0, 2]), lambda0(4, [0, 1], 2), [0.1], range(3))


def test_rational_window_and_candidates():
    r = rationals_in_window(4, F(1))
    assert F(3, 4) in r and F(-1) in r and len(r) == len(set(r))
    # 3/4 is orthogonal to 0 for the middle-third measure; 1/2 is not
    assert orthogonal_candidates(AffineIFS(3, [0, 2]), [0], [F(1, 2), F(3, 4)]) == [F(3, 4)]


def test_odd_digit_probe():
    rows = probe_odd_digit_spectra([1, 3, 5], level=2, max_period=6)
    assert all(r["status"] == "evidence-only" for r in rows)
    assert [r["hadamard"] for r in rows] == [True, True, True]
    assert all(r["certified_orthogonal"] for r in rows)
    assert rows[1]["cycles"] == [["0"], ["1"]]


def test_small_examples():
    from fracspec.spectra import spectrum_seeds

    assert set(lambda0(4, [0], 5).scalars()) == {0}
    assert set(lambda0(4, [0, 3], 1).scalars()) == {0, 3, 12, 15}
    cyc = find_cycles(dual_ifs(4, [0, 3]), M02)
    assert sorted(v for v, _ in spectrum_seeds(cyc)) == [(-1,), (0,)]
    s = spectrum_from_cycles(4, [0, 3], cyc, 2)
    assert {0, 3, 12, 15, 48, 51, 60, 63, -1, -4, -13, -16} <= set(s.scalars())
