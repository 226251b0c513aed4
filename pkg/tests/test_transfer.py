import numpy as np
import pytest

from _corpus import CORPUS, DAUB4
from fracspec.errors import ValidationError
from fracspec.filters import TrigPolynomial, filter_from_digits, haar_filter, stretched_haar_filter
from fracspec.transfer import (
    FRACTAL,
    WAVELET,
    apply_pointwise,
    build_transfer_matrix,
    cohen_test,
    eigenvalue_one_multiplicity,
    is_complete_residue_system,
    lawton_test,
)


@pytest.mark.parametrize("name,m,A,L,orth", CORPUS, ids=[c[0] for c in CORPUS])
def test_constants_are_fixed(name, m, A, L, orth):
    assert build_transfer_matrix(m, A, L).constant_defect() <= 1e-12


@pytest.mark.parametrize("name,m,A,L,orth", CORPUS, ids=[c[0] for c in CORPUS])
def test_lawton_and_cohen_agree(name, m, A, L, orth):
    lw = lawton_test(m, A, L)
    ch = cohen_test(m, A, L)
    assert lw.orthonormal == ch.positive == orth
    if not orth:
        assert lw.report.multiplicity >= 2 and lw.evidence is not None
        assert ch.witnesses


@pytest.mark.parametrize("name,m,A,L,orth", [c for c in CORPUS if c[0] != "quarter_cantor_L01" and c[0] != "quarter_cantor_L03"])
def test_matrix_matches_pointwise(name, m, A, L, orth):
    T = build_transfer_matrix(m, A, L)
    assert T.setting == WAVELET
    rng = np.random.default_rng(7)
    for _ in range(10):
        c = rng.normal(size=T.size) + 1j * rng.normal(size=T.size)
        f = lambda y: T.evaluate(c, y)
        x = rng.uniform(-1, 1, size=T.scale.d)
        x = x if T.scale.d > 1 else float(x[0])
        assert abs(T.evaluate(T.apply(c), x) - apply_pointwise(m, A, L, f, x)) <= 1e-10


def test_setting_inference():
    assert is_complete_residue_system(build_transfer_matrix(haar_filter(), 2).scale, build_transfer_matrix(haar_filter(), 2).branch_digits)
    assert build_transfer_matrix(filter_from_digits([0, 2]), 4, [0, 1]).setting == FRACTAL
    assert build_transfer_matrix(haar_filter(), 2).setting == WAVELET


def test_haar_matrix():
    T = build_transfer_matrix(haar_filter(), 2)
    assert T.frequency_window == ((-1,), (0,), (1,))
    # |m|^2 = 1/2 + cos(2 pi x)/2 gives T[k', k] = 2 w_{2k' - k}
    expected = np.array([[0.5, 0, 0], [0.5, 1, 0.5], [0, 0, 0.5]])
    assert np.allclose(T.entries, expected, atol=1e-15)


def test_stretched_haar_eigenspace():
    lw = lawton_test(stretched_haar_filter(), 2)
    assert lw.report.multiplicity == 2
    ev = dict(zip([k[0] for k in lw.matrix.frequency_window], lw.evidence))
    # non-constant eigenvector lives on frequencies 1 and 2 with even symmetry
    assert abs(ev[1] - ev[-1]) < 1e-10 and abs(ev[2] - ev[-2]) < 1e-10
    assert abs(ev.get(3, 0)) < 1e-10 and abs(ev[1]) > 0.1


def test_fractal_constant_filter():
    T = build_transfer_matrix(TrigPolynomial({0: 1}), 2, [0, 1], setting=FRACTAL, depth=1)
    assert T.size == 2 and T.constant_defect() > 0.5


def test_eigen_tolerance_validated():
    with pytest.raises(ValidationError):
        eigenvalue_one_multiplicity(build_transfer_matrix(haar_filter(), 2), tol=0.1)


def test_lawton_requires_low_pass_and_qmf():
    with pytest.raises(ValidationError, match="low-pass"):
        lawton_test(TrigPolynomial({1: 0.5}), 2)
    with pytest.raises(ValidationError, match="QMF"):
        lawton_test(TrigPolynomial({0: 0.5, 1: 0.25, 2: 0.25}), 2)


def test_spectral_radius_of_daubechies():
    T = build_transfer_matrix(DAUB4, 2)
    assert T.spectral_radius() == pytest.approx(1, abs=1e-10)
