from fractions import Fraction as F

import numpy as np
import pytest

from _corpus import CORPUS, DAUB4
from fracspec.cycles import wavelet_cycles
from fracspec.errors import ValidationError
from fracspec.filters import TrigPolynomial, haar_filter, stretched_haar_filter
from fracspec.transfer import lawton_test
from fracspec.wavelet import (
    SampledFunction,
    autocorrelation,
    cascade,
    frame_coefficients,
    highpass_coefficients,
    parseval_defect,
    periodization_polynomial,
    super_function,
    super_gram,
    super_scaling_residual,
    translate_gram,
    wavelet_from_mra,
)

J = 8
STRETCHED = stretched_haar_filter()


@pytest.fixture(scope="module")
def stretched_phi():
    return cascade(STRETCHED, J=J)


def test_haar_cascade_is_exact():
    phi = cascade(haar_filter(), iterations=3, J=J)
    assert phi.distance(SampledFunction.indicator(0, 1, J)) == 0
    assert phi.info["residual"] == 0


def test_stretched_cascade_converges(stretched_phi):
    assert stretched_phi.distance(SampledFunction.indicator(0, 3, J, 1 / 3)) < 1e-6
    d = stretched_phi.info["distances"]
    assert d[-1] < d[0]


def test_stretched_autocorrelation(stretched_phi):
    # a(m) = (3 - |m|) / 9 for |m| <= 3
    for m in range(-4, 5):
        assert autocorrelation(stretched_phi, m).real == pytest.approx(max(3 - abs(m), 0) / 9, abs=1e-6)
    G = translate_gram(stretched_phi, [-1, 0, 1])
    assert G[1, 2].real == pytest.approx(2 / 9, abs=1e-6)
    h = periodization_polynomial(stretched_phi)
    assert h((0.0,)) == pytest.approx(1, abs=1e-6)


@pytest.mark.parametrize("name,m", [(c[0], c[1]) for c in CORPUS if c[2] == 2 and c[3] == [0, 1]])
def test_gram_identity_matches_lawton(name, m):
    phi = cascade(m, J=J)
    shifts = range(-3, 4)
    identity = np.abs(translate_gram(phi, shifts) - np.eye(7)).max() < 1e-3
    assert identity == lawton_test(m, 2).orthonormal


def test_highpass():
    assert highpass_coefficients(haar_filter()) == {0: 0.5, 1: -0.5}
    assert highpass_coefficients(STRETCHED) == {0: 0.5, 3: -0.5}
    psi = wavelet_from_mra(haar_filter(), cascade(haar_filter(), iterations=1, J=J))
    expected = SampledFunction.indicator(0, F(1, 2), J)
    neg = SampledFunction.indicator(F(1, 2), 1, J, -1)
    assert psi.distance(SampledFunction(0, J, expected.samples + neg.samples)) == 0


def test_daubechies_orthogonal_wavelet():
    phi = cascade(DAUB4, J=J)
    psi = wavelet_from_mra(DAUB4, phi)
    assert abs(psi.norm() - 1) < 1e-3
    assert all(abs(phi.inner(SampledFunction(psi.origin - k, J, psi.samples))) < 1e-3 for k in range(-3, 4))


def test_frame_coefficients_haar():
    psi = wavelet_from_mra(haar_filter(), cascade(haar_filter(), iterations=1, J=J))
    f = SampledFunction.indicator(0, 1, J)
    # <chi_[0,1), psi_{-1,0}> = 2^{-1/2} (1 / 1) since psi(x/2) = 1 on [0,1)
    c = frame_coefficients(f, psi, -1, np.array([0, 1]))
    assert c[0] == pytest.approx(2 ** -0.5) and c[1] == 0
    assert np.allclose(frame_coefficients(f, psi, 2, np.arange(4)), 0)


def test_haar_parseval_defect_is_tail():
    psi = wavelet_from_mra(haar_filter(), cascade(haar_filter(), iterations=1, J=J))
    f = SampledFunction.indicator(0, 1, J)
    d = parseval_defect(psi, [f], range(-6, 7), range(-8, 2**6 + 8))
    # only the coarse scales j < -6 are missing: sum 2^j over j <= -7
    assert d == pytest.approx(2.0 ** -6, abs=1e-12)


def test_stretched_parseval_defect(stretched_phi):
    psi = wavelet_from_mra(STRETCHED, cascade(STRETCHED, J=10))
    f = SampledFunction.indicator(0, 1, 10)
    d = parseval_defect(psi, [f], range(-6, 7), range(-64, 2**6 + 64))
    # coarse tail 2^-6/3 plus fine tail (4/9) 2^-6
    assert d == pytest.approx(7 / 576, abs=1e-5)


def test_super_gram_identity(stretched_phi):
    cyc = wavelet_cycles(STRETCHED, 2)
    G = super_gram(cyc, stretched_phi, range(-4, 5), STRETCHED)
    assert np.abs(G - np.eye(9)).max() < 1e-5
    F_ = super_function(cyc, stretched_phi, STRETCHED)
    assert F_.first_component() is stretched_phi
    assert np.allclose(F_.phases, np.exp(2j * np.pi * np.array([0, 1 / 3, 2 / 3])))
    assert super_scaling_residual(F_, STRETCHED) < 1e-5


def test_super_function_rejects_non_extreme_cycle(stretched_phi):
    cyc = wavelet_cycles(STRETCHED, 2)
    with pytest.raises(ValidationError):
        super_function(cyc, stretched_phi, haar_filter())


def test_cascade_validation():
    with pytest.raises(ValidationError, match="low-pass"):
        cascade(TrigPolynomial({0: 0.5}), J=4)
    with pytest.raises(ValidationError, match="QMF"):
        cascade(TrigPolynomial({0: 0.25, 1: 0.5, 2: 0.25}), J=4)
    with pytest.raises(ValidationError):
        SampledFunction.indicator(F(1, 3), 1, 4)


def test_translate_gram_needs_symmetric_shifts(stretched_phi):
    with pytest.raises(ValidationError, match="symmetric"):
        translate_gram(stretched_phi, [0, 1])
