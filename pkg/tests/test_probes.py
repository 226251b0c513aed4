from fractions import Fraction as F

import pytest

from fracspec.errors import ValidationError
from fracspec.ifs_core import AffineIFS
from fracspec.probes import EVIDENCE, attractor_radius, probe_overlap, probe_scaling_rules


def _by_check(rows):
    return {r["check"].split()[0]: r for r in rows}


def test_quarter_scale_passes():
    rows = _by_check(probe_scaling_rules(F(1, 4), [0, 2]))
    assert rows["contraction"]["passed"] and rows["weights"]["passed"]
    assert rows["digits"]["passed"] and rows["digits"]["detail"] == "B = 2 * [0, 1]; L = [0, 2]"
    assert all(r["status"] == EVIDENCE for r in rows.values())


def test_third_scale_has_no_partner():
    rows = _by_check(probe_scaling_rules(F(1, 3), [0, 2]))
    assert rows["contraction"]["passed"] and not rows["digits"]["passed"]


def test_non_integer_inverse_and_weights():
    rows = _by_check(probe_scaling_rules(F(2, 5), [0, 1], [F(1, 3), F(2, 3)]))
    assert not rows["contraction"]["passed"] and not rows["weights"]["passed"]
    assert "digits" not in rows


def test_rational_digits_rescale():
    rows = _by_check(probe_scaling_rules(0.25, [0, 0.5]))
    assert rows["digits"]["passed"] and "1/2" in rows["digits"]["detail"]


def test_scaling_validation():
    with pytest.raises(ValidationError):
        probe_scaling_rules(2, [0, 1])
    with pytest.raises(ValidationError):
        probe_scaling_rules(F(1, 4), [0, 0])
    with pytest.raises(ValidationError):
        probe_scaling_rules(F(1, 4), [0, 2], [0.5, 0.4])


def test_attractor_radius_contains_attractor():
    assert attractor_radius(AffineIFS(3, [0, 2])) >= 1
    assert attractor_radius(AffineIFS(4, [0, 2])) >= F(2, 3)


def test_overlap_separated_pieces():
    rows = probe_overlap(AffineIFS(3, [0, 2]), [1, 2, 4])
    assert rows[-1]["overlap_upper_bound"] == 0
    assert all(r["status"] == EVIDENCE for r in rows)


def test_overlap_touching_pieces_decays():
    bounds = [r["overlap_upper_bound"] for r in probe_overlap(AffineIFS(2, [0, 1]), [2, 4, 6, 8])]
    assert all(b > a for a, b in zip(bounds[1:], bounds)) and bounds[-1] < 0.05
    assert bounds[-1] > 0


def test_overlap_depth_validation():
    with pytest.raises(ValidationError):
        probe_overlap(AffineIFS(3, [0, 2]), [0])
