"""Filters shared by the transfer, wavelet and acceptance tests."""

import math

from fracspec.filters import TrigPolynomial, filter_from_digits, haar_filter, stretched_haar_filter

_s3 = math.sqrt(3)
DAUB4 = TrigPolynomial({0: (1 + _s3) / 8, 1: (3 + _s3) / 8, 2: (3 - _s3) / 8, 3: (1 - _s3) / 8})

# (name, filter, A, branches, orthonormal)
CORPUS = [
    ("haar", haar_filter(), 2, [0, 1], True),
    ("stretched_haar", stretched_haar_filter(), 2, [0, 1], False),
    ("daubechies4", DAUB4, 2, [0, 1], True),
    ("triadic_haar", filter_from_digits([0, 1, 2]), 3, [0, 1, 2], True),
    ("quarter_cantor_L01", filter_from_digits([0, 2]), 4, [0, 1], True),
    ("quarter_cantor_L03", filter_from_digits([0, 2]), 4, [0, 3], False),
    ("haar_2d", filter_from_digits([(0, 0), (1, 0), (0, 1), (1, 1)]), [[2, 0], [0, 2]],
     [(0, 0), (1, 0), (0, 1), (1, 1)], True),
]
