import math

import numpy as np
import pytest
from scipy.special import ndtri

from polymer2d import _hash


def test_mix64_matches_python_mirror():
    for z in (0, 1, 12345, 2 ** 63 + 17, 2 ** 64 - 1):
        assert int(_hash.mix64(np.uint64(z))) == _hash.py_mix64(z)


def test_key3_matches_python_mirror():
    got = int(_hash.key3(np.uint64(7), np.uint64(11), np.uint64(13)))
    assert got == _hash.py_key3(7, 11, 13)


def test_uniforms_are_deterministic_and_open():
    u1 = _hash.uniforms(42, 10_000)
    u2 = _hash.uniforms(42, 10_000)
    assert np.array_equal(u1, u2)
    assert u1.min() > 0.0 and u1.max() < 1.0


def test_uniform_moments():
    u = _hash.uniforms(7, 200_000)
    # mean 1/2, var 1/12; allow 5 sigma
    se_mean = math.sqrt(1 / 12 / len(u))
    assert abs(u.mean() - 0.5) < 5 * se_mean
    assert abs(u.var() - 1 / 12) < 5 * math.sqrt(1 / 180 / len(u))


def test_normal_moments():
    z = _hash.normals(3, 200_000)
    n = len(z)
    assert abs(z.mean()) < 5 / math.sqrt(n)
    assert abs(z.var() - 1.0) < 5 * math.sqrt(2.0 / n)


@pytest.mark.parametrize("p", [1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99,
                               1 - 1e-6, 1 - 1e-12])
def test_inverse_normal_against_scipy(p):
    assert _hash.inv_normal_cdf(p) == pytest.approx(float(ndtri(p)),
                                                    abs=1e-12, rel=1e-12)


def test_distinct_keys_decorrelate():
    a = _hash.uniforms(1, 50_000)
    b = _hash.uniforms(2, 50_000)
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) < 0.02
