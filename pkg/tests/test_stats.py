import math

import numpy as np
import pytest

from polymer2d import stats
from polymer2d._hash import normals, uniforms


def test_ks_single_sample_at_median():
    assert stats.ks_distance([math.log(2.0)], "exp1") == pytest.approx(0.5)


def test_ks_exponential_calibration():
    # DKW: with 1e4 draws, distance above 0.02 has probability < 1e-3
    u = uniforms(5, 10_000)
    x = -np.log(u)
    assert stats.ks_distance(x, "exp1") < 0.02


def test_ks_normal_calibration():
    z = normals(6, 10_000)
    assert stats.ks_distance(z, ("normal", 0.0, 1.0)) < 0.02
    # wrong location is detected
    assert stats.ks_distance(z + 1.0, ("normal", 0.0, 1.0)) > 0.3


def test_ks_errors():
    with pytest.raises(ValueError):
        stats.ks_distance([], "exp1")
    with pytest.raises(ValueError):
        stats.ks_distance([1.0], "weibull")


def test_mean_stderr():
    m, se = stats.mean_stderr([1.0, 2.0, 3.0])
    assert m == 2.0
    assert se == pytest.approx(1.0 / math.sqrt(3), rel=1e-12)
    with pytest.raises(ValueError):
        stats.mean_stderr([])


def test_variance_with_stderr_consistency():
    z = normals(7, 40_000)
    var, se = stats.variance_with_stderr(z)
    assert abs(var - 1.0) <= 4 * se
    assert se == pytest.approx(math.sqrt(2.0 / len(z)), rel=0.1)
