import math

import numpy as np
import pytest

from polymer2d._hash import inv_normal_cdf, py_mix64
from polymer2d.environment import Environment, omega_cell, slab_key


def test_replay_is_exact():
    env = Environment(seed=9, horizon=50)
    xs = np.array([[0, 0], [3, -1], [-7, 2]])
    a = env.omega(5, xs)
    b = env.omega(5, xs[::-1].copy())
    assert np.array_equal(a, b[::-1])
    assert np.array_equal(a, Environment(seed=9, horizon=50).omega(5, xs))


def test_different_cells_differ():
    env = Environment(seed=9, horizon=50)
    a = env.omega(5, np.array([[0, 0]]))[0]
    b = env.omega(6, np.array([[0, 0]]))[0]
    c = env.omega(5, np.array([[1, 1]]))[0]
    assert a != b and a != c


def test_matches_python_mirror():
    env = Environment(seed=12345, horizon=20)
    mask = (1 << 64) - 1
    base = py_mix64(12345)
    sk = py_mix64(base ^ (8 * 0xC2B2AE3D27D4EB4F & mask))
    h = py_mix64(py_mix64(sk ^ ((4 * 0xC2B2AE3D27D4EB4F) & mask))
                 ^ ((6 * 0x165667B19E3779F9) & mask))
    want = inv_normal_cdf(((h >> 11) + 0.5) * 2 ** -53)
    got = env.omega(8, np.array([[4, 6]]))[0]
    assert got == want


def test_negative_coordinates():
    env = Environment(seed=4, horizon=10)
    v = env.omega(3, np.array([[-2, -1], [2, 1]]))
    assert v[0] != v[1]
    assert np.isfinite(v).all()


def test_field_moments_within_five_sigma():
    env = Environment(seed=1, horizon=40)
    xs = np.array([(a, b) for a in range(-250, 251) for b in range(-200, 200)])
    vals = []
    for n in (7, 12):
        sel = xs[(xs.sum(axis=1) + n) % 2 == 0]
        vals.append(env.omega(n, sel))
    v = np.concatenate(vals)
    n = len(v)
    assert n >= 100_000
    assert abs(v.mean()) < 5 / math.sqrt(n)
    assert abs(v.var() - 1.0) < 5 * math.sqrt(2.0 / n)


def test_horizon_guard():
    env = Environment(seed=1, horizon=4)
    with pytest.raises(ValueError):
        env.omega(5, np.array([[0, 0]]))


def test_scalar_cell_consistent_with_vector():
    env = Environment(seed=77, horizon=9)
    sk = slab_key(env.base, 3)
    got = omega_cell(sk, -4, 1)
    vec = env.omega(3, np.array([[-4, 1]]))[0]
    assert got == vec
