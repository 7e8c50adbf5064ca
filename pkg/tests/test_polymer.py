import math

import numpy as np
import pytest

from polymer2d import polymer, scaling
from polymer2d.environment import Environment
from polymer2d.kernel import CapacityError


def _params(N, bh):
    return scaling.make_params(N, bh)


def test_dp_no_disorder_is_one():
    p = _params(16, 0.0)
    r = polymer.partition_dp(Environment(7, 16), p)
    assert r.value == 1.0
    assert r.log_value == 0.0


def test_dp_single_step_closed_form():
    base = _params(2, 0.5)
    p1 = scaling.PolymerParams(N=1, beta_hat=0.5, R_N=base.R_N,
                               beta_N_sq=base.beta_N_sq,
                               sigma_N_sq=base.sigma_N_sq,
                               lambda_sq=base.lambda_sq)
    env = Environment(99, 2)
    r = polymer.partition_dp(env, p1)
    om = env.omega(1, np.array([[1, 0], [-1, 0], [0, 1], [0, -1]]))
    b = p1.beta_N
    manual = 0.25 * np.exp(b * om - b * b / 2).sum()
    assert r.value == pytest.approx(manual, rel=1e-14)


def test_dp_profile_positive_and_start_shift():
    p = _params(12, 0.4)
    env = Environment(3, 12)
    r0 = polymer.partition_dp(env, p, profile=True)
    assert r0.mass_profile.shape == (12,)
    assert np.all(r0.mass_profile > 0)
    r_shift = polymer.partition_dp(env, p, start=(5, -3))
    assert r_shift.value > 0
    assert r_shift.value != r0.value


def test_batch_pair_betas_match_single_runs():
    p3 = _params(10, 0.3)
    p5 = _params(10, 0.5)
    both = polymer.partition_log_batch(11, 4, [p3.beta_N, p5.beta_N], 10,
                                       [5, 10])
    lo = polymer.partition_log_batch(11, 4, [p3.beta_N], 10, [5, 10])
    hi = polymer.partition_log_batch(11, 4, [p5.beta_N], 10, [5, 10])
    assert np.array_equal(both[:, 0, :], lo[:, 0, :])
    assert np.array_equal(both[:, 1, :], hi[:, 0, :])


def test_batch_offset_is_consistent():
    p = _params(8, 0.5)
    full = polymer.partition_log_batch(5, 6, [p.beta_N], 8, [8])
    tail = polymer.partition_log_batch(5, 2, [p.beta_N], 8, [8],
                                       env_offset=4)
    assert np.array_equal(full[4:], tail)


def test_martingale_mean_small():
    p = _params(32, 0.5)
    logw = polymer.partition_log_batch(123, 800, [p.beta_N], 32, [32])
    w = np.exp(logw[:, 0, 0])
    se = w.std(ddof=1) / math.sqrt(len(w))
    assert abs(w.mean() - 1.0) <= 3 * se


def test_second_moment_one_step(params_half):
    assert polymer.second_moment_exact(params_half, 1) == pytest.approx(
        1 + params_half.sigma_N_sq / 4, rel=1e-14)


def test_second_moment_no_disorder():
    p = _params(64, 0.0)
    assert polymer.second_moment_exact(p, 10) == pytest.approx(1.0, abs=1e-14)


def test_second_moment_geometric_bound(params_half):
    from polymer2d import kernel
    prof = polymer.second_moment_profile(params_half, 64)
    r = kernel.r_exact_array(64)
    for n in range(1, 65):
        occ = params_half.sigma_N_sq * r[n]
        assert occ < 1
        assert prof[n] <= 1 / (1 - occ) + 1e-12


def test_psi_pair_equals_transfer(params_half):
    for T in (1, 2, 7, 16):
        psi = polymer.psi_exact(params_half, 2, T)
        m2 = polymer.second_moment_exact(params_half, T)
        assert psi == pytest.approx(m2, rel=1e-10)


def test_psi_zero_coupling():
    p = _params(64, 0.0)
    assert polymer.psi_exact(p, 2, 5) == pytest.approx(1.0, abs=1e-14)
    assert polymer.psi_exact(p, 3, 3) == pytest.approx(1.0, abs=1e-14)


def test_psi_pair_one_step(params_half):
    assert polymer.psi_exact(params_half, 2, 1) == pytest.approx(
        1 + params_half.sigma_N_sq / 4, rel=1e-14)


def test_psi_odd_offset_never_meets(params_half):
    assert polymer.psi_exact(params_half, 2, 5,
                             X=((0, 0), (1, 0))) == 1.0


def test_chaos_enumeration_matches_transfer(params_half):
    for T in (0, 1, 2, 3, 4):
        c = polymer.chaos_enumerate(params_half, T)
        psi = polymer.psi_exact(params_half, 2, T)
        assert c == pytest.approx(psi, rel=1e-10)


def test_chaos_enumeration_offset_start(params_half):
    for X in (((0, 0), (1, 1)), ((0, 0), (2, 0))):
        c = polymer.chaos_enumerate(params_half, 4, X=X)
        psi = polymer.psi_exact(params_half, 2, 4, X=X)
        assert c == pytest.approx(psi, rel=1e-10)


def test_chaos_hand_value(params_half):
    got = polymer.chaos_enumerate(params_half, 1)
    assert got == pytest.approx(1 + params_half.sigma_N_sq / 4, rel=1e-12)


def test_no_triple_below_psi(params_half):
    for T in range(0, 6):
        for X in (((0, 0), (0, 0), (0, 0)), ((0, 0), (1, 1), (2, 0))):
            nt = polymer.no_triple_moment_exact(params_half, T, X=X)
            psi = polymer.psi_exact(params_half, 3, T, X=X)
            assert nt <= psi * (1 + 1e-12)


def test_no_triple_zero_coupling_is_probability():
    p = _params(64, 0.0)
    for T in (1, 2, 4):
        v = polymer.no_triple_moment_exact(p, T)
        assert 0 < v <= 1
    # T = 0 has an empty time range
    assert polymer.no_triple_moment_exact(p, 0) == 1.0


def test_short_time_moment_bound():
    # exact pair moment against the rough short-horizon estimate with a
    # 50% inflation slot (measured inflation is far below it, often < 0)
    p = _params(10 ** 6, 0.5)
    for k in (2, 4, 8):
        exact = polymer.second_moment_exact(p, k)
        bound = math.exp((1 + 0.5) / math.pi * 4 * p.beta_N_sq
                         * math.log(k + 1))
        assert exact <= bound


def test_capacity_guards(params_half):
    with pytest.raises(CapacityError):
        polymer.psi_exact(params_half, 2, 1000)
    with pytest.raises(CapacityError):
        polymer.psi_exact(params_half, 3, 50)
    with pytest.raises(CapacityError):
        polymer.chaos_enumerate(params_half, 12)
    with pytest.raises(ValueError):
        polymer.psi_exact(params_half, 4, 2)
