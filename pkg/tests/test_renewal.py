import math

import numpy as np
import pytest

from polymer2d import polymer, renewal, scaling


def test_first_values(params_half):
    t = renewal.build_un(params_half, 8)
    s = params_half.sigma_N_sq
    assert t.u[0] == 1.0
    assert t.u[1] == pytest.approx(s / 4, rel=1e-14)
    assert t.u[2] == pytest.approx(s * 9 / 64 + s * s / 16, rel=1e-14)


def test_zero_disorder():
    p = scaling.make_params(64, 0.0)
    t = renewal.build_un(p, 10)
    assert np.all(t.u[1:] == 0.0)
    assert t.partial[10] == 1.0


def test_first_renewal_lower_bound(params_half):
    t = renewal.build_un(params_half, 32)
    assert np.all(t.u[1:] >= t.step_w[1:])


def test_renewal_equation_residual(params_half):
    t = renewal.build_un(params_half, 64)
    w, u = t.step_w, t.u
    for n in range(1, 65):
        conv = w[n] + np.dot(w[1:n], u[1:n][::-1])
        assert abs(u[n] - conv) < 1e-12


def test_partial_sum_identity(params_half):
    t = renewal.build_un(params_half, 64)
    prof = polymer.second_moment_profile(params_half, 64)
    rep = renewal.check_partial_sum_identity(t, params_half,
                                             [0, 1, 4, 16, 64], prof)
    assert rep.passed
    assert all(r[3] <= 1e-10 for r in rep.rows)


def test_partial_sum_hand_value(params_half):
    t = renewal.build_un(params_half, 1)
    assert t.partial[1] == pytest.approx(1 + params_half.sigma_N_sq / 4,
                                         rel=1e-14)


def test_cdq_agrees_with_direct():
    p = scaling.make_params(4096, 0.5)
    a = renewal.build_un(p, 2048, method="direct")
    b = renewal.build_un(p, 2048, method="fft")
    assert np.max(np.abs(a.u - b.u) / a.u) < 1e-10


def test_un_bounds_report():
    p = scaling.make_params(10 ** 6, 0.5)
    t = renewal.build_un(p, 10 ** 4)
    rep = renewal.check_un_bounds(t, p)
    assert rep.passed
    rho1 = rep.rows[0][2]
    # leading term sigma^2 p_2(0) log N / beta^2 ~ pi/4
    assert rho1 == pytest.approx(math.pi / 4, rel=0.05)
    large = [rho for n, _, rho in rep.rows if n >= 1000]
    assert large and all(0.5 <= r <= 2.0 for r in large)


def test_un_bounds_small_disorder_limit():
    # beta -> 0 at fixed n: the shape ratio tends to pi n p_{2n}(0) -> 1
    from polymer2d import kernel
    p = scaling.make_params(10 ** 6, 0.01)
    t = renewal.build_un(p, 2000)
    n = 1500
    rho = (t.u[n] * n * p.log_N
           * (1 - p.beta_hat ** 2 * math.log(n) / p.log_N) ** 2
           / p.beta_hat ** 2)
    direct = math.pi * n * kernel.p2n_zero_array(n)[n]
    assert rho == pytest.approx(direct, rel=0.02)
    assert direct == pytest.approx(1.0, rel=0.01)


def test_second_moment_renewal_matches_transfer(params_half):
    a = renewal.second_moment_renewal(params_half, 48)
    b = polymer.second_moment_exact(params_half, 48)
    assert a == pytest.approx(b, rel=1e-12)


def test_spatial_tables_sum_to_scalar(params_half):
    sp = renewal.build_un_spatial(params_half, 64)
    t = renewal.build_un(params_half, 64)
    for n in range(1, 65):
        assert sp[n].sum() == pytest.approx(t.u[n], rel=1e-10)


def test_spatial_capacity():
    with pytest.raises(Exception):
        renewal.build_un_spatial(scaling.make_params(128, 0.5), 100)


def test_horizon_guard(params_half):
    with pytest.raises(ValueError):
        renewal.build_un(params_half, 100)  # M > N


def test_process_and_tau_sampling():
    p = scaling.make_params(512, 0.5)
    proc = renewal.make_renewal_process(p)
    assert proc.pmf[1:].sum() == pytest.approx(1.0, abs=1e-12)
    assert proc.mass == pytest.approx(p.sigma_N_sq * p.R_N, rel=1e-12)
    taus = renewal.sample_tau(proc, 3, 5000, seed=21)
    assert taus.min() >= 3
    # one-step law sanity: empirical pmf of T within 5 sigma per bin
    steps = renewal.sample_steps(proc, 40_000, seed=22)
    for n in (1, 2, 3):
        phat = (steps == n).mean()
        se = math.sqrt(proc.pmf[n] * (1 - proc.pmf[n]) / len(steps))
        assert abs(phat - proc.pmf[n]) < 5 * se


def test_un_reconstruction_mc():
    p = scaling.make_params(512, 0.5)
    t = renewal.build_un(p, 256)
    rows = renewal.un_reconstruction_mc(p, t, (5, 20, 100), 60_000, seed=31)
    for n, est, se, exact, tail in rows:
        assert abs(est - exact) <= 3 * se + tail


def test_dickman_ratio_reported():
    p = scaling.make_params(512, 0.5)
    c, arg, rows = renewal.dickman_ratio_mc(p, 40_000, seed=41,
                                            n_max=200, k_max=10)
    assert np.isfinite(c) and c > 0
    assert c <= 10.0  # report-only default threshold
    assert rows
