import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from polymer2d import kernel


STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def brute_force_law(n):
    """Exhaustive path enumeration; usable up to n ~ 8."""
    out = {}
    for path in product(STEPS, repeat=n):
        x = (sum(s[0] for s in path), sum(s[1] for s in path))
        out[x] = out.get(x, 0) + 1
    return {x: c / 4 ** n for x, c in out.items()}


def test_one_step_law(kt16):
    for e in STEPS:
        assert kt16.p(1, e) == 0.25
    assert kt16.pstar[1] == 0.25


def test_two_step_law_brute_force(kt16):
    law = brute_force_law(2)
    assert law[(0, 0)] == 0.25
    assert law[(1, 1)] == 0.125
    assert law[(2, 0)] == 0.0625
    for x, p in law.items():
        assert kt16.p(2, x) == pytest.approx(p, abs=1e-15)
    assert kt16.pstar[2] == 0.25


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_small_slabs_brute_force(kt16, n):
    law = brute_force_law(n)
    for x, p in law.items():
        assert kt16.p(n, x) == pytest.approx(p, abs=1e-14)
    # off-support and bad-parity points are exactly zero
    assert kt16.p(n, (n + 1, 0)) == 0.0
    assert kt16.p(n, (n - 1, 0)) == (law.get((n - 1, 0), 0.0))


def test_slab_mass_conservation(kt64):
    for n in range(kt64.max_time + 1):
        assert abs(kt64.slabs[n].sum() - 1.0) < 1e-12


def test_four_step_return(kt16):
    assert kt16.p(4, (0, 0)) == pytest.approx(9 / 64, abs=1e-15)


def test_pstar_monotone_and_even_equals_center(kt64):
    assert np.all(np.diff(kt64.pstar) <= 1e-16)
    for j in range(1, 32):
        assert kt64.pstar[2 * j] == pytest.approx(kt64.p(2 * j, (0, 0)),
                                                  abs=1e-15)


def test_scan_agrees_with_table(kt64):
    scan = kernel.exact_scan(64)
    assert np.allclose(scan.pstar, kt64.pstar, rtol=0, atol=1e-15)
    even = np.arange(0, 65, 2)
    centers = [kt64.p(int(n), (0, 0)) for n in even]
    assert np.allclose(scan.center[even], centers, rtol=0, atol=1e-15)


def test_binomial_return_exact_fractions():
    # cumulative-product evaluation against exact rational arithmetic
    for n in (1, 2, 10, 100, 1000):
        exact = Fraction(math.comb(2 * n, n), 4 ** n) ** 2
        got = kernel.p2n_zero_array(n)[n]
        assert got == pytest.approx(float(exact), rel=1e-13)


def test_r_values():
    assert kernel.r_exact(1) == pytest.approx(0.25, abs=1e-15)
    assert kernel.r_exact(2) == pytest.approx(25 / 64, abs=1e-15)


def test_r_log_ratio_decreases_to_one():
    ratios = [math.pi * kernel.r_exact(n) / math.log(n)
              for n in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6)]
    assert all(1.0 < r < 1.3 for r in ratios)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_r_bounded_by_harmonic_sum(kt64):
    # R_n <= H_n/pi (from p_{2s}(0) <= 1/(pi s)) <= (1 + log n)/pi;
    # the tempting log(n+1)/pi cap is false already at n = 1
    h = 0.0
    for n in range(1, 65):
        h += 1.0 / n
        r = kernel.r_n(kt64, n)
        assert r <= h / math.pi + 1e-15
        assert r <= (1 + math.log(n)) / math.pi + 1e-15
    assert kernel.r_exact(1) > math.log(2) / math.pi


def test_monotone_sequences_and_limit():
    a = kernel.a_sequence(2000)
    b = kernel.b_sequence(2000)
    lim = math.sqrt(2 / math.pi)
    assert np.all(np.diff(a) >= 0)
    assert np.all(np.diff(b) >= 0)
    assert a[-1] < lim and b[-1] < lim


def test_odd_pstar_equals_one_dim_square(kt64):
    odd = kernel.odd_return_to_one(31)
    for j in range(31):
        assert kt64.pstar[2 * j + 1] == pytest.approx(odd[j], rel=1e-13)


def test_pnstar_bound_report():
    scan = kernel.exact_scan(4096)
    rep = kernel.check_pnstar_bound(scan.pstar)
    assert rep.passed
    assert rep.first_violation is None
    assert 0 < rep.max_ratio <= 1
    # the bound tightens: at large n the ratio approaches 1 from below
    assert rep.max_ratio > 0.99


def test_capacity_guard():
    with pytest.raises(kernel.CapacityError):
        kernel.build_kernel(4096)
    with pytest.raises(ValueError):
        kernel.build_kernel(0)


def test_lattice_slab_roundtrip(kt16):
    for n in (1, 2, 5):
        arr = kernel.KernelTable.lattice_slab(kt16, n)
        for x1 in range(-n, n + 1):
            for x2 in range(-n, n + 1):
                assert arr[x1 + n, x2 + n] == kt16.p(n, (x1, x2))


def test_r_n_range_errors(kt16):
    with pytest.raises(ValueError):
        kernel.r_n(kt16, 0)
    with pytest.raises(ValueError):
        kernel.r_n(kt16, 17)
