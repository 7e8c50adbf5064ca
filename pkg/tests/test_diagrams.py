import math

import pytest

from polymer2d import diagrams, kernel, polymer, renewal, scaling
from polymer2d.kernel import CapacityError


def test_counts_match_formula():
    for q in (2, 3, 4):
        for m in range(0, 6):
            got = sum(1 for _ in diagrams.enumerate_diagrams(q, m))
            assert got == diagrams.count_diagrams(q, m)


def test_count_examples():
    assert diagrams.count_diagrams(2, 1) == 1
    assert diagrams.count_diagrams(3, 2) == 6
    assert diagrams.count_diagrams(4, 3) == 150
    # only one couple exists for q = 2: no alternating diagrams
    assert diagrams.count_diagrams(2, 3) == 0


def test_diagram_validation():
    with pytest.raises(ValueError):
        diagrams.Diagram(q=3, couples=((1, 2), (1, 2)))
    with pytest.raises(ValueError):
        diagrams.Diagram(q=2, couples=((1, 3),))
    with pytest.raises(CapacityError):
        list(diagrams.enumerate_diagrams(6, 2))


def test_last_active_example():
    d = diagrams.Diagram(q=3, couples=((1, 2), (1, 3)))
    k1, k2, kb = diagrams.last_active(d.couples, 2)
    assert (k1, k2, kb) == (1, 0, 1)


def test_classification_small_example():
    cd = diagrams.classify(diagrams.Diagram(q=3, couples=((1, 2), (1, 3))), 3)
    assert cd.is_small[1] and cd.is_small[2]
    assert cd.is_bad[1] and cd.is_bad[2]
    assert cd.phi[1] == 1 and cd.phi[2] == 2


def test_all_small_when_m_below_window():
    for d in diagrams.enumerate_diagrams(4, 5):
        cd = diagrams.classify(d, 3)
        assert all(cd.is_small[1:])


def test_handcrafted_long_jump():
    couples = tuple((2 * i + 1, 2 * i + 2) for i in range(6))
    cd = diagrams.classify(diagrams.Diagram(q=14, couples=couples), 3)
    assert cd.is_long[6] and cd.is_fresh[6]
    assert all(cd.is_small[r] for r in range(1, 6))


def test_rejects_small_window():
    d = diagrams.Diagram(q=3, couples=((1, 2), (1, 3)))
    for bad_l in (1, 2):
        with pytest.raises(ValueError):
            diagrams.classify(d, bad_l)


def test_structure_sweep_clean():
    for q in (2, 3, 4):
        for m in range(0, 7):
            for d in diagrams.enumerate_diagrams(q, m):
                assert not diagrams.structure_violations(
                    diagrams.classify(d, 3))


def test_coeff_base_and_worst_case():
    cd = diagrams.classify(diagrams.Diagram(q=3, couples=((1, 2), (1, 3))), 3)
    t = diagrams.coeff_table(cd)
    assert t.c[0] == (1.0, 2.0)
    t2 = diagrams.coeff_table(cd, gamma_mode="all_bad")
    assert t2.c[1] == (1.0, 4.0, 6.0)
    # bound 3^i * prod(1 + gamma): 2, 6, 18 dominates 1, 4, 6
    assert not diagrams.coeff_bound_violations(cd, t2)


def test_coeff_gamma_zero_is_constant():
    # force a diagram with good indices: m = 7 alternating couples over
    # q = 5 walks makes some long jumps; instead check algebra directly
    couples = tuple((1, 2) if r % 2 == 0 else (3, 4) for r in range(7))
    cd = diagrams.classify(diagrams.Diagram(q=4, couples=couples), 3)
    t = diagrams.coeff_table(cd)
    for k in range(1, cd.m):
        if t.gamma[k] == 0:
            assert t.c[k][:k + 1] == t.c[k - 1][:k + 1] if k >= 1 else True


def test_coeff_bound_sweep():
    for q in (3, 4):
        for m in (1, 3, 5, 6):
            for d in diagrams.enumerate_diagrams(q, m):
                cd = diagrams.classify(d, 3)
                assert not diagrams.coeff_bound_violations(cd)


def test_small_jump_count_bound():
    for q in (3, 4):
        for m in (2, 4, 6):
            ok, rows = diagrams.small_jump_count_bound(q, m, 3)
            assert ok
            assert sum(c for _, c, _ in rows) == diagrams.count_diagrams(q, m)


def test_u_tilde_cases():
    # walk 1 stays busy: its last activity is always the previous index
    d = diagrams.Diagram(q=3, couples=((1, 2), (1, 3), (1, 2)))
    cd = diagrams.classify(d, 3)
    us = [0.0, 4.0, 6.0, 2.0]
    assert cd.kbar[2] == 1 and cd.kbar[3] == 2
    assert diagrams.u_tilde(cd, 2, us) == 2.0   # half of u_1
    assert diagrams.u_tilde(cd, 3, us) == 3.0   # half of u_2
    # disjoint middle couple: the reactivated walks skip an index
    d2 = diagrams.Diagram(q=4, couples=((1, 2), (3, 4), (1, 2)))
    cd2 = diagrams.classify(d2, 3)
    assert cd2.kbar[2] == 0 and cd2.kbar[3] == 1
    assert diagrams.u_tilde(cd2, 2, us) == 4.0  # full backlog u_1
    assert diagrams.u_tilde(cd2, 3, us) == 6.0  # full backlog u_2
    with pytest.raises(ValueError):
        diagrams.u_tilde(cd, 1, us)


def test_induction_inequality_enumerated():
    params = scaling.make_params(10 ** 6, 0.3)
    T = 6
    for q in (2, 3):
        for m in (2, 3, 4):
            for d in diagrams.enumerate_diagrams(q, m):
                cd = diagrams.classify(d, 3)
                tab = diagrams.coeff_table(cd)
                for k in range(1, m):
                    for pre in diagrams._suffix_tuples(m - k, T - k):
                        lhs = diagrams.bound_sum_lhs(cd, params, T, k, pre)
                        rhs = diagrams.bound_sum_rhs(cd, params, T, k, pre,
                                                     tab)
                        assert lhs <= rhs * (1 + 1e-12)


def test_empty_budget_gives_zero():
    params = scaling.make_params(10 ** 4, 0.3)
    d = diagrams.Diagram(q=3, couples=((1, 2), (1, 3), (2, 3)))
    cd = diagrams.classify(d, 3)
    # prefix consumes the whole budget: suffix sum is empty
    lhs = diagrams.bound_sum_lhs(cd, params, 4, 2, (3,))
    rhs = diagrams.bound_sum_rhs(cd, params, 4, 2, (3,))
    assert lhs == 0.0
    assert rhs >= 0.0


def test_single_step_inequality():
    params = scaling.make_params(10 ** 6, 0.3)
    T = 6
    for d in diagrams.enumerate_diagrams(3, 4):
        cd = diagrams.classify(d, 3)
        for k in range(0, 3):
            for j in range(0, k + 1):
                for pre in diagrams._suffix_tuples(cd.m - k - 1, T - 1 - k):
                    lhs, rhs = diagrams.induction_step_sides(cd, params, T,
                                                             k, j, pre)
                    assert lhs <= rhs * (1 + 1e-12)


def test_eval_a_chain(params_half):
    params = scaling.make_params(10 ** 6, 0.5)
    T = 8
    rt = renewal.build_un(params, T)
    scan = kernel.exact_scan(5 * T + 1)
    for q, m in ((2, 1), (3, 2), (3, 3)):
        for d in list(diagrams.enumerate_diagrams(q, m))[:4]:
            cd = diagrams.classify(d, 3)
            a = diagrams.eval_a(cd, params, T, rt, scan.pstar)
            at = diagrams.eval_a_tilde(cd, params, T, scan.pstar)
            assert a <= (1 / math.pi) ** (m - 1) * at * (1 + 1e-9)
    # m = 0 convention
    d0 = diagrams.Diagram(q=3, couples=())
    cd0 = diagrams.classify(d0, 3)
    assert diagrams.eval_a(cd0, params, T, rt, scan.pstar) == 1.0


def test_eval_caps():
    params = scaling.make_params(10 ** 4, 0.5)
    rt = renewal.build_un(params, 12)
    scan = kernel.exact_scan(100)
    d = diagrams.Diagram(q=3, couples=((1, 2), (1, 3), (2, 3), (1, 2)))
    cd = diagrams.classify(d, 3)
    with pytest.raises(CapacityError):
        diagrams.eval_a(cd, params, 12, rt, scan.pstar)


def test_exact_sums_reproduce_pair_transfer():
    params = scaling.make_params(10 ** 4, 0.5)
    T = 4
    kt = kernel.build_kernel(T)
    sp = renewal.build_un_spatial(params, T)
    for X in (((0, 0), (0, 0)), ((0, 0), (1, 1))):
        grid = diagrams.make_grid(T, X, kt, sp)
        terms = diagrams.psi_m_terms(params, 2, T, X, 1, grid)
        psi = polymer.psi_exact(params, 2, T, X=X)
        assert sum(terms.values()) == pytest.approx(psi, rel=1e-10)


def test_exact_sums_match_series_grouping():
    params = scaling.make_params(10 ** 4, 0.5)
    T = 3
    kt = kernel.build_kernel(T)
    sp = renewal.build_un_spatial(params, T)
    X = ((0, 0), (0, 0), (0, 0))
    grid = diagrams.make_grid(T, X, kt, sp)
    dterms = diagrams.psi_m_terms(params, 3, T, X, 2, grid)
    cterms = diagrams.chaos_by_m(params, T, X)
    for m in (0, 1, 2):
        assert dterms[m] == pytest.approx(cterms[m], rel=1e-10)
    # truncation undershoots by exactly the higher-alternation tail
    psi = polymer.psi_exact(params, 3, T, X=X)
    tail = sum(v for m, v in cterms.items() if m > 2)
    assert sum(dterms.values()) + tail == pytest.approx(psi, rel=1e-10)


def test_exact_sum_below_space_collapsed_bound():
    params = scaling.make_params(10 ** 4, 0.5)
    T = 4
    kt = kernel.build_kernel(T)
    sp = renewal.build_un_spatial(params, T)
    rt = renewal.build_un(params, T)
    scan = kernel.exact_scan(5 * T + 1)
    X = ((0, 0), (0, 0), (0, 0))
    grid = diagrams.make_grid(T, X, kt, sp)
    for m in (1, 2):
        for d in diagrams.enumerate_diagrams(3, m):
            cd = diagrams.classify(d, 3)
            exact = diagrams.exact_diagram_sum(d, T, X, grid)
            bound = diagrams.eval_a(cd, params, T, rt, scan.pstar)
            assert exact <= bound * (1 + 1e-12)


def test_final_bound_shapes():
    p0 = scaling.make_params(100, 0.0)
    fb0 = diagrams.final_bound(p0, 3, 100, 3)
    assert fb0.r == 0.0 and fb0.bound == 1.0 and fb0.valid

    p1 = scaling.make_params(10 ** 6, 0.1)
    fb1 = diagrams.final_bound(p1, 3, 10 ** 6, 3)
    assert fb1.valid and fb1.condition_ok
    assert fb1.bound > 1

    # growth ratio above one at moderate disorder: flagged invalid
    p3 = scaling.make_params(10 ** 6, 0.3)
    fb3 = diagrams.final_bound(p3, 3, 10 ** 6, 3)
    assert not fb3.valid and fb3.bound == math.inf

    with pytest.raises(ValueError):
        diagrams.final_bound(p1, 4, 10 ** 6, 2)


def test_choose_l_clamps():
    assert diagrams.choose_l(9) == 3
    assert diagrams.choose_l(4) == 3   # ceil(sqrt(4)) = 2 lifted to 3
    assert diagrams.choose_l(17) == 5
