"""Acceptance battery.

Ten numbered criteria, each an independent callable returning a
:class:`CriterionResult`; the CLI ``suite`` subcommand runs them all and
writes one summary row per criterion plus supporting tables.  Sizes,
tolerances and seeds are pinned here, not configurable, so a green run
means the packaged claims hold as stated.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import collisions, diagrams, kernel, khasminskii, polymer, renewal, \
    scaling, stats

SEED = 20260810
SIGMA_RULE = 3.0
IDENTITY_TOL = 1e-10


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    elapsed_s: float
    rows: list = field(default_factory=list)
    columns: list = field(default_factory=list)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] criterion {self.index}: {self.name} "
                f"({self.elapsed_s:.1f}s) {self.detail}")


def _result(index, name, t0, passed, detail, rows=None, columns=None):
    return CriterionResult(index=index, name=name, passed=passed,
                           detail=detail, elapsed_s=time.perf_counter() - t0,
                           rows=rows or [], columns=columns or [])


def criterion_1(threads=1):
    """Kernel supremum bound and monotone binomial sequences."""
    t0 = time.perf_counter()
    scan = kernel.exact_scan(4096)
    rep = kernel.check_pnstar_bound(scan.pstar, monotone_horizon=2000)
    table = kernel.build_kernel(256)
    agree = bool(np.allclose(table.pstar, scan.pstar[:257], rtol=0,
                             atol=1e-15))
    center_ok = bool(np.allclose(
        [table.p(2 * j, (0, 0)) for j in range(129)],
        kernel.p2n_zero_array(128), rtol=1e-12, atol=0))
    elapsed = time.perf_counter() - t0
    passed = (rep.passed and agree and center_ok and elapsed < 60.0)
    detail = (f"max p*_n pi n/2 = {rep.max_ratio:.6f}; 2D/1D convolution "
              f"agree: {agree}; binomial centers agree: {center_ok}; "
              f"runtime {elapsed:.1f}s < 60s")
    rows = [(n, ps, b, r) for (n, ps, b, r) in rep.rows]
    return _result(1, "kernel supremum bound", t0, passed, detail,
                   rows, ["n", "pstar", "bound", "ratio"])


def criterion_2():
    """Renewal partial sums equal transfer pair moments to 1e-10."""
    t0 = time.perf_counter()
    rows = []
    worst = 0.0
    for M in (1, 8, 32, 128):
        for N in (M, 10 * M):
            for bh in (0.3, 0.5, 0.8):
                params = scaling.make_params(max(N, 2), bh)
                prof = polymer.second_moment_profile(params, M)
                table = renewal.build_un(params, M)
                rel = abs(table.partial[M] - prof[M]) / prof[M]
                worst = max(worst, rel)
                rows.append((M, N, bh, float(prof[M]),
                             float(table.partial[M]), rel))
    passed = worst <= IDENTITY_TOL
    return _result(2, "renewal partial-sum identity", t0, passed,
                   f"worst rel err {worst:.2e} <= {IDENTITY_TOL}",
                   rows, ["m", "n_scale", "beta_hat", "transfer",
                          "renewal_sum", "rel_err"])


def criterion_3():
    """Geometric second-moment bound and the large-n two-sided ratio."""
    t0 = time.perf_counter()
    rows = []
    ok = True
    for N in (128, 1280):
        for bh in (0.3, 0.5, 0.8):
            params = scaling.make_params(N, bh)
            prof = polymer.second_moment_profile(params, 128)
            rvals = kernel.r_exact_array(128)
            for n in range(1, 129):
                occ = params.sigma_N_sq * rvals[n]
                if occ < 1 and prof[n] > (1 + 1e-12) / (1 - occ):
                    ok = False
    band = (0.6, 1.4)
    for N in (10 ** 3, 10 ** 4, 10 ** 6):
        for bh in (0.3, 0.5, 0.8):
            params = scaling.make_params(N, bh)
            m2 = renewal.second_moment_renewal(params, 1000)
            ratio = m2 * (1 - bh * bh * math.log(1000) / math.log(N))
            rows.append((N, bh, m2, ratio))
            if not band[0] <= ratio <= band[1]:
                ok = False
    return _result(3, "second-moment bounds", t0, ok,
                   f"geometric bound exact for n <= 128; large-n ratios in "
                   f"{band}: {[round(r[3], 3) for r in rows]}",
                   rows, ["n_scale", "beta_hat", "second_moment", "ratio"])


def criterion_4():
    """Collision-series oracle, diagram truncation, no-triple domination."""
    t0 = time.perf_counter()
    params = scaling.make_params(10 ** 4, 0.5)
    ok = True
    details = []
    for X in (((0, 0), (0, 0)), ((0, 0), (1, 1)), ((0, 0), (2, 0))):
        for T in range(0, 6):
            c = polymer.chaos_enumerate(params, T, X=X)
            psi = polymer.psi_exact(params, 2, T, X=X)
            if abs(c - psi) > IDENTITY_TOL * psi:
                ok = False
    details.append("series oracle == product form (q=2, T<=5)")
    T = 4
    kt = kernel.build_kernel(T)
    sp = renewal.build_un_spatial(params, T)
    X2 = ((0, 0), (0, 0))
    grid = diagrams.make_grid(T, X2, kt, sp)
    terms2 = diagrams.psi_m_terms(params, 2, T, X2, 1, grid)
    psi2 = polymer.psi_exact(params, 2, T, X=X2)
    if abs(sum(terms2.values()) - psi2) > IDENTITY_TOL * psi2:
        ok = False
    X3 = ((0, 0), (0, 0), (0, 0))
    grid3 = diagrams.make_grid(T, X3, kt, sp)
    dterms = diagrams.psi_m_terms(params, 3, T, X3, 2, grid3)
    cterms = diagrams.chaos_by_m(params, T, X3)
    for m in (0, 1, 2):
        if abs(dterms[m] - cterms[m]) > IDENTITY_TOL * max(cterms[m], 1e-30):
            ok = False
    details.append("diagram decomposition == series grouping (m <= 2)")
    for X in (((0, 0), (0, 0), (0, 0)), ((0, 0), (2, 0), (1, 1))):
        for T3 in range(0, 6):
            nt = polymer.no_triple_moment_exact(params, T3, X=X)
            psi3 = polymer.psi_exact(params, 3, T3, X=X)
            if nt > psi3 * (1 + 1e-12):
                ok = False
    details.append("restricted moment below product form (q=3, T<=5)")
    return _result(4, "chaos oracle and diagram truncation", t0, ok,
                   "; ".join(details))


def criterion_5(threads=1):
    """Monte Carlo moment convergence toward the limiting value."""
    t0 = time.perf_counter()
    bh = 0.3
    grid = (2 ** 10, 2 ** 12, 2 ** 14)
    rows = []
    ok = True
    deviations = []
    for N in grid:
        params = scaling.make_params(N, bh)
        limit = math.exp(3 * params.lambda_sq)
        est3 = collisions.moment_mc(params, 3, N, 100_000, SEED,
                                    workers=threads)
        ratio = est3.mean / limit
        deviations.append(abs(ratio - 1.0))
        est2 = collisions.moment_mc(params, 2, N, 30_000, SEED + 1,
                                    workers=threads)
        exact2 = renewal.second_moment_renewal(params, N)
        z2 = abs(est2.mean - exact2) / est2.stderr
        if z2 > SIGMA_RULE:
            ok = False
        rows.append((N, ratio, est3.stderr / limit, est2.mean, exact2, z2))
    if not 0.5 < rows[-1][1] < 1.5:
        ok = False
    if not all(deviations[i + 1] <= deviations[i] + 1e-12
               for i in range(len(deviations) - 1)):
        ok = False
    elapsed = time.perf_counter() - t0
    if elapsed > 600.0:
        ok = False
    return _result(5, "moment convergence", t0, ok,
                   f"|ratio-1| across N: {[f'{d:.4f}' for d in deviations]} "
                   f"(non-increasing); q=2 z-scores "
                   f"{[f'{r[5]:.2f}' for r in rows]}; runtime "
                   f"{elapsed:.0f}s < 600s",
                   rows, ["n", "ratio_to_limit", "ratio_stderr",
                          "pair_mc", "pair_exact", "pair_z"])


def criterion_6(threads=1):
    """Normalized collision counts against the rate-1 exponential."""
    t0 = time.perf_counter()
    rows = []
    ok = True
    last_ks = float("inf")
    for N in (10 ** 3, 3 * 10 ** 4, 10 ** 6):
        s = collisions.erdos_taylor_stat(N, 10_000, SEED + 2,
                                         workers=threads)
        mean, se = stats.mean_stderr(s)
        exact = collisions.erdos_taylor_exact_mean(N)
        z = abs(mean - exact) / se
        ks = stats.ks_distance(s, "exp1")
        if z > SIGMA_RULE or ks >= last_ks:
            ok = False
        last_ks = ks
        rows.append((N, mean, se, exact, z, ks))
    return _result(6, "collision-count exponential limit", t0, ok,
                   f"mean z-scores {[f'{r[4]:.2f}' for r in rows]}; KS "
                   f"{[f'{r[5]:.4f}' for r in rows]} strictly decreasing",
                   rows, ["n", "mean", "stderr", "exact_mean", "z", "ks"])


def criterion_7():
    """Exhaustive diagram suite."""
    t0 = time.perf_counter()
    ok = True
    details = []
    count_ok = True
    for q in (2, 3, 4):
        for m in range(0, 7):
            got = sum(1 for _ in diagrams.enumerate_diagrams(q, m))
            if got != diagrams.count_diagrams(q, m):
                count_ok = False
    details.append(f"counts match formula: {count_ok}")
    ok = ok and count_ok

    struct_bad = coeff_bad = 0
    total = 0
    for q in (2, 3, 4):
        for m in range(0, 7):
            for d in diagrams.enumerate_diagrams(q, m):
                cd = diagrams.classify(d, 3)
                total += 1
                if diagrams.structure_violations(cd):
                    struct_bad += 1
                if m >= 1 and diagrams.coeff_bound_violations(cd):
                    coeff_bad += 1
    details.append(f"{total} diagrams: {struct_bad} structure violations, "
                   f"{coeff_bad} coefficient-bound violations")
    ok = ok and struct_bad == 0 and coeff_bad == 0

    jump_ok = True
    for q in (2, 3, 4):
        for m in range(1, 7):
            okb, _ = diagrams.small_jump_count_bound(q, m, 3)
            jump_ok = jump_ok and okb
    details.append(f"small-jump count bound: {jump_ok}")
    ok = ok and jump_ok

    from .runners import _induction_sweep
    params = scaling.make_params(10 ** 6, 0.3)
    tot, viol = _induction_sweep(params, 4, 4, 6, 3)
    details.append(f"induction inequality: {tot} instances, {viol} "
                   "violations")
    ok = ok and viol == 0
    return _result(7, "diagram suite", t0, ok, "; ".join(details))


def criterion_8():
    """Exponential-moment lemmas on randomized instances."""
    t0 = time.perf_counter()
    chain_fails = khasminskii.chain_suite(500, SEED + 3)
    kt = kernel.build_kernel(16)
    path_fails, reports = khasminskii.path_suite(kt, 100, (4, 8, 16),
                                                 SEED + 4)
    etas = [r.eta for r in reports]
    ok = not chain_fails and not path_fails and max(etas) < 0.95
    return _result(8, "exponential-moment lemmas", t0, ok,
                   f"500 chains, 300 paths, 0 failures expected; got "
                   f"{len(chain_fails)}/{len(path_fails)}; max eta "
                   f"{max(etas):.3f}")


def criterion_9(threads=1):
    """Martingale normalization and environment-MC variance."""
    t0 = time.perf_counter()
    rows = []
    ok = True
    n_env = 2000
    log_means = {}
    for N in (64, 256):
        p_lo = scaling.make_params(N, 0.3)
        p_hi = scaling.make_params(N, 0.5)
        logw = polymer.partition_log_batch(SEED + 5, n_env,
                                           [p_lo.beta_N, p_hi.beta_N],
                                           N, [N])
        for bi, params in ((0, p_lo), (1, p_hi)):
            w = np.exp(logw[:, bi, 0])
            mean, se = stats.mean_stderr(w)
            zm = abs(mean - 1.0) / se
            var, vse = stats.variance_with_stderr(w)
            exact_var = polymer.second_moment_exact(params, N) - 1.0
            zv = abs(var - exact_var) / vse
            lmean, lse = stats.mean_stderr(np.log(w))
            log_means[(N, params.beta_hat)] = lmean
            if zm > SIGMA_RULE or zv > SIGMA_RULE or lmean >= 0:
                ok = False
            rows.append((N, params.beta_hat, mean, se, zm, var, exact_var,
                         zv, lmean))
    for N in (64, 256):
        if not log_means[(N, 0.5)] < log_means[(N, 0.3)] < 0:
            ok = False
    return _result(9, "martingale and log-mean diagnostics", t0, ok,
                   "mean-z " + str([f"{r[4]:.2f}" for r in rows])
                   + "; var-z " + str([f"{r[7]:.2f}" for r in rows])
                   + "; log-means decreasing in disorder strength",
                   rows, ["n", "beta_hat", "mean_w", "stderr", "mean_z",
                          "var_w", "exact_var", "var_z", "mean_log_w"])


def criterion_10(tmp_dir):
    """Byte-identical reruns from config and manifest, any worker count."""
    import filecmp
    import os

    from .config import ExperimentConfig
    from .harness import execute, rerun_from_manifest
    t0 = time.perf_counter()
    ok = True
    details = []
    base = dict(experiment="moment-mc", q=2, n=64, beta_hat=0.5,
                samples=6000, seed=SEED + 6, plot=False)
    out_a = os.path.join(tmp_dir, "a.csv")
    out_b = os.path.join(tmp_dir, "b.csv")
    execute(ExperimentConfig(out=out_a, threads=1, **base))
    execute(ExperimentConfig(out=out_b, threads=2, **base))
    same = filecmp.cmp(out_a, out_b, shallow=False)
    details.append(f"threads 1 vs 2 byte-identical: {same}")
    ok = ok and same
    out_c = os.path.join(tmp_dir, "c.csv")
    _, man = execute(ExperimentConfig(out=out_c, threads=1, **base))
    man_path = out_c.replace(".csv", ".manifest.json")
    out_d = os.path.join(tmp_dir, "d.csv")
    rerun_from_manifest(man_path, out_override=out_d)
    same2 = filecmp.cmp(out_c, out_d, shallow=False)
    details.append(f"manifest rerun byte-identical: {same2}")
    ok = ok and same2
    s1 = collisions.erdos_taylor_stat(500, 5000, SEED + 7, workers=1)
    s2 = collisions.erdos_taylor_stat(500, 5000, SEED + 7, workers=3)
    same3 = bool(np.array_equal(s1, s2))
    details.append(f"sample sets worker-invariant: {same3}")
    ok = ok and same3
    return _result(10, "reproducibility", t0, ok, "; ".join(details))


def run_all(tmp_dir, threads=1, echo=print):
    results = [
        criterion_1(threads),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(threads),
        criterion_6(threads),
        criterion_7(),
        criterion_8(),
        criterion_9(threads),
        criterion_10(tmp_dir),
    ]
    for r in results:
        echo(r.line())
    return results
