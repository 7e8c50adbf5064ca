"""Experiment runners behind the CLI subcommands.

Each runner consumes a validated :class:`ExperimentConfig` and returns a
payload of tabular rows plus pass/fail checks and scalar measurements;
the CLI persists those uniformly (CSV + figure + manifest).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import collisions, diagrams, kernel, khasminskii, polymer, renewal, \
    scaling, stats
from .config import ConfigError


@dataclass
class RunPayload:
    columns: list
    rows: list
    checks: list = field(default_factory=list)        # (name, passed, detail)
    measurements: list = field(default_factory=list)  # (name, value, stderr)
    metadata: dict = field(default_factory=dict)


def _require(cfg, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(
            f"experiment {cfg.experiment!r} needs options: {missing}")


def run_kernel_table(cfg):
    _require(cfg, "max_time")
    scan = kernel.exact_scan(cfg.max_time)
    p2 = kernel.p2n_zero_array(cfg.max_time)
    r = kernel.r_exact_array(cfg.max_time)
    rows = [(n, float(scan.pstar[n]), float(p2[n]), float(r[n]))
            for n in range(1, cfg.max_time + 1)]
    return RunPayload(columns=["n", "pstar", "p2n_zero", "partial_r"],
                      rows=rows,
                      metadata={"max_time": cfg.max_time})


def run_check_pnstar(cfg):
    _require(cfg, "max_time")
    scan = kernel.exact_scan(cfg.max_time)
    rep = kernel.check_pnstar_bound(scan.pstar)
    rows = [(n, ps, bound, ratio, int(ratio <= 1.0))
            for (n, ps, bound, ratio) in rep.rows]
    pl = RunPayload(
        columns=["n", "pstar", "bound", "ratio", "pass"], rows=rows,
        metadata={"max_time": cfg.max_time})
    pl.checks.append(("pstar_bound", rep.first_violation is None,
                      f"max ratio {rep.max_ratio:.6f}"))
    pl.checks.append(("monotone_even_sequence", rep.monotone_a, ""))
    pl.checks.append(("monotone_odd_sequence", rep.monotone_b, ""))
    pl.measurements.append(("max_ratio", rep.max_ratio, None))
    return pl


def run_un(cfg):
    _require(cfg, "m", "n", "beta_hat")
    params = scaling.make_params(cfg.n, cfg.beta_hat)
    table = renewal.build_un(params, cfg.m)
    bh2 = params.beta_hat ** 2
    logn = params.log_N
    rows = []
    for n in range(0, cfg.m + 1):
        rho = (table.u[n] * n * logn
               * (1 - bh2 * math.log(max(n, 1)) / logn) ** 2 / bh2
               if bh2 > 0 and n >= 1 else float("nan"))
        rows.append((n, float(table.step_w[n]) if n else 0.0,
                     float(table.u[n]), float(table.partial[n]), rho))
    pl = RunPayload(columns=["n", "w", "u", "partial_sum", "rho"], rows=rows,
                    metadata={"n_scale": cfg.n, "beta_hat": cfg.beta_hat})
    if cfg.beta_hat > 0:
        rep = renewal.check_un_bounds(
            table, params, rho_cap=cfg.tolerance("rho_cap"),
            band=(cfg.tolerance("rho_band_lo"), cfg.tolerance("rho_band_hi")))
        pl.checks.append(("overlap_shape", rep.passed,
                          f"band {rep.band} above n={rep.band_floor}"))
    return pl


def run_second_moment(cfg):
    _require(cfg, "m", "n", "beta_hat")
    params = scaling.make_params(cfg.n, cfg.beta_hat)
    prof = polymer.second_moment_profile(params, cfg.m)
    table = renewal.build_un(params, cfg.m)
    rvals = kernel.r_exact_array(cfg.m)
    rows = []
    ok_bound = True
    for n in range(0, cfg.m + 1):
        occ = params.sigma_N_sq * rvals[n]
        bound = 1.0 / (1.0 - occ) if occ < 1 else float("inf")
        if prof[n] > bound * (1 + 1e-12):
            ok_bound = False
        rows.append((n, float(prof[n]), float(table.partial[n]), bound))
    rel = max(abs(prof[n] - table.partial[n]) / prof[n]
              for n in range(cfg.m + 1))
    tol = cfg.tolerance("identity_rel")
    pl = RunPayload(
        columns=["n", "second_moment", "renewal_partial_sum",
                 "geometric_bound"],
        rows=rows, metadata={"n_scale": cfg.n, "beta_hat": cfg.beta_hat})
    pl.checks.append(("partial_sum_identity", rel <= tol, f"max rel {rel:.2e}"))
    pl.checks.append(("geometric_series_bound", ok_bound, ""))
    pl.measurements.append(("max_identity_rel_err", rel, None))
    return pl


def run_moment_mc(cfg):
    _require(cfg, "q", "n", "beta_hat", "samples", "seed")
    params = scaling.make_params(cfg.n, cfg.beta_hat)
    est = collisions.moment_mc(params, cfg.q, cfg.n, cfg.samples, cfg.seed,
                               workers=cfg.threads)
    limit = math.exp(math.comb(cfg.q, 2) * params.lambda_sq)
    rows = [(cfg.n, cfg.q, est.mean, est.stderr, est.median_of_means,
             est.mean / limit, est.stderr / limit)]
    pl = RunPayload(
        columns=["n", "q", "moment", "stderr", "median_of_means",
                 "ratio_to_limit", "ratio_stderr"],
        rows=rows,
        # thread count deliberately left out: results are worker-invariant
        metadata={"beta_hat": cfg.beta_hat, "samples": cfg.samples,
                  "seed": cfg.seed})
    pl.measurements.append(("moment", est.mean, est.stderr))
    if cfg.q == 2:
        exact = renewal.second_moment_renewal(params, cfg.n)
        z = abs(est.mean - exact) / est.stderr if est.stderr else 0.0
        sig = cfg.tolerance("sigma_rule")
        pl.checks.append(("pair_moment_vs_exact", z <= sig,
                          f"z = {z:.2f}, exact {exact:.8f}"))
        pl.measurements.append(("exact_pair_moment", exact, None))
    return pl


def run_moment_exact(cfg):
    _require(cfg, "q", "t", "beta_hat", "n")
    params = scaling.make_params(cfg.n, cfg.beta_hat)
    rows = []
    if cfg.q == 2:
        psi = polymer.psi_exact(params, 2, cfg.t)
        m2 = polymer.second_moment_exact(params, cfg.t)
        rows.append((cfg.t, cfg.q, psi, m2, float("nan")))
        detail = f"|psi - transfer| = {abs(psi - m2):.2e}"
        pl = RunPayload(
            columns=["t", "q", "product_form", "transfer", "no_triple"],
            rows=rows, metadata={"n_scale": cfg.n, "beta_hat": cfg.beta_hat})
        pl.checks.append(("product_vs_transfer",
                          abs(psi - m2) <= cfg.tolerance("identity_rel")
                          * abs(m2), detail))
        return pl
    if cfg.q == 3:
        psi = polymer.psi_exact(params, 3, cfg.t)
        nt = polymer.no_triple_moment_exact(params, cfg.t)
        rows.append((cfg.t, cfg.q, psi, float("nan"), nt))
        pl = RunPayload(
            columns=["t", "q", "product_form", "transfer", "no_triple"],
            rows=rows, metadata={"n_scale": cfg.n, "beta_hat": cfg.beta_hat})
        pl.checks.append(("no_triple_below_product", nt <= psi * (1 + 1e-12),
                          f"{nt:.8f} <= {psi:.8f}"))
        return pl
    raise ConfigError("exact moments available for q in {2, 3}")


def run_erdos_taylor(cfg):
    _require(cfg, "n", "samples", "seed")
    s = collisions.erdos_taylor_stat(cfg.n, cfg.samples, cfg.seed,
                                     workers=cfg.threads)
    mean, se = stats.mean_stderr(s)
    exact = collisions.erdos_taylor_exact_mean(cfg.n)
    ks = stats.ks_distance(s, "exp1")
    rows = [(i, float(v)) for i, v in enumerate(s)]
    pl = RunPayload(columns=["sample", "stat"], rows=rows,
                    metadata={"n": cfg.n, "samples": cfg.samples,
                              "seed": cfg.seed})
    z = abs(mean - exact) / se
    pl.checks.append(("mean_vs_exact", z <= cfg.tolerance("sigma_rule"),
                      f"mean {mean:.5f} exact {exact:.5f} z {z:.2f}"))
    pl.measurements.append(("mean", mean, se))
    pl.measurements.append(("exact_mean", exact, None))
    pl.measurements.append(("ks_to_exp1", ks, None))
    return pl


def run_gaussian_limit(cfg):
    _require(cfg, "n", "beta_hat", "samples", "seed")
    params = scaling.make_params(cfg.n, cfg.beta_hat)
    logw = polymer.partition_log_batch(cfg.seed, cfg.samples,
                                       [params.beta_N], cfg.n, [cfg.n])
    lw = logw[:, 0, 0]
    w = np.exp(lw)
    rows = [(i, float(w[i]), float(lw[i])) for i in range(len(w))]
    mean, se = stats.mean_stderr(w)
    z = abs(mean - 1.0) / se
    pl = RunPayload(columns=["sample", "w", "log_w"], rows=rows,
                    metadata={"n": cfg.n, "beta_hat": cfg.beta_hat,
                              "samples": cfg.samples, "seed": cfg.seed})
    pl.checks.append(("martingale_mean", z <= cfg.tolerance("sigma_rule"),
                      f"mean {mean:.5f} z {z:.2f}"))
    pl.measurements.append(("mean_w", mean, se))
    pl.measurements.append(("mean_log_w", *stats.mean_stderr(lw)))
    pl.measurements.append(("ks_log_w_to_matched_normal",
                            stats.ks_distance(
                                lw, ("normal", lw.mean(), lw.var())), None))
    return pl


def run_chaos_oracle(cfg):
    _require(cfg, "t", "beta_hat", "n")
    params = scaling.make_params(cfg.n, cfg.beta_hat)
    rows = []
    ok = True
    tol = cfg.tolerance("identity_rel")
    for t in range(0, cfg.t + 1):
        c = polymer.chaos_enumerate(params, t)
        psi = polymer.psi_exact(params, 2, t)
        rel = abs(c - psi) / psi
        ok = ok and rel <= tol
        rows.append((t, c, psi, rel))
    pl = RunPayload(columns=["t", "series", "product_form", "rel_err"],
                    rows=rows,
                    metadata={"n_scale": cfg.n, "beta_hat": cfg.beta_hat})
    pl.checks.append(("series_vs_product_form", ok, f"tol {tol}"))
    return pl


def run_diagrams(cfg):
    _require(cfg, "q", "m", "l")
    check = cfg.check or "lemmas"
    rows = []
    checks = []
    if check == "lemmas":
        bad = []
        tot = 0
        for mm in range(0, cfg.m + 1):
            for d in diagrams.enumerate_diagrams(cfg.q, mm):
                tot += 1
                v = diagrams.structure_violations(diagrams.classify(d, cfg.l))
                if v:
                    bad.append((d.couples, v))
        checks.append(("structure_lemmas", not bad,
                       f"{tot} diagrams checked"))
        rows = [(str(c), "; ".join(v)) for c, v in bad] or [("-", "all pass")]
        cols = ["diagram", "violations"]
    elif check == "counts":
        ok_all = True
        cols = ["m", "enumerated", "formula"]
        for mm in range(0, cfg.m + 1):
            got = sum(1 for _ in diagrams.enumerate_diagrams(cfg.q, mm))
            want = diagrams.count_diagrams(cfg.q, mm)
            ok_all = ok_all and got == want
            rows.append((mm, got, want))
        checks.append(("diagram_count_formula", ok_all, ""))
        okb, brows = diagrams.small_jump_count_bound(cfg.q, cfg.m, cfg.l)
        checks.append(("small_jump_count_bound", okb, str(brows)))
    elif check == "coeffs":
        bad = []
        tot = 0
        for mm in range(1, cfg.m + 1):
            for d in diagrams.enumerate_diagrams(cfg.q, mm):
                cd = diagrams.classify(d, cfg.l)
                v = diagrams.coeff_bound_violations(cd)
                tot += 1
                if v:
                    bad.append((d.couples, v))
        checks.append(("coefficient_bound", not bad, f"{tot} diagrams"))
        rows = [(str(c), str(v)) for c, v in bad] or [("-", "all pass")]
        cols = ["diagram", "violations"]
    elif check == "fibo":
        _require(cfg, "t", "beta_hat", "n")
        params = scaling.make_params(cfg.n, cfg.beta_hat)
        tot, viol = _induction_sweep(params, cfg.q, cfg.m, cfg.t, cfg.l)
        checks.append(("induction_inequality", viol == 0,
                       f"{tot} instances"))
        rows = [(tot, viol)]
        cols = ["instances", "violations"]
    else:
        raise ConfigError(f"unknown diagrams check {check!r}")
    return RunPayload(columns=cols, rows=rows, checks=checks,
                      metadata={"q": cfg.q, "m": cfg.m, "l": cfg.l,
                                "check": check})


def _induction_sweep(params, q_max, m_max, T, L):
    tot = viol = 0
    for q in range(2, q_max + 1):
        for m in range(2, m_max + 1):
            for d in diagrams.enumerate_diagrams(q, m):
                cd = diagrams.classify(d, L)
                tab = diagrams.coeff_table(cd)
                for k in range(1, m):
                    for pre in diagrams._suffix_tuples(m - k, T - k):
                        lhs = diagrams.bound_sum_lhs(cd, params, T, k, pre)
                        rhs = diagrams.bound_sum_rhs(cd, params, T, k, pre,
                                                     tab)
                        tot += 1
                        if lhs > rhs * (1 + 1e-12):
                            viol += 1
    return tot, viol


def run_khas(cfg):
    _require(cfg, "mode", "k", "seed")
    mode = cfg.mode
    rows = []
    checks = []
    if mode == "mod":
        _require(cfg, "kappa_sq")
        kt = kernel.build_kernel(cfg.k)
        Z = khasminskii.random_adversary_path(cfg.seed, 0, cfg.k)
        rep = khasminskii.check_mod_khas(kt, cfg.kappa_sq, Z)
        rows.append((rep.eta, rep.sup_moment, rep.bound,
                     rep.sup_moment_from0))
        cols = ["eta", "sup_moment", "bound", "sup_moment_from_time0"]
        checks.append(("walk_vs_path_bound",
                       rep.passed or rep.eta >= 1,
                       f"eta {rep.eta:.4f}"))
    elif mode in ("thm", "cor"):
        spec = khasminskii.random_chain(cfg.seed, 0, horizon=cfg.k)
        rep = khasminskii.check_discrete_khas(
            spec, "theorem" if mode == "thm" else "corollary")
        rows.append((rep.eta, rep.sup_moment, rep.bound))
        cols = ["eta", "sup_moment", "bound"]
        checks.append((f"chain_bound_{mode}", rep.passed,
                       f"applicable {rep.applicable}"))
    else:
        raise ConfigError("mode must be mod, thm or cor")
    return RunPayload(columns=cols, rows=rows, checks=checks,
                      metadata={"mode": mode, "k": cfg.k, "seed": cfg.seed})


def run_max_bound(cfg):
    _require(cfg, "gamma", "beta_hat")
    d, qr, adm = scaling.chebyshev_max_exponent(cfg.gamma, cfg.beta_hat)
    pl = RunPayload(
        columns=["delta_star", "q_over_sqrt_log_n", "admissible"],
        rows=[(d, qr, int(adm))],
        metadata={"gamma": cfg.gamma, "beta_hat": cfg.beta_hat})
    pl.measurements.append(("delta_star", d, None))
    return pl


RUNNERS = {
    "kernel-table": run_kernel_table,
    "check-pnstar": run_check_pnstar,
    "un": run_un,
    "second-moment": run_second_moment,
    "moment-mc": run_moment_mc,
    "moment-exact": run_moment_exact,
    "erdos-taylor": run_erdos_taylor,
    "gaussian-limit": run_gaussian_limit,
    "chaos-oracle": run_chaos_oracle,
    "diagrams": run_diagrams,
    "khas": run_khas,
    "max-bound": run_max_bound,
}
