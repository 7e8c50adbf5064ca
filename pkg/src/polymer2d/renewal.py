"""Two-walk overlap weights and their renewal structure.

U(n) is the weight of a replica stretch of length n ending in a
collision: sigma^2 times the exponential pair-collision functional of
the difference walk pinned to the origin at time n.  It solves the
discrete renewal equation U = w + w * U with step weight
w(n) = sigma^2 p_{2n}(0), which is how the table is built; partial sums
of U reproduce the exact second moment, and normalizing the step weight
turns U into a killed renewal process amenable to direct sampling.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernel as _kernel
from ._hash import key3, uniforms
from .kernel import CapacityError


@dataclass(frozen=True)
class RenewalTable:
    horizon: int
    step_w: np.ndarray     # w(n) = sigma^2 p_{2n}(0), entry 0 unused
    u: np.ndarray          # U(n), n = 0..horizon, U(0) = 1
    partial: np.ndarray    # sum_{m<=n} U(m)


def build_un(params, M, method="auto", budget_bytes=_kernel.DEFAULT_BUDGET_BYTES):
    """Solve the renewal recursion U(n) = sum_{m<n} w(n-m) U(m), U(0)=1."""
    if M < 0:
        raise ValueError("M must be >= 0")
    if M > params.N:
        raise ValueError("table horizon cannot exceed N")
    if 40 * M > budget_bytes:
        raise CapacityError(f"renewal table at M={M} too large")
    w = params.sigma_N_sq * _kernel.p2n_zero_array(M)
    w[0] = 0.0
    if method == "auto":
        method = "direct" if M <= 20_000 else "fft"
    if method == "direct":
        u = _solve_direct(w, M)
    elif method == "fft":
        u = _solve_cdq(w, M)
    else:
        raise ValueError(f"unknown method {method!r}")
    return RenewalTable(horizon=M, step_w=w, u=u, partial=np.cumsum(u))


def _solve_direct(w, M):
    u = np.empty(M + 1)
    u[0] = 1.0
    for n in range(1, M + 1):
        u[n] = np.dot(w[1:n + 1][::-1], u[:n])
    return u


def _solve_cdq(w, M):
    """Divide-and-conquer convolution solve; agrees with the direct path."""
    u = np.empty(M + 1)
    u[0] = 1.0
    acc = w.copy()  # the m = 0 term of each U(n)

    def solve(lo, hi):
        if hi - lo == 1:
            u[lo] = acc[lo]
            return
        mid = (lo + hi) // 2
        solve(lo, mid)
        seg_u = u[lo:mid]
        seg_w = w[1:hi - lo]
        if len(seg_u) * len(seg_w) > 65536:
            size = len(seg_u) + len(seg_w) - 1
            nfft = 1 << (size - 1).bit_length()
            conv = np.fft.irfft(np.fft.rfft(seg_u, nfft)
                                * np.fft.rfft(seg_w, nfft), nfft)[:size]
        else:
            conv = np.convolve(seg_u, seg_w)
        for t in range(len(conv)):
            n = lo + 1 + t
            if mid <= n < hi:
                acc[n] += conv[t]
        solve(mid, hi)

    if M >= 1:
        solve(1, M + 1)
    return u


def second_moment_renewal(params, M, table=None):
    """E[W_M^2] through the partial-sum identity of the renewal table."""
    if table is None or table.horizon < M:
        table = build_un(params, M)
    return float(table.partial[M])


@dataclass(frozen=True)
class PartialSumReport:
    rows: list        # (M, renewal_sum, transfer_value, rel_err)
    passed: bool
    tol: float


def check_partial_sum_identity(table, params, horizons, transfer_profile,
                               tol=1e-10):
    """Partial sums of U against an independently computed E[W_M^2].

    ``transfer_profile`` maps k -> E[W_k^2] (array indexed by k).
    """
    rows = []
    ok = True
    for M in horizons:
        lhs = float(table.partial[M])
        rhs = float(transfer_profile[M])
        rel = abs(lhs - rhs) / rhs
        ok = ok and rel <= tol
        rows.append((M, lhs, rhs, rel))
    return PartialSumReport(rows=rows, passed=ok, tol=tol)


@dataclass(frozen=True)
class UnBoundsReport:
    rows: list        # (n, u_n, rho_n)
    passed: bool
    rho_cap: float
    band: tuple
    band_floor: int


def check_un_bounds(table, params, grid=None, rho_cap=10.0,
                    band=(0.5, 2.0), band_floor=1000):
    """Shape of U(n) against its sharp large-n form.

    rho(n) = U(n) * n * log N * (1 - bh^2 log n/log N)^2 / bh^2 should stay
    bounded for all n and settle into ``band`` (tending to 1) once n is
    large; the band is an artifact policy, not a theorem constant.
    """
    if params.beta_hat == 0:
        raise ValueError("bounds check needs beta_hat > 0")
    M = table.horizon
    if grid is None:
        grid = sorted({int(g) for g in np.geomspace(1, M, 40)})
    bh2 = params.beta_hat ** 2
    logn = math.log(params.N)
    rows = []
    ok = True
    for n in grid:
        rho = (table.u[n] * n * logn
               * (1.0 - bh2 * math.log(n) / logn) ** 2 / bh2)
        rows.append((n, float(table.u[n]), float(rho)))
        if rho > rho_cap:
            ok = False
        if n >= band_floor and not band[0] <= rho <= band[1]:
            ok = False
    return UnBoundsReport(rows=rows, passed=ok, rho_cap=rho_cap, band=band,
                          band_floor=band_floor)


# ---------------------------------------------------------------------------
# renewal-process sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RenewalProcess:
    """Normalized step law P(T = n) = p_{2n}(0)/R_N on 1..N."""

    N: int
    pmf: np.ndarray     # index 0 unused
    cdf: np.ndarray
    mass: float         # sigma^2 R_N carried per renewal


def make_renewal_process(params):
    p = _kernel.p2n_zero_array(params.N)
    p[0] = 0.0
    r = p.sum()
    pmf = p / r
    return RenewalProcess(N=params.N, pmf=pmf, cdf=np.cumsum(pmf),
                          mass=params.sigma_N_sq * r)


def sample_steps(process, count, seed, stream=0):
    """i.i.d. step draws T_i by inverse CDF on hashed uniforms."""
    u = uniforms(key3(np.uint64(seed), np.uint64(0x7A0), np.uint64(stream)),
                 count)
    # cdf[k] = P(T <= k) with cdf[0] = 0: searchsorted returns T itself
    return np.searchsorted(process.cdf, u)


def sample_tau(process, k, count, seed):
    """Renewal times tau_k = T_1 + ... + T_k, ``count`` independent copies."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = np.zeros(count, dtype=np.int64)
    for i in range(k):
        out += sample_steps(process, count, seed, stream=i)
    return out


def un_reconstruction_mc(params, table, ns, samples, seed, k_max=20):
    """Monte Carlo rebuild of U(n) = sum_k mass^k P(tau_k = n).

    Returns rows (n, u_mc, stderr, u_table, tail_bound); the per-sample
    variable Y = sum_k mass^k 1{tau_k = n} gives an honest stderr.
    """
    proc = make_renewal_process(params)
    taus = np.zeros(samples, dtype=np.int64)
    tau_by_k = np.empty((k_max, samples), dtype=np.int64)
    for k in range(k_max):
        taus = taus + sample_steps(proc, samples, seed, stream=k)
        tau_by_k[k] = taus
    mass_pows = proc.mass ** np.arange(1, k_max + 1)
    tail = (proc.mass ** (k_max + 1)) / (1.0 - proc.mass) \
        if proc.mass < 1 else math.inf
    rows = []
    for n in ns:
        y = (mass_pows[:, None] * (tau_by_k == n)).sum(axis=0)
        est = float(y.mean())
        se = float(y.std(ddof=1) / math.sqrt(samples))
        rows.append((n, est, se, float(table.u[n]), tail))
    return rows


def dickman_ratio_mc(params, samples, seed, n_max=1000, k_max=20):
    """Measured constant in P(tau_k = n) <= C k P(T=n) P(T<=n)^(k-1).

    Returns (C_point, argmax (k, n), rows of per-k maxima with Wilson
    half-widths); report-only, thresholds are configuration.
    """
    proc = make_renewal_process(params)
    taus = np.zeros(samples, dtype=np.int64)
    best = 0.0
    arg = (0, 0)
    rows = []
    for k in range(1, k_max + 1):
        taus = taus + sample_steps(proc, samples, seed, stream=k - 1)
        counts = np.bincount(taus[taus <= n_max], minlength=n_max + 1)
        ns = np.nonzero(counts[k:])[0] + k  # tau_k >= k
        if ns.size == 0:
            rows.append((k, 0.0, 0.0, 0))
            continue
        phat = counts[ns] / samples
        denom = (k * proc.pmf[ns] * np.maximum(proc.cdf[ns - 1], 1e-300)
                 ** (k - 1))
        ratio = phat / denom
        i = int(np.argmax(ratio))
        if ratio[i] > best:
            best = float(ratio[i])
            arg = (k, int(ns[i]))
        half = _wilson_half(counts[ns[i]], samples) / denom[i]
        rows.append((k, float(ratio[i]), float(half), int(ns[i])))
    return best, arg, rows


def _wilson_half(successes, n, z=3.0):
    p = successes / n
    denom = 1.0 + z * z / n
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return half


# ---------------------------------------------------------------------------
# spatial variant (diagnostic, small horizons)
# ---------------------------------------------------------------------------

def _one_dim_laws(n):
    """1D +-1 walk laws q_d for d = 0..n (index k <-> position 2k - d)."""
    laws = [np.ones(1)]
    for d in range(1, n + 1):
        prev = laws[-1]
        cur = np.zeros(d + 1)
        cur[1:] += prev
        cur[:-1] += prev
        cur *= 0.5
        laws.append(cur)
    return laws


def build_un_spatial(params, n_max, cap=64):
    """Spatially resolved overlap weights U(n, x) for n <= n_max.

    Entry n is an (n+1) x (n+1) array over rotated displacement indices
    (iu, iv) with u = 2 iu - n; solved from the squared-kernel renewal
    convolution.  Axis factorization of the squared kernel turns each 2D
    convolution into two banded matrix products.
    """
    if n_max > cap:
        raise CapacityError(f"spatial tables capped at n={cap}")
    laws = _one_dim_laws(n_max)
    q2 = [law * law for law in laws]
    sig = params.sigma_N_sq

    def band(delta, m):
        # maps a grid of extent m+1 to extent m+delta+1 by convolution
        n = m + delta
        c = np.zeros((n + 1, m + 1))
        for a in range(n + 1):
            lo = max(0, a - delta)
            hi = min(m, a)
            c[a, lo:hi + 1] = q2[delta][a - hi:a - lo + 1][::-1]
        return c

    tables = [np.ones((1, 1))]
    for n in range(1, n_max + 1):
        v = sig * np.outer(q2[n], q2[n])
        for m in range(1, n):
            c = band(n - m, m)
            v += sig * (c @ tables[m] @ c.T)
        tables.append(v)
    return tables
