"""Partition-function dynamic programming and exact small-system moments.

The forward recursion runs on the parity-reduced diamond in rotated
coordinates (u, v) = (x1 + x2, x1 - x2), where one step of the walk is a
uniform 2x2 stencil.  Exact moments come from transfer operators:

* pair moments through the difference walk (a two-step walk on Z^2),
* triple-walk functionals through the translation-reduced state of the
  two difference vectors, whose rotated axes split into two planes that
  each evolve by a seven-point stencil.

``chaos_enumerate`` evaluates the collision-expansion series directly
from kernel-table slabs and is kept independent of the transfer code so
the two can certify each other on small instances.
"""

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import kernel as _kernel
from ._hash import U64, key2, mix64
from .environment import omega_cell, slab_key
from .kernel import CapacityError


@dataclass(frozen=True)
class PartitionResult:
    value: float
    log_value: float
    mass_profile: np.ndarray | None = None


@nb.njit(cache=True)
def _dp_pair(env_base, N, b1, b2, s1, s2, checkpoints, out1, out2):
    """Forward DP for two couplings sharing one environment.

    out1/out2 receive log W_n at the requested checkpoint times.
    """
    u1 = np.zeros((N + 1, N + 1))
    u2 = np.zeros((N + 1, N + 1))
    u1[0, 0] = 1.0
    u2[0, 0] = 1.0
    c1 = -0.5 * b1 * b1
    c2 = -0.5 * b2 * b2
    log1 = 0.0
    log2 = 0.0
    cp = 0
    for n in range(1, N + 1):
        skey = slab_key(env_base, n)
        m1 = 0.0
        m2 = 0.0
        for i in range(n, -1, -1):
            for j in range(n, -1, -1):
                a = u1[i, j]
                b = u1[i - 1, j] if i > 0 else 0.0
                c = u1[i, j - 1] if j > 0 else 0.0
                d = u1[i - 1, j - 1] if (i > 0 and j > 0) else 0.0
                conv1 = 0.25 * (a + b + c + d)
                a = u2[i, j]
                b = u2[i - 1, j] if i > 0 else 0.0
                c = u2[i, j - 1] if j > 0 else 0.0
                d = u2[i - 1, j - 1] if (i > 0 and j > 0) else 0.0
                conv2 = 0.25 * (a + b + c + d)
                x1 = s1 + (i + j - n)
                x2 = s2 + (i - j)
                z = omega_cell(skey, x1, x2)
                w1 = conv1 * np.exp(b1 * z + c1)
                w2 = conv2 * np.exp(b2 * z + c2)
                u1[i, j] = w1
                u2[i, j] = w2
                m1 += w1
                m2 += w2
        if cp < checkpoints.shape[0] and checkpoints[cp] == n:
            out1[cp] = log1 + np.log(m1)
            out2[cp] = log2 + np.log(m2)
            cp += 1
        # rescale only when mass drifts far from unity (overflow guard)
        if m1 < 1e-120 or m1 > 1e120:
            inv = 1.0 / m1
            for i in range(n + 1):
                for j in range(n + 1):
                    u1[i, j] *= inv
            log1 += np.log(m1)
        if m2 < 1e-120 or m2 > 1e120:
            inv = 1.0 / m2
            for i in range(n + 1):
                for j in range(n + 1):
                    u2[i, j] *= inv
            log2 += np.log(m2)


def partition_dp(env, params, start=(0, 0), profile=False):
    """W_N(beta_N, start) by exact forward recursion over the diamond."""
    N = params.N
    if env.horizon < N:
        raise ValueError("environment horizon shorter than N")
    _check_dp_capacity(N)
    checkpoints = np.arange(1, N + 1) if profile else np.array([N])
    out1 = np.empty(len(checkpoints))
    out2 = np.empty(len(checkpoints))
    b = params.beta_N
    _dp_pair(env.base, N, b, b, int(start[0]), int(start[1]),
             checkpoints.astype(np.int64), out1, out2)
    logw = float(out1[-1])
    return PartitionResult(value=math.exp(logw), log_value=logw,
                           mass_profile=np.exp(out1) if profile else None)


def partition_log_batch(master_seed, n_envs, betas, N, checkpoints,
                        env_offset=0):
    """log W_n for a block of environments at one or two couplings.

    Environment k uses the stream key2(master_seed, env_offset + k), so a
    block decomposition over workers cannot change any sample.  Returns an
    array of shape (n_envs, len(betas), len(checkpoints)).
    """
    if len(betas) not in (1, 2):
        raise ValueError("betas must hold one or two couplings")
    _check_dp_capacity(N)
    cps = np.asarray(checkpoints, dtype=np.int64)
    b1 = float(betas[0])
    b2 = float(betas[1]) if len(betas) == 2 else float(betas[0])
    out = np.empty((n_envs, len(betas), len(cps)))
    o1 = np.empty(len(cps))
    o2 = np.empty(len(cps))
    for k in range(n_envs):
        env_base = np.uint64(mix64(key2(U64(master_seed),
                                        U64(env_offset + k))))
        _dp_pair(env_base, N, b1, b2, 0, 0, cps, o1, o2)
        out[k, 0] = o1
        if len(betas) == 2:
            out[k, 1] = o2
    return out


def _check_dp_capacity(N, budget_bytes=_kernel.DEFAULT_BUDGET_BYTES):
    need = 2 * 8 * (N + 1) ** 2
    if need > budget_bytes:
        raise CapacityError(f"DP slabs at N={N} need {need} bytes")


# ---------------------------------------------------------------------------
# difference-walk transfer: exact second moments
# ---------------------------------------------------------------------------

# two-step walk law: difference of two independent lattice steps
_P2_STENCIL = (((0, 0), 0.25),
               ((1, 1), 0.125), ((1, -1), 0.125),
               ((-1, 1), 0.125), ((-1, -1), 0.125),
               ((2, 0), 0.0625), ((-2, 0), 0.0625),
               ((0, 2), 0.0625), ((0, -2), 0.0625))


def _stencil_step(v):
    out = np.zeros_like(v)
    n = v.shape[0]
    for (dx, dy), w in _P2_STENCIL:
        sx0, sx1 = max(dx, 0), n + min(dx, 0)
        tx0, tx1 = max(-dx, 0), n + min(-dx, 0)
        sy0, sy1 = max(dy, 0), n + min(dy, 0)
        ty0, ty1 = max(-dy, 0), n + min(-dy, 0)
        out[tx0:tx1, ty0:ty1] += w * v[sx0:sx1, sy0:sy1]
    return out


def second_moment_profile(params, n, budget_bytes=_kernel.DEFAULT_BUDGET_BYTES):
    """E[W_k(beta_N)^2] for k = 0..n via the difference-walk transfer.

    The state is the difference position on Z^2, stepping with the
    two-step walk law (which reaches distance 2n in n steps) and picking
    up weight e^{beta_N^2} at the origin.
    """
    side = 4 * n + 1
    if 8 * side * side > budget_bytes:
        raise CapacityError(f"difference-walk grid at n={n} too large")
    c = 2 * n
    v = np.zeros((side, side))
    v[c, c] = 1.0
    w0 = math.exp(params.beta_N_sq)
    out = np.empty(n + 1)
    out[0] = 1.0
    for k in range(1, n + 1):
        v = _stencil_step(v)
        v[c, c] *= w0
        out[k] = v.sum()
    return out


def second_moment_exact(params, n):
    """E[W_n(beta_N)^2], exact."""
    if n == 0:
        return 1.0
    return float(second_moment_profile(params, n)[n])


# ---------------------------------------------------------------------------
# pair and triple product-form moments (rotated coordinates)
# ---------------------------------------------------------------------------

def _rot(x):
    return x[0] + x[1], x[0] - x[1]


def _axis_step(s, axis):
    # 1D kernel [1/4, 1/2, 1/4] along the given axis
    out = 0.5 * s
    pad = [slice(None)] * s.ndim
    lo = list(pad)
    hi = list(pad)
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    out[tuple(lo)] += 0.25 * s[tuple(hi)]
    out[tuple(hi)] += 0.25 * s[tuple(lo)]
    return out


def _pair_masses(d0, T, weight_at_zero):
    """Per-time masses of the weighted difference walk started at d0."""
    du0, dv0 = d0
    G = 2 * T + 1
    s = np.zeros((G, G))
    s[T, T] = 1.0
    au = T - du0 // 2 if du0 % 2 == 0 else None
    av = T - dv0 // 2 if dv0 % 2 == 0 else None
    hit = (au is not None and 0 <= au < G and av is not None and 0 <= av < G)
    masses = np.empty(T + 1)
    masses[0] = 1.0
    for t in range(1, T + 1):
        s = _axis_step(s, 0)
        s = _axis_step(s, 1)
        if hit:
            s[au, av] *= weight_at_zero
        masses[t] = s.sum()
    return masses


# seven-point kernel for the joint move of (d1, d2) along one rotated axis:
# increments (i1, i2) in {-1,0,1}^2 with opposite-sign corners impossible
_K8 = (((0, 0), 0.25),
       ((1, 1), 0.125), ((-1, -1), 0.125),
       ((1, 0), 0.125), ((-1, 0), 0.125),
       ((0, 1), 0.125), ((0, -1), 0.125))


def _plane_step(s, ax1, ax2):
    out = np.zeros_like(s)
    n1 = s.shape[ax1]
    n2 = s.shape[ax2]
    for (d1, d2), w in _K8:
        src = [slice(None)] * s.ndim
        dst = [slice(None)] * s.ndim
        src[ax1] = slice(max(d1, 0), n1 + min(d1, 0))
        dst[ax1] = slice(max(-d1, 0), n1 + min(-d1, 0))
        src[ax2] = slice(max(d2, 0), n2 + min(d2, 0))
        dst[ax2] = slice(max(-d2, 0), n2 + min(-d2, 0))
        out[tuple(dst)] += w * s[tuple(src)]
    return out


def triple_state(T, X):
    """Initial 4D state and per-couple coincidence masks for three walks.

    Returns (state, masks) with masks keyed by the couple: (1,2) for
    walks 1 and 2 coinciding, etc.  State axes are (d1u, d2u, d1v, d2v)
    where d_i is the rotated difference between walk i and walk 3.
    """
    r1, r2, r3 = _rot(X[0]), _rot(X[1]), _rot(X[2])
    d1u0, d1v0 = r1[0] - r3[0], r1[1] - r3[1]
    d2u0, d2v0 = r2[0] - r3[0], r2[1] - r3[1]
    G = 2 * T + 1
    if G ** 4 * 8 > 2_000_000_000:
        raise CapacityError(f"triple-walk state at T={T} too large")
    idx = np.arange(G)

    def zero_vec(d0):
        return (d0 + 2 * (idx - T)) == 0

    zu1, zv1 = zero_vec(d1u0), zero_vec(d1v0)
    zu2, zv2 = zero_vec(d2u0), zero_vec(d2v0)
    # d1 == d2 along an axis: 2(a1 - a2) == d2_0 - d1_0
    mu = (2 * (idx[:, None] - idx[None, :])) == (d2u0 - d1u0)
    mv = (2 * (idx[:, None] - idx[None, :])) == (d2v0 - d1v0)
    masks = {
        (1, 3): zu1[:, None, None, None] & zv1[None, None, :, None],
        (2, 3): zu2[None, :, None, None] & zv2[None, None, None, :],
        (1, 2): mu[:, :, None, None] & mv[None, None, :, :],
    }
    s = np.zeros((G, G, G, G))
    s[T, T, T, T] = 1.0
    return s, masks


def triple_plane_steps(s):
    """One time step of the translation-reduced three-walk state."""
    s = _plane_step(s, 0, 1)   # (d1u, d2u) plane
    return _plane_step(s, 2, 3)  # (d1v, d2v) plane


def _triple_run(params, T, X, no_triple):
    if T == 0:
        return 1.0
    s, masks = triple_state(T, X)
    count = sum(m.astype(np.int8) for m in masks.values())
    if no_triple:
        w = np.exp(params.beta_N_sq * count.astype(np.float64))
        w[count == 3] = 0.0
    else:
        # series weight: at most one couple is charged per time slice
        # (expanding prod_n (1 + sigma^2 sum_c 1_c) yields exactly the
        # strictly-increasing-time collision series)
        w = 1.0 + params.sigma_N_sq * count.astype(np.float64)
    for _ in range(T):
        s = triple_plane_steps(s)
        s *= w
    return float(s.sum())


def psi_exact(params, q, T, X=None, t_cap=(64, 8)):
    """Collision-series majorant over q walks, exact transfer.

    Evaluates E_X[prod_{n<=T} (1 + sigma_N^2 sum_pairs 1{meet})], the
    product form of the collision series with strictly increasing
    meeting times and one couple per time; it dominates the no-triple
    moment, which charges at most one couple per slice anyway.
    """
    if q == 2:
        if T > t_cap[0]:
            raise CapacityError(f"q=2 horizon {T} above cap {t_cap[0]}")
        X = ((0, 0), (0, 0)) if X is None else X
        r1, r2 = _rot(X[0]), _rot(X[1])
        d0 = (r1[0] - r2[0], r1[1] - r2[1])
        if T == 0:
            return 1.0
        return float(_pair_masses(d0, T, 1.0 + params.sigma_N_sq)[T])
    if q == 3:
        if T > t_cap[1]:
            raise CapacityError(f"q=3 horizon {T} above cap {t_cap[1]}")
        X = ((0, 0), (0, 0), (0, 0)) if X is None else X
        return _triple_run(params, T, X, no_triple=False)
    raise ValueError("exact transfer limited to q in {2, 3}")


def no_triple_moment_exact(params, T, X=None, t_cap=8):
    """E_X[e^{beta^2 sum of pair meets} 1{no 3-walk coincidence}], q = 3.

    With three walks the disjoint-double-pair event needs four distinct
    indices, so the restriction is exactly "never all three equal".
    """
    if T > t_cap:
        raise CapacityError(f"q=3 horizon {T} above cap {t_cap}")
    X = ((0, 0), (0, 0), (0, 0)) if X is None else X
    return _triple_run(params, T, X, no_triple=True)


def chaos_enumerate(params, T, X=None, table=None, t_cap=6):
    """Collision-expansion series for two walks by explicit enumeration.

    Sums sigma^{2k} over strictly increasing meeting-time tuples and over
    the meeting positions, with transition weights read from kernel-table
    slabs; independent of the transfer implementation.
    """
    if T > t_cap:
        raise CapacityError(f"chaos enumeration capped at T={t_cap}")
    X = ((0, 0), (0, 0)) if X is None else X
    if T == 0:
        return 1.0
    if table is None or table.max_time < T:
        table = _kernel.build_kernel(T)
    x1, x2 = X
    span = T + max(abs(v) for p in X for v in p)
    cells = [(a, b) for a in range(-span, span + 1)
             for b in range(-span, span + 1)]
    ncell = len(cells)
    if ncell > 40_000:
        raise CapacityError("chaos position grid too large")
    trans = {}
    for d in range(1, T + 1):
        m = np.zeros((ncell, ncell))
        for i, zi in enumerate(cells):
            for j, zj in enumerate(cells):
                p = table.p(d, (zi[0] - zj[0], zi[1] - zj[1]))
                if p:
                    m[i, j] = p * p
        trans[d] = m
    total = 1.0  # empty tuple
    sig = params.sigma_N_sq
    from itertools import combinations
    for k in range(1, T + 1):
        for times in combinations(range(1, T + 1), k):
            v = np.array([table.p(times[0], (z[0] - x1[0], z[1] - x1[1]))
                          * table.p(times[0], (z[0] - x2[0], z[1] - x2[1]))
                          for z in cells])
            for r in range(1, k):
                v = trans[times[r] - times[r - 1]] @ v
            total += sig ** k * v.sum()
    return float(total)
