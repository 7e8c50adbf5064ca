"""Monte Carlo over q independent planar walks.

Walk steps are decoded from hashed bit streams keyed by the absolute
sample index, two bits per walk per step (the rotated coordinates of a
lattice step are independent +-1 moves).  Collision bookkeeping records
every pairwise meeting count plus the first time three walks coincide
(f-event) and the first time two disjoint pairs coincide (k-event).

Moment estimators average exp(beta_N^2 * total pair count); they are
unbiased for the q-walk moment representation of E[W^q].
"""

import math
import warnings
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import kernel as _kernel
from ._hash import KEY_C2, U64, key2, mix64
from .parallel import run_blocks
from .scaling import lambda_tn_sq

BLOCK = 4096
MOM_BATCHES = 64


def pair_index(q):
    return [(i, j) for i in range(1, q + 1) for j in range(i + 1, q + 1)]


@nb.njit(cache=True)
def _walk_block(seed, lo, hi, q, N, x0u, x0v, counts, triple_first,
                quad_first):
    npairs = q * (q - 1) // 2
    pu = np.empty(q, dtype=np.int64)
    pv = np.empty(q, dtype=np.int64)
    grp = np.empty(q, dtype=np.int64)
    for s_abs in range(lo, hi):
        row = s_abs - lo
        for w in range(q):
            pu[w] = x0u[w]
            pv[w] = x0v[w]
        h = mix64(key2(seed, U64(s_abs)))
        ctr = U64(0)
        bits = U64(0)
        navail = 0
        need = 2 * q
        tf = 0
        qf = 0
        for n in range(1, N + 1):
            if navail < need:
                ctr += U64(1)
                bits = mix64(h ^ (ctr * KEY_C2))
                navail = 64
            for w in range(q):
                pu[w] += 1 if bits & U64(1) else -1
                bits >>= U64(1)
                pv[w] += 1 if bits & U64(1) else -1
                bits >>= U64(1)
            navail -= need
            idx = 0
            eq_here = 0
            for i in range(q):
                for j in range(i + 1, q):
                    if pu[i] == pu[j] and pv[i] == pv[j]:
                        counts[row, idx] += 1
                        eq_here += 1
                    idx += 1
            if eq_here >= 2 and (tf == 0 or qf == 0):
                # group walks by position: a triple needs a group of >= 3,
                # disjoint double pairs need two groups of >= 2 (or one of 4)
                for i in range(q):
                    grp[i] = -1
                ngroups2 = 0
                maxgrp = 1
                gid = 0
                for i in range(q):
                    if grp[i] >= 0:
                        continue
                    size = 1
                    grp[i] = gid
                    for j in range(i + 1, q):
                        if grp[j] < 0 and pu[i] == pu[j] and pv[i] == pv[j]:
                            grp[j] = gid
                            size += 1
                    if size >= 2:
                        ngroups2 += 1
                    if size > maxgrp:
                        maxgrp = size
                    gid += 1
                if tf == 0 and maxgrp >= 3:
                    tf = n
                if qf == 0 and (ngroups2 >= 2 or maxgrp >= 4):
                    qf = n
        triple_first[row] = tf
        quad_first[row] = qf


def _collision_worker(lo, hi, seed, q, N, x0u, x0v):
    counts = np.zeros((hi - lo, q * (q - 1) // 2), dtype=np.int32)
    tf = np.zeros(hi - lo, dtype=np.int32)
    qf = np.zeros(hi - lo, dtype=np.int32)
    _walk_block(U64(seed), lo, hi, q, N, x0u, x0v, counts, tf, qf)
    return counts, tf, qf


def collect_collisions(q, N, samples, seed, X=None, workers=1):
    """Pair counts and first event times for ``samples`` walk systems."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if N < 1:
        raise ValueError("N must be >= 1")
    X = [(0, 0)] * q if X is None else list(X)
    if len(X) != q:
        raise ValueError("need one start point per walk")
    x0u = np.array([p[0] + p[1] for p in X], dtype=np.int64)
    x0v = np.array([p[0] - p[1] for p in X], dtype=np.int64)
    parts = run_blocks(_collision_worker, samples, BLOCK, workers,
                       args=(seed, q, N, x0u, x0v))
    counts = np.concatenate([p[0] for p in parts])
    tf = np.concatenate([p[1] for p in parts])
    qf = np.concatenate([p[2] for p in parts])
    return counts, tf, qf


@dataclass(frozen=True)
class CollisionSample:
    q: int
    N: int
    pair_counts: np.ndarray          # one entry per couple, lex order
    triple_first: int | None
    quad_first: int | None


def sample_collisions(q, N, seed, X=None, sample_index=0):
    """One simulated walk system with full collision bookkeeping."""
    counts, tf, qf = collect_collisions(q, N, sample_index + 1, seed, X=X)
    return CollisionSample(
        q=q, N=N, pair_counts=counts[sample_index],
        triple_first=int(tf[sample_index]) or None,
        quad_first=int(qf[sample_index]) or None)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int
    is_raw_moment: bool
    median_of_means: float


def _estimate(weights, seed, raw=True):
    n = len(weights)
    mean = float(weights.mean())
    se = float(weights.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    batch = max(1, n // MOM_BATCHES)
    nb_ = n // batch
    mom = float(np.median(weights[:nb_ * batch]
                          .reshape(nb_, batch).mean(axis=1)))
    if mean > 0 and se / mean > 0.10:
        warnings.warn(f"relative stderr {se / mean:.1%} above 10%: "
                      "the exponential weights are heavy-tailed",
                      stacklevel=3)
    return McEstimate(mean=mean, stderr=se, n_samples=n, seed=seed,
                      is_raw_moment=raw, median_of_means=mom)


def moment_mc(params, q, N, samples, seed, X=None, workers=1):
    """Unbiased estimate of E[W_N^q] from the collision representation."""
    counts, _, _ = collect_collisions(q, N, samples, seed, X=X,
                                      workers=workers)
    weights = np.exp(params.beta_N_sq
                     * counts.sum(axis=1).astype(np.float64))
    return _estimate(weights, seed)


def no_triple_moment_mc(params, q, T, samples, seed, X=None, workers=1):
    """Moment restricted to systems with no 3-walk or double-pair event.

    Returns the estimate and a comparison record against the product-form
    exponent binom(q,2) * lambda_{T,N}^2 (the measured/bound exponent
    ratio stands in for the unquantified 1 + c q^{-1/2} + o(1) factor).
    """
    if q < 3:
        raise ValueError("the restriction is trivial for q < 3")
    X_eff = [(0, 0)] * q if X is None else list(X)
    if q > 9 and all(p == (0, 0) for p in X_eff):
        warnings.warn("with q > 9 walks started at one point some three "
                      "must coincide at the first step: the restricted "
                      "moment is almost surely 0", stacklevel=2)
    if T == 0:
        return (McEstimate(1.0, 0.0, samples, seed, True, 1.0),
                {"bound_exponent": 0.0, "measured_exponent": 0.0,
                 "ratio": float("nan")})
    counts, tf, qf = collect_collisions(q, T, samples, seed, X=X_eff,
                                        workers=workers)
    alive = (tf == 0) & (qf == 0)
    weights = np.where(
        alive,
        np.exp(params.beta_N_sq * counts.sum(axis=1).astype(np.float64)),
        0.0)
    est = _estimate(weights, seed)
    bound_exp = math.comb(q, 2) * lambda_tn_sq(params, T)
    measured = math.log(est.mean) if est.mean > 0 else -math.inf
    info = {"bound_exponent": bound_exp, "measured_exponent": measured,
            "ratio": measured / bound_exp if bound_exp > 0 else float("nan")}
    return est, info


@nb.njit(cache=True)
def _et_block(seed, lo, hi, N, out):
    for s_abs in range(lo, hi):
        hu = 0
        hv = 0
        cnt = 0
        h = mix64(key2(seed, U64(s_abs)))
        ctr = U64(0)
        bits = U64(0)
        navail = 0
        for n in range(N):
            if navail < 4:
                ctr += U64(1)
                bits = mix64(h ^ (ctr * KEY_C2))
                navail = 64
            b0 = 1 if bits & U64(1) else 0
            b1 = 1 if bits & U64(2) else 0
            b2 = 1 if bits & U64(4) else 0
            b3 = 1 if bits & U64(8) else 0
            bits >>= U64(4)
            navail -= 4
            hu += b0 + b1 - 1
            hv += b2 + b3 - 1
            if hu == 0 and hv == 0:
                cnt += 1
        out[s_abs - lo] = cnt


def _et_worker(lo, hi, seed, N):
    out = np.zeros(hi - lo, dtype=np.int64)
    _et_block(U64(seed), lo, hi, N, out)
    return out


def erdos_taylor_stat(N, samples, seed, workers=1):
    """Normalized pair-collision counts pi/log N * sum_n 1{S^1_n = S^2_n}.

    The difference of the two walks is run as a single two-step walk; the
    sampled statistic tends to an exponential law of rate one, with exact
    mean pi R_N / log N at finite N.
    """
    if N < 2:
        raise ValueError("N must be >= 2 (the normalization needs log N > 0)")
    parts = run_blocks(_et_worker, samples, BLOCK, workers, args=(seed, N))
    counts = np.concatenate(parts)
    return counts * (math.pi / math.log(N))


def erdos_taylor_exact_mean(N):
    return math.pi * _kernel.r_exact(N) / math.log(N)


def py_walk_system(seed, sample_index, q, N, X=None):
    """Pure-python mirror of the jitted walk decoding, for cross-checks."""
    from ._hash import py_mix64
    mask = (1 << 64) - 1
    X = [(0, 0)] * q if X is None else list(X)
    pu = [p[0] + p[1] for p in X]
    pv = [p[0] - p[1] for p in X]
    h = py_mix64(py_mix64(py_mix64(seed)
                          ^ (sample_index * 0xC2B2AE3D27D4EB4F & mask)))
    positions = []
    bits = 0
    navail = 0
    ctr = 0
    for n in range(1, N + 1):
        if navail < 2 * q:
            ctr += 1
            bits = py_mix64(h ^ (ctr * 0x165667B19E3779F9 & mask))
            navail = 64
        for w in range(q):
            pu[w] += 1 if bits & 1 else -1
            bits >>= 1
            pv[w] += 1 if bits & 1 else -1
            bits >>= 1
        navail -= 2 * q
        positions.append([(u, v) for u, v in zip(pu, pv)])
    return positions
