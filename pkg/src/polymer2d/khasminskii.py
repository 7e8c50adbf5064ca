"""Exponential-moment bounds from first-moment smallness.

Two discrete variants are verified against exact transfer computations:
the walk-vs-adversarial-path form (collisions of a simple walk with an
arbitrary nearest-neighbour path) and the general finite-chain form.
In both, a first moment eta < 1 of the collision/potential mass yields
the exponential moment bound 1/(1 - eta).
"""

import math
from dataclasses import dataclass

import numpy as np

from ._hash import key3, uniforms

_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _validate_path(Z):
    Z = np.asarray(Z, dtype=np.int64)
    if Z.ndim != 2 or Z.shape[1] != 2 or Z.shape[0] < 2:
        raise ValueError("path must be an (k+1, 2) array of lattice points")
    d = np.abs(np.diff(Z, axis=0)).sum(axis=1)
    if not np.all(d == 1):
        raise ValueError("path must move to a nearest neighbour every step")
    return Z


def eta_mod_khas(kernel_table, kappa_sq, Z):
    """(e^{kappa^2}-1) sup_x E_x[collisions with the path Z up to k].

    The supremum is exact: expected collisions vanish once the start is
    farther than k from every path point, so a finite window suffices.
    """
    Z = _validate_path(Z)
    k = Z.shape[0] - 1
    if kernel_table.max_time < k:
        raise ValueError("kernel table horizon below path length")
    if kappa_sq < 0:
        raise ValueError("kappa_sq must be >= 0")
    lo = Z.min(axis=0) - k
    hi = Z.max(axis=0) + k
    nx = hi[0] - lo[0] + 1
    ny = hi[1] - lo[1] + 1
    acc = np.zeros((nx, ny))
    for n in range(1, k + 1):
        # p_n(Z_n - x) over the window is the time-n slab centred at Z_n
        slab = kernel_table.lattice_slab(n)
        cx, cy = Z[n][0] - lo[0], Z[n][1] - lo[1]
        x0, x1 = cx - n, cx + n + 1
        y0, y1 = cy - n, cy + n + 1
        sx0 = max(0, -x0)
        sy0 = max(0, -y0)
        sx1 = 2 * n + 1 - max(0, x1 - nx)
        sy1 = 2 * n + 1 - max(0, y1 - ny)
        acc[max(x0, 0):min(x1, nx), max(y0, 0):min(y1, ny)] += \
            slab[sx0:sx1, sy0:sy1][::-1, ::-1]
        # the slab is symmetric under negation, so the flip is cosmetic
    return math.expm1(kappa_sq) * float(acc.max())


@dataclass(frozen=True)
class ModKhasReport:
    eta: float
    sup_moment: float         # collisions counted from n = 1
    bound: float              # 1/(1 - eta)
    passed: bool
    sup_moment_from0: float   # variant counting the time-0 coincidence


def check_mod_khas(kernel_table, kappa_sq, Z):
    """Exact sup_x E_x[exp(kappa^2 * collisions)] against 1/(1 - eta).

    The certified inequality counts collisions from n = 1 (as the
    expansion argument produces); the from-0 variant can exceed the
    bound by a factor e^{kappa^2} and is reported, not asserted.
    """
    Z = _validate_path(Z)
    k = Z.shape[0] - 1
    eta = eta_mod_khas(kernel_table, kappa_sq, Z)
    pad = k + 1
    lo = Z.min(axis=0) - pad
    hi = Z.max(axis=0) + pad
    nx = hi[0] - lo[0] + 1
    ny = hi[1] - lo[1] + 1
    w = math.exp(kappa_sq)
    # backward recursion: h_n(x) = E_x-at-time-n of the remaining weight;
    # outside the window the remaining weight is exactly 1
    h = np.ones((nx, ny))
    gp = np.ones((nx + 2, ny + 2))
    for n in range(k, 0, -1):
        gp[1:-1, 1:-1] = h
        zi, zj = Z[n][0] - lo[0], Z[n][1] - lo[1]
        if 0 <= zi < nx and 0 <= zj < ny:
            gp[zi + 1, zj + 1] *= w
        h = 0.25 * (gp[2:, 1:-1] + gp[:-2, 1:-1]
                    + gp[1:-1, 2:] + gp[1:-1, :-2])
    sup1 = float(h.max())
    # from-0 variant: weight for starting on the path
    h0 = h.copy()
    zi, zj = Z[0][0] - lo[0], Z[0][1] - lo[1]
    h0[zi, zj] *= w
    bound = 1.0 / (1.0 - eta) if eta < 1 else math.inf
    return ModKhasReport(eta=eta, sup_moment=sup1, bound=bound,
                         passed=(eta < 1 and sup1 <= bound * (1 + 1e-12)),
                         sup_moment_from0=float(h0.max()))


# ---------------------------------------------------------------------------
# general finite chains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainSpec:
    """Finite Markov chain with a nonnegative potential and a horizon."""

    kernel: np.ndarray   # (S, S) row-stochastic
    f: np.ndarray        # (S,) >= 0
    horizon: int

    def __post_init__(self):
        P = np.asarray(self.kernel, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("kernel must be square")
        if not np.allclose(P.sum(axis=1), 1.0, atol=1e-10):
            raise ValueError("kernel rows must sum to 1")
        if np.any(np.asarray(self.f) < 0):
            raise ValueError("potential must be nonnegative")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


def chain_exp_moment(spec):
    """sup_x E_x[exp(sum_{n=1..k} f(Y_n))], exact backward transfer."""
    P = np.asarray(spec.kernel, dtype=np.float64)
    ef = np.exp(np.asarray(spec.f, dtype=np.float64))
    h = np.ones(P.shape[0])
    for _ in range(spec.horizon):
        h = P @ (ef * h)
    return float(h.max())


def chain_eta(spec, of="exp"):
    """sup_x E_x[sum_{n=1..k} g(Y_n)] with g = e^f - 1 or g = f."""
    P = np.asarray(spec.kernel, dtype=np.float64)
    f = np.asarray(spec.f, dtype=np.float64)
    g = np.expm1(f) if of == "exp" else f
    v = g.copy()
    total = np.zeros_like(v)
    for _ in range(spec.horizon):
        v = P @ v
        total += v
    return float(total.max())


@dataclass(frozen=True)
class ChainReport:
    mode: str
    eta: float
    sup_moment: float
    bound: float
    passed: bool
    applicable: bool
    display_bound: float | None = None
    display_holds: bool | None = None


def check_discrete_khas(spec, mode="theorem"):
    """Exponential-moment bound for a finite chain.

    theorem mode: eta0 = sup E[sum (e^f - 1)] < 1 gives
    sup E[e^{sum f}] <= 1/(1 - eta0) (asserted).
    corollary mode: requires f <= 1; the certified bound uses
    e^f - 1 <= e f, i.e. 1/(1 - e eta1) whenever e eta1 < 1; the plain
    1/(1 - eta1) display is evaluated descriptively.
    """
    moment = chain_exp_moment(spec)
    if mode == "theorem":
        eta = chain_eta(spec, of="exp")
        applicable = eta < 1
        bound = 1.0 / (1.0 - eta) if applicable else math.inf
        return ChainReport(mode=mode, eta=eta, sup_moment=moment,
                           bound=bound, applicable=applicable,
                           passed=applicable
                           and moment <= bound * (1 + 1e-12))
    if mode == "corollary":
        if np.any(np.asarray(spec.f) > 1.0):
            raise ValueError("corollary mode requires f <= 1")
        eta = chain_eta(spec, of="plain")
        applicable = math.e * eta < 1
        bound = 1.0 / (1.0 - math.e * eta) if applicable else math.inf
        disp = 1.0 / (1.0 - eta) if eta < 1 else math.inf
        return ChainReport(mode=mode, eta=eta, sup_moment=moment,
                           bound=bound, applicable=applicable,
                           passed=(not applicable)
                           or moment <= bound * (1 + 1e-12),
                           display_bound=disp,
                           display_holds=moment <= disp * (1 + 1e-12))
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# randomized suites
# ---------------------------------------------------------------------------

def random_chain(seed, trial, n_states=6, horizon=12, eta_target=None):
    """Random stochastic kernel and potential scaled to a target eta0."""
    key = key3(np.uint64(seed), np.uint64(0x5EED), np.uint64(trial))
    raw = uniforms(key, n_states * n_states + n_states + 1)
    P = raw[:n_states * n_states].reshape(n_states, n_states) + 1e-3
    P /= P.sum(axis=1, keepdims=True)
    f0 = raw[n_states * n_states:-1]
    if eta_target is None:
        eta_target = 0.05 + 0.9 * raw[-1]
    lo, hi = 0.0, 1.0
    spec = None
    for _ in range(60):
        s = 0.5 * (lo + hi)
        spec = ChainSpec(kernel=P, f=s * f0, horizon=horizon)
        if chain_eta(spec, of="exp") < eta_target:
            lo = s
        else:
            hi = s
    return ChainSpec(kernel=P, f=lo * f0, horizon=horizon)


def chain_suite(n_chains, seed, n_states=6, horizon=12):
    """Theorem-mode bound on randomized chains; returns failures."""
    failures = []
    for t in range(n_chains):
        spec = random_chain(seed, t, n_states=n_states, horizon=horizon)
        rep = check_discrete_khas(spec, mode="theorem")
        if rep.applicable and not rep.passed:
            failures.append((t, rep))
    return failures


def random_adversary_path(seed, trial, k):
    """Nearest-neighbour path from hashed step choices."""
    key = key3(np.uint64(seed), np.uint64(0xAD7), np.uint64(trial))
    u = uniforms(key, k)
    Z = np.zeros((k + 1, 2), dtype=np.int64)
    for n in range(k):
        Z[n + 1] = Z[n] + _STEPS[int(u[n] * 4)]
    return Z


def path_suite(kernel_table, n_paths, ks, seed, eta_targets=(0.3, 0.9)):
    """Walk-vs-path bound on random adversarial paths; returns failures.

    kappa is tuned per path so that eta hits a target in (0, 0.95):
    e^{kappa^2} = 1 + target / sup_x E_x[collision count].
    """
    failures = []
    reports = []
    for k in ks:
        for t in range(n_paths):
            Z = random_adversary_path(seed, 1000 * k + t, k)
            # sup_x of the expected collision count, independent of kappa
            base = eta_mod_khas(kernel_table, math.log(2.0), Z)
            u = float(uniforms(key3(np.uint64(seed), np.uint64(k),
                                    np.uint64(t)), 1)[0])
            target = eta_targets[0] + (eta_targets[1] - eta_targets[0]) * u
            kappa_sq = math.log1p(target / base)
            rep = check_mod_khas(kernel_table, kappa_sq, Z)
            reports.append(rep)
            if not rep.passed:
                failures.append((k, t, rep))
    return failures, reports
