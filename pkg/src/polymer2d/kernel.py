"""Exact transition kernels for the simple random walk on Z^2.

Two independent routes are implemented and cross-checked:

* ``build_kernel`` convolves the 4-neighbour step law directly, storing a
  dense probability slab per time step on the parity-reduced diamond.
  The slab for time n is an (n+1) x (n+1) array indexed by the rotated
  coordinates u = x1 + x2, v = x1 - x2 (both in {-n, -n+2, ..., n}), on
  which one step of the walk is a 2x2 uniform averaging stencil.
* ``exact_scan`` convolves the one-dimensional +-1 step law.  In rotated
  coordinates the two axes of the walk are independent copies of that 1D
  walk, so the 2D slab is the outer product of the 1D law with itself;
  the scan reaches large horizons at O(n^2) total cost and without the
  quadratic-per-slab memory of the dense table.

Closed binomial forms (p_{2n}(0) = (C(2n,n)/4^n)^2 and the odd-time
analogue) are evaluated through cumulative products of exact float
ratios and serve both as beyond-horizon values and as test oracles.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class CapacityError(Exception):
    """Raised when a requested table would exceed its memory budget."""


DEFAULT_BUDGET_BYTES = 1_500_000_000


def _slab_bytes(max_time):
    return 8 * sum((n + 1) ** 2 for n in range(max_time + 1))


@dataclass(frozen=True)
class KernelTable:
    """Exact walk kernels up to a time horizon.

    slabs[n][i, j] is the probability of the displacement with rotated
    coordinates u = 2i - n, v = 2j - n after n steps.  pstar[n] is the
    maximal point probability at time n, return2n[n] = p_{2n}(0) and
    partial_R[n] = sum_{s<=n} p_{2s}(0); the latter two are defined for
    all n <= max_time even when 2n exceeds the slab horizon.
    """

    max_time: int
    slabs: tuple
    pstar: np.ndarray
    return2n: np.ndarray
    partial_R: np.ndarray

    def p(self, n, x):
        """Point probability p_n(x) for a lattice displacement x."""
        if not 0 <= n <= self.max_time:
            raise ValueError(f"time {n} outside table horizon {self.max_time}")
        x1, x2 = int(x[0]), int(x[1])
        u, v = x1 + x2, x1 - x2
        if abs(u) > n or abs(v) > n or (u + n) % 2 or (v + n) % 2:
            return 0.0
        return float(self.slabs[n][(u + n) // 2, (v + n) // 2])

    def lattice_slab(self, n):
        """p_n as a dense (2n+1) x (2n+1) array over lattice offsets.

        Entry [x1 + n, x2 + n] = p_n((x1, x2)); odd-parity cells are 0.
        """
        if not 0 <= n <= self.max_time:
            raise ValueError(f"time {n} outside table horizon {self.max_time}")
        out = np.zeros((2 * n + 1, 2 * n + 1))
        iu, iv = np.meshgrid(np.arange(n + 1), np.arange(n + 1),
                             indexing="ij")
        u = 2 * iu - n
        v = 2 * iv - n
        x1 = (u + v) // 2
        x2 = (u - v) // 2
        out[x1 + n, x2 + n] = self.slabs[n]
        return out


def build_kernel(max_time, budget_bytes=DEFAULT_BUDGET_BYTES):
    """Exact repeated convolution of the 4-neighbour uniform step law."""
    if max_time < 1:
        raise ValueError("max_time must be >= 1")
    need = _slab_bytes(max_time)
    if need > budget_bytes:
        raise CapacityError(
            f"dense slabs to time {max_time} need {need} bytes "
            f"(budget {budget_bytes}); use exact_scan for large horizons")
    slabs = [np.ones((1, 1))]
    for n in range(1, max_time + 1):
        prev = slabs[-1]
        cur = np.zeros((n + 1, n + 1))
        # each of the 4 lattice steps shifts (u, v) by (+-1, +-1), i.e. the
        # slab index by (0 or 1, 0 or 1)
        cur[1:, 1:] += prev
        cur[1:, :-1] += prev
        cur[:-1, 1:] += prev
        cur[:-1, :-1] += prev
        cur *= 0.25
        slabs.append(cur)
    pstar = np.array([s.max() for s in slabs])
    return2n = p2n_zero_array(max_time)
    partial_R = np.concatenate(([0.0], np.cumsum(return2n[1:])))
    return KernelTable(max_time=max_time, slabs=tuple(slabs), pstar=pstar,
                       return2n=return2n, partial_R=partial_R)


@dataclass(frozen=True)
class ScanResult:
    """Streaming kernel summary computed by 1D convolution."""

    max_time: int
    pstar: np.ndarray       # sup_x p_n(x), n = 0..max_time
    center: np.ndarray      # p_n(0), zero at odd n


def exact_scan(max_time, time_cap=65536):
    """Convolve the 1D +-1 step law and square per the axis factorization.

    Returns sup_x p_n(x) = (max_k q_n(k))^2 and p_n(0) = q_n(0)^2 where
    q_n is the 1D simple-walk law; exactness of the outer-product
    identity is covered by tests against ``build_kernel``.
    """
    if max_time < 1:
        raise ValueError("max_time must be >= 1")
    if max_time > time_cap:
        raise CapacityError(f"scan horizon {max_time} above cap {time_cap} "
                            "(quadratic total cost)")
    pstar = np.empty(max_time + 1)
    center = np.zeros(max_time + 1)
    pstar[0] = 1.0
    center[0] = 1.0
    q = np.ones(1)
    for n in range(1, max_time + 1):
        nxt = np.zeros(n + 1)
        nxt[1:] += q
        nxt[:-1] += q
        nxt *= 0.5
        q = nxt
        m = q.max()
        pstar[n] = m * m
        if n % 2 == 0:
            c = q[n // 2]
            center[n] = c * c
    return ScanResult(max_time=max_time, pstar=pstar, center=center)


@lru_cache(maxsize=8)
def _central_ratios(n):
    # g[j] = C(2j, j) / 4^j via cumulative product of ((2j-1)/(2j))
    j = np.arange(1, n + 1, dtype=np.float64)
    return np.concatenate(([1.0], np.cumprod((2 * j - 1) / (2 * j))))


def p2n_zero_array(n):
    """p_{2j}(0) = (C(2j,j)/4^j)^2 for j = 0..n."""
    return _central_ratios(n) ** 2


def r_exact(n):
    """R_n = sum_{s=1}^{n} p_{2s}(0), exact binomial evaluation."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return float(np.sum(p2n_zero_array(n)[1:]))


def r_exact_array(n):
    """R_s for s = 0..n as an array."""
    return np.concatenate(([0.0], np.cumsum(p2n_zero_array(n)[1:])))


def r_n(table, n):
    """Partial collision mass R_n from a built table."""
    if not 1 <= n <= table.max_time:
        raise ValueError(f"n={n} outside table horizon {table.max_time}")
    return float(table.partial_R[n])


def a_sequence(n):
    """a_j = sqrt(2j) C(2j,j)/4^j for j = 1..n (increasing, -> sqrt(2/pi))."""
    j = np.arange(1, n + 1, dtype=np.float64)
    return np.sqrt(2 * j) * _central_ratios(n)[1:]


def b_sequence(n):
    """b_j = sqrt(2j+1) C(2j+1,j)/2^(2j+1) for j = 0..n (increasing)."""
    j = np.arange(1, n + 1, dtype=np.float64)
    h = np.concatenate(([0.5], 0.5 * np.cumprod((2 * j + 1) / (2 * j + 2))))
    return np.sqrt(2 * np.arange(n + 1) + 1) * h


def odd_return_to_one(n):
    """(C(2j+1,j)/2^(2j+1))^2 for j = 0..n; equals p* at odd times 2j+1."""
    b = b_sequence(n)
    return (b / np.sqrt(2 * np.arange(n + 1) + 1)) ** 2


@dataclass(frozen=True)
class PnstarReport:
    max_time: int
    passed: bool
    first_violation: int | None
    rows: list  # (n, pstar, 2/(pi n), ratio) on a log-spaced grid
    monotone_a: bool
    monotone_b: bool
    max_ratio: float


def check_pnstar_bound(pstar, monotone_horizon=2000, grid=None):
    """Verify sup_x p_n(x) <= 2/(pi n) and the monotone binomial sequences.

    ``pstar`` is indexed by n (entry 0 ignored).  Ratios p_n* * pi*n/2 are
    recorded on a log grid; all must lie in (0, 1].
    """
    max_time = len(pstar) - 1
    n = np.arange(1, max_time + 1, dtype=np.float64)
    bound = 2.0 / (np.pi * n)
    ratio = pstar[1:] / bound
    bad = np.nonzero(ratio > 1.0)[0]
    first = int(bad[0] + 1) if bad.size else None
    if grid is None:
        grid = sorted({int(x) for x in np.geomspace(1, max_time, 25)})
    rows = [(g, float(pstar[g]), float(2.0 / (np.pi * g)), float(ratio[g - 1]))
            for g in grid]
    a = a_sequence(monotone_horizon)
    b = b_sequence(monotone_horizon)
    mono_a = bool(np.all(np.diff(a) >= 0))
    mono_b = bool(np.all(np.diff(b) >= 0))
    return PnstarReport(
        max_time=max_time,
        passed=first is None and mono_a and mono_b,
        first_violation=first,
        rows=rows,
        monotone_a=mono_a,
        monotone_b=mono_b,
        max_ratio=float(ratio.max()),
    )
