"""Reproducible Gaussian disorder field on the time-indexed lattice.

The field value at (n, x) is a standard normal obtained by hashing
(seed, n, x1, x2) and inverting the normal CDF on the resulting 53-bit
uniform.  Nothing is stored: any cell can be regenerated in isolation,
which makes the field replayable and safe to sample from concurrent
workers in any order.
"""

from dataclasses import dataclass

import numba as nb
import numpy as np

from ._hash import KEY_C1, KEY_C2, U64, inv_normal_cdf, mix64, to_uniform


@nb.njit(nb.uint64(nb.uint64, nb.int64), cache=True, inline="always")
def slab_key(env_base, n):
    return mix64(env_base ^ (U64(n) * KEY_C1))


@nb.njit(nb.float64(nb.uint64, nb.int64, nb.int64), cache=True,
         inline="always")
def omega_cell(skey, x1, x2):
    h = mix64(mix64(skey ^ (U64(x1) * KEY_C1)) ^ (U64(x2) * KEY_C2))
    return inv_normal_cdf(to_uniform(h))


@nb.njit(cache=True)
def _omega_many(env_base, n, xs, out):
    skey = slab_key(env_base, n)
    for i in range(xs.shape[0]):
        out[i] = omega_cell(skey, xs[i, 0], xs[i, 1])


@dataclass(frozen=True)
class Environment:
    """I.i.d. standard-normal field omega(n, x), keyed by a 64-bit seed."""

    seed: int
    horizon: int

    @property
    def base(self):
        # keep the word typed uint64: a boxed python int would be typed
        # int64 at jit boundaries and poison the unsigned hash chain
        return np.uint64(mix64(U64(self.seed)))

    def omega(self, n, xs):
        """Field values at time n for an (k, 2) array of lattice points."""
        if not 0 <= n <= self.horizon:
            raise ValueError(f"time {n} outside horizon {self.horizon}")
        xs = np.ascontiguousarray(xs, dtype=np.int64).reshape(-1, 2)
        out = np.empty(xs.shape[0])
        _omega_many(self.base, n, xs, out)
        return out
