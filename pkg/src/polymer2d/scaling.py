"""Disorder-strength scaling and the scalar weight functions.

The model is parametrized by a horizon N and a dimensionless strength
beta_hat < 1; the per-step coupling is beta_N^2 = beta_hat^2 / R_N with
R_N the expected pair-collision count, and the limiting log-variance is
lambda^2 = log(1/(1 - beta_hat^2)).  All derived quantities here are
pure functions of an immutable parameter object.
"""

import math
from dataclasses import dataclass

from . import kernel


@dataclass(frozen=True)
class PolymerParams:
    N: int
    beta_hat: float
    R_N: float
    beta_N_sq: float
    sigma_N_sq: float
    lambda_sq: float

    @property
    def beta_N(self):
        return math.sqrt(self.beta_N_sq)

    @property
    def log_N(self):
        return math.log(self.N)


def make_params(N, beta_hat, kernel_table=None):
    """Derive the coupling scales from the exact R_N.

    ``kernel_table`` may be a KernelTable covering N; otherwise R_N is
    evaluated from the closed binomial form.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if not 0.0 <= beta_hat < 1.0:
        raise ValueError("beta_hat must lie in [0, 1): the model is only "
                         "treated in the subcritical window")
    if kernel_table is not None and kernel_table.max_time >= N:
        r = kernel.r_n(kernel_table, N)
    else:
        r = kernel.r_exact(N)
    beta_n_sq = beta_hat * beta_hat / r
    sigma_sq = math.expm1(beta_n_sq)
    lam_sq = -math.log1p(-beta_hat * beta_hat) if beta_hat > 0 else 0.0
    return PolymerParams(N=N, beta_hat=beta_hat, R_N=r,
                         beta_N_sq=beta_n_sq, sigma_N_sq=sigma_sq,
                         lambda_sq=lam_sq)


def lambda_tn_sq(params, T):
    """Horizon-T log-variance log(1/(1 - beta_hat^2 log T / log N)).

    T may be real-valued; T = 1 gives 0 and T = N gives lambda_sq.
    """
    if not 1 <= T <= params.N:
        raise ValueError("T must lie in [1, N]")
    x = params.beta_hat ** 2 * math.log(T) / params.log_N
    if x >= 1.0:
        raise ValueError("log argument would be <= 0")
    return -math.log1p(-x)


def big_f(params, u):
    """Weight density F(u) = (1/u) / (1 - beta_hat^2 log u / log N)."""
    if not 1 <= u <= params.N:
        raise ValueError("u must lie in [1, N]")
    x = params.beta_hat ** 2 * math.log(u) / params.log_N
    if x >= 1.0:
        raise ValueError("log argument would be <= 0")
    return 1.0 / (u * (1.0 - x))


def small_f(params, T, v):
    """Remaining mass f(v) of F between v and the horizon T.

    f(v) = (log N / beta_hat^2) * log((1 - bh^2 log v/log N) /
    (1 - bh^2 log T/log N)); non-increasing, f(T) = 0.  At beta_hat = 0
    the limit log(T/v) is returned.
    """
    if not 1 <= T <= params.N:
        raise ValueError("T must lie in [1, N]")
    if not 1 <= v <= T:
        raise ValueError("v must lie in [1, T]")
    bh2 = params.beta_hat ** 2
    if bh2 == 0.0:
        return math.log(T / v)
    logn = params.log_N
    num = 1.0 - bh2 * math.log(v) / logn
    den = 1.0 - bh2 * math.log(T) / logn
    if num <= 0.0 or den <= 0.0:
        raise ValueError("log argument would be <= 0")
    return (logn / bh2) * math.log(num / den)


def chebyshev_max_exponent(gamma, beta_hat):
    """Union-bound threshold for the maximum of the log partition function.

    For a spatial entropy exponent gamma the Chebyshev optimization gives
    the critical deviation scale delta* = 2 sqrt(gamma lambda^2), attained
    at q / sqrt(log N) = delta*/lambda^2; the moment-growth constraint
    restricts it to gamma < lambda^2 (1 - beta_hat^2) / (6 beta_hat^2)
    (which tends to 1/6 for small beta_hat).
    """
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    if not 0 < beta_hat < 1:
        raise ValueError("beta_hat must lie in (0, 1)")
    lam_sq = -math.log1p(-beta_hat * beta_hat)
    delta_star = 2.0 * math.sqrt(gamma * lam_sq)
    q_over = delta_star / lam_sq
    admissible = gamma < lam_sq * (1.0 - beta_hat ** 2) / (6.0 * beta_hat ** 2)
    return delta_star, q_over, admissible
