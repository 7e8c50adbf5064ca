"""Statistical post-processing shared by the experiment harness."""

import math

import numpy as np


def mean_stderr(x):
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(x.mean()), se


def ks_distance(samples, cdf):
    """Sup distance between the empirical CDF and a named target.

    cdf is "exp1" or ("normal", mu, sigma_sq).
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    if cdf == "exp1":
        f = 1.0 - np.exp(-x)
    elif isinstance(cdf, tuple) and cdf[0] == "normal":
        _, mu, sig_sq = cdf
        from scipy.special import ndtr
        f = ndtr((x - mu) / math.sqrt(sig_sq))
    else:
        raise ValueError(f"unknown cdf {cdf!r}")
    i = np.arange(1, n + 1)
    return float(max((i / n - f).max(), (f - (i - 1) / n).max()))


def variance_with_stderr(x):
    """Sample variance and the stderr of that variance estimate."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two samples")
    m = x.mean()
    d = x - m
    var = float(np.dot(d, d) / (n - 1))
    m4 = float((d ** 4).mean())
    se = math.sqrt(max(m4 - (n - 3) / (n - 1) * var * var, 0.0) / n)
    return var, se
