"""Counter-based random number primitives.

Every stochastic component of the package derives its randomness from the
splitmix64 finalizer applied to a chain of (seed, stream, counter) words.
A draw is a pure function of its key, so any sample can be replayed in
isolation, blocks of samples can be generated in any order on any number
of workers, and results are bitwise independent of the execution schedule.

Standard normals are produced by applying the Wichura AS241 inverse
normal CDF to a 53-bit uniform, one draw per value (no rejection), which
keeps the cell -> value mapping stable.
"""

import numba as nb
import numpy as np

U64 = np.uint64

GOLDEN = U64(0x9E3779B97F4A7C15)
MIX_A = U64(0xBF58476D1CE4E5B9)
MIX_B = U64(0x94D049BB133111EB)
# distinct stream constants so that (seed, n, x) style chains cannot alias
KEY_C1 = U64(0xC2B2AE3D27D4EB4F)
KEY_C2 = U64(0x165667B19E3779F9)

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@nb.njit(nb.uint64(nb.uint64), cache=True, inline="always")
def mix64(z):
    z = z + GOLDEN
    z = (z ^ (z >> U64(30))) * MIX_A
    z = (z ^ (z >> U64(27))) * MIX_B
    return z ^ (z >> U64(31))


@nb.njit(nb.uint64(nb.uint64, nb.uint64), cache=True, inline="always")
def key2(a, b):
    return mix64(mix64(a) ^ (b * KEY_C1))


@nb.njit(nb.uint64(nb.uint64, nb.uint64, nb.uint64), cache=True, inline="always")
def key3(a, b, c):
    return mix64(mix64(mix64(a) ^ (b * KEY_C1)) ^ (c * KEY_C2))


@nb.njit(nb.float64(nb.uint64), cache=True, inline="always")
def to_uniform(h):
    # (0, 1) strictly: 53-bit mantissa shifted off the origin
    return ((h >> U64(11)) + 0.5) * _INV_2_53


# Wichura's AS241 (PPND16) rational approximations for the inverse normal
# CDF; double-precision accurate to ~1e-15 over (0, 1).
_A = (3.3871328727963666080e0, 1.3314166789178437745e2,
      1.9715909503065514427e3, 1.3731693765509461125e4,
      4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4,
      3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1,
      1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4,
      1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


@nb.njit(nb.float64(nb.float64), cache=True, inline="always")
def inv_normal_cdf(p):
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = ((((((_A[7] * r + _A[6]) * r + _A[5]) * r + _A[4]) * r
                 + _A[3]) * r + _A[2]) * r + _A[1]) * r + _A[0]
        den = ((((((_B[7] * r + _B[6]) * r + _B[5]) * r + _B[4]) * r
                 + _B[3]) * r + _B[2]) * r + _B[1]) * r + _B[0]
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = ((((((_C[7] * r + _C[6]) * r + _C[5]) * r + _C[4]) * r
                 + _C[3]) * r + _C[2]) * r + _C[1]) * r + _C[0]
        den = ((((((_D[7] * r + _D[6]) * r + _D[5]) * r + _D[4]) * r
                 + _D[3]) * r + _D[2]) * r + _D[1]) * r + _D[0]
    else:
        r = r - 5.0
        num = ((((((_E[7] * r + _E[6]) * r + _E[5]) * r + _E[4]) * r
                 + _E[3]) * r + _E[2]) * r + _E[1]) * r + _E[0]
        den = ((((((_F[7] * r + _F[6]) * r + _F[5]) * r + _F[4]) * r
                 + _F[3]) * r + _F[2]) * r + _F[1]) * r + _F[0]
    val = num / den
    return -val if q < 0.0 else val


@nb.njit(nb.float64(nb.uint64), cache=True, inline="always")
def to_normal(h):
    return inv_normal_cdf(to_uniform(h))


@nb.njit(cache=True)
def uniform_stream(key, count, out):
    for i in range(count):
        out[i] = to_uniform(mix64(key ^ (U64(i + 1) * KEY_C2)))


@nb.njit(cache=True)
def normal_stream(key, count, out):
    for i in range(count):
        out[i] = to_normal(mix64(key ^ (U64(i + 1) * KEY_C2)))


def uniforms(key, count):
    out = np.empty(count, dtype=np.float64)
    uniform_stream(U64(key), count, out)
    return out


def normals(key, count):
    out = np.empty(count, dtype=np.float64)
    normal_stream(U64(key), count, out)
    return out


def py_mix64(z):
    """Pure-python splitmix64 finalizer; reference for the jitted path."""
    mask = (1 << 64) - 1
    z = (z + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


def py_key3(a, b, c):
    mask = (1 << 64) - 1
    h = py_mix64(py_mix64(a & mask) ^ ((b & mask) * 0xC2B2AE3D27D4EB4F & mask))
    return py_mix64(h ^ ((c & mask) * 0x165667B19E3779F9 & mask))
