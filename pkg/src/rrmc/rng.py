"""Counter-based random numbers.

Every normal variate used by the engine is a pure function of a 64-bit seed
and a 4-word counter, so any block of paths can be regenerated on its own,
in any order, on any number of threads.  The bit source is Philox4x64-10
(Salmon et al., "Parallel random numbers: as easy as 1, 2, 3"), identical to
``numpy.random.Philox``; uniforms are turned into normals by the AS241
inverse normal CDF.

Counter layout used throughout the package::

    c0  step * n_blocks + asset_block   (4 assets per Philox call)
    c1  path index (inner path index for nested simulation)
    c2  outer path index (nested simulation only, else 0)
    c3  stream tag (0 for plain path sets)
"""
import math

import numba
import numpy as np

_MASK64 = (1 << 64) - 1
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S12 = np.uint64(12)

# Salt mixed into the seed of test path sets so they never share a stream
# with the training set built from the same user seed.
TEST_SEED_SALT = 0x5851F42D4C957F2D


def as_key(seed):
    """Reduce an arbitrary Python int to the 64-bit Philox key word."""
    return np.uint64(int(seed) & _MASK64)


def test_seed(seed):
    """Seed of the independent test set paired with training seed ``seed``."""
    return (int(seed) ^ TEST_SEED_SALT) & _MASK64


@numba.njit(cache=True, inline="always")
def _mulhilo(a, b):
    a_lo = a & _LO32
    a_hi = a >> _S32
    b_lo = b & _LO32
    b_hi = b >> _S32
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    hi_hi = a_hi * b_hi
    cross = (lo_lo >> _S32) + (hi_lo & _LO32) + lo_hi
    hi = hi_hi + (hi_lo >> _S32) + (cross >> _S32)
    return hi, a * b


@numba.njit(cache=True)
def philox4x64(c0, c1, c2, c3, k0, k1):
    """Philox4x64 with 10 rounds; all arguments and results are uint64."""
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@numba.njit(cache=True, inline="always")
def to_unit(x):
    """Map a uint64 to a double strictly inside (0, 1) using its top 52 bits.

    With 53 bits the largest word rounds to exactly 1.0.
    """
    return (float(x >> _S12) + 0.5) * (1.0 / 4503599627370496.0)


@numba.njit(cache=True)
def ndtri(p):
    """Inverse standard normal CDF, Wichura's AS241 (PPND16), ~1e-16 relative."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                         + 67265.770927008700853) * r + 45921.953931549871457) * r
                       + 13731.693765509461125) * r + 1971.5909503065514427) * r
                     + 133.14166789178437745) * r + 3.387132872796366608) / \
            (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                  + 39307.89580009271061) * r + 21213.794301586595867) * r
                + 5394.1960214247511077) * r + 687.1870074920579083) * r
              + 42.313330701600911252) * r + 1.0)
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                    + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                  + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                + 4.6303378461565452959) * r + 1.42343711074968357734) / \
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                  + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                + 0.68976733498510000455) * r + 1.6763848301838038494) * r
              + 2.05319162663775882187) * r + 1.0)
    else:
        r -= 5.0
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                  + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                + 5.4637849111641143699) * r + 6.6579046435011037772) / \
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                  + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
              + 0.59983220655588793769) * r + 1.0)
    return -val if q < 0.0 else val


@numba.njit(cache=True)
def fill_normals(out, step, c1, c2, c3, k0):
    """Write ``len(out)`` normals for one (step, path) cell into ``out``."""
    d = out.shape[0]
    n_blocks = (d + 3) // 4
    zero = np.uint64(0)
    for blk in range(n_blocks):
        x0, x1, x2, x3 = philox4x64(np.uint64(step * n_blocks + blk), c1, c2, c3, k0, zero)
        base = 4 * blk
        out[base] = ndtri(to_unit(x0))
        if base + 1 < d:
            out[base + 1] = ndtri(to_unit(x1))
        if base + 2 < d:
            out[base + 2] = ndtri(to_unit(x2))
        if base + 3 < d:
            out[base + 3] = ndtri(to_unit(x3))


@numba.njit(cache=True)
def _normal_table(n_paths, n_steps, dim, k0, c2, c3):
    out = np.empty((n_paths, n_steps, dim))
    for i in range(n_paths):
        for j in range(n_steps):
            fill_normals(out[i, j], j, np.uint64(i), c2, c3, k0)
    return out


def standard_normals(seed, n_paths, n_steps, dim, outer=0, tag=0):
    """Array ``(n_paths, n_steps, dim)`` of counter-indexed standard normals."""
    return _normal_table(int(n_paths), int(n_steps), int(dim), as_key(seed),
                         np.uint64(outer), np.uint64(tag))


def raw_block(seed, counter):
    """The four uint64 words Philox produces for ``counter`` under ``seed``."""
    c = [np.uint64(int(v) & _MASK64) for v in counter]
    return tuple(int(v) for v in philox4x64(c[0], c[1], c[2], c[3], as_key(seed), np.uint64(0)))
