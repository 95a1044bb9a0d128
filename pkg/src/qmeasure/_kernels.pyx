# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-trial sampler for the local estimation experiment."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, log, sqrt
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef uint64_t K_SEED = 0x9E3779B97F4A7C15ULL
cdef uint64_t K_TRIAL = 0xD1B54A32D192ED03ULL
cdef uint64_t K_DRAW = 0x8CB92BA72F3D8DD7ULL
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = z + K_SEED
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t seed, uint64_t trial, uint64_t draw) nogil:
    cdef uint64_t h = _mix(seed * K_SEED + trial * K_TRIAL + draw * K_DRAW)
    return (<double>(h >> 11) + 0.5) * INV_2_53


cdef inline double _normal(uint64_t seed, uint64_t trial, uint64_t draw) nogil:
    cdef double u1 = _uniform(seed, trial, draw)
    cdef double u2 = _uniform(seed, trial, draw + 1)
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


cdef inline int64_t _bisect(const double[::1] cdf, double u) nogil:
    cdef int64_t lo = 0, hi = cdf.shape[0] - 1, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] < u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def uniforms(uint64_t seed, int64_t start, int64_t count, uint64_t draw):
    """Uniform draws for trials ``start .. start+count-1`` at one draw slot."""
    out = np.empty(count)
    cdef double[::1] o = out
    cdef int64_t i
    with nogil:
        for i in range(count):
            o[i] = _uniform(seed, <uint64_t>(start + i), draw)
    return out


def sample_local(uint64_t seed, int64_t start, int64_t count, double n, double mu,
                 double ux, double uy, double uz, bint exact,
                 const double[::1] cdf, double j0):
    """Raw stage-two estimates, shape ``(count, 3)``."""
    out = np.empty((count, 3))
    cdef double[:, ::1] o = out
    cdef double sh = sqrt(mu / (2.0 * (2.0 * mu - 1.0) ** 2))
    cdef double sz = sqrt(mu * (1.0 - mu))
    cdef double sn = sqrt(1.0 / (2.0 * sqrt(n)))
    cdef double rn = sqrt(n), shift = sqrt(n) * (mu - 0.5)
    cdef int64_t i
    cdef uint64_t t
    cdef double j
    with nogil:
        for i in range(count):
            t = <uint64_t>(start + i)
            o[i, 0] = ux + sh * _normal(seed, t, 0)
            o[i, 1] = uy + sh * _normal(seed, t, 2)
            if exact:
                j = j0 + <double>_bisect(cdf, _uniform(seed, t, 4))
                o[i, 2] = j / rn - shift + sn * _normal(seed, t, 5)
            else:
                o[i, 2] = uz + sz * _normal(seed, t, 4)
    return out
