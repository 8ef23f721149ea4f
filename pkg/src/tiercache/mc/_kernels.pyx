# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-drop kernels for the Monte Carlo oracle.

Mirrors ``_kernels_py`` draw for draw: the same counter-based streams, the
same Poisson sampler and the same success test.  Drops run under
``prange``; each writes only its own outcome slot.
"""
import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp, fabs, floor, lgamma, log, pow, sqrt, INFINITY
from libc.stdint cimport int64_t, uint8_t, uint64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TO_UNIT = 1.1102230246251565e-16  # 2**-53
cdef int TAG_COUNT = 0
cdef int TAG_POINTS = 1
cdef int TAG_DESIRED = 2


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t stream_key(uint64_t smix, uint64_t drop, int tag) noexcept nogil:
    return mix64(smix ^ (drop * 8 + <uint64_t>tag))


cdef inline double unif(uint64_t key, uint64_t k, bint flip) noexcept nogil:
    cdef double u = (<double>(mix64(key + (k + 1) * GOLDEN) >> 11) + 0.5) * TO_UNIT
    if flip:
        return 1.0 - u
    return u


cdef int64_t poisson(double mean, uint64_t key, bint flip) noexcept nogil:
    # inversion below 10, Hormann's PTRS above (same split as numpy)
    cdef uint64_t k = 0
    cdef int64_t x = 0
    cdef double prod, enlam, slam, loglam, b, a, invalpha, vr, U, V, us, kk
    if mean <= 0.0:
        return 0
    if mean < 10.0:
        enlam = exp(-mean)
        prod = 1.0
        while True:
            prod *= unif(key, k, flip)
            k += 1
            if prod > enlam:
                x += 1
            else:
                return x
    slam = sqrt(mean)
    loglam = log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        U = unif(key, k, flip) - 0.5
        V = unif(key, k + 1, flip)
        k += 2
        us = 0.5 - fabs(U)
        kk = floor((2.0 * a / us + b) * U + mean + 0.43)
        if us >= 0.07 and V <= vr:
            return <int64_t>kk
        if kk < 0.0 or (us < 0.013 and V > us):
            continue
        if log(V) + log(invalpha) - log(a / (us * us) + b) <= -mean + kk * loglam - lgamma(kk + 1.0):
            return <int64_t>kk


cdef uint8_t mu_drop(uint64_t smix, uint64_t sid, bint flip, double b, double mean, double R2,
                     double half_alpha, double noise, double far, double phi, int n_ant) noexcept nogil:
    if b <= 0.0:
        return 0
    cdef int64_t n = poisson(mean, stream_key(smix, sid, TAG_COUNT), flip)
    cdef uint64_t kp = stream_key(smix, sid, TAG_POINTS)
    cdef int64_t i
    cdef double r2, term, other = 0.0, best_r2 = INFINITY, best_term = 0.0, h = 0.0
    cdef bint found = 0
    for i in range(n):
        r2 = R2 * unif(kp, 3 * i, flip)
        term = -log(unif(kp, 3 * i + 2, flip)) * pow(r2, -half_alpha)
        if unif(kp, 3 * i + 1, flip) < b and r2 < best_r2:
            if found:
                other += best_term
            best_r2 = r2
            best_term = term
            found = 1
        else:
            other += term
    if not found:
        return 0
    cdef uint64_t kd = stream_key(smix, sid, TAG_DESIRED)
    for i in range(n_ant):
        h -= log(unif(kd, i, flip))
    return h * pow(best_r2, -half_alpha) > phi * (other + far + noise)


cdef uint8_t mm_drop(uint64_t smix, uint64_t sid, bint flip, double b, double mean, double R2,
                     double gain, double alpha_L, double alpha_N, double D_L, double sigma2,
                     double phi) noexcept nogil:
    if b <= 0.0:
        return 0
    cdef int64_t n = poisson(mean, stream_key(smix, sid, TAG_COUNT), flip)
    cdef uint64_t kp = stream_key(smix, sid, TAG_POINTS)
    cdef int64_t i
    cdef double r2, best_r2 = INFINITY, y, alpha
    for i in range(n):
        r2 = R2 * unif(kp, 3 * i, flip)
        if unif(kp, 3 * i + 1, flip) < b and r2 < best_r2:
            best_r2 = r2
    if best_r2 == INFINITY:
        return 0
    y = sqrt(best_r2)
    if y < D_L:
        return 1 if gain * pow(y, -alpha_L) / sigma2 > phi else 0
    return 2 if gain * pow(y, -alpha_N) / sigma2 > phi else 0


def mu_outcomes(uint64_t seed, int64_t[::1] drop_ids, double[::1] b_drop, double lam, double R,
                double alpha, double noise, double far, double phi, int n_ant, bint antithetic):
    """Success flags of the drops ``drop_ids`` for the sub-6 GHz tier.

    ``noise`` and ``far`` are already divided by ``P * beta``.
    """
    cdef Py_ssize_t n_drops = b_drop.shape[0], d
    out = np.zeros(n_drops, dtype=np.uint8)
    cdef uint8_t[::1] res = out
    cdef uint64_t smix = mix64(seed + GOLDEN)
    cdef double mean = lam * 3.141592653589793 * R * R, R2 = R * R, ha = 0.5 * alpha
    cdef int64_t g
    for d in prange(n_drops, nogil=True, schedule="static"):
        g = drop_ids[d]
        if antithetic:
            res[d] = mu_drop(smix, <uint64_t>(g // 2), g % 2 == 1, b_drop[d], mean, R2, ha, noise, far, phi, n_ant)
        else:
            res[d] = mu_drop(smix, <uint64_t>g, 0, b_drop[d], mean, R2, ha, noise, far, phi, n_ant)
    return out


def mm_outcomes(uint64_t seed, int64_t[::1] drop_ids, double[::1] b_drop, double lam, double R,
                double gain, double alpha_L, double alpha_N, double D_L, double sigma2, double phi,
                bint antithetic):
    """Outcomes of the drops ``drop_ids`` for the mmWave tier: 0 failure, 1 LOS success, 2 NLOS success."""
    cdef Py_ssize_t n_drops = b_drop.shape[0], d
    out = np.zeros(n_drops, dtype=np.uint8)
    cdef uint8_t[::1] res = out
    cdef uint64_t smix = mix64(seed + GOLDEN)
    cdef double mean = lam * 3.141592653589793 * R * R, R2 = R * R
    cdef int64_t g
    for d in prange(n_drops, nogil=True, schedule="static"):
        g = drop_ids[d]
        if antithetic:
            res[d] = mm_drop(smix, <uint64_t>(g // 2), g % 2 == 1, b_drop[d], mean, R2, gain,
                             alpha_L, alpha_N, D_L, sigma2, phi)
        else:
            res[d] = mm_drop(smix, <uint64_t>g, 0, b_drop[d], mean, R2, gain, alpha_L, alpha_N,
                             D_L, sigma2, phi)
    return out
