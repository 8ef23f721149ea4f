"""Pure-Python (numpy) per-drop kernels; same streams and tests as the compiled ones.

Each drop is vectorised over its points.  Interference sums use numpy's
pairwise summation rather than a running sum, so outcomes can differ from
the compiled backend in the last ulp of a SINR that sits exactly on the
threshold; the two backends agree statistically, not bit for bit.
"""
from __future__ import annotations

import math

import numpy as np

from ._streams import TAG_COUNT, TAG_DESIRED, TAG_POINTS, mix64, uniforms, GOLDEN

_BATCH = 16


class _Sequential:
    """Sequential reader of one counter-based stream, fetched in batches."""

    def __init__(self, key, flip: bool):
        self.key, self.flip, self.k = key, flip, 0
        self.buf, self.pos = np.empty(0), 0

    def next(self) -> float:
        if self.pos == self.buf.size:
            self.buf = uniforms(self.key, np.arange(self.k, self.k + _BATCH))
            if self.flip:
                self.buf = 1.0 - self.buf
            self.k += _BATCH
            self.pos = 0
        u = float(self.buf[self.pos])
        self.pos += 1
        return u


def poisson(mean: float, key, flip: bool) -> int:
    """Poisson draw from a stream: inversion below 10, PTRS above."""
    if mean <= 0:
        return 0
    s = _Sequential(key, flip)
    if mean < 10:
        enlam = math.exp(-mean)
        x, prod = 0, 1.0
        while True:
            prod *= s.next()
            if prod > enlam:
                x += 1
            else:
                return x
    slam = math.sqrt(mean)
    loglam = math.log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        U = s.next() - 0.5
        V = s.next()
        us = 0.5 - abs(U)
        k = math.floor((2.0 * a / us + b) * U + mean + 0.43)
        if us >= 0.07 and V <= vr:
            return int(k)
        if k < 0 or (us < 0.013 and V > us):
            continue
        if math.log(V) + math.log(invalpha) - math.log(a / (us * us) + b) <= -mean + k * loglam - math.lgamma(k + 1.0):
            return int(k)


def _key(smix, sid: int, tag: int):
    return mix64(smix ^ np.uint64(sid * 8 + tag))


def _points(smix, sid: int, flip: bool, n: int, R2: float):
    u = uniforms(_key(smix, sid, TAG_POINTS), np.arange(3 * n)).reshape(n, 3)
    if flip:
        u = 1.0 - u
    return R2 * u[:, 0], u[:, 1], u[:, 2]


def _drops(drop_ids, b_drop, antithetic: bool):
    for d, g in enumerate(np.asarray(drop_ids, dtype=np.int64).tolist()):
        if b_drop[d] <= 0:
            continue
        yield d, (g // 2, g % 2 == 1) if antithetic else (g, False)


def mu_outcomes(seed, drop_ids, b_drop, lam, R, alpha, noise, far, phi, n_ant, antithetic):
    b_drop = np.ascontiguousarray(b_drop, dtype=float)
    out = np.zeros(b_drop.size, dtype=np.uint8)
    with np.errstate(over="ignore"):
        smix = mix64(np.uint64(seed) + GOLDEN)
    mean, R2, ha = lam * math.pi * R * R, R * R, 0.5 * alpha
    for d, (sid, flip) in _drops(drop_ids, b_drop, antithetic):
        n = poisson(mean, _key(smix, sid, TAG_COUNT), flip)
        r2, uc, uf = _points(smix, sid, flip, n, R2)
        cached = uc < b_drop[d]
        if not cached.any():
            continue
        term = -np.log(uf) * r2 ** (-ha)
        idx = np.flatnonzero(cached)
        best = idx[np.argmin(r2[idx])]
        other = np.delete(term, best).sum()
        ud = uniforms(_key(smix, sid, TAG_DESIRED), np.arange(n_ant))
        if flip:
            ud = 1.0 - ud
        h = -np.log(ud).sum()
        out[d] = h * r2[best] ** (-ha) > phi * (other + far + noise)
    return out


def mm_outcomes(seed, drop_ids, b_drop, lam, R, gain, alpha_L, alpha_N, D_L, sigma2, phi, antithetic):
    b_drop = np.ascontiguousarray(b_drop, dtype=float)
    out = np.zeros(b_drop.size, dtype=np.uint8)
    with np.errstate(over="ignore"):
        smix = mix64(np.uint64(seed) + GOLDEN)
    mean, R2 = lam * math.pi * R * R, R * R
    for d, (sid, flip) in _drops(drop_ids, b_drop, antithetic):
        n = poisson(mean, _key(smix, sid, TAG_COUNT), flip)
        r2, uc, _ = _points(smix, sid, flip, n, R2)
        cached = uc < b_drop[d]
        if not cached.any():
            continue
        y = math.sqrt(r2[cached].min())
        if y < D_L:
            out[d] = 1 if gain * y ** (-alpha_L) / sigma2 > phi else 0
        else:
            out[d] = 2 if gain * y ** (-alpha_N) / sigma2 > phi else 0
    return out
