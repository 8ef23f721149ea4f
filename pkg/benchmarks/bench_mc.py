"""Compare the compiled and numpy Monte Carlo kernels.

Runs the per-content simulators of both tiers on each backend, reports the
best-of-``repeat`` wall time, nanoseconds per simulated SBS and the number
of drops whose outcome differs between backends.

    python benchmarks/bench_mc.py --drops 2000 --density 100 600
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from tiercache.mc import _backend
from tiercache.mc.oracle import McParams, _mm_run, _mu_run, _window
from tiercache.model import DeliveryRequirement, MmTierConfig, MuTierConfig, sinr_threshold


def run(tier: str, backend: str, drops: int, density_km2: float, b: float, repeat: int):
    _backend.use(backend)
    req = DeliveryRequirement()
    mc = McParams(drops=drops, seed=7)
    ids = np.arange(drops, dtype=np.int64)
    bd = np.full(drops, b)
    if tier == "mu":
        cfg = MuTierConfig(lambda_mu=density_km2 * 1e-6)
        R = _window(mc, b, cfg.lambda_mu)
        fn = lambda: _mu_run(bd, ids, cfg, sinr_threshold(req, cfg.W_mu), mc, R)
    else:
        cfg = MmTierConfig(lambda_mm=density_km2 * 1e-6)
        R = _window(mc, b, cfg.lambda_mm)
        fn = lambda: _mm_run(bd, ids, cfg, sinr_threshold(req, cfg.W_mm), mc, R)
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    points = drops * density_km2 * 1e-6 * math.pi * R * R
    return best, best / points * 1e9, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--drops", type=int, default=2000)
    ap.add_argument("--density", type=float, nargs="+", default=[100.0, 600.0], help="SBS density per km^2")
    ap.add_argument("--b", type=float, default=0.5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        _backend.use("compiled")
    except ImportError:
        print("compiled kernels are not built; nothing to compare")
        return 1
    print(f"{'tier':4} {'lambda':>7} {'backend':>9} {'time_s':>9} {'ns/SBS':>8} {'speedup':>8} {'mismatch':>8}")
    for tier in ("mu", "mm"):
        for lam in args.density:
            tc, nc, oc = run(tier, "compiled", args.drops, lam, args.b, args.repeat)
            tp, npy, op = run(tier, "python", args.drops, lam, args.b, args.repeat)
            diff = int(np.count_nonzero(oc != op))
            print(f"{tier:4} {lam:7.0f} {'compiled':>9} {tc:9.3f} {nc:8.1f} {'':>8} {'':>8}")
            print(f"{tier:4} {lam:7.0f} {'python':>9} {tp:9.3f} {npy:8.1f} {tp / tc:8.2f} {diff:8d}")
    _backend.use("compiled")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
