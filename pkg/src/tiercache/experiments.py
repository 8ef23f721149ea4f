"""Experiment runner: parameter grids, schemes, optional Monte Carlo columns.

Every grid point is evaluated independently from the config plus the
point's overrides, with its own seed ``SeedSequence([seed, index])``.  Points
can run in a process pool; rows are collected and written in grid order, so
output does not depend on the worker count.
"""
from __future__ import annotations

import itertools
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .cceo import cceo_optimize
from .config import RunConfig
from .errors import ConfigError
from .io import Table
from .mc.oracle import McParams, simulate_scdp_mm, simulate_scdp_mu, simulate_total
from .model import mpc_placement
from .objectives import tier_objective
from .scdp_mm import MmCoverageContext, scdp_content_mm_los, scdp_content_mm_nlos, scdp_total_mm
from .scdp_mu import MuCoverageContext, scdp_content_mu, scdp_total_mu
from .twostair import twostair_optimize

__all__ = [
    "KINDS",
    "SCHEMES",
    "TIERS",
    "DEFAULT_GRIDS",
    "ExperimentSpec",
    "point_seed",
    "solve",
    "run_experiment",
    "validate_mc",
]

log = logging.getLogger(__name__)

KINDS = (
    "eval",
    "scdp-vs-b",
    "scdp-vs-rate",
    "sweep-M",
    "sweep-J",
    "sweep-gamma",
    "cache-density",
    "validate-mc",
    "optimize",
)
SCHEMES = ("mpc", "cceo", "twostair")
TIERS = ("mu", "mm")
AXES = ("b", "rate", "M", "J", "gamma", "lambda", "lambda_mu", "lambda_mm", "N")

DEFAULT_GRIDS = {
    "eval": {},
    "scdp-vs-b": {"b": [round(0.1 * i, 1) for i in range(11)]},
    "scdp-vs-rate": {"rate": [1e5, 2e5, 4e5, 8e5, 1.6e6, 3.2e6]},
    "sweep-M": {"M": [5, 10, 15, 20, 25]},
    "sweep-J": {"J": [50, 100, 150, 200, 250]},
    "sweep-gamma": {"gamma": [0.5, 0.75, 1.25, 1.5, 2.0]},
    "cache-density": {"lambda": [200, 400, 600, 800, 1000], "M": [10, 15, 20, 25, 30]},
    "validate-mc": {"N": [1, 2, 4], "b": [0.2, 0.5, 1.0], "lambda": [100, 600]},
    "optimize": {},
}


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run.

    ``grid`` maps an axis name to its values; points are the Cartesian
    product in the given axis order.  Densities (``lambda*``) are per km^2
    and ``rate`` is in bit/s.  ``mc_drops=None`` skips simulation except for
    ``validate-mc``, which then uses the config's drop count.
    """

    kind: str
    tiers: tuple = TIERS
    grid: Optional[dict] = None
    schemes: tuple = ("mpc",)
    out: Optional[str] = None
    seed: int = 0
    mc_drops: Optional[int] = None
    tolerance_sigma: float = 3.0
    abs_tolerance: Optional[float] = None
    timing: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; choose from {', '.join(KINDS)}")
        tiers = tuple(self.tiers)
        if not tiers or any(t not in TIERS for t in tiers):
            raise ConfigError(f"tiers must be a non-empty subset of {TIERS}, got {tiers}")
        schemes = tuple(self.schemes)
        if not schemes or any(s not in SCHEMES for s in schemes):
            raise ConfigError(f"schemes must be a non-empty subset of {SCHEMES}, got {schemes}")
        grid = DEFAULT_GRIDS[self.kind] if self.grid is None else self.grid
        for axis, vals in grid.items():
            if axis not in AXES:
                raise ConfigError(f"grid axis {axis!r} is not one of {', '.join(AXES)}")
            if len(vals) == 0:
                raise ConfigError(f"grid axis {axis!r} is empty")
        if self.kind == "scdp-vs-b" and "b" not in grid:
            raise ConfigError("scdp-vs-b needs a 'b' axis")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.mc_drops is not None and self.mc_drops < 1:
            raise ConfigError("mc_drops must be positive")
        object.__setattr__(self, "tiers", tiers)
        object.__setattr__(self, "schemes", schemes)
        object.__setattr__(self, "grid", {k: list(v) for k, v in grid.items()})

    def points(self) -> list:
        axes = list(self.grid)
        return [dict(zip(axes, combo)) for combo in itertools.product(*(self.grid[a] for a in axes))]


def point_seed(seed: int, index: int) -> int:
    """64-bit seed of grid point ``index``."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint64)[0])


def _apply(cfg: RunConfig, point: dict) -> RunConfig:
    over: dict = {}

    def put(sec, name, val):
        over.setdefault(sec, {})[name] = val

    for axis, val in point.items():
        if axis == "M":
            put("library", "M", float(val))
        elif axis == "J":
            put("library", "J", int(val))
        elif axis == "gamma":
            put("library", "gamma", float(val))
        elif axis == "rate":
            put("requirement", "rate", val)
        elif axis == "N":
            put("mu", "N", int(val))
        elif axis in ("lambda", "lambda_mu", "lambda_mm"):
            dens = val if isinstance(val, str) else f"{val} /km2"
            if axis != "lambda_mm":
                put("mu", "density", dens)
            if axis != "lambda_mu":
                put("mm", "density", dens)
    return cfg.with_overrides(**over) if over else cfg


def _context(tier: str, cfg: RunConfig):
    if tier == "mu":
        return MuCoverageContext.from_requirement(cfg.mu, cfg.requirement)
    return MmCoverageContext.from_requirement(cfg.mm, cfg.requirement)


def _total(tier, placement, lib, ctx) -> float:
    return scdp_total_mu(placement, lib, ctx) if tier == "mu" else scdp_total_mm(placement, lib, ctx)


def solve(scheme: str, tier: str, cfg: RunConfig, seed: int = 0, ctx=None) -> dict:
    """Placement of ``scheme`` for ``tier`` with its exact SCDP.

    Returns a dict with ``placement``, ``scdp``, ``iterations`` and
    ``converged`` (plus ``trace`` for CCEO).
    """
    lib = cfg.library
    ctx = _context(tier, cfg) if ctx is None else ctx
    if scheme == "mpc":
        b = mpc_placement(lib)
        return {"placement": b, "scdp": _total(tier, b, lib, ctx), "iterations": 0, "converged": True}
    if scheme == "cceo":
        b, trace = cceo_optimize(tier_objective(tier, lib, ctx), lib, replace(cfg.cceo, seed=seed % 2**63))
        return {
            "placement": b,
            "scdp": _total(tier, b, lib, ctx),
            "iterations": trace.iterations,
            "converged": trace.converged,
            "trace": trace,
        }
    if scheme == "twostair":
        res = twostair_optimize(tier, lib, ctx, cfg.newton)
        return {"placement": res.placement, "scdp": res.scdp, "iterations": res.iterations, "converged": res.converged}
    raise ConfigError(f"unknown scheme {scheme!r}")


def _mc_params(cfg: RunConfig, drops: int, seed: int) -> McParams:
    return replace(cfg.mc, drops=int(drops), seed=seed)


def _columns(spec: ExperimentSpec, J: int = 0) -> list:
    cols = list(spec.grid)
    if spec.kind == "scdp-vs-b":
        for t in spec.tiers:
            cols += [t] if t == "mu" else ["mm", "mm_los", "mm_nlos"]
            if spec.mc_drops:
                cols += [f"{t}_mc", f"{t}_se"]
    elif spec.kind == "validate-mc":
        cols = ["tier"] + cols + ["analytic", "mc", "se", "z", "pass"]
    elif spec.kind == "optimize":
        cols += ["tier", "scheme", "scdp", "iterations", "converged"]
        if spec.mc_drops:
            cols += ["mc", "se"]
        cols += [f"b{j + 1}" for j in range(J)]
    else:
        for t in spec.tiers:
            for s in spec.schemes:
                cols.append(f"{t}_{s}")
                if spec.mc_drops:
                    cols += [f"{t}_{s}_mc", f"{t}_{s}_se"]
    cols.append("error")
    if spec.timing:
        cols.append("wall_s")
    return cols


def _eval_point(spec: ExperimentSpec, cfg: RunConfig, point: dict, seed: int) -> list:
    """Result rows (without error / timing columns) for one grid point."""
    pcfg = _apply(cfg, point)
    head = [point[a] for a in spec.grid]
    if spec.kind == "scdp-vs-b":
        b = float(point["b"])
        row = list(head)
        for t in spec.tiers:
            ctx = _context(t, pcfg)
            if t == "mu":
                row.append(scdp_content_mu(b, ctx))
            else:
                los, nlos = scdp_content_mm_los(b, ctx), scdp_content_mm_nlos(b, ctx)
                row += [los + nlos, los, nlos]
            if spec.mc_drops:
                mc = _mc_params(pcfg, spec.mc_drops, seed)
                est = simulate_scdp_mu(b, pcfg.mu, ctx.phi, mc) if t == "mu" else simulate_scdp_mm(b, pcfg.mm, ctx.phi, mc)
                row += [est.mean, est.std_error]
        return [row]
    if spec.kind == "optimize":
        rows = []
        for t in spec.tiers:
            ctx = _context(t, pcfg)
            for s in spec.schemes:
                res = solve(s, t, pcfg, seed, ctx)
                row = head + [t, s, res["scdp"], res["iterations"], bool(res["converged"])]
                if spec.mc_drops:
                    est = _simulate(t, res["placement"], pcfg, ctx, spec.mc_drops, seed)
                    row += [est.mean, est.std_error]
                rows.append(row + [float(v) for v in res["placement"].b])
        return rows
    row = list(head)
    for t in spec.tiers:
        ctx = _context(t, pcfg)
        for s in spec.schemes:
            res = solve(s, t, pcfg, seed, ctx)
            row.append(res["scdp"])
            if spec.mc_drops:
                est = _simulate(t, res["placement"], pcfg, ctx, spec.mc_drops, seed)
                row += [est.mean, est.std_error]
    return [row]


def _simulate(tier, placement, cfg, ctx, drops, seed):
    mc = _mc_params(cfg, drops, seed)
    if tier == "mu":
        return simulate_total(placement, cfg.library, mu=cfg.mu, phi_mu=ctx.phi, mc=mc)["mu"]
    return simulate_total(placement, cfg.library, mm=cfg.mm, phi_mm=ctx.phi, mc=mc)["mm"]


def _validate_rows(spec: ExperimentSpec, cfg: RunConfig, point: dict, seed: int) -> list:
    pcfg = _apply(cfg, point)
    drops = spec.mc_drops or cfg.mc.drops
    mc = _mc_params(pcfg, drops, seed)
    b = float(point.get("b", 1.0))
    out = []
    for t in spec.tiers:
        if t == "mm" and point.get("N", 1) != spec.grid.get("N", [1])[0]:
            continue  # the antenna count does not enter the mmWave tier
        ctx = _context(t, pcfg)
        if t == "mu":
            analytic, est = scdp_content_mu(b, ctx), simulate_scdp_mu(b, pcfg.mu, ctx.phi, mc)
        else:
            analytic = scdp_content_mm_los(b, ctx) + scdp_content_mm_nlos(b, ctx)
            est = simulate_scdp_mm(b, pcfg.mm, ctx.phi, mc)
        z = est.z_score(analytic)
        ok = abs(z) <= spec.tolerance_sigma
        if spec.abs_tolerance is not None:
            ok = ok and abs(analytic - est.mean) <= spec.abs_tolerance
        head = [point[a] if not (t == "mm" and a == "N") else "" for a in spec.grid]
        out.append([t] + head + [analytic, est.mean, est.std_error, z, bool(ok)])
    return out


def _task(args):
    spec, cfg, idx, point = args
    seed = point_seed(spec.seed, idx)
    t0 = time.perf_counter()
    log.info("point %d: %s", idx, point)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rows = (_validate_rows if spec.kind == "validate-mc" else _eval_point)(spec, cfg, point, seed)
        err = ""
    except Exception as exc:  # one bad point must not lose the rest of the sweep
        log.error("point %d failed: %s", idx, exc)
        rows, err = None, f"{type(exc).__name__}: {exc}"
    return rows, err, time.perf_counter() - t0


def _failed_row(spec, columns, point) -> list:
    row = [math.nan] * (len(columns) - 1 - int(spec.timing))
    for i, a in enumerate(spec.grid):
        row[columns.index(a)] = point[a]
    return row


def run_experiment(spec: ExperimentSpec, config: RunConfig, workers: int = 1) -> Table:
    """Evaluate every grid point and return the table in grid order.

    A point that raises gets one row of ``nan`` values with the exception
    text in the ``error`` column; the remaining points still run.
    """
    J = 0
    if spec.kind == "optimize":
        Js = {int(v) for v in spec.grid.get("J", [config.library.J])}
        if len(Js) != 1:
            raise ConfigError("optimize needs a single library size J (placement columns)")
        J = Js.pop()
    columns = _columns(spec, J)
    points = spec.points()
    tasks = [(spec, config, i, p) for i, p in enumerate(points)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    table = Table(columns, kind=spec.kind, config=config.sha256, seed=int(spec.seed))
    for point, (rows, err, wall) in zip(points, results):
        if rows is None:
            rows = [_failed_row(spec, columns, point)]
        for r in rows:
            r = r + [err]
            if spec.timing:
                r.append(wall)
            table.rows.append(r)
    return table


@dataclass
class McReport:
    table: Table
    passed: bool
    worst_z: float
    failures: list = field(default_factory=list)


def validate_mc(
    config: RunConfig,
    tolerance_sigma: float = 3.0,
    drops: Optional[int] = None,
    seed: int = 0,
    grid: Optional[dict] = None,
    abs_tolerance: Optional[float] = None,
    workers: int = 1,
    tiers: tuple = TIERS,
) -> McReport:
    """Analytic-vs-simulation check over a grid; passes iff every ``|z| <= tolerance_sigma``.

    The default grid is ``N in {1, 2, 4}`` x ``b in {0.2, 0.5, 1}`` x
    ``lambda in {100, 600} /km^2``; the mmWave tier ignores ``N``.
    """
    spec = ExperimentSpec(
        "validate-mc",
        tiers=tiers,
        grid=grid,
        seed=seed,
        mc_drops=drops,
        tolerance_sigma=tolerance_sigma,
        abs_tolerance=abs_tolerance,
    )
    table = run_experiment(spec, config, workers)
    rows = table.as_dicts()
    failures = [r for r in rows if not r["pass"] or r["error"]]
    zs = [abs(r["z"]) for r in rows if not r["error"]]
    return McReport(table, not failures, max(zs) if zs else math.nan, failures)
