"""Command-line entry point ``tiercache``.

Subcommands::

    tiercache eval        --scheme mpc --tier both          # total SCDP of one scheme
    tiercache optimize    --scheme cceo --tier mu           # placement vector and SCDP
    tiercache sweep       --kind sweep-M --grid M=5,10,15   # any experiment kind
    tiercache validate-mc --tolerance 3                     # analytic vs simulation
    tiercache config                                        # print the default config

Data goes to ``--out`` (or standard output); logs go to standard error.
Exit codes: 0 success, 1 validation failure (bad config or failed check),
2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional

from . import __version__
from .config import default_config_text, load_config, parse_quantity
from .errors import ConfigError
from .experiments import AXES, KINDS, SCHEMES, ExperimentSpec, point_seed, run_experiment, solve, validate_mc
from .io import Table, emit

log = logging.getLogger("tiercache")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _tiers(text: str) -> tuple:
    if text == "both":
        return ("mu", "mm")
    if text in ("mu", "mm"):
        return (text,)
    raise argparse.ArgumentTypeError("tier must be mu, mm or both")


def _schemes(text: str) -> tuple:
    out = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in out if s not in SCHEMES]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"schemes must be drawn from {', '.join(SCHEMES)}")
    return out


def parse_grid(items) -> Optional[dict]:
    """``["M=5,10", "gamma=0.5:2:0.5"]`` -> ``{"M": [5, 10], "gamma": [0.5, 1.0, 1.5, 2.0]}``."""
    if items is None:
        return None
    if not items:
        raise ConfigError("--grid was given without any AXIS=VALUES items")
    grid = {}
    for item in items:
        axis, sep, vals = item.partition("=")
        axis = axis.strip()
        if not sep or axis not in AXES:
            raise ConfigError(f"bad grid item {item!r}; expected AXIS=v1,v2,... with AXIS in {', '.join(AXES)}")
        if vals.count(":") == 2 and "," not in vals:
            lo, hi, step = (float(v) for v in vals.split(":"))
            if not step > 0:
                raise ConfigError(f"grid step must be positive in {item!r}")
            n = int(round((hi - lo) / step)) + 1
            grid[axis] = [round(lo + i * step, 12) for i in range(max(n, 0))]
        else:
            grid[axis] = [_grid_value(v.strip(), axis) for v in vals.split(",") if v.strip()]
    return grid


def _grid_value(v: str, axis: str):
    if axis in ("J", "N"):
        return int(v)
    try:
        return float(v)
    except ValueError:
        dim = "rate" if axis == "rate" else "density" if axis.startswith("lambda") else None
        if dim == "density":
            return parse_quantity(v, dim, f"grid {axis}") * 1e6  # grid densities are per km^2
        return parse_quantity(v, dim, f"grid {axis}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML config file (defaults if omitted)")
    p.add_argument("--seed", type=_seed, default=0, help="unsigned 64-bit master seed (default 0)")
    p.add_argument("--out", default="-", help="output path; '-' writes to standard output")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tier", type=_tiers, default=("mu", "mm"), help="mu, mm or both (default both)")
    p.add_argument("--mc-drops", type=int, default=None, help="add Monte Carlo columns with this many drops")
    p.add_argument("--workers", type=int, default=1, help="process-pool size for grid points")
    p.add_argument("--timing", action="store_true", help="add a wall_s column (breaks byte-identical reruns)")
    p.add_argument("-v", "--verbose", action="count", default=0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are validation failures, not runtime errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tiercache", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="exact total SCDP of one or more schemes")
    _common(p)
    p.add_argument("--scheme", type=_schemes, default=("mpc",), help="comma list of mpc, cceo, twostair")
    p.add_argument("--grid", nargs="*", metavar="AXIS=VALUES", help="optional grid (default: the config point)")

    p = sub.add_parser("optimize", help="placement vector of a scheme")
    _common(p)
    p.add_argument("--scheme", type=_schemes, default=("cceo",))
    p.add_argument("--trace", metavar="PATH", help="also write the CCEO iteration trace (csv) here")

    p = sub.add_parser("sweep", help="run an experiment kind over a grid")
    _common(p)
    p.add_argument("--kind", choices=KINDS, help="experiment kind (default: config experiment.kind)")
    p.add_argument("--scheme", type=_schemes, default=None)
    p.add_argument("--grid", nargs="*", metavar="AXIS=VALUES", help="e.g. M=5,10,15 or gamma=0.5:2:0.25")

    p = sub.add_parser("validate-mc", help="compare analytic SCDP with simulation")
    _common(p)
    p.add_argument("--tolerance", type=float, default=3.0, help="pass iff every |z| <= this (default 3)")
    p.add_argument("--abs-tolerance", type=float, default=None, help="also require |analytic - MC| <= this")
    p.add_argument("--grid", nargs="*", metavar="AXIS=VALUES")

    p = sub.add_parser("config", help="print the default config file")
    p.add_argument("--out", default="-")
    return ap


def _logging(verbosity: int):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def _run(args) -> int:
    if args.command == "config":
        text = default_config_text()
        if args.out in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        return EXIT_OK

    cfg = load_config(args.config)
    exp = cfg.experiment
    if args.command == "validate-mc":
        report = validate_mc(
            cfg,
            tolerance_sigma=args.tolerance,
            drops=args.mc_drops,
            seed=args.seed,
            grid=parse_grid(args.grid),
            abs_tolerance=args.abs_tolerance,
            workers=args.workers,
            tiers=args.tier,
        )
        emit(report.table, args.format, args.out)
        for r in report.failures:
            log.error("failed: %s", {k: r[k] for k in ("tier", "analytic", "mc", "se", "z", "error") if k in r})
        print(f"validate-mc: {'PASS' if report.passed else 'FAIL'} (max |z| = {report.worst_z:.3g})", file=sys.stderr)
        return EXIT_OK if report.passed else EXIT_INVALID

    if args.command == "eval":
        spec = ExperimentSpec(
            "eval",
            tiers=args.tier,
            grid=parse_grid(args.grid) or {},
            schemes=args.scheme,
            seed=args.seed,
            mc_drops=args.mc_drops,
            timing=args.timing,
        )
    elif args.command == "optimize":
        spec = ExperimentSpec(
            "optimize", tiers=args.tier, grid={}, schemes=args.scheme, seed=args.seed,
            mc_drops=args.mc_drops, timing=args.timing,
        )
    else:
        kind = args.kind or exp.get("kind")
        if kind is None:
            raise ConfigError("sweep needs --kind or experiment.kind in the config")
        grid = parse_grid(args.grid)
        if grid is None and "grid" in exp:
            grid = exp["grid"]
        spec = ExperimentSpec(
            kind,
            tiers=args.tier if args.tier != ("mu", "mm") or "tiers" not in exp else tuple(exp["tiers"]),
            grid=grid,
            schemes=args.scheme or tuple(exp.get("schemes", ("mpc",))),
            seed=args.seed,
            mc_drops=args.mc_drops,
            timing=args.timing,
        )
    table = run_experiment(spec, cfg, workers=args.workers)
    emit(table, args.format, args.out)
    if getattr(args, "trace", None):
        _write_trace(args.trace, spec, cfg)
    n_err = sum(1 for r in table.as_dicts() if r["error"])
    if n_err:
        log.error("%d of %d rows failed; see the error column", n_err, len(table.rows))
        return EXIT_RUNTIME
    return EXIT_OK


def _write_trace(path: str, spec: ExperimentSpec, cfg) -> None:
    """Per-iteration CCEO trace: tier, iteration, max variance, best objective, mean vector."""
    if "cceo" not in spec.schemes:
        raise ConfigError("--trace needs the cceo scheme")
    J = cfg.library.J
    trace = Table(
        ["tier", "iteration", "max_variance", "best"] + [f"mean{j + 1}" for j in range(J)],
        kind="cceo-trace",
        config=cfg.sha256,
        seed=spec.seed,
    )
    for tier in spec.tiers:
        # same seed as grid point 0, so this reproduces the reported run
        res = solve("cceo", tier, cfg, point_seed(spec.seed, 0))
        for t, var, best, mean in res["trace"].rows():
            trace.rows.append([tier, t, var, best] + [float(m) for m in mean])
    emit(trace, "csv", path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _logging(getattr(args, "verbose", 0))
    try:
        return _run(args)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INVALID
    except KeyboardInterrupt:
        log.error("interrupted")
        return EXIT_RUNTIME
    except Exception as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        if getattr(args, "verbose", 0) > 1:
            raise
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
