"""YAML run configuration: schema, unit parsing and validation.

A config file has the sections ``library``, ``mu``, ``mm``, ``requirement``,
``cceo``, ``newton``, ``mc`` and an optional ``experiment``.  Every field is
optional and defaults to the reference parameter set.  Quantities may be
bare numbers in SI units or strings with a unit, e.g. ``"20 dBm"``,
``"600 /km2"``, ``"10 MHz"``, ``"400 kbit/s"``.

Validation errors name the offending field and, when the value came from a
file, its line.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

import yaml

from .cceo import CceoParams
from .errors import ConfigError, TiercacheError
from .mc.oracle import McParams
from .model import (
    ContentLibrary,
    DeliveryRequirement,
    MmTierConfig,
    MuTierConfig,
    free_space_intercept,
    thermal_noise_watt,
    zipf_popularity,
)
from .twostair import NewtonParams

__all__ = ["SCHEMA_VERSION", "RunConfig", "load_config", "parse_config", "parse_quantity", "default_config_text"]

SCHEMA_VERSION = 1

# unit -> (dimension, converter to SI)
_UNITS = {
    "w": ("power", lambda v: v),
    "mw": ("power", lambda v: v * 1e-3),
    "dbm": ("power", lambda v: 10.0 ** (v / 10.0) * 1e-3),
    "dbw": ("power", lambda v: 10.0 ** (v / 10.0)),
    "hz": ("frequency", lambda v: v),
    "khz": ("frequency", lambda v: v * 1e3),
    "mhz": ("frequency", lambda v: v * 1e6),
    "ghz": ("frequency", lambda v: v * 1e9),
    "/m2": ("density", lambda v: v),
    "/km2": ("density", lambda v: v * 1e-6),
    "bit/s": ("rate", lambda v: v),
    "kbit/s": ("rate", lambda v: v * 1e3),
    "mbit/s": ("rate", lambda v: v * 1e6),
    "bps": ("rate", lambda v: v),
    "kbps": ("rate", lambda v: v * 1e3),
    "mbps": ("rate", lambda v: v * 1e6),
    "m": ("length", lambda v: v),
    "km": ("length", lambda v: v * 1e3),
    "db": ("ratio", lambda v: 10.0 ** (v / 10.0)),
}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d].*?)?\s*$")


def parse_quantity(value: Any, dimension: Optional[str], where: str = "") -> float:
    """Convert a number or ``"<number> <unit>"`` string to SI.

    ``dimension=None`` accepts plain numbers only.
    """
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a number or a quantity string, got {value!r}")
    m = _QUANTITY.match(value)
    if m is None:
        raise ConfigError(f"{where}: cannot parse quantity {value!r}")
    num, unit = float(m.group(1)), m.group(2)
    if unit is None:
        return num
    key = unit.replace(" ", "").replace("²", "2").replace("^2", "2").lower()
    if key not in _UNITS:
        raise ConfigError(f"{where}: unknown unit {unit!r}")
    dim, conv = _UNITS[key]
    if dimension is None or dim != dimension:
        raise ConfigError(f"{where}: unit {unit!r} is a {dim}, expected {dimension or 'a plain number'}")
    return float(conv(num))


# field -> (dimension or None, kind) with kind in {"float", "int"}
_SCHEMA = {
    "library": {
        "J": (None, "int"),
        "M": (None, "float"),
        "gamma": (None, "float"),
        "sizes": (None, "sizes"),
        "size_seed": (None, "int"),
    },
    "mu": {
        "N": (None, "int"),
        "power": ("power", "float"),
        "density": ("density", "float"),
        "alpha": (None, "float"),
        "carrier": ("frequency", "float"),
        "bandwidth": ("frequency", "float"),
        "noise_figure": ("ratio", "float"),
    },
    "mm": {
        "array_gain": (None, "float"),
        "power": ("power", "float"),
        "density": ("density", "float"),
        "alpha_los": (None, "float"),
        "alpha_nlos": (None, "float"),
        "los_radius": ("length", "float"),
        "carrier": ("frequency", "float"),
        "bandwidth": ("frequency", "float"),
        "noise_figure": ("ratio", "float"),
    },
    "requirement": {"rate": ("rate", "float")},
    "cceo": {
        "samples": (None, "int"),
        "elite": (None, "int"),
        "iota": (None, "float"),
        "beta": (None, "float"),
        "q": (None, "int"),
        "penalty": (None, "float"),
        "eps_stop": (None, "float"),
        "max_iters": (None, "int"),
        "init_var": (None, "float"),
    },
    "newton": {
        "max_iters": (None, "int"),
        "grad_tol": (None, "float"),
        "shrink": (None, "float"),
        "armijo": (None, "float"),
        "init_varpi": (None, "float"),
    },
    "mc": {
        "drops": (None, "int"),
        "window_radius": ("length", "float"),
        "antithetic": (None, "bool"),
        "far_field": (None, "bool"),
    },
    "experiment": {
        "kind": (None, "str"),
        "tiers": (None, "list"),
        "schemes": (None, "list"),
        "grid": (None, "grid"),
        "tolerance_sigma": (None, "float"),
    },
}

_DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "library": {"J": 100, "M": 10.0, "gamma": 1.5, "sizes": None, "size_seed": 0},
    "mu": {
        "N": 2,
        "power": "20 dBm",
        "density": "600 /km2",
        "alpha": 2.5,
        "carrier": "1 GHz",
        "bandwidth": "10 MHz",
        "noise_figure": "0 dB",
    },
    "mm": {
        "array_gain": 2.0,
        "power": "20 dBm",
        "density": "600 /km2",
        "alpha_los": 2.25,
        "alpha_nlos": 3.76,
        "los_radius": "15 m",
        "carrier": "60 GHz",
        "bandwidth": "1 GHz",
        "noise_figure": "0 dB",
    },
    "requirement": {"rate": "400 kbit/s"},
    "cceo": {},
    "newton": {},
    "mc": {"drops": 20000, "window_radius": None, "antithetic": False, "far_field": True},
}


def _line_map(text: str) -> dict:
    """``{("section", "field"): line}`` for every mapping key in a YAML document."""
    out = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = path + (k.value,)
                out[p] = k.start_mark.line + 1
                walk(v, p)

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return out
    if root is not None:
        walk(root, ())
    return out


@dataclass
class RunConfig:
    """A validated configuration with every quantity in SI units."""

    raw: dict
    resolved: dict
    library: ContentLibrary
    mu: MuTierConfig
    mm: MmTierConfig
    requirement: DeliveryRequirement
    cceo: CceoParams
    newton: NewtonParams
    mc: McParams
    experiment: dict = field(default_factory=dict)

    @property
    def sha256(self) -> str:
        """Hash of the SI-resolved config (insensitive to layout and unit spelling)."""
        blob = json.dumps(self.resolved, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, **sections) -> "RunConfig":
        """Return a new config with ``section={"field": value}`` entries replaced."""
        raw = copy.deepcopy(self.raw)
        for sec, vals in sections.items():
            raw.setdefault(sec, {}).update(vals)
        return parse_config(raw)


def _merge(user: dict) -> dict:
    raw = copy.deepcopy(_DEFAULTS)
    for key, val in user.items():
        if key == "schema_version":
            raw[key] = val
            continue
        if key not in _SCHEMA:
            raise ConfigError(f"unknown section {key!r}")
        if val is None:
            continue
        if not isinstance(val, dict):
            raise ConfigError(f"section {key!r} must be a mapping")
        for f in val:
            if f not in _SCHEMA[key]:
                raise ConfigError(f"{key}.{f}: unknown field")
        raw.setdefault(key, {}).update(val)
    return raw


def _get(raw, sec, name, lines):
    dim, kind = _SCHEMA[sec][name]
    where = f"{sec}.{name}"
    if (sec, name) in lines:
        where += f" (line {lines[(sec, name)]})"
    val = raw.get(sec, {}).get(name)
    if val is None:
        return None
    if kind == "bool":
        if not isinstance(val, bool):
            raise ConfigError(f"{where}: expected true/false, got {val!r}")
        return val
    if kind == "str":
        if not isinstance(val, str):
            raise ConfigError(f"{where}: expected a string, got {val!r}")
        return val
    if kind == "list":
        vals = [val] if isinstance(val, str) else val
        if not isinstance(vals, list) or not all(isinstance(v, str) for v in vals):
            raise ConfigError(f"{where}: expected a list of names")
        return list(vals)
    if kind == "grid":
        if not isinstance(val, dict):
            raise ConfigError(f"{where}: expected a mapping of axis -> list of values")
        return {k: ([v] if not isinstance(v, list) else list(v)) for k, v in val.items()}
    if kind == "sizes":
        if isinstance(val, str):
            if val != "random12":
                raise ConfigError(f"{where}: sizes must be a list or 'random12'")
            return val
        if not isinstance(val, list):
            raise ConfigError(f"{where}: sizes must be a list or 'random12'")
        return [parse_quantity(v, None, where) for v in val]
    x = parse_quantity(val, dim, where)
    if kind == "int":
        if x != int(x):
            raise ConfigError(f"{where}: expected an integer, got {val!r}")
        return int(x)
    if not math.isfinite(x):
        raise ConfigError(f"{where}: value must be finite")
    return x


def _sizes(spec, J: int, seed: int):
    if spec is None:
        return None
    if spec == "random12":
        import numpy as np

        return np.random.default_rng(seed).integers(1, 3, size=J).astype(float)
    return spec


def parse_config(data: Optional[dict], text: Optional[str] = None) -> RunConfig:
    """Validate a parsed YAML mapping (``text`` supplies line numbers)."""
    data = {} if data is None else data
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version {version!r} is not supported (expected {SCHEMA_VERSION})")
    raw = _merge(data)
    lines = _line_map(text) if text else {}

    def g(sec, name):
        return _get(raw, sec, name, lines)

    def build(what, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except (TiercacheError, ValueError, TypeError) as exc:
            loc = f" (section starts line {lines[(what,)]})" if (what,) in lines else ""
            raise ConfigError(f"{what}{loc}: {exc}") from exc

    def lib():
        J, M, gamma = g("library", "J"), g("library", "M"), g("library", "gamma")
        sizes = _sizes(g("library", "sizes"), J, g("library", "size_seed") or 0)
        return ContentLibrary(M=M, a=zipf_popularity(J, gamma), s=sizes, gamma=gamma)

    def mu():
        bw = g("mu", "bandwidth")
        return MuTierConfig(
            N_mu=g("mu", "N"),
            P_mu=g("mu", "power"),
            lambda_mu=g("mu", "density"),
            alpha_mu=g("mu", "alpha"),
            beta_mu=free_space_intercept(g("mu", "carrier")),
            sigma2_mu=thermal_noise_watt(bw) * g("mu", "noise_figure"),
            W_mu=bw,
        )

    def mm():
        bw = g("mm", "bandwidth")
        return MmTierConfig(
            G_mm=g("mm", "array_gain"),
            P_mm=g("mm", "power"),
            lambda_mm=g("mm", "density"),
            alpha_L=g("mm", "alpha_los"),
            alpha_N=g("mm", "alpha_nlos"),
            D_L=g("mm", "los_radius"),
            beta_mm=free_space_intercept(g("mm", "carrier")),
            sigma2_mm=thermal_noise_watt(bw) * g("mm", "noise_figure"),
            W_mm=bw,
        )

    def opt(sec, cls, names):
        kw = {dst: g(sec, src) for src, dst in names.items() if raw[sec].get(src) is not None}
        return cls(**kw)

    exp = {k: g("experiment", k) for k in raw.get("experiment", {})}
    resolved = {sec: {k: g(sec, k) for k in sorted(raw.get(sec, {}))} for sec in _SCHEMA if sec != "experiment"}
    return RunConfig(
        raw=raw,
        resolved=resolved,
        library=build("library", lib),
        mu=build("mu", mu),
        mm=build("mm", mm),
        requirement=build("requirement", lambda: DeliveryRequirement(g("requirement", "rate"))),
        cceo=build(
            "cceo",
            lambda: opt(
                "cceo",
                CceoParams,
                {
                    "samples": "N_s",
                    "elite": "N_elite",
                    "iota": "iota",
                    "beta": "beta",
                    "q": "q_smooth",
                    "penalty": "H",
                    "eps_stop": "eps_stop",
                    "max_iters": "max_iters",
                    "init_var": "init_var",
                },
            ),
        ),
        newton=build(
            "newton",
            lambda: opt("newton", NewtonParams, {k: k for k in _SCHEMA["newton"]}),
        ),
        mc=build(
            "mc",
            lambda: McParams(
                drops=g("mc", "drops"),
                window_radius=g("mc", "window_radius"),
                antithetic=g("mc", "antithetic"),
                far_field=g("mc", "far_field"),
            ),
        ),
        experiment=exp,
    )


def load_config(path: Optional[str] = None) -> RunConfig:
    """Read and validate a YAML config; ``None`` gives the defaults."""
    if path is None:
        return parse_config({})
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return parse_config(data, text)


def default_config_text() -> str:
    """The shipped default config file, with comments."""
    return resources.files("tiercache").joinpath("data/default.yaml").read_text(encoding="utf-8")
