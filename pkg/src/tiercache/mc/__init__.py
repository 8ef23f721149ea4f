"""Monte Carlo oracle; see :mod:`tiercache.mc.oracle`."""
from . import _backend
from .oracle import (
    InvalidWindowError,
    McEstimate,
    McParams,
    default_window,
    sample_hppp,
    simulate_scdp_mm,
    simulate_scdp_mm_split,
    simulate_scdp_mu,
    simulate_total,
)


def backend() -> str:
    """Name of the active kernel backend."""
    return _backend.name


__all__ = [
    "InvalidWindowError",
    "McEstimate",
    "McParams",
    "backend",
    "default_window",
    "sample_hppp",
    "simulate_scdp_mm",
    "simulate_scdp_mm_split",
    "simulate_scdp_mu",
    "simulate_total",
]
