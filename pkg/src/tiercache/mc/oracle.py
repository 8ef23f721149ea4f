"""Monte Carlo stochastic-geometry oracle for both tiers.

Each drop places the typical user at the origin, draws the SBS process on
a disk of radius ``R`` and tests the delivery of one content.  Only
distances matter (the model is isotropic), so angles are never drawn.
Outcomes are computed per drop from counter-based streams and reduced
here, so estimates do not depend on the thread count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DomainError
from ..model import ContentLibrary, MmTierConfig, MuTierConfig, PlacementVector
from . import _backend
from ._streams import TAG_CONTENT, stream_key, uniforms

__all__ = [
    "McParams",
    "McEstimate",
    "InvalidWindowError",
    "default_window",
    "sample_hppp",
    "simulate_scdp_mu",
    "simulate_scdp_mm",
    "simulate_total",
]

MIN_WINDOW = 2000.0


class InvalidWindowError(DomainError):
    """The simulation disk is too small for the nearest-SBS distance law."""


@dataclass(frozen=True)
class McParams:
    """Monte Carlo settings.

    ``window_radius=None`` picks :func:`default_window` per call.
    ``far_field`` adds the mean interference of the plane outside the window
    to every sub-6 GHz drop.
    """

    drops: int = 20_000
    window_radius: Optional[float] = None
    seed: int = 0
    antithetic: bool = False
    far_field: bool = True

    def __post_init__(self):
        if int(self.drops) != self.drops or self.drops < 1:
            raise DomainError(f"drops must be a positive integer, got {self.drops}")
        if self.window_radius is not None and not self.window_radius > 0:
            raise DomainError("window_radius must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must fit in 64 bits")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    drops_used: int

    def z_score(self, value: float) -> float:
        """Standardised distance of ``value`` from the estimate (inf if SE is 0 and they differ)."""
        diff = value - self.mean
        if self.std_error > 0:
            return diff / self.std_error
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def default_window(b: float, density: float) -> float:
    """``max(2000 m, 12 / sqrt(pi max(b, 0.01) density))``."""
    return max(MIN_WINDOW, 12.0 / math.sqrt(math.pi * max(b, 0.01) * density))


def _window(mc: McParams, b: float, density: float) -> float:
    R = default_window(b, density) if mc.window_radius is None else float(mc.window_radius)
    guard = 10.0 / math.sqrt(math.pi * max(b, 0.01) * density)
    if R < guard:
        raise InvalidWindowError(f"window radius {R:.1f} m is below the truncation guard {guard:.1f} m")
    return R


def sample_hppp(density: float, window_radius: float, rng=None) -> np.ndarray:
    """Points of a homogeneous PPP on the disk of radius ``window_radius``.

    Returns an ``(n, 2)`` array of Cartesian coordinates.  ``rng`` is a
    numpy Generator or a seed.
    """
    if density < 0:
        raise DomainError(f"density must be non-negative, got {density}")
    if not window_radius > 0:
        raise DomainError("window_radius must be positive")
    rng = np.random.default_rng(rng)
    n = rng.poisson(density * math.pi * window_radius**2) if density > 0 else 0
    r = window_radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def _estimate(outcomes: np.ndarray, antithetic: bool) -> McEstimate:
    n = outcomes.size
    x = (outcomes > 0).astype(float)
    mean = float(x.mean())
    if antithetic and n >= 4:
        pairs = x[: n - n % 2].reshape(-1, 2).mean(axis=1)
        se = float(pairs.std(ddof=1) / math.sqrt(pairs.size))
    else:
        # half-count adjusted proportion keeps the SE positive at 0 or n successes
        pt = (x.sum() + 0.5) / (n + 1.0)
        se = math.sqrt(pt * (1.0 - pt) / n)
    return McEstimate(mean=mean, std_error=se, drops_used=n)


def _far_field(cfg: MuTierConfig, R: float) -> float:
    # mean of sum_k h_k r_k^-alpha over the plane outside the window
    a = cfg.alpha_mu
    return 2.0 * math.pi * cfg.lambda_mu * R ** (2.0 - a) / (a - 2.0)


def _mu_run(b_drop, ids, cfg: MuTierConfig, phi: float, mc: McParams, R: float) -> np.ndarray:
    far = _far_field(cfg, R) if mc.far_field else 0.0
    noise = cfg.sigma2_mu / (cfg.P_mu * cfg.beta_mu)
    return _backend.kernels.mu_outcomes(
        int(mc.seed), ids, b_drop, cfg.lambda_mu, R, cfg.alpha_mu, noise, far, float(phi), cfg.N_mu, bool(mc.antithetic)
    )


def _mm_run(b_drop, ids, cfg: MmTierConfig, phi: float, mc: McParams, R: float) -> np.ndarray:
    gain = cfg.P_mm * cfg.G_mm * cfg.beta_mm
    return _backend.kernels.mm_outcomes(
        int(mc.seed), ids, b_drop, cfg.lambda_mm, R, gain, cfg.alpha_L, cfg.alpha_N, cfg.D_L, cfg.sigma2_mm,
        float(phi), bool(mc.antithetic),
    )


def _check_b(b: float):
    if not 0 <= b <= 1:
        raise DomainError(f"b must lie in [0, 1], got {b}")


def simulate_scdp_mu(b: float, cfg: MuTierConfig, phi: float, mc: McParams) -> McEstimate:
    """Per-content SCDP of the sub-6 GHz tier by simulation.

    A drop thins the SBS process with probability ``b``, serves the user
    from the nearest caching SBS with a Gamma(N, 1) gain and counts every
    other SBS in the window as an Exp(1) interferer.  A drop without any
    caching SBS is a failure.
    """
    _check_b(b)
    R = _window(mc, b, cfg.lambda_mu)
    ids = np.arange(mc.drops, dtype=np.int64)
    out = _mu_run(np.full(mc.drops, float(b)), ids, cfg, phi, mc, R)
    return _estimate(out, mc.antithetic)


def simulate_scdp_mm(b: float, cfg: MmTierConfig, phi: float, mc: McParams) -> McEstimate:
    """Per-content SCDP of the mmWave tier by simulation (no fading, LOS ball)."""
    _check_b(b)
    R = _window(mc, b, cfg.lambda_mm)
    ids = np.arange(mc.drops, dtype=np.int64)
    out = _mm_run(np.full(mc.drops, float(b)), ids, cfg, phi, mc, R)
    return _estimate(out, mc.antithetic)


def simulate_scdp_mm_split(b: float, cfg: MmTierConfig, phi: float, mc: McParams) -> dict:
    """Like :func:`simulate_scdp_mm` but also splits successes by link type.

    Returns ``{"los": McEstimate, "nlos": McEstimate, "total": McEstimate}``
    from one set of drops.
    """
    _check_b(b)
    R = _window(mc, b, cfg.lambda_mm)
    ids = np.arange(mc.drops, dtype=np.int64)
    out = _mm_run(np.full(mc.drops, float(b)), ids, cfg, phi, mc, R)
    return {
        "los": _estimate((out == 1).view(np.uint8), mc.antithetic),
        "nlos": _estimate((out == 2).view(np.uint8), mc.antithetic),
        "total": _estimate(out, mc.antithetic),
    }


def _requests(lib: ContentLibrary, mc: McParams) -> np.ndarray:
    g = np.arange(mc.drops, dtype=np.int64)
    if mc.antithetic:
        u = uniforms(stream_key(mc.seed, g // 2, TAG_CONTENT), np.zeros(g.size))
        u = np.where(g % 2 == 1, 1.0 - u, u)
    else:
        u = uniforms(stream_key(mc.seed, g, TAG_CONTENT), np.zeros(g.size))
    return np.minimum(np.searchsorted(np.cumsum(lib.a), u, side="right"), lib.J - 1)


def simulate_total(
    placement: PlacementVector,
    lib: ContentLibrary,
    mu: Optional[MuTierConfig] = None,
    mm: Optional[MmTierConfig] = None,
    phi_mu: Optional[float] = None,
    phi_mm: Optional[float] = None,
    mc: McParams = McParams(),
) -> dict:
    """Total SCDP per tier: each drop requests content ``j`` w.p. ``a_j``.

    Pass a tier config together with its threshold to simulate that tier.
    Returns ``{"mu": McEstimate, "mm": McEstimate}`` for the tiers given.
    """
    placement.check(lib)
    req = _requests(lib, mc)
    b_drop = np.ascontiguousarray(placement.b[req])
    ids = np.arange(mc.drops, dtype=np.int64)
    pos = placement.b[placement.b > 0]
    b_win = float(pos.min()) if pos.size else 1.0
    out = {}
    if mu is not None:
        if phi_mu is None:
            raise DomainError("phi_mu is required with a sub-6 GHz config")
        out["mu"] = _estimate(_mu_run(b_drop, ids, mu, phi_mu, mc, _window(mc, b_win, mu.lambda_mu)), mc.antithetic)
    if mm is not None:
        if phi_mm is None:
            raise DomainError("phi_mm is required with a mmWave config")
        out["mm"] = _estimate(_mm_run(b_drop, ids, mm, phi_mm, mc, _window(mc, b_win, mm.lambda_mm)), mc.antithetic)
    return out
