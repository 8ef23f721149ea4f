"""Successful content delivery probability of the noise-limited mmWave tier.

Without fading the link succeeds iff the serving distance is below a
critical distance, ``d_L`` on a LOS link (shorter than ``D_L``) and ``d_N``
on a NLOS link.  Averaging over the nearest caching SBS (a Rayleigh
distance with parameter ``pi b lambda``) gives closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import ContentLibrary, DeliveryRequirement, MmTierConfig, PlacementVector, sinr_threshold

__all__ = [
    "MmCoverageContext",
    "scdp_content_mm_los",
    "scdp_content_mm_nlos",
    "scdp_content_mm",
    "scdp_total_mm",
    "mm_curve_derivatives",
]


def _critical_distance(cfg: MmTierConfig, phi: float, alpha: float) -> float:
    return (cfg.P_mm * cfg.G_mm * cfg.beta_mm / (phi * cfg.sigma2_mm)) ** (1.0 / alpha)


@dataclass(frozen=True)
class MmCoverageContext:
    """A mmWave tier configuration bound to one SINR threshold.

    ``d_L`` and ``d_N`` are derived once; build a new context when ``phi``
    changes (rate sweeps).
    """

    cfg: MmTierConfig
    phi: float

    def __post_init__(self):
        if not self.phi > 0:
            raise DomainError(f"SINR threshold must be positive, got {self.phi}")
        d_L = _critical_distance(self.cfg, self.phi, self.cfg.alpha_L)
        d_N = _critical_distance(self.cfg, self.phi, self.cfg.alpha_N)
        if not (math.isfinite(d_L) and math.isfinite(d_N)):
            raise DomainError("critical distances are not finite")
        object.__setattr__(self, "d_L", d_L)
        object.__setattr__(self, "d_N", d_N)

    @classmethod
    def from_requirement(cls, cfg: MmTierConfig, req: DeliveryRequirement) -> "MmCoverageContext":
        return cls(cfg=cfg, phi=sinr_threshold(req, cfg.W_mm))

    @property
    def los_radius(self) -> float:
        """Largest distance served over LOS, ``min(D_L, d_L)``."""
        return min(self.cfg.D_L, self.d_L)

    @property
    def nlos_radius(self) -> float:
        """Outer edge of the NLOS service ring, ``max(D_L, d_N)``."""
        return max(self.cfg.D_L, self.d_N)


def _check_b(b):
    arr = np.asarray(b, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1):
        raise DomainError("b must lie in [0, 1]")
    return arr


def _out(val, like):
    return float(val) if np.ndim(like) == 0 else val


def scdp_content_mm_los(b, ctx: MmCoverageContext):
    """``1 - exp(-min(D_L, d_L)^2 pi b lambda)``."""
    arr = _check_b(b)
    lam = ctx.cfg.lambda_mm
    return _out(-np.expm1(-ctx.los_radius**2 * math.pi * arr * lam), b)


def scdp_content_mm_nlos(b, ctx: MmCoverageContext):
    """``exp(-D_L^2 pi b lambda) - exp(-max(D_L, d_N)^2 pi b lambda)``; exactly 0 when ``d_N <= D_L``."""
    arr = _check_b(b)
    if ctx.d_N <= ctx.cfg.D_L:
        return _out(np.zeros_like(arr), b)
    lam, D = ctx.cfg.lambda_mm, ctx.cfg.D_L
    # written as a difference of expm1 terms to keep small-b accuracy
    val = np.expm1(-D * D * math.pi * arr * lam) - np.expm1(-ctx.nlos_radius**2 * math.pi * arr * lam)
    return _out(val, b)


def scdp_content_mm(b, ctx: MmCoverageContext):
    """Per-content SCDP, LOS plus NLOS."""
    return scdp_content_mm_los(b, ctx) + scdp_content_mm_nlos(b, ctx)


def scdp_total_mm(placement: PlacementVector, lib: ContentLibrary, ctx: MmCoverageContext) -> float:
    """Request-weighted SCDP ``sum_j a_j (LOS_j + NLOS_j)``."""
    placement.check(lib)
    return float(np.dot(lib.a, scdp_content_mm(placement.b, ctx)))


def mm_curve_derivatives(w: float, ctx: MmCoverageContext) -> tuple[float, float, float]:
    """Per-content SCDP at ``w`` and its first two derivatives in ``w``.

    With ``m = min(D_L, d_L)``, ``n = max(D_L, d_N)`` and ``k = pi lambda``:

        P   = 1 - e^{-m^2 k w} + e^{-D^2 k w} - e^{-n^2 k w}
        P'  = k (m^2 e^{-m^2 k w} - D^2 e^{-D^2 k w} + n^2 e^{-n^2 k w})
        P'' = -k^2 (m^4 e^{-m^2 k w} - D^4 e^{-D^2 k w} + n^4 e^{-n^2 k w})

    When ``d_N <= D_L`` the last two terms cancel exactly.
    """
    if not 0 <= w <= 1:
        raise DomainError(f"w must lie in [0, 1], got {w}")
    k = math.pi * ctx.cfg.lambda_mm
    m2 = ctx.los_radius**2
    terms = [(m2, 1.0)]
    if ctx.d_N > ctx.cfg.D_L:
        terms += [(ctx.cfg.D_L**2, -1.0), (ctx.nlos_radius**2, 1.0)]
    p = float(scdp_content_mm(w, ctx))
    d1 = k * sum(s * r2 * math.exp(-r2 * k * w) for r2, s in terms)
    d2 = -k * k * sum(s * r2 * r2 * math.exp(-r2 * k * w) for r2, s in terms)
    return p, d1, d2
