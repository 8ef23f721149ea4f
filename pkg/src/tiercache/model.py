"""Domain types: content catalog, placements, tier configurations, rate target.

All quantities are SI internally (metres, hertz, watts, points per square
metre).  Unit conversion helpers for the configuration layer live here too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InfeasiblePlacementError
from .specfun import cosecant

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_PER_HZ = -174.0
CAPACITY_SLACK = 1e-9


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    return 10.0 * math.log10(watt) + 30.0


def per_km2_to_per_m2(density: float) -> float:
    return density * 1e-6


def free_space_intercept(carrier_hz: float) -> float:
    """Free-space path gain at 1 m, ``(c / (4 pi f))^2``."""
    return (SPEED_OF_LIGHT / (4.0 * math.pi * carrier_hz)) ** 2


def thermal_noise_watt(bandwidth_hz: float, noise_figure_db: float = 0.0) -> float:
    """Thermal noise power over ``bandwidth_hz`` at -174 dBm/Hz plus a noise figure."""
    return dbm_to_watt(THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db)


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


def zipf_popularity(J: int, gamma: float) -> np.ndarray:
    """Exact normalised Zipf request probabilities ``j^-gamma / sum m^-gamma``."""
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    if gamma < 0:
        raise DomainError(f"Zipf exponent must be >= 0, got {gamma}")
    w = np.arange(1, J + 1, dtype=float) ** (-float(gamma))
    return w / w.sum()


@dataclass(frozen=True)
class ContentLibrary:
    """Catalog of ``J`` contents with request probabilities ``a`` and sizes ``s``.

    ``M`` is the per-SBS cache budget in size units.  ``gamma`` records the
    Zipf exponent when the popularity came from :func:`zipf_popularity`; the
    two-stair optimizer needs it.
    """

    M: float
    a: np.ndarray
    s: Optional[np.ndarray] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        a = _frozen(self.a)
        if a.ndim != 1 or a.size == 0:
            raise DomainError("popularity vector must be a non-empty 1-D array")
        s = _frozen(np.ones_like(a) if self.s is None else self.s)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "s", s)
        if s.shape != a.shape:
            raise DomainError(f"sizes have shape {s.shape}, popularity has {a.shape}")
        if np.any(a < 0):
            raise DomainError("popularity entries must be non-negative")
        if abs(a.sum() - 1.0) > 1e-12:
            raise DomainError(f"popularity must sum to 1, sums to {a.sum()!r}")
        if np.any(np.diff(a) > 0):
            raise DomainError("popularity must be sorted non-increasing")
        if np.any(s <= 0):
            raise DomainError("content sizes must be positive")
        if self.M < 1:
            raise DomainError(f"cache capacity M must be >= 1, got {self.M}")
        if self.J < self.M:
            raise DomainError(f"library size J={self.J} is smaller than M={self.M}")

    @classmethod
    def zipf(cls, J: int, M: float, gamma: float, sizes: Optional[Sequence[float]] = None):
        return cls(M=M, a=zipf_popularity(J, gamma), s=sizes, gamma=float(gamma))

    @property
    def J(self) -> int:
        return int(self.a.size)

    @property
    def unit_sizes(self) -> bool:
        return bool(np.all(self.s == 1.0))

    def with_capacity(self, M: float) -> "ContentLibrary":
        return replace(self, M=M)


@dataclass(frozen=True)
class PlacementVector:
    """Per-content caching probabilities ``b`` in ``[0, 1]``."""

    b: np.ndarray

    def __post_init__(self):
        b = _frozen(self.b)
        if b.ndim != 1:
            raise InfeasiblePlacementError("placement must be a 1-D vector")
        if np.any(~np.isfinite(b)) or np.any(b < 0) or np.any(b > 1):
            raise InfeasiblePlacementError("placement probabilities must lie in [0, 1]")
        object.__setattr__(self, "b", b)

    def __len__(self) -> int:
        return int(self.b.size)

    def used_capacity(self, lib: ContentLibrary) -> float:
        return float(np.dot(self.b, lib.s))

    def is_feasible(self, lib: ContentLibrary) -> bool:
        return len(self) == lib.J and self.used_capacity(lib) <= lib.M + CAPACITY_SLACK

    def check(self, lib: ContentLibrary) -> "PlacementVector":
        if len(self) != lib.J:
            raise InfeasiblePlacementError(f"placement has {len(self)} entries, library has {lib.J}")
        used = self.used_capacity(lib)
        if used > lib.M + CAPACITY_SLACK:
            raise InfeasiblePlacementError(f"placement uses {used} > M={lib.M}")
        return self


@dataclass(frozen=True)
class MuTierConfig:
    """Multi-antenna sub-6 GHz tier with MRT beamforming and Rayleigh fading."""

    N_mu: int = 2
    P_mu: float = dbm_to_watt(20.0)
    lambda_mu: float = per_km2_to_per_m2(600.0)
    alpha_mu: float = 2.5
    beta_mu: float = free_space_intercept(1e9)
    sigma2_mu: float = thermal_noise_watt(10e6)
    W_mu: float = 10e6

    def __post_init__(self):
        if int(self.N_mu) != self.N_mu or self.N_mu < 1:
            raise DomainError(f"N_mu must be a positive integer, got {self.N_mu}")
        object.__setattr__(self, "N_mu", int(self.N_mu))
        if not self.alpha_mu > 2:
            raise DomainError(f"alpha_mu must exceed 2, got {self.alpha_mu}")
        # fail fast on a csc pole instead of deep inside an evaluation
        cosecant(2.0 * math.pi / self.alpha_mu)
        for name in ("P_mu", "lambda_mu", "beta_mu", "W_mu"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.sigma2_mu < 0:
            raise DomainError("sigma2_mu must be non-negative")


@dataclass(frozen=True)
class MmTierConfig:
    """Noise-limited mmWave tier with the fixed-radius LOS ball blockage model."""

    G_mm: float = 2.0
    P_mm: float = dbm_to_watt(20.0)
    lambda_mm: float = per_km2_to_per_m2(600.0)
    alpha_L: float = 2.25
    alpha_N: float = 3.76
    D_L: float = 15.0
    beta_mm: float = free_space_intercept(60e9)
    sigma2_mm: float = thermal_noise_watt(1e9)
    W_mm: float = 1e9

    def __post_init__(self):
        if not self.alpha_L > 2:
            raise DomainError(f"alpha_L must exceed 2, got {self.alpha_L}")
        if self.alpha_N < self.alpha_L:
            raise DomainError("alpha_N must be >= alpha_L")
        for name in ("G_mm", "P_mm", "lambda_mm", "D_L", "beta_mm", "sigma2_mm", "W_mm"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


@dataclass(frozen=True)
class DeliveryRequirement:
    """Target content bit rate ``eta / T`` in bit/s."""

    rate: float = 4e5

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"rate must be positive, got {self.rate}")


def sinr_threshold(req: DeliveryRequirement | float, W: float) -> float:
    """SINR needed to carry ``rate`` over bandwidth ``W``: ``2^(rate/W) - 1``."""
    rate = req.rate if isinstance(req, DeliveryRequirement) else float(req)
    if not W > 0:
        raise DomainError(f"bandwidth must be positive, got {W}")
    return math.expm1(rate / W * math.log(2.0))


def mpc_placement(lib: ContentLibrary) -> PlacementVector:
    """Cache the most popular contents that fit, skipping any that do not."""
    b = np.zeros(lib.J)
    remaining = float(lib.M)
    for j in range(lib.J):
        if lib.s[j] <= remaining + CAPACITY_SLACK:
            b[j] = 1.0
            remaining -= lib.s[j]
    return PlacementVector(b)


@dataclass(frozen=True)
class Scenario:
    """Everything needed to evaluate one network: catalog, both tiers, rate."""

    library: ContentLibrary
    mu: MuTierConfig = field(default_factory=MuTierConfig)
    mm: MmTierConfig = field(default_factory=MmTierConfig)
    requirement: DeliveryRequirement = field(default_factory=DeliveryRequirement)

    @property
    def phi_mu(self) -> float:
        return sinr_threshold(self.requirement, self.mu.W_mu)

    @property
    def phi_mm(self) -> float:
        return sinr_threshold(self.requirement, self.mm.W_mm)
