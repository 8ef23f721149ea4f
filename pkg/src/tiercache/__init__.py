"""Evaluation and optimization of probabilistic content placement in two-tier small-cell networks."""
from .errors import (
    ClampWarning,
    ConfigError,
    DegenerateInputWarning,
    DomainError,
    InfeasiblePlacementError,
    NonConvergenceError,
    PoleError,
    TiercacheError,
)
from .model import (
    ContentLibrary,
    DeliveryRequirement,
    MmTierConfig,
    MuTierConfig,
    PlacementVector,
    Scenario,
    mpc_placement,
    sinr_threshold,
    zipf_popularity,
)
from .scdp_mm import MmCoverageContext, scdp_content_mm, scdp_total_mm
from .scdp_mu import MuCoverageContext, scdp_content_mu, scdp_total_mu

__version__ = "0.1.0"
