"""Batched total-SCDP objectives for the placement optimizers."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .cceo import batched
from .model import ContentLibrary
from .scdp_mm import MmCoverageContext, scdp_content_mm
from .scdp_mu import MuCoverageContext, MuScdpTable

__all__ = ["mu_objective", "mm_objective", "tier_objective"]


def mu_objective(lib: ContentLibrary, ctx: MuCoverageContext, table: Optional[MuScdpTable] = None):
    """``b -> sum_j a_j P_j(b_j)`` through the spline table of the per-content curve."""
    table = MuScdpTable(ctx) if table is None else table
    a = lib.a

    @batched
    def f(b):
        return table(np.asarray(b, dtype=float)) @ a

    f.table = table
    return f


def mm_objective(lib: ContentLibrary, ctx: MmCoverageContext):
    """``b -> sum_j a_j (LOS_j + NLOS_j)``, exact closed form."""
    a = lib.a

    @batched
    def f(b):
        return scdp_content_mm(np.asarray(b, dtype=float), ctx) @ a

    return f


def tier_objective(tier: str, lib: ContentLibrary, ctx, **kw):
    if tier == "mu":
        return mu_objective(lib, ctx, **kw)
    if tier == "mm":
        return mm_objective(lib, ctx)
    raise ValueError(f"unknown tier {tier!r}")
