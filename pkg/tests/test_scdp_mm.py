import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiercache.errors import DomainError
from tiercache.model import ContentLibrary, MmTierConfig, PlacementVector, mpc_placement
from tiercache.scdp_mm import (
    MmCoverageContext,
    mm_curve_derivatives,
    scdp_content_mm,
    scdp_content_mm_los,
    scdp_content_mm_nlos,
    scdp_total_mm,
)

# closed forms evaluated with mpmath at 40 digits (tests/oracles.py)
LOS_B1_REF = 0.34565137789866256
NLOS_B1_DN40_REF = 0.60534832646260545


def ctx_with_dN(d_N, cfg=None):
    cfg = cfg or MmTierConfig()
    phi = cfg.P_mm * cfg.G_mm * cfg.beta_mm / (cfg.sigma2_mm * d_N**cfg.alpha_N)
    return MmCoverageContext(cfg, phi)


def test_reference_values(mm_ctx):
    assert scdp_content_mm_los(1.0, mm_ctx) == pytest.approx(LOS_B1_REF, rel=1e-13)
    assert scdp_content_mm_nlos(1.0, ctx_with_dN(40.0)) == pytest.approx(NLOS_B1_DN40_REF, rel=1e-12)


def test_critical_distances(mm_ctx):
    assert mm_ctx.d_L > mm_ctx.d_N > mm_ctx.cfg.D_L
    assert mm_ctx.los_radius == mm_ctx.cfg.D_L
    assert mm_ctx.nlos_radius == mm_ctx.d_N


def test_nlos_vanishes_below_los_radius():
    ctx = ctx_with_dN(10.0)
    assert scdp_content_mm_nlos(0.7, ctx) == 0.0
    np.testing.assert_array_equal(scdp_content_mm_nlos(np.array([0.1, 1.0]), ctx), [0.0, 0.0])


def test_zero_and_domain(mm_ctx):
    assert scdp_content_mm(0.0, mm_ctx) == 0.0
    with pytest.raises(DomainError):
        scdp_content_mm(-0.1, mm_ctx)
    with pytest.raises(DomainError):
        MmCoverageContext(mm_ctx.cfg, 0.0)


def test_small_b_accuracy(mm_ctx):
    b = 1e-12
    k = math.pi * mm_ctx.cfg.lambda_mm
    expected = k * b * mm_ctx.d_N**2  # leading order
    assert scdp_content_mm(b, mm_ctx) == pytest.approx(expected, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(b=st.floats(0.0, 1.0), d_N=st.floats(5.0, 300.0))
def test_probability_and_monotone(b, d_N):
    ctx = ctx_with_dN(d_N)
    p = scdp_content_mm(b, ctx)
    assert 0.0 <= p <= 1.0
    assert scdp_content_mm(min(1.0, b + 0.01), ctx) >= p


def test_array_and_total(mm_ctx):
    lib = ContentLibrary.zipf(6, 3, 1.2)
    pl = mpc_placement(lib)
    per = scdp_content_mm(pl.b, mm_ctx)
    assert per.shape == (6,)
    assert scdp_total_mm(pl, lib, mm_ctx) == pytest.approx(float(np.dot(lib.a, per)), rel=1e-15)
    assert scdp_total_mm(PlacementVector(np.zeros(6)), lib, mm_ctx) == 0.0


@pytest.mark.parametrize("d_N", [10.0, 40.0, 96.0])
def test_curve_derivatives_vs_finite_differences(d_N):
    ctx = ctx_with_dN(d_N)
    h = 1e-5
    for w in (0.05, 0.4, 0.9):
        p, d1, d2 = mm_curve_derivatives(w, ctx)
        pp, pm = scdp_content_mm(w + h, ctx), scdp_content_mm(w - h, ctx)
        assert p == scdp_content_mm(w, ctx)
        assert d1 == pytest.approx((pp - pm) / (2 * h), rel=1e-7, abs=1e-10)
        # wider step for the second difference; P is close to 1 here
        H = 1e-3
        fd2 = (scdp_content_mm(w + H, ctx) - 2 * p + scdp_content_mm(w - H, ctx)) / (H * H)
        assert d2 == pytest.approx(fd2, rel=1e-3, abs=1e-9)
