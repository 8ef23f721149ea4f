import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiercache.errors import DomainError
from tiercache.model import ContentLibrary, DeliveryRequirement, MuTierConfig, PlacementVector, mpc_placement
from tiercache.scdp_mu import (
    MuCoverageContext,
    MuScdpTable,
    conditional_coverage_mu,
    laplace_cached_interference,
    laplace_uncached_interference,
    scdp_content_mu,
    scdp_content_mu_many,
    scdp_total_mu,
    substituted_scdp_mu,
    t_factor,
    t_factor_printed,
)

# mpmath quadrature / numerical differentiation of the defining integrals
# at 40 digits (tests/oracles.py)
LAPLACE_CACHED_REF = 0.95867898984874032  # x = 20, b = 0.5, s = phi x^alpha / (P beta)
LAPLACE_UNCACHED_REF = 0.99999999999985691  # s = 1e-9, b = 0.3
T1_REF = -7.4919873472107738e-5  # x = 15, b = 0.5
T2_REF = 1.1252970948937192e-8
PCOV_REF = {
    (1, 10.0, 1.0): 0.97912153378694649,
    (2, 10.0, 0.5): 0.99492305450901225,
    (4, 25.0, 0.3): 0.98061399132603029,
}
# oracles.scdp_mu(b, 2), 20 digits working precision
SCDP_N2_REF = {1.0: 0.98945248731191, 0.3: 0.794215188607116}


def ctx_for(N=1, **kw):
    return MuCoverageContext.from_requirement(MuTierConfig(N_mu=N, **kw), DeliveryRequirement())


def test_laplace_transforms(mu_ctx):
    c = mu_ctx.cfg
    s = mu_ctx.phi * 20.0**c.alpha_mu / (c.P_mu * c.beta_mu)
    assert laplace_cached_interference(s, 20.0, 0.5, mu_ctx) == pytest.approx(LAPLACE_CACHED_REF, rel=1e-12)
    assert laplace_uncached_interference(1e-9, 0.3, mu_ctx) == pytest.approx(LAPLACE_UNCACHED_REF, rel=1e-14)
    assert laplace_cached_interference(0.0, 20.0, 0.5, mu_ctx) == 1.0
    assert laplace_uncached_interference(s, 1.0, mu_ctx) == 1.0
    with pytest.raises(DomainError):
        laplace_cached_interference(s, 0.0, 0.5, mu_ctx)


def test_t_factors_match_oracle(mu_ctx):
    assert t_factor(1, 15.0, 0.5, mu_ctx) == pytest.approx(T1_REF, rel=1e-10)
    assert t_factor(2, 15.0, 0.5, mu_ctx) == pytest.approx(T2_REF, rel=1e-10)


def test_alternative_t_factors_disagree_with_defining_integrals(mu_ctx):
    # documents why the evaluators use re-derived factors
    assert abs(t_factor_printed(1, 15.0, 0.5, mu_ctx) / T1_REF - 1) > 10
    assert abs(t_factor_printed(2, 15.0, 0.5, mu_ctx) / T2_REF - 1) > 0.01


@pytest.mark.parametrize("key", sorted(PCOV_REF))
def test_conditional_coverage_matches_oracle(key):
    N, x, b = key
    assert conditional_coverage_mu(x, b, ctx_for(N)) == pytest.approx(PCOV_REF[key], rel=1e-11)


def test_conditional_coverage_vectorised(mu_ctx):
    xs = np.array([5.0, 20.0, 80.0])
    vec = conditional_coverage_mu(xs, 0.4, mu_ctx)
    assert vec.shape == (3,)
    for x, v in zip(xs, vec):
        assert v == conditional_coverage_mu(float(x), 0.4, mu_ctx)


@settings(max_examples=25, deadline=None)
@given(x=st.floats(1.0, 200.0), b=st.floats(0.0, 1.0), N=st.integers(1, 5))
def test_coverage_is_probability_and_grows_with_antennas(x, b, N):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        p = conditional_coverage_mu(x, b, ctx_for(N))
        p_more = conditional_coverage_mu(x, b, ctx_for(N + 1))
    assert 0.0 <= p <= 1.0
    assert p_more >= p - 1e-12


@pytest.mark.parametrize("b", sorted(SCDP_N2_REF))
def test_scdp_content_matches_slow_oracle(b):
    assert scdp_content_mu(b, ctx_for(2)) == pytest.approx(SCDP_N2_REF[b], abs=1e-9)


def test_scdp_content_edges(mu_ctx):
    assert scdp_content_mu(0.0, mu_ctx) == 0.0
    with pytest.raises(DomainError):
        scdp_content_mu(1.5, mu_ctx)


def test_scdp_content_monotone_in_b():
    ctx = ctx_for(2)
    vals = [scdp_content_mu(b, ctx) for b in np.linspace(0.05, 1.0, 8)]
    assert np.all(np.diff(vals) > 0)
    assert all(0 < v < 1 for v in vals)


def test_scdp_many_agrees_with_scalar(mu_ctx):
    bs = np.array([0.0, 0.1, 0.5, 1.0])
    many = scdp_content_mu_many(bs, mu_ctx)
    fresh = ctx_for(mu_ctx.cfg.N_mu)
    for b, v in zip(bs, many):
        assert v == pytest.approx(scdp_content_mu(float(b), fresh), abs=1e-8)


def test_scdp_total_examples(mu_ctx):
    lib = ContentLibrary.zipf(5, 2, 1.0)
    total = scdp_total_mu(mpc_placement(lib), lib, mu_ctx)
    p1 = scdp_content_mu(1.0, mu_ctx)
    assert total == pytest.approx((lib.a[0] + lib.a[1]) * p1, rel=1e-14)
    assert scdp_total_mu(PlacementVector(np.zeros(5)), lib, mu_ctx) == 0.0


def test_table_close_to_exact(mu_ctx):
    table = MuScdpTable(mu_ctx, n=101)
    for b in (0.013, 0.27, 0.64, 0.991):
        assert float(table(b)) == pytest.approx(scdp_content_mu(b, mu_ctx), abs=1e-5)


def test_substituted_curve_derivatives(mu_ctx):
    for w in (0.1, 0.35, 0.8):
        p, d1, d2 = substituted_scdp_mu(w, mu_ctx)
        h = 1e-4
        pp, pm = substituted_scdp_mu(w + h, mu_ctx)[0], substituted_scdp_mu(w - h, mu_ctx)[0]
        assert d1 == pytest.approx((pp - pm) / (2 * h), rel=1e-6)
        assert d2 == pytest.approx((pp - 2 * p + pm) / (h * h), rel=1e-3)
        assert p > 0 and d1 > 0 and d2 < 0


def test_substituted_curve_matches_cached_zero_interference(mu_ctx):
    # with the cached-interference term dropped the curve is the uncached
    # coverage averaged over the serving distance; it bounds P_j from below
    for w in (0.2, 0.7):
        assert substituted_scdp_mu(w, mu_ctx)[0] <= scdp_content_mu(w, mu_ctx) + 1e-9
