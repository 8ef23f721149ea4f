import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiercache.errors import DomainError, InfeasiblePlacementError
from tiercache.model import (
    ContentLibrary,
    DeliveryRequirement,
    MmTierConfig,
    MuTierConfig,
    PlacementVector,
    Scenario,
    dbm_to_watt,
    free_space_intercept,
    mpc_placement,
    sinr_threshold,
    thermal_noise_watt,
    zipf_popularity,
)

# exact finite sum, mpmath (tests/oracles.py)
ZIPF_A1_REF = 0.41444350558416467
PHI_MU_REF = 0.028113826656066509
PHI_MM_REF = 0.00027729731201760077


def test_zipf_examples():
    np.testing.assert_allclose(zipf_popularity(4, 0.0), [0.25] * 4)
    np.testing.assert_allclose(zipf_popularity(2, 1.0), [2 / 3, 1 / 3])
    assert zipf_popularity(100, 1.5)[0] == pytest.approx(ZIPF_A1_REF, rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(J=st.integers(1, 500), gamma=st.floats(0.0, 4.0))
def test_zipf_normalised_and_sorted(J, gamma):
    a = zipf_popularity(J, gamma)
    assert abs(a.sum() - 1.0) <= 1e-12
    assert np.all(np.diff(a) <= 0)


def test_sinr_threshold():
    assert sinr_threshold(DeliveryRequirement(4e5), 1e7) == pytest.approx(PHI_MU_REF, rel=1e-13)
    assert sinr_threshold(DeliveryRequirement(4e5), 1e9) == pytest.approx(PHI_MM_REF, rel=1e-13)
    assert sinr_threshold(1e-300, 1e7) == pytest.approx(0.0, abs=1e-300)
    with pytest.raises(DomainError):
        sinr_threshold(4e5, 0.0)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(1e3, 1e8), W=st.floats(1e5, 1e10))
def test_sinr_threshold_monotone(r, W):
    phi = sinr_threshold(r, W)
    assert sinr_threshold(r * 1.01, W) > phi
    assert sinr_threshold(r, W * 1.01) < phi


def test_mpc_examples():
    np.testing.assert_array_equal(mpc_placement(ContentLibrary.zipf(5, 2, 1.0)).b, [1, 1, 0, 0, 0])
    np.testing.assert_array_equal(mpc_placement(ContentLibrary.zipf(3, 3, 1.0)).b, [1, 1, 1])
    lib = ContentLibrary.zipf(4, 3, 1.0, sizes=[2, 2, 1, 1])
    np.testing.assert_array_equal(mpc_placement(lib).b, [1, 0, 1, 0])


@settings(max_examples=40, deadline=None)
@given(J=st.integers(2, 60), frac=st.floats(0.05, 1.0), seed=st.integers(0, 1000))
def test_mpc_always_feasible(J, frac, seed):
    sizes = np.random.default_rng(seed).integers(1, 4, size=J)
    M = max(1.0, frac * sizes.sum())
    if J < M:
        return
    lib = ContentLibrary.zipf(J, M, 1.2, sizes=sizes)
    assert mpc_placement(lib).is_feasible(lib)


def test_library_invariants():
    with pytest.raises(DomainError):
        ContentLibrary(M=2, a=[0.5, 0.6])
    with pytest.raises(DomainError):
        ContentLibrary(M=2, a=[0.2, 0.3, 0.5])
    with pytest.raises(DomainError):
        ContentLibrary(M=0.5, a=[0.5, 0.5])
    with pytest.raises(DomainError):
        ContentLibrary(M=3, a=[0.5, 0.5])
    with pytest.raises(DomainError):
        ContentLibrary(M=1, a=[0.5, 0.5], s=[1, 0])


def test_placement_checks():
    lib = ContentLibrary.zipf(4, 2, 1.0)
    PlacementVector([1, 1, 0, 0]).check(lib)
    PlacementVector([1, 0.5, 0.5 + 5e-10, 0]).check(lib)
    with pytest.raises(InfeasiblePlacementError):
        PlacementVector([1, 1, 0.1, 0]).check(lib)
    with pytest.raises(DomainError):
        PlacementVector([1.2, 0, 0, 0])


def test_tier_config_validation():
    with pytest.raises(DomainError):
        MuTierConfig(alpha_mu=2.0)
    with pytest.raises(DomainError):
        MuTierConfig(N_mu=0)
    with pytest.raises(DomainError):
        MmTierConfig(alpha_L=3.0, alpha_N=2.5)
    with pytest.raises(DomainError):
        MmTierConfig(D_L=0.0)


def test_default_constants():
    mu = MuTierConfig()
    assert mu.P_mu == pytest.approx(dbm_to_watt(20.0)) == pytest.approx(0.1)
    assert mu.lambda_mu == pytest.approx(6e-4)
    assert mu.beta_mu == pytest.approx(free_space_intercept(1e9))
    # -174 dBm/Hz over 10 MHz is -104 dBm
    assert thermal_noise_watt(1e7) == pytest.approx(10 ** (-13.4), rel=1e-12)
    sc = Scenario(ContentLibrary.zipf(100, 10, 1.5))
    assert sc.phi_mu == pytest.approx(PHI_MU_REF)
