import math

import numpy as np
import pytest

from tiercache.errors import DomainError
from tiercache.mc import (
    InvalidWindowError,
    McEstimate,
    McParams,
    backend,
    default_window,
    sample_hppp,
    simulate_scdp_mm,
    simulate_scdp_mm_split,
    simulate_scdp_mu,
    simulate_total,
)
from tiercache.mc import _backend
from tiercache.mc._streams import stream_key, uniforms
from tiercache.model import ContentLibrary, MmTierConfig, MuTierConfig, mpc_placement
from tiercache.scdp_mm import scdp_content_mm, scdp_total_mm
from tiercache.scdp_mu import scdp_content_mu

try:
    from tiercache.mc import _kernels  # noqa: F401

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernels not built")


@pytest.fixture
def python_backend():
    prev = _backend.name
    _backend.use("python")
    yield
    _backend.use(prev)


def test_hppp_count_mean():
    counts = [len(sample_hppp(1e-4, 500.0, seed)) for seed in range(400)]
    mean = 1e-4 * math.pi * 500.0**2
    assert abs(np.mean(counts) - mean) < 4 * math.sqrt(mean / 400)


def test_hppp_inside_disk_and_uniform():
    pts = sample_hppp(1e-3, 300.0, 1)
    r2 = (pts**2).sum(axis=1)
    assert np.all(r2 <= 300.0**2)
    # area-uniform: r^2 / R^2 is uniform on [0, 1]
    assert abs(np.mean(r2) / 300.0**2 - 0.5) < 0.02
    assert sample_hppp(0.0, 10.0, 0).shape == (0, 2)


def test_hppp_domain():
    with pytest.raises(DomainError):
        sample_hppp(-1.0, 10.0)
    with pytest.raises(DomainError):
        sample_hppp(1.0, 0.0)


def test_streams_are_counter_based():
    k = stream_key(7, np.arange(5, dtype=np.int64), 1)
    u = uniforms(k, np.zeros(5))
    assert np.all((u >= 0) & (u < 1))
    # drop 3 alone gives the same number as drop 3 inside a batch
    assert uniforms(stream_key(7, np.array([3], dtype=np.int64), 1), np.zeros(1))[0] == u[3]


def test_window_rule():
    assert default_window(1.0, 6e-4) == 2000.0
    assert default_window(0.0, 1e-6) == pytest.approx(12.0 / math.sqrt(math.pi * 0.01 * 1e-6))
    with pytest.raises(InvalidWindowError):
        simulate_scdp_mu(0.5, MuTierConfig(), 0.03, McParams(drops=10, window_radius=20.0))


def test_params_validation():
    with pytest.raises(DomainError):
        McParams(drops=0)
    with pytest.raises(DomainError):
        McParams(seed=-1)
    with pytest.raises(DomainError):
        McParams(window_radius=-3.0)


def test_z_score():
    est = McEstimate(0.5, 0.01, 100)
    assert est.z_score(0.53) == pytest.approx(3.0)
    assert McEstimate(1.0, 0.0, 10).z_score(1.0) == 0.0
    assert McEstimate(1.0, 0.0, 10).z_score(0.9) == -math.inf


def test_determinism(mu_ctx):
    mc = McParams(drops=500, seed=11)
    a = simulate_scdp_mu(0.4, mu_ctx.cfg, mu_ctx.phi, mc)
    b = simulate_scdp_mu(0.4, mu_ctx.cfg, mu_ctx.phi, mc)
    assert a == b
    c = simulate_scdp_mu(0.4, mu_ctx.cfg, mu_ctx.phi, McParams(drops=500, seed=12))
    assert c != a


def test_zero_cache_never_succeeds(mu_ctx, mm_ctx):
    mc = McParams(drops=200)
    assert simulate_scdp_mu(0.0, mu_ctx.cfg, mu_ctx.phi, mc).mean == 0.0
    assert simulate_scdp_mm(0.0, mm_ctx.cfg, mm_ctx.phi, mc).mean == 0.0


def test_std_error_scales_as_inverse_sqrt(mm_ctx):
    small = simulate_scdp_mm(0.1, mm_ctx.cfg, mm_ctx.phi, McParams(drops=1000, seed=3))
    big = simulate_scdp_mm(0.1, mm_ctx.cfg, mm_ctx.phi, McParams(drops=16000, seed=3))
    assert big.std_error / small.std_error == pytest.approx(0.25, rel=0.1)


def test_mm_agrees_with_closed_form(mm_ctx):
    for b in (0.05, 0.3):
        est = simulate_scdp_mm(b, mm_ctx.cfg, mm_ctx.phi, McParams(drops=20000, seed=5))
        assert abs(est.z_score(scdp_content_mm(b, mm_ctx))) < 4


def test_mu_agrees_with_analytic(mu_ctx):
    b = 0.5
    est = simulate_scdp_mu(b, mu_ctx.cfg, mu_ctx.phi, McParams(drops=20000, seed=9))
    assert abs(est.z_score(scdp_content_mu(b, mu_ctx))) < 4


def test_antithetic_runs(mm_ctx):
    est = simulate_scdp_mm(0.3, mm_ctx.cfg, mm_ctx.phi, McParams(drops=4000, seed=2, antithetic=True))
    assert abs(est.z_score(scdp_content_mm(0.3, mm_ctx))) < 4


def test_simulate_total(mm_ctx):
    lib = ContentLibrary.zipf(20, 4, 1.2)
    pl = mpc_placement(lib)
    out = simulate_total(pl, lib, mm=mm_ctx.cfg, phi_mm=mm_ctx.phi, mc=McParams(drops=20000, seed=4))
    assert set(out) == {"mm"}
    assert abs(out["mm"].z_score(scdp_total_mm(pl, lib, mm_ctx))) < 4
    with pytest.raises(DomainError):
        simulate_total(pl, lib, mu=MuTierConfig())


@needs_compiled
@pytest.mark.parametrize("antithetic", [False, True])
def test_backends_bit_identical(mu_ctx, mm_ctx, antithetic):
    mc = McParams(drops=300, seed=123, antithetic=antithetic)
    cfg2 = MuTierConfig(N_mu=3)
    prev = _backend.name
    results = {}
    try:
        for name in ("compiled", "python"):
            _backend.use(name)
            results[name] = (
                simulate_scdp_mu(0.35, mu_ctx.cfg, mu_ctx.phi, mc),
                simulate_scdp_mu(0.8, cfg2, mu_ctx.phi, mc),
                simulate_scdp_mm(0.35, mm_ctx.cfg, mm_ctx.phi, mc),
                simulate_scdp_mm_split(0.35, mm_ctx.cfg, mm_ctx.phi, mc),
            )
    finally:
        _backend.use(prev)
    assert results["compiled"] == results["python"]


def test_backend_switch(python_backend):
    assert backend() == "python"
    with pytest.raises(ValueError):
        _backend.use("fortran")


def test_mm_split_adds_up(mm_ctx):
    r = simulate_scdp_mm_split(0.3, mm_ctx.cfg, mm_ctx.phi, McParams(drops=3000, seed=8))
    assert r["los"].mean + r["nlos"].mean == pytest.approx(r["total"].mean, abs=1e-12)
    assert r["total"] == simulate_scdp_mm(0.3, mm_ctx.cfg, mm_ctx.phi, McParams(drops=3000, seed=8))


def test_pure_python_fallback_selected_by_env():
    import os
    import subprocess
    import sys

    env = dict(os.environ, TIERCACHE_PURE_PYTHON="1")
    res = subprocess.run([sys.executable, "-c", "import tiercache.mc as m; print(m.backend())"],
                         env=env, capture_output=True, text=True)
    assert res.stdout.strip() == "python"
