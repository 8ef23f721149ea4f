"""Successful content delivery probability of the multi-antenna sub-6 GHz tier.

The typical user is served by the nearest SBS caching the requested content
at distance ``x``.  With ``nu = x**alpha`` the coverage probability is

    P_cov(x, b) = sum_{n < N} (-nu)^n / n! * d^n/dnu^n exp(g(nu))

where ``g`` is the log of the noise term times the Laplace transforms of the
cached (outside ``x``) and uncached (whole plane) interference, all evaluated
at ``s = phi * nu / (P * beta)`` while the exclusion radius stays at ``x``.
The n-th derivative of ``exp(g)`` is expanded over integer partitions.

Every hypergeometric argument collapses to ``-phi`` at ``nu = x**alpha`` so
the 2F1 values are per-context constants and ``P_cov`` vectorises over ``x``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate, interpolate

from .errors import ClampWarning, DomainError, NonConvergenceError
from .model import ContentLibrary, DeliveryRequirement, MuTierConfig, PlacementVector, sinr_threshold
from .specfun import cosecant, exp_composite_derivative, gamma_fn, gauss_2f1

__all__ = [
    "MuCoverageContext",
    "laplace_cached_interference",
    "laplace_uncached_interference",
    "t_factor",
    "t_factor_printed",
    "conditional_coverage_mu",
    "scdp_content_mu",
    "scdp_content_mu_many",
    "scdp_total_mu",
    "MuScdpTable",
    "substituted_scdp_mu",
]

# exp(-U_MAX) < 1e-14: the distance weight is negligible beyond this
U_MAX = -math.log(1e-14)
_CLAMP_SILENT = 1e-9
_CLAMP_HARD = 1e-6
_MEMO_GRID = 1e12


@dataclass(frozen=True)
class MuCoverageContext:
    """A sub-6 GHz tier configuration bound to one SINR threshold.

    Holds the quadrature settings and a memo of per-content SCDP values keyed
    on ``b`` quantised to 1e-12.  The memo is written with plain dict
    assignment, so concurrent writers can only race to store the same value.
    """

    cfg: MuTierConfig
    phi: float
    epsabs: float = 1e-8
    epsrel: float = 1e-10
    limit: int = 200
    _memo: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not self.phi > 0:
            raise DomainError(f"SINR threshold must be positive, got {self.phi}")
        if not self.epsabs > 0:
            raise DomainError("quadrature tolerance must be positive")

    @classmethod
    def from_requirement(cls, cfg: MuTierConfig, req: DeliveryRequirement, **kw) -> "MuCoverageContext":
        return cls(cfg=cfg, phi=sinr_threshold(req, cfg.W_mu), **kw)

    # -- per-context constants ------------------------------------------------

    @property
    def alpha(self) -> float:
        return self.cfg.alpha_mu

    @cached_property
    def noise_coef(self) -> float:
        """``phi sigma^2 / (P beta)``, the coefficient of ``nu`` in g."""
        c = self.cfg
        return self.phi * c.sigma2_mu / (c.P_mu * c.beta_mu)

    @cached_property
    def plane_coef(self) -> float:
        """``(pi / alpha) csc(2 pi / alpha)``: whole-plane interference integral per unit ``(phi nu)^(2/alpha)``."""
        a = self.alpha
        return math.pi / a * cosecant(2.0 * math.pi / a)

    @cached_property
    def hyp(self) -> tuple:
        """Hypergeometric constants of the cached-interference integral.

        Entry 0 is ``2F1(1, 1-2/alpha; 2-2/alpha; -phi)`` (the integral
        itself); entry q >= 1 is ``2F1(q+1, q-2/alpha; q+1-2/alpha; -phi)``
        (its q-th derivative).
        """
        d = 2.0 / self.alpha
        first = gauss_2f1(1.0, 1.0 - d, 2.0 - d, -self.phi)
        return (first,) + tuple(gauss_2f1(q + 1.0, q - d, q + 1.0 - d, -self.phi) for q in range(1, self.cfg.N_mu))

    def cached_x2_coefs(self, n: int) -> np.ndarray:
        """Scaled derivative coefficients of the cached-interference integral.

        ``nu^q F^(q)(nu) = coef[q] * x^2`` at ``nu = x^alpha`` for q = 0..n.
        """
        a, phi = self.alpha, self.phi
        out = np.empty(n + 1)
        out[0] = phi * self.hyp[0] / (a - 2.0)
        for q in range(1, n + 1):
            sign = 1.0 if q % 2 else -1.0
            out[q] = sign * math.factorial(q) * phi**q * self.hyp[q] / (a * q - 2.0)
        return out

    def uncached_x2_coefs(self, n: int) -> np.ndarray:
        """``nu^q U^(q)(nu) = coef[q] * x^2`` for the whole-plane term, q = 0..n."""
        d = 2.0 / self.alpha
        base = self.plane_coef * self.phi**d
        out = np.empty(n + 1)
        falling = 1.0
        for q in range(n + 1):
            out[q] = base * falling
            falling *= d - q
        return out


# -- Laplace transforms -------------------------------------------------------------


def laplace_cached_interference(s: float, x: float, b: float, ctx: MuCoverageContext) -> float:
    """Laplace transform at ``s`` of interference from caching SBSs beyond ``x``."""
    if s < 0 or not x > 0 or not 0 <= b <= 1:
        raise DomainError("need s >= 0, x > 0 and 0 <= b <= 1")
    if s == 0 or b == 0:
        return 1.0
    c = ctx.cfg
    a, d = c.alpha_mu, 2.0 / c.alpha_mu
    k = s * c.P_mu * c.beta_mu
    integral = k * x ** (2.0 - a) / (a - 2.0) * gauss_2f1(1.0, 1.0 - d, 2.0 - d, -k * x ** (-a))
    return math.exp(-2.0 * math.pi * b * c.lambda_mu * integral)


def laplace_uncached_interference(s: float, b: float, ctx: MuCoverageContext) -> float:
    """Laplace transform at ``s`` of interference from non-caching SBSs over the whole plane."""
    if s < 0 or not 0 <= b <= 1:
        raise DomainError("need s >= 0 and 0 <= b <= 1")
    if s == 0 or b == 1:
        return 1.0
    c = ctx.cfg
    k = s * c.P_mu * c.beta_mu
    return math.exp(-2.0 * math.pi * (1.0 - b) * c.lambda_mu * ctx.plane_coef * k ** (2.0 / c.alpha_mu))


# -- log-Laplace derivatives --------------------------------------------------------


def _log_terms(x, b: float, ctx: MuCoverageContext, n: int):
    """``g`` and the scaled derivatives ``nu^q g^(q)`` for q = 1..n at ``nu = x^alpha``."""
    x = np.asarray(x, dtype=float)
    lam = ctx.cfg.lambda_mu
    x2 = x * x
    xa = x ** ctx.alpha
    cc = ctx.cached_x2_coefs(n)
    uc = ctx.uncached_x2_coefs(n)
    mix = -2.0 * math.pi * lam * (b * cc + (1.0 - b) * uc)
    g = -ctx.noise_coef * xa + mix[0] * x2
    ys = [mix[q] * x2 for q in range(1, n + 1)]
    if n >= 1:
        ys[0] = ys[0] - ctx.noise_coef * xa
    return g, ys


def t_factor(q: int, x: float, b: float, ctx: MuCoverageContext) -> float:
    """q-th derivative in ``nu`` of the log of the composite exponential at ``nu = x^alpha``."""
    if q < 1 or not x > 0:
        raise DomainError("need q >= 1 and x > 0")
    if q >= ctx.cfg.N_mu:
        # the context only precomputes what N_mu needs; extend on demand
        ctx = _widened(ctx, q + 1)
    _, ys = _log_terms(x, b, ctx, q)
    return float(ys[q - 1]) / x ** (ctx.alpha * q)


def _widened(ctx: MuCoverageContext, n_ant: int) -> MuCoverageContext:
    from dataclasses import replace

    return MuCoverageContext(replace(ctx.cfg, N_mu=n_ant), ctx.phi, ctx.epsabs, ctx.epsrel, ctx.limit)


def t_factor_printed(q: int, x: float, b: float, ctx: MuCoverageContext) -> float:
    """An alternative closed form of the derivative factors that does not follow from the integrals.

    Kept only as a cross-check against :func:`t_factor`; it is not used by
    any evaluator.  See the test-suite for where the two disagree.
    """
    c = ctx.cfg
    a, phi, lam, b_ = c.alpha_mu, ctx.phi, c.lambda_mu, b
    csc = cosecant(2.0 * math.pi / a)
    if q == 1:
        h = gauss_2f1(1.0, (a - 2.0) / a, 2.0 - 2.0 / a, -phi)
        return (
            -phi * c.sigma2_mu / (c.P_mu * c.beta_mu)
            - 2.0 * math.pi * b_ * lam * x ** (2.0 - a) * phi * (a - 2.0 + 2.0 * (1.0 + phi) * h) / ((1.0 + phi) * (a - 1.0) * a)
            - 4.0 * math.pi**2 * (1.0 - b_) * lam * (phi**a * x) ** (2.0 - a) * csc
        )
    sign = (-1.0) ** q
    h = gauss_2f1(1.0 + q, (2.0 + a) / a, 2.0 + 2.0 / a, -1.0 / phi)
    t1 = 2.0 * math.pi * b_ * lam * math.factorial(q) * sign * x ** (-(2.0 + a) * (1.0 + q)) * phi ** (-q * (1.0 + q)) * h / (2.0 + a)
    t2 = (
        2.0 * math.pi * (1.0 - b_) * lam * math.factorial(q) * sign
        * (x**a) ** (-q + 2.0 / a) * phi ** (2.0 / a)
        * gamma_fn(q - 2.0 / a) * gamma_fn((2.0 + a) / a) / (a * gamma_fn(1.0 + q))
    )
    return t1 + t2


# -- coverage and SCDP ----------------------------------------------------------------


def _clamp_probability(p):
    lo, hi = np.min(p), np.max(p)
    if lo >= 0.0 and hi <= 1.0:
        return p
    if lo < -_CLAMP_HARD or hi > 1.0 + _CLAMP_HARD:
        raise NonConvergenceError(f"coverage assembly left [0, 1] by too much: [{lo}, {hi}]")
    if lo < -_CLAMP_SILENT or hi > 1.0 + _CLAMP_SILENT:
        warnings.warn(f"coverage probability clamped from [{lo}, {hi}]", ClampWarning, stacklevel=3)
    return np.clip(p, 0.0, 1.0)


def conditional_coverage_mu(x, b: float, ctx: MuCoverageContext):
    """Probability that the SINR exceeds ``phi`` when the serving SBS is at distance ``x``.

    Accepts a scalar or an array of distances.  Values that leave ``[0, 1]``
    by rounding are clipped; by more than 1e-9 a :class:`ClampWarning` is
    issued, and by more than 1e-6 the assembly is treated as broken.
    """
    if not 0 <= b <= 1:
        raise DomainError(f"b must lie in [0, 1], got {b}")
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0):
        raise DomainError("distance must be positive")
    n_ant = ctx.cfg.N_mu
    g, ys = _log_terms(xs, b, ctx, n_ant - 1)
    total = np.zeros_like(xs)
    for n in range(n_ant):
        sign = -1.0 if n % 2 else 1.0
        total = total + sign / math.factorial(n) * exp_composite_derivative(ys, 0.0, n)
    p = _clamp_probability(np.exp(g) * total)
    return float(p) if np.ndim(x) == 0 else p


def _distance_from_u(u, b: float, lam: float):
    return np.sqrt(np.asarray(u) / (math.pi * b * lam))


def scdp_content_mu(b: float, ctx: MuCoverageContext) -> float:
    """Per-content SCDP: coverage averaged over the nearest caching SBS distance.

    With ``u = pi b lambda x^2`` the distance density becomes ``exp(-u)``;
    the integral is done by adaptive Gauss-Kronrod on ``[0, U_MAX]``.
    """
    if not 0 <= b <= 1:
        raise DomainError(f"b must lie in [0, 1], got {b}")
    if b == 0:
        return 0.0
    key = round(b * _MEMO_GRID)
    hit = ctx._memo.get(key)
    if hit is not None:
        return hit
    lam = ctx.cfg.lambda_mu

    def integrand(u: float) -> float:
        if u == 0.0:
            return 1.0
        return conditional_coverage_mu(float(_distance_from_u(u, b, lam)), b, ctx) * math.exp(-u)

    val, err, info = _quad(integrand, ctx)
    val = min(max(val, 0.0), 1.0)
    ctx._memo[key] = val
    return val


def _quad(f: Callable[[float], float], ctx: MuCoverageContext):
    out = integrate.quad(f, 0.0, U_MAX, epsabs=ctx.epsabs, epsrel=ctx.epsrel, limit=ctx.limit, full_output=1)
    val, err, info = out[0], out[1], out[2]
    if len(out) > 3 and err > ctx.epsabs:
        raise NonConvergenceError(
            f"SCDP quadrature did not converge: value={val}, abserr={err}, "
            f"intervals={info.get('last')}, message={out[3]!r}"
        )
    return val, err, info


def scdp_content_mu_many(bs, ctx: MuCoverageContext) -> np.ndarray:
    """Vectorised :func:`scdp_content_mu` over an array of ``b`` (adaptive, vector-valued)."""
    bs = np.asarray(bs, dtype=float)
    out = np.zeros_like(bs)
    pos = bs > 0
    if not np.any(pos):
        return out
    bp = bs[pos]
    lam = ctx.cfg.lambda_mu

    def integrand(u: float) -> np.ndarray:
        if u == 0.0:
            return np.ones_like(bp)
        x = np.sqrt(u / (math.pi * bp * lam))
        return np.array([conditional_coverage_mu(xi, bi, ctx) for xi, bi in zip(x, bp)]) * math.exp(-u)

    res, err = integrate.quad_vec(integrand, 0.0, U_MAX, epsabs=ctx.epsabs, epsrel=ctx.epsrel, limit=ctx.limit)
    if err > max(ctx.epsabs, ctx.epsrel) * max(1, bp.size):
        raise NonConvergenceError(f"vector SCDP quadrature error estimate {err}")
    out[pos] = np.clip(res, 0.0, 1.0)
    return out


def scdp_total_mu(placement: PlacementVector, lib: ContentLibrary, ctx: MuCoverageContext) -> float:
    """Request-weighted SCDP ``sum_j a_j P_j(b_j)`` of a placement."""
    placement.check(lib)
    total = 0.0
    for aj, bj in zip(lib.a, placement.b):
        if aj > 0 and bj > 0:
            total += aj * scdp_content_mu(float(bj), ctx)
    return total


class MuScdpTable:
    """Cubic-spline surrogate of ``b -> P_j(b)`` for bulk evaluation.

    Optimizers evaluate the per-content SCDP at hundreds of thousands of
    distinct ``b``; the curve is smooth in ``b`` so it is tabulated once on
    a uniform grid with exact values and interpolated afterwards.
    """

    def __init__(self, ctx: MuCoverageContext, n: int = 401):
        self.ctx = ctx
        self.grid = np.linspace(0.0, 1.0, n)
        self.values = np.array([scdp_content_mu(float(b), ctx) for b in self.grid])
        self._spline = interpolate.CubicSpline(self.grid, self.values)

    def __call__(self, b):
        return np.clip(self._spline(np.clip(b, 0.0, 1.0)), 0.0, 1.0)


# -- substituted curve used by the two-stair Newton search ------------------------


def _gauss_legendre_panels(edges, order: int):
    xg, wg = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (xg + 1.0))
        weights.append(half * wg)
    return np.concatenate(nodes), np.concatenate(weights)


# graded toward u = 0 where the noise term is non-analytic in u
_U_NODES, _U_WEIGHTS = _gauss_legendre_panels([0.0, 0.05, 0.5, 2.0, 5.0, 10.0, 18.0, U_MAX], 40)


def substituted_scdp_mu(w: float, ctx: MuCoverageContext) -> tuple[float, float, float]:
    """Value and first two ``b``-derivatives of the SCDP curve with ``P_cov(x, 0)``.

    Uses a fixed Gauss-Legendre rule in ``u`` so the result is a smooth
    function of ``w``:

        P(w)   = int e^-u           P_cov(x_w(u), 0) du
        P'(w)  = int e^-u (1 - u)   P_cov(...) du / w
        P''(w) = int e^-u (u^2 - 2u) P_cov(...) du / w^2
    """
    if not 0 < w <= 1:
        raise DomainError(f"w must lie in (0, 1], got {w}")
    u = _U_NODES
    x = _distance_from_u(u, w, ctx.cfg.lambda_mu)
    f = conditional_coverage_mu(x, 0.0, ctx) * np.exp(-u) * _U_WEIGHTS
    return float(f.sum()), float((f * (1.0 - u)).sum() / w), float((f * (u * u - 2.0 * u)).sum() / (w * w))
