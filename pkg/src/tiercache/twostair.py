"""Two-stair placement: an MPC head plus a caching-diversity band.

The first ``floor(eps M)`` contents are cached with probability one and the
next ``floor((M - floor(eps M)) / w)`` with a common probability ``w``.
Under the Zipf head-mass approximation the best ``eps`` for a given ``w``
has a closed form; ``w`` is then found by a clipped Newton search on the
reduced objective, and the result is scored with the exact SCDP.

Notation: ``w`` is the CD-band probability, ``ell = P(1) / P(w)`` the ratio
of per-content SCDPs and ``S = eps + (1 - eps) / w`` the band end divided
by ``M``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ClampWarning, DegenerateInputWarning, DomainError, NonConvergenceError
from .model import ContentLibrary, PlacementVector, mpc_placement
from .scdp_mm import MmCoverageContext, mm_curve_derivatives, scdp_total_mm
from .scdp_mu import MuCoverageContext, scdp_total_mu, substituted_scdp_mu

__all__ = [
    "TwoStairPoint",
    "NewtonParams",
    "TwoStairResult",
    "placement_from_twostair",
    "zipf_head_mass_approx",
    "approx_objective",
    "approx_objective_mu",
    "approx_objective_mm",
    "subproblem_objective",
    "optimal_epsilon",
    "effective_gamma",
    "ReducedObjective",
    "newton_direction",
    "newton_direction_mu",
    "newton_direction_mm",
    "twostair_optimize",
]

log = logging.getLogger(__name__)

GAMMA_GUARD = 1e-6
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class TwoStairPoint:
    epsilon: float
    varpi: float

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0 <= self.varpi <= 1:
            raise DomainError(f"varpi must lie in [0, 1], got {self.varpi}")
        if self.epsilon == 1 and self.varpi != 0:
            raise DomainError("epsilon = 1 requires varpi = 0")


@dataclass(frozen=True)
class NewtonParams:
    max_iters: int = 100
    grad_tol: float = 1e-8
    shrink: float = 0.5
    armijo: float = 1e-4
    step0: float = 1.0
    init_varpi: Optional[float] = None

    def __post_init__(self):
        if self.max_iters < 1 or not self.grad_tol > 0 or not self.armijo > 0 or not self.step0 > 0:
            raise DomainError("Newton parameters must be positive")
        if not 0 < self.shrink < 1:
            raise DomainError(f"shrink must lie in (0, 1), got {self.shrink}")


def _unit_sizes(lib: ContentLibrary):
    if not lib.unit_sizes:
        raise DomainError("the two-stair scheme is defined for unit content sizes only")


def placement_from_twostair(pt: TwoStairPoint, lib: ContentLibrary) -> PlacementVector:
    """Materialise the stepped placement vector (floors applied here only)."""
    _unit_sizes(lib)
    M, J = lib.M, lib.J
    n1 = min(int(math.floor(pt.epsilon * M + _FLOOR_EPS)), J)
    n2 = int(math.floor((M - n1) / pt.varpi + _FLOOR_EPS)) if pt.varpi > 0 else 0
    if n1 + n2 > J:
        warnings.warn(
            f"CD band of {n2} contents runs past the library (J={J}); clamped", ClampWarning, stacklevel=2
        )
        n2 = J - n1
    b = np.zeros(J)
    b[:n1] = 1.0
    b[n1 : n1 + n2] = pt.varpi
    return PlacementVector(b)


def effective_gamma(gamma: float) -> float:
    """Move ``gamma`` off 1 by ``GAMMA_GUARD`` (upward at exactly 1) with a warning."""
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if abs(gamma - 1.0) < GAMMA_GUARD:
        g = 1.0 - GAMMA_GUARD if gamma < 1.0 else 1.0 + GAMMA_GUARD
        warnings.warn(f"Zipf approximation undefined at gamma=1; using {g}", DegenerateInputWarning, stacklevel=2)
        return g
    return float(gamma)


def _pm1(x, c):
    # x^c - 1 without cancellation for c near 0
    return np.expm1(c * np.log(x))


def zipf_head_mass_approx(k: float, J: int, gamma: float) -> float:
    """``(k^(1-gamma) - 1) / (J^(1-gamma) - 1)``, the approximate mass of the first ``k`` contents."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if gamma <= 0 or gamma == 1:
        raise DomainError(f"need gamma > 0 and gamma != 1, got {gamma}")
    c = 1.0 - gamma
    return float(_pm1(k, c) / _pm1(J, c))


def approx_objective(pt: TwoStairPoint, lib: ContentLibrary, P1: float, Pw: float, gamma: Optional[float] = None) -> float:
    """Approximate total SCDP of a two-stair point.

    ``[P1 ((eps M)^c - 1) + Pw ((S M)^c - (eps M)^c)] / (J^c - 1)`` with
    ``c = 1 - gamma``; the MPC corner ``(1, 0)`` gives ``P1 (M^c - 1) / (J^c - 1)``.
    """
    gamma = lib.gamma if gamma is None else gamma
    if gamma is None:
        raise DomainError("library has no Zipf exponent; pass gamma")
    if gamma <= 0 or gamma == 1:
        raise DomainError(f"need gamma > 0 and gamma != 1, got {gamma}")
    c, M, J = 1.0 - gamma, lib.M, lib.J
    e, w = pt.epsilon, pt.varpi
    if w == 0:
        if e != 1:
            raise DomainError("varpi = 0 is only meaningful at epsilon = 1")
        return float(P1 * _pm1(M, c) / _pm1(J, c))
    S = e + (1.0 - e) / w
    B = (S * M) ** c
    if e > 0:
        num = P1 * float(_pm1(e * M, c)) + Pw * (B - (e * M) ** c)
    else:
        # empty head: (eps M)^c -> 0 (c > 0) or +inf (c < 0), weighted by P1 - Pw
        gap = P1 - Pw
        num = Pw * B - P1 + (0.0 if gap == 0 or c > 0 else math.copysign(math.inf, gap))
    return float(num / _pm1(J, c))


approx_objective_mu = approx_objective
approx_objective_mm = approx_objective


def subproblem_objective(eps, varpi: float, ell: float, gamma: float, J: int):
    """``f1(eps) = [(ell - 1) eps^c + (eps + (1 - eps)/w)^c - ell] / (J^c - 1)``, ``c = 1 - gamma``."""
    c = 1.0 - gamma
    eps = np.asarray(eps, dtype=float)
    with np.errstate(divide="ignore"):
        val = ((ell - 1.0) * eps**c + (eps + (1.0 - eps) / varpi) ** c - ell) / _pm1(J, c)
    return float(val) if val.ndim == 0 else val


def optimal_epsilon(varpi: float, ell: float, gamma: float) -> float:
    """Closed-form maximiser of :func:`subproblem_objective` over ``[0, 1]``.

    ``eps_o = 1 / ((((ell - 1) / (1/w - 1))^(-1/gamma) - 1) w + 1)``,
    clamped to ``[0, 1]``.  At ``ell = 1`` the formula degenerates; its limit
    ``0`` is returned with a :class:`DegenerateInputWarning`.
    """
    if not 0 < varpi <= 1:
        raise DomainError(f"varpi must lie in (0, 1], got {varpi}")
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if varpi == 1:
        return 1.0
    if ell == 1:
        warnings.warn("ell = 1: returning the limit eps* = 0", DegenerateInputWarning, stacklevel=2)
        return 0.0
    r = 1.0 / varpi - 1.0
    A = math.exp((math.log(r) - math.log(ell - 1.0)) / gamma) - 1.0
    D = A * varpi + 1.0
    if D <= 1.0:
        return 1.0
    return min(max(1.0 / D, 0.0), 1.0)


# -- reduced objective in w --------------------------------------------------------------


@dataclass
class ReducedPoint:
    """Reduced objective and its derivatives at one ``w``, with the inner optimum."""

    w: float
    value: float
    d1: float
    d2: float
    epsilon: float
    ell: float


@dataclass
class ReducedObjective:
    """``Q(w)``: the approximate objective with ``eps = eps_o(w, ell(w))``.

    ``curve(w)`` returns the per-content SCDP and its first two derivatives.
    ``ell = P(1) / P(w)`` is recomputed at every ``w`` and differentiated
    through, so :meth:`evaluate` returns exact derivatives of ``Q``.
    Where ``eps_o`` leaves ``[0, 1]`` it is clamped (derivatives zero).
    """

    curve: Callable[[float], tuple]
    M: float
    J: int
    gamma: float
    P1: float = field(init=False)

    def __post_init__(self):
        self.P1 = float(self.curve(1.0)[0])

    def _eps(self, w, P, dP, d2P):
        g = self.gamma
        P1 = self.P1
        ell = P1 / P
        L = ell - 1.0
        if L <= 0.0 or w >= 1.0:
            return 1.0, 0.0, 0.0, ell
        L1 = -P1 * dP / P**2
        L2 = -P1 * (d2P / P**2 - 2.0 * dP**2 / P**3)
        r, r1, r2 = 1.0 / w - 1.0, -1.0 / w**2, 2.0 / w**3
        B = math.exp((math.log(r) - math.log(L)) / g)
        h = (r1 / r - L1 / L) / g
        h1 = (r2 / r - (r1 / r) ** 2 - L2 / L + (L1 / L) ** 2) / g
        B1 = B * h
        B2 = B * (h * h + h1)
        D = (B - 1.0) * w + 1.0
        if D <= 1.0:
            return 1.0, 0.0, 0.0, ell
        D1 = (B - 1.0) + w * B1
        D2 = 2.0 * B1 + w * B2
        e = 1.0 / D
        e1 = -D1 / D**2
        e2 = -D2 / D**2 + 2.0 * D1**2 / D**3
        return e, e1, e2, ell

    def evaluate(self, w: float) -> ReducedPoint:
        if not 0 < w <= 1:
            raise DomainError(f"w must lie in (0, 1], got {w}")
        c, M = 1.0 - self.gamma, self.M
        P, dP, d2P = self.curve(w)
        e, e1, e2, ell = self._eps(w, P, dP, d2P)
        S = e + (1.0 - e) / w
        S1 = e1 * (1.0 - 1.0 / w) + (e - 1.0) / w**2
        S2 = e2 * (1.0 - 1.0 / w) + 2.0 * e1 / w**2 - 2.0 * (e - 1.0) / w**3

        def power(x, x1, x2):
            # (x M)^c and its derivatives
            A = (x * M) ** c
            q = x1 / x
            return A, c * A * q, c * A * ((c - 1.0) * q * q + x2 / x)

        A, A1, A2 = power(e, e1, e2)
        B, B1, B2 = power(S, S1, S2)
        den = float(_pm1(self.J, c))
        value = (self.P1 * float(_pm1(e * M, c)) + P * (B - A)) / den
        d1 = (self.P1 * A1 + dP * (B - A) + P * (B1 - A1)) / den
        d2 = (self.P1 * A2 + d2P * (B - A) + 2.0 * dP * (B1 - A1) + P * (B2 - A2)) / den
        return ReducedPoint(w, value, d1, d2, e, ell)

    def value(self, w: float) -> float:
        return self.evaluate(w).value


def _mu_curve(ctx: MuCoverageContext):
    return lambda w: substituted_scdp_mu(w, ctx)


def _mm_curve(ctx: MmCoverageContext):
    return lambda w: mm_curve_derivatives(w, ctx)


def reduced_objective(tier: str, lib: ContentLibrary, ctx) -> ReducedObjective:
    _unit_sizes(lib)
    if lib.gamma is None:
        raise DomainError("the two-stair scheme needs a Zipf library (lib.gamma is None)")
    gamma = effective_gamma(lib.gamma)
    curve = _mu_curve(ctx) if tier == "mu" else _mm_curve(ctx) if tier == "mm" else None
    if curve is None:
        raise DomainError(f"unknown tier {tier!r}")
    return ReducedObjective(curve, lib.M, lib.J, gamma)


@dataclass
class NewtonDirection:
    delta: float
    d1: float
    d2: float
    epsilon: float
    ell: float
    gradient_fallback: bool


def newton_direction(varpi: float, objective: ReducedObjective) -> NewtonDirection:
    """``dQ/dw / |d2Q/dw2|``; falls back to the gradient when the curvature is below 1e-14."""
    pt = objective.evaluate(varpi)
    flat = abs(pt.d2) < 1e-14
    delta = pt.d1 if flat else pt.d1 / abs(pt.d2)
    return NewtonDirection(delta, pt.d1, pt.d2, pt.epsilon, pt.ell, flat)


def newton_direction_mu(varpi: float, lib: ContentLibrary, ctx: MuCoverageContext) -> NewtonDirection:
    """Newton direction for the sub-6 GHz tier, with ``P_cov(x, 0)`` inside ``P(w)``."""
    return newton_direction(varpi, reduced_objective("mu", lib, ctx))


def newton_direction_mm(varpi: float, lib: ContentLibrary, ctx: MmCoverageContext) -> NewtonDirection:
    """Newton direction for the mmWave tier (closed-form ``P(w)``)."""
    return newton_direction(varpi, reduced_objective("mm", lib, ctx))


# -- outer search -----------------------------------------------------------------------


@dataclass
class TwoStairResult:
    point: TwoStairPoint
    placement: PlacementVector
    scdp: float
    mpc_scdp: float
    twostair_scdp: float
    converged: bool
    iterations: int
    varpi_trace: list
    chose_mpc: bool


def _exact(tier: str, placement: PlacementVector, lib: ContentLibrary, ctx) -> float:
    return scdp_total_mu(placement, lib, ctx) if tier == "mu" else scdp_total_mm(placement, lib, ctx)


def twostair_optimize(tier: str, lib: ContentLibrary, ctx, params: NewtonParams = NewtonParams()) -> TwoStairResult:
    """Clipped Newton search over ``w`` with Armijo backtracking.

    ``w`` is kept in ``[M/J, 1/ell(w)]``; the lower bound keeps the CD band
    inside the library.  The final placement is scored with the exact SCDP
    and compared with pure MPC; the better of the two is returned.
    """
    _unit_sizes(lib)
    mpc = mpc_placement(lib)
    mpc_val = _exact(tier, mpc, lib, ctx)
    if lib.J <= lib.M:
        pt = TwoStairPoint(1.0, 0.0)
        return TwoStairResult(pt, mpc, mpc_val, mpc_val, mpc_val, True, 0, [], True)

    Q = reduced_objective(tier, lib, ctx)
    lo = lib.M / lib.J

    def upper(w):
        return min(1.0, max(lo, 1.0 / Q.evaluate(w).ell))

    w = params.init_varpi if params.init_varpi is not None else min(0.5, upper(0.5))
    w = min(max(w, lo), upper(w))
    trace = [w]
    converged = False
    it = 0
    for it in range(1, params.max_iters + 1):
        d = newton_direction(w, Q)
        hi = min(1.0, max(lo, 1.0 / d.ell))
        q0 = Q.value(w)
        step = params.step0
        while True:
            w_new = min(max(w + step * d.delta, lo), hi)
            if Q.value(w_new) >= q0 + params.armijo * (w_new - w) * d.d1:
                break
            step *= params.shrink
            if step < 1e-12:
                w_new = w
                break
        moved = abs(w_new - w)
        w = w_new
        trace.append(w)
        if moved < params.grad_tol:
            converged = True
            break
    if not converged:
        log.warning("two-stair Newton search hit max_iters=%d at w=%.6g", params.max_iters, w)

    ell = Q.evaluate(w).ell
    eps = optimal_epsilon(w, max(ell, 1.0), Q.gamma) if ell > 1.0 else 0.0
    pt = TwoStairPoint(1.0, 0.0) if eps >= 1.0 else TwoStairPoint(eps, w)
    ts = placement_from_twostair(pt, lib)
    ts_val = _exact(tier, ts, lib, ctx)
    if ts_val >= mpc_val:
        return TwoStairResult(pt, ts, ts_val, mpc_val, ts_val, converged, it, trace, False)
    return TwoStairResult(TwoStairPoint(1.0, 0.0), mpc, mpc_val, mpc_val, ts_val, converged, it, trace, True)
