"""Constrained cross-entropy optimization of a placement vector.

Each iteration samples ``N_s`` placements from an independent Gaussian per
content, projects them onto the box ``[0, 1]^J``, scores them with the
objective minus a linear capacity penalty, and refits the Gaussian to the
``N_elite`` best samples with exponential smoothing.  The variance
smoothing weight decays as ``beta_t = beta - beta (1 - 1/t)^q``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .model import CAPACITY_SLACK, ContentLibrary, PlacementVector

__all__ = [
    "CceoParams",
    "CceoTrace",
    "dynamic_beta",
    "penalized_objective",
    "repair_capacity",
    "cceo_optimize",
    "batched",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CceoParams:
    """Algorithm settings.

    Defaults are tuned on 100-content Zipf catalogs: a 1% elite fraction,
    a wide start and the fast end of the smoothing ranges reach ``max
    variance < 1e-4`` in about 80 iterations (never more than 150 in
    testing) within 1e-3 of the separable optimum.
    """

    N_s: int = 2000
    N_elite: int = 20
    iota: float = 0.9
    beta: float = 0.99
    q_smooth: int = 10
    H: float = 1e3
    eps_stop: float = 1e-4
    max_iters: int = 200
    seed: int = 0
    init_mean: Optional[float] = None
    init_var: float = 1.0

    def __post_init__(self):
        if not 1 <= self.N_elite < self.N_s:
            raise DomainError(f"need 1 <= N_elite < N_s, got {self.N_elite}, {self.N_s}")
        if not 0.5 <= self.iota <= 0.9:
            raise DomainError(f"iota must lie in [0.5, 0.9], got {self.iota}")
        if not 0.8 <= self.beta <= 0.99:
            raise DomainError(f"beta must lie in [0.8, 0.99], got {self.beta}")
        if not 5 <= self.q_smooth <= 10:
            raise DomainError(f"q_smooth must lie in [5, 10], got {self.q_smooth}")
        if not (self.H > 0 and self.eps_stop > 0 and self.init_var > 0):
            raise DomainError("H, eps_stop and init_var must be positive")
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if self.init_mean is not None and not 0 <= self.init_mean <= 1:
            raise DomainError("init_mean must lie in [0, 1]")


@dataclass
class CceoTrace:
    """Per-iteration Gaussian parameters and the best penalized score."""

    means: list = field(default_factory=list)
    variances: list = field(default_factory=list)
    best: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.best)

    @property
    def max_variance(self) -> np.ndarray:
        return np.array([v.max() for v in self.variances])

    def rows(self):
        """``(iteration, max variance, best objective, mean vector)`` per iteration."""
        for t, (m, v, f) in enumerate(zip(self.means, self.variances, self.best), start=1):
            yield t, float(v.max()), float(f), m


def dynamic_beta(t: int, beta: float, q: int) -> float:
    """Variance smoothing weight at iteration ``t >= 1``."""
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    return beta - beta * (1.0 - 1.0 / t) ** q


def penalized_objective(b, objective: Callable, lib: ContentLibrary, H: float) -> float:
    """``objective(b) - H max(sum_j b_j s_j - M, 0)``."""
    b = np.asarray(b, dtype=float)
    return float(objective(b)) - H * max(float(np.dot(b, lib.s)) - lib.M, 0.0)


def batched(objective: Callable) -> Callable:
    """Mark ``objective`` as accepting an ``(n, J)`` array and returning ``n`` scores."""
    objective.batched = True
    return objective


def _scores(samples: np.ndarray, objective: Callable, lib: ContentLibrary, H: float) -> np.ndarray:
    if getattr(objective, "batched", False):
        raw = np.asarray(objective(samples), dtype=float)
    else:
        raw = np.array([objective(row) for row in samples], dtype=float)
    over = np.maximum(samples @ lib.s - lib.M, 0.0)
    return raw - H * over


def repair_capacity(b: np.ndarray, lib: ContentLibrary) -> np.ndarray:
    """Scale down the entries below 1 until ``sum b s <= M``; scale everything if that is not enough."""
    b = np.clip(np.asarray(b, dtype=float), 0.0, 1.0)
    used = float(b @ lib.s)
    if used <= lib.M + CAPACITY_SLACK:
        return b
    full = b >= 1.0
    fixed = float(lib.s[full].sum())
    frac = float(b[~full] @ lib.s[~full])
    out = b.copy()
    if fixed <= lib.M and frac > 0:
        out[~full] *= (lib.M - fixed) / frac
    else:
        out *= lib.M / used
    # guard against the last ulp pushing us over
    while float(out @ lib.s) > lib.M + CAPACITY_SLACK:
        out *= 1.0 - 1e-12
    return out


def cceo_optimize(objective: Callable, lib: ContentLibrary, params: CceoParams = CceoParams()):
    """Maximise ``objective`` over feasible placements.

    Parameters
    ----------
    objective : callable
        Maps a length-``J`` vector to a float.  Decorate with
        :func:`batched` to score a whole ``(N_s, J)`` batch per call.
    lib : ContentLibrary
    params : CceoParams

    Returns
    -------
    (PlacementVector, CceoTrace)
        The repaired final mean and the per-iteration trace.  The trace's
        ``converged`` flag is False when ``max_iters`` was reached.
    """
    J = lib.J
    rng = np.random.default_rng(params.seed)
    m0 = min(lib.M / float(lib.s.sum()), 1.0) if params.init_mean is None else params.init_mean
    mean = np.full(J, m0)
    var = np.full(J, params.init_var)
    trace = CceoTrace()
    for t in range(1, params.max_iters + 1):
        samples = np.clip(mean + np.sqrt(var) * rng.standard_normal((params.N_s, J)), 0.0, 1.0)
        scores = _scores(samples, objective, lib, params.H)
        # stable sort: ties go to the lower sample index
        elite = samples[np.argsort(-scores, kind="stable")[: params.N_elite]]
        mean = params.iota * elite.mean(axis=0) + (1.0 - params.iota) * mean
        bt = dynamic_beta(t, params.beta, params.q_smooth)
        var = bt * elite.var(axis=0) + (1.0 - bt) * var
        trace.means.append(mean.copy())
        trace.variances.append(var.copy())
        trace.best.append(float(scores.max()))
        if var.max() < params.eps_stop:
            trace.converged = True
            break
    if not trace.converged:
        log.warning("CCEO stopped at max_iters=%d with max variance %.3g", params.max_iters, var.max())
    return PlacementVector(repair_capacity(mean, lib)), trace
