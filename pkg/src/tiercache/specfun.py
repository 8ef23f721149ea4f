"""Special functions and combinatorial helpers for the sub-6 GHz coverage formula.

Everything here is pure and reentrant.  The Gauss hypergeometric function is
only ever needed for real parameters and real arguments ``z < 1``; the
implementation picks a linear transformation that maps ``z`` into a region
where the power series converges quickly and then sums the series.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, NonConvergenceError, PoleError

__all__ = [
    "SERIES_TOL",
    "SERIES_MAX_TERMS",
    "PARTITION_CAP",
    "gauss_2f1",
    "gamma_fn",
    "rgamma",
    "cosecant",
    "integer_partitions",
    "partition_coefficient",
    "exp_composite_derivative",
]

SERIES_TOL = 1e-12
SERIES_MAX_TERMS = 100_000
PARTITION_CAP = 32

# Beyond this |argument| of the transformed series the convergence is slow
# enough that a different transformation pays off.
_SLOW_ARG = 0.9


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _near_int(x: float) -> bool:
    # connection formulas lose all accuracy near integer parameter gaps
    return abs(x - round(x)) < 1e-6


def gamma_fn(x: float) -> float:
    """Gamma function with an explicit error at the poles ``0, -1, -2, ...``."""
    if _is_nonpositive_int(x):
        raise PoleError(f"gamma has a pole at x={x}")
    return math.gamma(x)


def rgamma(x: float) -> float:
    """Reciprocal gamma function, zero at the poles of gamma."""
    if _is_nonpositive_int(x):
        return 0.0
    return 1.0 / math.gamma(x)


def cosecant(x: float) -> float:
    """Return ``1 / sin(x)``; raises :class:`PoleError` at integer multiples of pi."""
    k = x / math.pi
    if abs(k - round(k)) < 1e-12:
        raise PoleError(f"cosecant has a pole at x={x} (= {round(k)}*pi)")
    return 1.0 / math.sin(x)


def _series(a: float, b: float, c: float, z: float, tol: float, max_terms: int) -> float:
    total = 1.0
    term = 1.0
    az = abs(z)
    for k in range(max_terms):
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        term *= ratio
        total += term
        if term == 0.0:
            return total
        # bound the remaining tail by a geometric series; the term ratio
        # tends to |z|, so the larger of the two is a safe rate once < 1
        r = max(abs(ratio), az)
        if r < 1.0 and abs(term) * r / (1.0 - r) <= tol * abs(total):
            return total
    raise NonConvergenceError(
        f"2F1({a}, {b}; {c}; {z}) series did not reach tol={tol} in {max_terms} terms"
    )


def _reciprocal_z(a: float, b: float, c: float, z: float, tol: float, max_terms: int) -> float:
    # z < -1 and a - b not an integer: expand around infinity in powers of 1/z.
    w = 1.0 / z
    g_c = gamma_fn(c)
    t1 = g_c * gamma_fn(b - a) * rgamma(b) * rgamma(c - a) * (-z) ** (-a)
    t2 = g_c * gamma_fn(a - b) * rgamma(a) * rgamma(c - b) * (-z) ** (-b)
    s1 = _series(a, a - c + 1.0, a - b + 1.0, w, tol, max_terms) if t1 != 0.0 else 0.0
    s2 = _series(b, b - c + 1.0, b - a + 1.0, w, tol, max_terms) if t2 != 0.0 else 0.0
    return t1 * s1 + t2 * s2


def _one_minus_z(a: float, b: float, c: float, z: float, tol: float, max_terms: int) -> float:
    # 0 < z < 1 close to 1 and c - a - b not an integer.
    w = 1.0 - z
    g_c = gamma_fn(c)
    s = c - a - b
    t1 = g_c * gamma_fn(s) * rgamma(c - a) * rgamma(c - b)
    t2 = g_c * gamma_fn(-s) * rgamma(a) * rgamma(b) * w**s
    s1 = _series(a, b, 1.0 - s, w, tol, max_terms) if t1 != 0.0 else 0.0
    s2 = _series(c - a, c - b, 1.0 + s, w, tol, max_terms) if t2 != 0.0 else 0.0
    return t1 * s1 + t2 * s2


def gauss_2f1(
    a: float,
    b: float,
    c: float,
    z: float,
    *,
    tol: float = SERIES_TOL,
    max_terms: int = SERIES_MAX_TERMS,
) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real arguments, z < 1.

    Negative arguments are first mapped into (0, 1) with the Pfaff
    transformation ``(1 - z)^-a 2F1(a, c - b; c; z / (z - 1))``.  When that
    lands close to 1 (``z < -9``) and ``a - b`` is not an integer the
    expansion in ``1/z`` is used instead.  Positive arguments close to 1 use
    the ``1 - z`` connection formula when ``c - a - b`` is not an integer.

    Raises
    ------
    DomainError
        If ``c`` is a non-positive integer or ``z >= 1``.
    NonConvergenceError
        If a series does not converge within ``max_terms`` terms.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpositive_int(c):
        raise DomainError(f"2F1 is undefined for non-positive integer c={c}")
    if not z < 1.0:
        raise DomainError(f"2F1 is only implemented for z < 1, got z={z}")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if z < 0.0:
        w = z / (z - 1.0)
        if w <= _SLOW_ARG:
            return (1.0 - z) ** (-a) * _series(a, c - b, c, w, tol, max_terms)
        if not _near_int(a - b):
            return _reciprocal_z(a, b, c, z, tol, max_terms)
        return _perturbed(_reciprocal_z, a, b, c, z, tol, max_terms)
    if z <= _SLOW_ARG:
        return _series(a, b, c, z, tol, max_terms)
    if not _near_int(c - a - b):
        return _one_minus_z(a, b, c, z, tol, max_terms)
    return _perturbed(_one_minus_z, a, b, c, z, tol, max_terms)


_PERTURB = 1e-4


def _perturbed(fn, a, b, c, z, tol, max_terms):
    # Integer parameter gap: the connection formula has removable poles.
    # Shift b off the integer by +-d and +-2d and Richardson-extrapolate the
    # symmetric means; truncation is O(d^4) and cancellation costs ~eps/d.
    b0 = round(a - b) if fn is _reciprocal_z else round(c - a - b)
    shift = (a - b - b0) if fn is _reciprocal_z else -(c - a - b - b0)
    base = b + shift  # exactly on the integer gap
    tol = min(tol, 1e-16)  # the gamma factors are O(1/d), so sum the series tighter

    def mean(d):
        return 0.5 * (fn(a, base + d, c, z, tol, max_terms) + fn(a, base - d, c, z, tol, max_terms))

    m1, m2 = mean(_PERTURB), mean(2 * _PERTURB)
    exact = (4.0 * m1 - m2) / 3.0
    if shift == 0.0:
        return exact
    # b was within 1e-6 of the gap: first-order correction from the slope
    slope = (fn(a, base + _PERTURB, c, z, tol, max_terms) - fn(a, base - _PERTURB, c, z, tol, max_terms)) / (2 * _PERTURB)
    return exact - shift * slope


@lru_cache(maxsize=None)
def _partitions(n: int) -> tuple[tuple[int, ...], ...]:
    out: list[tuple[int, ...]] = []

    def rec(remaining: int, smallest: int, parts: list[int]) -> None:
        if remaining == 0:
            mult = [0] * n
            for p in parts:
                mult[p - 1] += 1
            out.append(tuple(mult))
            return
        for p in range(smallest, remaining + 1):
            if remaining - p == 0 or remaining - p >= p:
                parts.append(p)
                rec(remaining - p, p, parts)
                parts.pop()

    rec(n, 1, [])
    return tuple(out)


def integer_partitions(n: int, cap: int = PARTITION_CAP) -> list[tuple[int, ...]]:
    """All multiplicity vectors ``(t_1, ..., t_n)`` with ``sum(q * t_q) == n``.

    ``n = 0`` yields the single empty partition ``()``.  Partitions are listed
    with their parts sorted ascending, smallest first part first, so for
    ``n = 3`` the order is 1+1+1, 1+2, 3.
    """
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    if n > cap:
        raise DomainError(f"n={n} exceeds the partition cap {cap}")
    return list(_partitions(int(n)))


@lru_cache(maxsize=None)
def partition_coefficient(mult: tuple[int, ...]) -> int:
    """``n! / prod(t_q! * (q!)^t_q)`` for a multiplicity vector."""
    n = sum((q + 1) * t for q, t in enumerate(mult))
    denom = 1
    for q, t in enumerate(mult, start=1):
        denom *= math.factorial(t) * math.factorial(q) ** t
    return math.factorial(n) // denom


def exp_composite_derivative(g_derivs: Sequence, g_value, n: int):
    """n-th derivative of ``exp(g(v))`` from the derivatives of ``g``.

    ``g_derivs[q - 1]`` holds the q-th derivative of g at the point.  The
    entries may be numpy arrays, in which case the result broadcasts.
    """
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    if len(g_derivs) < n:
        raise DomainError(f"need {n} derivatives of g, got {len(g_derivs)}")
    total = 0.0
    for mult in integer_partitions(n):
        prod = float(partition_coefficient(mult))
        for q, t in enumerate(mult):
            if t:
                prod = prod * g_derivs[q] ** t
        total = total + prod
    return np.exp(g_value) * total
