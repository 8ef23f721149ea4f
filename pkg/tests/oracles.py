"""Independent high-precision oracles for the frozen test values.

Nothing here imports the package's numerics: every value comes from mpmath
(quadrature, differentiation, power series) or exact arithmetic.  Run

    python tests/oracles.py

to regenerate the constants frozen in the test modules.
"""
from __future__ import annotations

import math

import mpmath as mp

mp.mp.dps = 40

# reference parameter set, SI units
C = 299_792_458.0
P = mp.mpf(10) ** (mp.mpf(20 - 30) / 10)
LAM = mp.mpf(600) * mp.mpf("1e-6")
ALPHA = mp.mpf("2.5")
BETA_MU = (C / (4 * mp.pi * mp.mpf("1e9"))) ** 2
SIGMA2_MU = mp.mpf(10) ** ((mp.mpf(-174) + 10 * mp.log10(mp.mpf("1e7")) - 30) / 10)
PHI_MU = mp.mpf(2) ** (mp.mpf("4e5") / mp.mpf("1e7")) - 1
PHI_MM = mp.mpf(2) ** (mp.mpf("4e5") / mp.mpf("1e9")) - 1


def hyp2f1_series(a, b, c, z, terms=4000):
    """Plain power series, only for ``|z| < 1``."""
    a, b, c, z = (mp.mpf(v) for v in (a, b, c, z))
    s, t = mp.mpf(1), mp.mpf(1)
    for k in range(terms):
        t *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        s += t
        if abs(t) < mp.mpf(10) ** (-35):
            break
    return s


def partition_count(n):
    """p(n) by Euler's pentagonal recurrence."""
    p = [1] + [0] * n
    for m in range(1, n + 1):
        k, total = 1, 0
        while True:
            for g in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
                if g > m:
                    break
                total += (-1) ** (k + 1) * p[m - g]
            if k * (3 * k - 1) // 2 > m:
                break
            k += 1
        p[m] = total
    return p[n]


def log_laplace(nu, x, b, phi=PHI_MU, lam=LAM, alpha=ALPHA, noise=SIGMA2_MU / (P * BETA_MU)):
    """``g(nu) = -nu phi noise - 2 pi lam [b I_x + (1-b) I_0]`` from the defining integrals."""
    k = phi * nu
    f = lambda r: k * r / (r**alpha + k)
    rk = k ** (1 / alpha)
    cached = mp.quad(f, [x, x + rk, x + 10 * rk, mp.inf])
    whole = mp.quad(f, [0, rk, 10 * rk, mp.inf])
    return -phi * nu * noise - 2 * mp.pi * lam * (b * cached + (1 - b) * whole)


def coverage(x, b, n_ant, **kw):
    """``sum_n (-nu)^n / n! d^n/dnu^n exp(g)`` by numerical differentiation at high precision."""
    x, b = mp.mpf(x), mp.mpf(b)
    nu0 = x**ALPHA
    h = lambda nu: mp.exp(log_laplace(nu, x, b, **kw))
    return sum((-nu0) ** n / mp.factorial(n) * mp.diff(h, nu0, n) for n in range(n_ant))


def laplace_cached(s, x, b):
    k = s * P * BETA_MU
    f = lambda r: k * r / (r**ALPHA + k)
    return mp.exp(-2 * mp.pi * b * LAM * mp.quad(f, [x, mp.inf]))


def laplace_uncached(s, b):
    k = s * P * BETA_MU
    f = lambda r: k * r / (r**ALPHA + k)
    rk = k ** (1 / ALPHA)
    return mp.exp(-2 * mp.pi * (1 - b) * LAM * mp.quad(f, [0, rk, 10 * rk, mp.inf]))


def t_factor(q, x, b):
    x = mp.mpf(x)
    return mp.diff(lambda nu: log_laplace(nu, x, mp.mpf(b)), x**ALPHA, q)


def scdp_mu(b, n_ant):
    """Outer integral in ``u = pi b lam x^2`` of the coverage oracle (slow)."""
    b = mp.mpf(b)
    mp.mp.dps = 20
    try:
        f = lambda u: mp.exp(-u) * coverage(mp.sqrt(u / (mp.pi * b * LAM)), b, n_ant)
        return mp.quad(f, [0, mp.mpf("0.05"), 1, 4, 12, 35])
    finally:
        mp.mp.dps = 40


def approx_objective_ref(M, J, gamma, eps, varpi, P1, Pw):
    c = 1 - mp.mpf(gamma)
    M, eps, varpi = mp.mpf(M), mp.mpf(eps), mp.mpf(varpi)
    S = eps + (1 - eps) / varpi
    num = P1 * ((eps * M) ** c - 1) + Pw * ((S * M) ** c - (eps * M) ** c)
    return num / (mp.mpf(J) ** c - 1)


def subproblem_grid_argmax(varpi, ell, gamma, J=100, step="1e-4"):
    """Brute-force argmax over eps in [step, 1] of the inner objective."""
    c = 1 - mp.mpf(gamma)
    varpi, ell, h = mp.mpf(varpi), mp.mpf(ell), mp.mpf(step)
    f = lambda e: ((ell - 1) * e**c + (e + (1 - e) / varpi) ** c - ell) / (mp.mpf(J) ** c - 1)
    n = int(1 / h)
    best = max(range(1, n + 1), key=lambda k: f(k * h))
    return best * h


def lagrangian_oracle(a, grid, values, M):
    """Separable maximum of sum_j a_j P(b_j) s.t. sum_j b_j <= M, b_j on a grid.

    Each content maximises ``a_j P(b) - mu b`` over the grid; ``mu`` is
    bisected to the smallest value whose choices fit the budget.  Plain
    Python floats, no package code.
    """
    import numpy as np

    a, grid, values = (np.asarray(v, dtype=float) for v in (a, grid, values))

    def choose(mu):
        idx = np.argmax(a[:, None] * values[None, :] - mu * grid[None, :], axis=1)
        return grid[idx]

    if choose(0.0).sum() <= M:
        b = choose(0.0)
    else:
        lo, hi = 0.0, float(a.max() * np.max(np.diff(values) / np.diff(grid))) + 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if choose(mid).sum() <= M:
                hi = mid
            else:
                lo = mid
        b = choose(hi)
    return float(np.dot(a, np.interp(b, grid, values))), b


def main(slow: bool = False):
    out = {
        "2F1(1,0.2;1.8;-0.75)": lambda: hyp2f1_series(1, "0.2", "1.8", "-0.75"),
        "Gamma(1.2)": lambda: mp.gamma(mp.mpf("1.2")),
        "csc(2pi/2.5)": lambda: mp.csc(2 * mp.pi / mp.mpf("2.5")),
        "p(6)": lambda: partition_count(6),
        "d3 exp(-2v) at 1": lambda: mp.diff(lambda v: mp.exp(-2 * v), 1, 3),
        "zipf a1 J=100 g=1.5": lambda: 1 / mp.fsum(mp.mpf(m) ** mp.mpf("-1.5") for m in range(1, 101)),
        "zipf head 10 of 100 g=1.5": lambda: mp.fsum(mp.mpf(m) ** mp.mpf("-1.5") for m in range(1, 11))
        / mp.fsum(mp.mpf(m) ** mp.mpf("-1.5") for m in range(1, 101)),
        "phi_mu": lambda: PHI_MU,
        "phi_mm": lambda: PHI_MM,
        "laplace cached x=20 b=.5": lambda: laplace_cached(PHI_MU * mp.mpf(20) ** ALPHA / (P * BETA_MU), 20, mp.mpf("0.5")),
        "laplace uncached s=1e-9 b=.3": lambda: laplace_uncached(mp.mpf("1e-9"), mp.mpf("0.3")),
        "T1 x=15 b=.5": lambda: t_factor(1, 15, "0.5"),
        "T2 x=15 b=.5": lambda: t_factor(2, 15, "0.5"),
        "Pcov N=1 x=10 b=1": lambda: coverage(10, 1, 1),
        "Pcov N=2 x=10 b=.5": lambda: coverage(10, "0.5", 2),
        "Pcov N=4 x=25 b=.3": lambda: coverage(25, "0.3", 4),
        "mm LOS b=1": lambda: 1 - mp.exp(-225 * mp.pi * LAM),
        "mm NLOS b=1 dN=40": lambda: mp.exp(-225 * mp.pi * LAM) - mp.exp(-1600 * mp.pi * LAM),
        "approx obj M10 J100 g1.5 e.5 w.25": lambda: approx_objective_ref(10, 100, "1.5", "0.5", "0.25", mp.mpf("0.9"), mp.mpf("0.7")),
        "eps grid argmax g1.5 w.2 l1.5": lambda: subproblem_grid_argmax("0.2", "1.5", "1.5"),
        "beta_2(0.9,7)": lambda: mp.mpf("0.9") - mp.mpf("0.9") * mp.mpf("0.5") ** 7,
    }
    if slow:
        out["scdp_mu b=1 N=2"] = lambda: scdp_mu(1, 2)
        out["scdp_mu b=0.3 N=2"] = lambda: scdp_mu("0.3", 2)
    for k, fn in out.items():
        v = fn()
        print(f"{k:32s} {mp.nstr(v, 17) if not isinstance(v, int) else v}", flush=True)


if __name__ == "__main__":
    import sys

    main(slow="--slow" in sys.argv)
