"""Independent oracles used by the test suite.

Everything here verifies library results by a different route: direct
summation in 50-digit arithmetic, numerical maximization over the monotone
cone, and exhaustive scans.  None of these call the code paths they check.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import optimize


def mp_lorentz_norm(coeffs, svals, wvals, q, dps: int = 50) -> float:
    """Primitive-form norm by direct high-precision summation."""
    with mpmath.workdps(dps):
        a = sorted((abs(mpmath.mpf(x)) for x in coeffs), reverse=True)
        s = [mpmath.mpf(x) for x in svals]
        w = [mpmath.mpf(x) for x in wvals]
        if math.isinf(q):
            return float(max(an * sn for an, sn in zip(a, s)))
        qm = mpmath.mpf(q)
        total = mpmath.fsum(
            (an * sn) ** qm * wn / sn for an, sn, wn in zip(a, s, w) if an > 0
        )
        return float(total ** (1 / qm))


def max_monotone_norm_ratio(weight, q, r, m, restarts: int = 24, seed: int = 0) -> float:
    """Maximize ||a||_{1,q,w} / ||a||_{1,r,w} over nonincreasing a >= 0
    supported on the first m coordinates, by constrained local search.

    Monotonicity and nonnegativity are linear constraints; the r-index norm
    is pinned to 1 (an inequality cap a_n s_n <= 1 when r is infinite).
    """
    s = np.asarray(weight.primitive_values[:m], dtype=float)
    w = np.asarray(weight.w[:m], dtype=float)

    def q_norm_q(a):
        return float(np.sum((a * s) ** q * (w / s)))

    constraints = []
    # a_1 >= a_2 >= ... >= a_m >= 0
    mono = np.zeros((m, m))
    for i in range(m - 1):
        mono[i, i] = 1.0
        mono[i, i + 1] = -1.0
    mono[m - 1, m - 1] = 1.0
    constraints.append(optimize.LinearConstraint(mono, 0.0, np.inf))
    if math.isinf(r):
        constraints.append(optimize.LinearConstraint(np.diag(s), -np.inf, 1.0))

        def objective(a):
            return -q_norm_q(a)

    else:

        def r_norm_r(a):
            return float(np.sum((a * s) ** r * (w / s)))

        constraints.append(
            optimize.NonlinearConstraint(r_norm_r, 1.0, 1.0)
        )

        def objective(a):
            return -q_norm_q(a)

    rng = np.random.default_rng(seed)
    starts = [1.0 / s, np.ones(m), np.linspace(1.0, 0.1, m)]
    e1 = np.zeros(m)
    e1[0] = 1.0
    starts.append(e1)
    for _ in range(restarts):
        starts.append(np.sort(rng.uniform(0.05, 1.0, size=m))[::-1])
    best = 0.0
    for a0 in starts:
        if math.isinf(r):
            a0 = a0 / np.max(a0 * s)
        else:
            a0 = a0 / float(np.sum((a0 * s) ** r * (w / s))) ** (1.0 / r)
        res = optimize.minimize(
            objective,
            a0,
            method="SLSQP",
            constraints=constraints,
            options={"maxiter": 400, "ftol": 1e-14},
        )
        if res.x is not None:
            a = np.maximum(res.x, 0.0)
            a = np.maximum.accumulate(a[::-1])[::-1]  # repair monotonicity
            if math.isinf(r):
                denom = float(np.max(a * s))
            else:
                denom = float(np.sum((a * s) ** r * (w / s))) ** (1.0 / r)
            if denom > 0:
                best = max(best, q_norm_q(a) ** (1.0 / q) / denom)
    return best


def brute_split_gaps(fs, norm_fn) -> np.ndarray:
    """All balance gaps |prefix - suffix| by direct per-index recomputation."""
    m = len(fs)
    out = np.empty(m + 1)
    for k in range(m + 1):
        pre = np.zeros_like(np.asarray(fs[0], dtype=float))
        for f in fs[:k]:
            pre = pre + f
        suf = np.zeros_like(pre)
        for f in fs[k:]:
            suf = suf + f
        out[k] = abs(norm_fn(pre) - norm_fn(suf))
    return out


def geometric_tail_sum(r: float, n_terms: int) -> float:
    """Closed-form partial geometric sum, for comparing bounded gap sums."""
    with mpmath.workdps(50):
        rm = mpmath.mpf(r)
        return float((1 - rm**n_terms) / (1 - rm))
