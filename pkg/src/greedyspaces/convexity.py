"""Uniform-convexity machinery: modulus estimates, the q-triangle law,
split points of finite families, and the summation bound they yield.

The chain of constants, for a norm with modulus delta at separation eps:

    lam = 2 (1 - delta),   1 < q < log_lam 2,   eta = 1 - (lam^q - 1)^(1/q),
    K = 2 / eta.

When lam <= 1 any q > 1 works and no smallness condition on the pair is
needed; eta is set to 1 by convention so the same record shape applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .accum import canonical_rowsum, exact_sum, make_rng
from .errors import BudgetExceededError, InvariantViolationError

_CONSTRUCTION_CHECK_SEED = 0x5EED
_MODULUS_SEED = 0xC0FFEE


class NormOracle:
    """A computable norm on N-dimensional real space.

    ``evaluate`` maps a vector to a nonnegative real; ``evaluate_many`` is
    the row-wise batch version.  Construction spot-checks evaluate(0) = 0,
    homogeneity and the triangle inequality on 100 seeded random triples to
    1e-10; a generator that fails them is rejected outright.
    """

    def __init__(
        self,
        dimension: int,
        evaluate: Callable[[np.ndarray], float],
        descriptor: str = "custom",
        evaluate_many: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        check: bool = True,
    ):
        if dimension < 1:
            raise ValueError("dimension must be at least 1")
        self.dimension = int(dimension)
        self._evaluate = evaluate
        self._evaluate_many = evaluate_many
        self.descriptor = descriptor
        self._lp = None
        if check:
            self._spot_check()

    # -- construction helpers ------------------------------------------------

    @classmethod
    def lp(cls, p: float, dimension: int) -> "NormOracle":
        if not (1 <= p):
            raise ValueError("lp oracle requires p >= 1")
        if math.isinf(p):
            descriptor = f"linf:{dimension}"

            def many(x):
                return np.max(np.abs(np.atleast_2d(x)), axis=1, initial=0.0)

        else:
            descriptor = f"l{p:g}:{dimension}"

            def many(x):
                t = np.abs(np.atleast_2d(np.asarray(x, dtype=float))) ** p
                return canonical_rowsum(t) ** (1.0 / p)

        oracle = cls(
            dimension,
            evaluate=lambda v: float(many(v)[0]),
            descriptor=descriptor,
            evaluate_many=many,
            check=False,
        )
        oracle._lp = float(p)
        return oracle

    @classmethod
    def from_lorentz(cls, spec, dimension: Optional[int] = None) -> "NormOracle":
        from .lorentz import lorentz_norm_many, marcinkiewicz_norm_many

        dim = dimension if dimension is not None else len(spec.weight)
        if spec.flavor == "marcinkiewicz":
            def many(x):
                return marcinkiewicz_norm_many(np.atleast_2d(x), spec.weight)
        else:
            def many(x):
                return lorentz_norm_many(np.atleast_2d(x), spec)

        return cls(
            dim,
            evaluate=lambda v: float(many(v)[0]),
            descriptor=f"lorentz:{spec.flavor}:q={spec.q:g}:{dim}",
            evaluate_many=many,
        )

    # -- core ------------------------------------------------------------

    def evaluate(self, v) -> float:
        return float(self._evaluate(np.asarray(v, dtype=float)))

    def evaluate_many(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self._evaluate_many is not None:
            return np.asarray(self._evaluate_many(x), dtype=float)
        return np.array([self._evaluate(row) for row in x])

    @property
    def is_euclidean(self) -> bool:
        return self._lp == 2.0

    @property
    def lp_exponent(self) -> Optional[float]:
        return self._lp

    def dual(self) -> "NormOracle":
        """Dual norm; available in closed form only for lp descriptors."""
        p = self.lp_exponent
        if p is None:
            raise ValueError(
                "no closed-form dual for this oracle; estimate it instead"
            )
        if p == 1:
            return NormOracle.lp(math.inf, self.dimension)
        if math.isinf(p):
            return NormOracle.lp(1.0, self.dimension)
        return NormOracle.lp(p / (p - 1.0), self.dimension)

    def _structured_probe_pairs(self):
        """Disjointly supported pairs; these expose quasi-norm concavity that
        dense random draws tend to miss."""
        n = self.dimension
        pairs = []
        e = np.eye(n)
        if n >= 2:
            pairs.append((e[0], e[1]))
            pairs.append((e[0], e[n - 1]))
            half = n // 2
            a = np.zeros(n)
            b = np.zeros(n)
            a[:half] = 1.0
            b[half:] = 1.0
            pairs.append((a, b))
        return pairs

    def _spot_check(self):
        if self.evaluate(np.zeros(self.dimension)) != 0.0:
            raise InvariantViolationError("norm of the zero vector is not 0")
        rng = make_rng(_CONSTRUCTION_CHECK_SEED)
        triples = [
            (rng.standard_normal(self.dimension), rng.standard_normal(self.dimension),
             rng.uniform(-3.0, 3.0))
            for _ in range(100)
        ]
        triples += [(f, g, 2.0) for f, g in self._structured_probe_pairs()]
        for f, g, c in triples:
            nf, ng = self.evaluate(f), self.evaluate(g)
            scale = max(1.0, nf, ng)
            if abs(self.evaluate(c * f) - abs(c) * nf) > 1e-10 * scale * max(1.0, abs(c)):
                raise InvariantViolationError("homogeneity spot check failed")
            if self.evaluate(f + g) > nf + ng + 1e-10 * scale:
                raise InvariantViolationError("triangle inequality spot check failed")

    def __repr__(self):
        return f"NormOracle({self.descriptor}, dim={self.dimension})"


def hilbert_modulus(eps: float) -> float:
    """Closed-form modulus of convexity of a euclidean norm."""
    if not 0 <= eps <= 2:
        raise ValueError("eps must lie in [0, 2]")
    return 1.0 - math.sqrt(1.0 - eps * eps / 4.0)


@dataclass(frozen=True)
class ModulusEstimate:
    value: float
    witness_f: np.ndarray
    witness_g: np.ndarray
    evaluations: int


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def spend(self, k=1):
        if self.used + k > self.limit:
            raise _OutOfBudget
        self.used += k


class _OutOfBudget(Exception):
    pass


def modulus_estimate(
    norm: NormOracle, eps: float, budget: int = 6000, seed: int = _MODULUS_SEED
) -> ModulusEstimate:
    """Upper estimate of the modulus of convexity at separation eps.

    Minimizes 1 - ||f+g||/2 over pairs with ||f||, ||g|| <= 1 and
    ||f-g|| >= eps by multi-start constrained local search, spending at most
    ``budget`` norm evaluations.  Every reported value is witnessed by a
    feasible pair, so it upper-bounds the true infimum; it is never claimed
    exact except against known closed forms.  More budget can only lower the
    reported value because restarts are consumed in a fixed seeded order.
    """
    if not 0 <= eps <= 2:
        raise ValueError("eps must lie in [0, 2]")
    dim = norm.dimension
    if eps == 0.0:
        e1 = np.zeros(dim)
        e1[0] = 1.0
        unit = e1 / norm.evaluate(e1)
        return ModulusEstimate(0.0, unit, unit.copy(), 1)

    budget_box = _Budget(budget)

    def n_of(v):
        budget_box.spend()
        return norm.evaluate(v)

    best = (math.inf, None, None)

    def consider(f, g):
        """Project onto the unit ball and keep the pair if still separated."""
        nonlocal best
        nf, ng = n_of(f), n_of(g)
        if max(nf, ng) <= 0:
            return
        f2 = f / max(1.0, nf)
        g2 = g / max(1.0, ng)
        if n_of(f2 - g2) >= eps:
            val = 1.0 - n_of(f2 + g2) / 2.0
            if val < best[0]:
                best = (val, f2.copy(), g2.copy())

    def rotated_unit(u, v, theta):
        g = math.cos(theta) * u + math.sin(theta) * v
        ng = n_of(g)
        return g / ng if ng > 0 else g

    def seed_pair(u, v):
        """Unit pair whose separation just clears eps, found by bisection."""
        lo_t, hi_t = 0.0, math.pi
        g_hi = rotated_unit(u, v, hi_t)
        if n_of(u - g_hi) < eps:
            return None
        for _ in range(40):
            mid = 0.5 * (lo_t + hi_t)
            g_mid = rotated_unit(u, v, mid)
            if n_of(u - g_mid) >= eps * (1.0 + 1e-9):
                hi_t = mid
            else:
                lo_t = mid
        return rotated_unit(u, v, hi_t)

    rng = make_rng(seed)

    def objective(x):
        return 1.0 - n_of(x[:dim] + x[dim:]) / 2.0

    cons = [
        {"type": "ineq", "fun": lambda x: 1.0 - n_of(x[:dim])},
        {"type": "ineq", "fun": lambda x: 1.0 - n_of(x[dim:])},
        {"type": "ineq", "fun": lambda x: n_of(x[:dim] - x[dim:]) - eps},
    ]

    try:
        first = True
        while True:
            if first:
                u = np.zeros(dim)
                u[0] = 1.0
                v = np.zeros(dim)
                v[min(1, dim - 1)] = 1.0
                first = False
            else:
                u = rng.standard_normal(dim)
                v = rng.standard_normal(dim)
            nu = n_of(u)
            if nu <= 0:
                continue
            u = u / nu
            v = v - u * float(u @ v)
            nv = n_of(v)
            if nv <= 0:
                continue
            v = v / nv
            g0 = seed_pair(u, v)
            if g0 is None:
                continue
            consider(u, g0)
            x0 = np.concatenate([u, g0])
            res = optimize.minimize(
                objective,
                x0,
                method="SLSQP",
                constraints=cons,
                options={"maxiter": 80, "ftol": 1e-14},
            )
            consider(res.x[:dim], res.x[dim:])
    except _OutOfBudget:
        pass

    if best[1] is None:
        # budget too small for even one separated pair: report the antipodal
        # witness, a valid but weak upper bound
        e1 = np.zeros(dim)
        e1[0] = 1.0
        f = e1 / norm.evaluate(e1)
        g = -f
        val = 1.0 - norm.evaluate(f + g) / 2.0
        return ModulusEstimate(val, f, g, budget_box.used)
    return ModulusEstimate(best[0], best[1], best[2], budget_box.used)


@dataclass(frozen=True)
class ConvexityConstants:
    """The record (eps, delta, lam, q, eta, K) produced by the q-law."""

    eps: float
    delta: float
    lam: float
    q: float
    eta: float
    K: float

    def __post_init__(self):
        if abs(self.lam - 2.0 * (1.0 - self.delta)) > 1e-9:
            raise ValueError("lam must equal 2 (1 - delta)")
        if self.lam > 1.0:
            if not (1.0 < self.q < math.log(2.0, self.lam)):
                raise ValueError("q must lie strictly between 1 and log_lam 2")
            eta_ref = 1.0 - (self.lam**self.q - 1.0) ** (1.0 / self.q)
            if abs(self.eta - eta_ref) > 1e-9:
                raise ValueError("eta inconsistent with (lam, q)")
            if not self.lam**self.q < 2.0:
                raise InvariantViolationError("lam^q must stay below 2")
        else:
            if self.eta != 1.0:
                raise ValueError("eta is 1 by convention when lam <= 1")
        if abs(self.K - 2.0 / self.eta) > 1e-9 * max(1.0, self.K):
            raise ValueError("K must equal 2 / eta")


def qlaw_constants(
    delta: float, *, eps: float = math.nan, policy="midpoint"
) -> ConvexityConstants:
    """Build the q-triangle-law constants from a modulus value delta.

    ``policy`` selects q inside the admissible open interval (1, log_lam 2):
    "midpoint" (default), "geometric", or an explicit numeric q.  When
    lam <= 1 the interval constraint is vacuous and the policy only picks
    some q > 1 (default 2).
    """
    if not (0 < delta <= 1):
        raise ValueError("delta must lie in (0, 1]")
    lam = 2.0 * (1.0 - delta)
    if lam <= 1.0:
        if isinstance(policy, str):
            q = 2.0
        else:
            q = float(policy)
            if not q > 1:
                raise ValueError("explicit q must exceed 1")
        return ConvexityConstants(eps=eps, delta=delta, lam=lam, q=q, eta=1.0, K=2.0)
    upper = math.log(2.0, lam)
    if policy == "midpoint":
        q = 0.5 * (1.0 + upper)
    elif policy == "geometric":
        q = math.sqrt(upper)
    else:
        q = float(policy)
        if not (1.0 < q < upper):
            raise ValueError(f"explicit q must lie in (1, {upper:g})")
    eta = 1.0 - (lam**q - 1.0) ** (1.0 / q)
    return ConvexityConstants(eps=eps, delta=delta, lam=lam, q=q, eta=eta, K=2.0 / eta)


def constants_for_norm(
    norm: NormOracle,
    eps: float,
    budget: int = 6000,
    policy="midpoint",
    atol: float = 1e-9,
) -> Optional[ConvexityConstants]:
    """Modulus-then-q-law pipeline; None when no convexity is detectable.

    Euclidean oracles use the closed-form modulus; everything else goes
    through the search estimate, whose value upper-bounds the true modulus.
    """
    if norm.is_euclidean:
        delta = hilbert_modulus(eps)
    else:
        delta = modulus_estimate(norm, eps, budget=budget).value
    if delta <= atol:
        return None
    return qlaw_constants(min(delta, 1.0), eps=eps, policy=policy)


VERDICT_HOLDS = "holds"
VERDICT_FAILS = "fails"
VERDICT_NOT_APPLICABLE = "not applicable"


def verify_qlaw(f, g, norm: NormOracle, c: ConvexityConstants, tol: float = 1e-10) -> str:
    """Check ||f+g||^q <= ||f||^q + ||g||^q on a pair meeting the q-law gates.

    Gate (i): min norm >= (1 - eta) max norm.  Gate (ii): ||f-g|| >= eps max.
    Pairs failing either gate get the verdict "not applicable".
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    nf, ng = norm.evaluate(f), norm.evaluate(g)
    hi, lo = max(nf, ng), min(nf, ng)
    if hi == 0.0 or lo < (1.0 - c.eta) * hi:
        return VERDICT_NOT_APPLICABLE
    if norm.evaluate(f - g) < c.eps * hi:
        return VERDICT_NOT_APPLICABLE
    lhs = norm.evaluate(f + g) ** c.q
    rhs = nf**c.q + ng**c.q
    return VERDICT_HOLDS if lhs <= rhs * (1.0 + tol) else VERDICT_FAILS


def _prefix_stack(fs: Sequence[np.ndarray]) -> np.ndarray:
    """P[k] = f_1 + ... + f_k for k = 0..m, accumulated forward."""
    fs = [np.asarray(f, dtype=float) for f in fs]
    m = len(fs)
    out = np.zeros((m + 1, fs[0].shape[0]))
    for k in range(1, m + 1):
        out[k] = out[k - 1] + fs[k - 1]
    return out


def _suffix_stack(fs: Sequence[np.ndarray]) -> np.ndarray:
    """S[k] = f_{k+1} + ... + f_m for k = 0..m, accumulated backward."""
    fs = [np.asarray(f, dtype=float) for f in fs]
    m = len(fs)
    out = np.zeros((m + 1, fs[0].shape[0]))
    for k in range(m - 1, -1, -1):
        out[k] = out[k + 1] + fs[k]
    return out


def balance_gaps(fs: Sequence, norm: NormOracle) -> np.ndarray:
    """A_k = | ||f_1+...+f_k|| - ||f_{k+1}+...+f_m|| | for k = 0..m."""
    if len(fs) == 0:
        raise ValueError("need a nonempty family")
    pre = norm.evaluate_many(_prefix_stack(fs))
    suf = norm.evaluate_many(_suffix_stack(fs))
    return np.abs(pre - suf)


def split_point(fs: Sequence, norm: NormOracle) -> int:
    """Index k in [0, m] at which prefix and suffix norms differ by at most
    the largest single-term norm.

    If the family sums to zero every k works and 0 is returned.  Otherwise k
    is taken as the larger of the last sign change of (prefix - suffix) and
    its successor, whichever balances better (ties to the smaller index).
    """
    if len(fs) == 0:
        raise ValueError("need a nonempty family")
    m = len(fs)
    pre = norm.evaluate_many(_prefix_stack(fs))
    suf = norm.evaluate_many(_suffix_stack(fs))
    if pre[m] == 0.0:
        return 0
    diffs = pre - suf
    k = max(k for k in range(m) if diffs[k] <= 0.0)
    a_k, a_k1 = abs(diffs[k]), abs(diffs[k + 1])
    return k if a_k <= a_k1 else k + 1


@dataclass(frozen=True)
class SummationBoundReport:
    """Outcome of the alternating-sign condition scan plus the norm bound."""

    condition_holds: bool
    violation: Optional[tuple]  # first failing (j, k, m), 1-based
    triples_checked: int
    exhaustive: bool
    ratio: float
    K: float
    q: float
    C: float
    within_bound: bool


def summation_bound_check(
    fs: Sequence,
    norm: NormOracle,
    C: float,
    c: ConvexityConstants,
    *,
    exhaustive_limit: int = 64,
    trials: int = 4096,
    seed: int = 0,
    tol: float = 1e-10,
) -> SummationBoundReport:
    """Scan ||sum_{j..k} f|| <= C ||sum_{j..k} f - sum_{k+1..m} f|| and test
    the summation bound ||sum f|| <= K (sum ||f_n||^q)^(1/q).

    The scan is exhaustive over all index triples j <= k <= m when the
    family has at most ``exhaustive_limit`` members, otherwise a seeded
    random sample of ``trials`` triples is used.
    """
    if len(fs) == 0:
        raise ValueError("need a nonempty family")
    m_fam = len(fs)
    pre = _prefix_stack(fs)

    if m_fam <= exhaustive_limit:
        triples = [
            (j, k, mm)
            for j in range(1, m_fam + 1)
            for k in range(j, m_fam + 1)
            for mm in range(k, m_fam + 1)
        ]
        exhaustive = True
    else:
        rng = make_rng(seed)
        triples = []
        for _ in range(trials):
            j = int(rng.integers(1, m_fam + 1))
            k = int(rng.integers(j, m_fam + 1))
            mm = int(rng.integers(k, m_fam + 1))
            triples.append((j, k, mm))
        exhaustive = False

    idx = np.array(triples, dtype=int)
    lhs_vecs = pre[idx[:, 1]] - pre[idx[:, 0] - 1]
    rhs_vecs = 2.0 * pre[idx[:, 1]] - pre[idx[:, 0] - 1] - pre[idx[:, 2]]
    lhs = norm.evaluate_many(lhs_vecs)
    rhs = norm.evaluate_many(rhs_vecs)
    bad = lhs > C * rhs * (1.0 + tol)
    violation = tuple(int(v) for v in idx[np.argmax(bad)]) if bad.any() else None

    term_norms = norm.evaluate_many(np.asarray(fs, dtype=float))
    denom = exact_sum(term_norms**c.q) ** (1.0 / c.q)
    total = norm.evaluate(pre[m_fam])
    ratio = 0.0 if denom == 0.0 else total / denom
    return SummationBoundReport(
        condition_holds=not bad.any(),
        violation=violation,
        triples_checked=len(triples),
        exhaustive=exhaustive,
        ratio=ratio,
        K=c.K,
        q=c.q,
        C=C,
        within_bound=ratio <= c.K * (1.0 + tol),
    )


def remark_counterexample(j: int, m: int, q: float) -> tuple:
    """Euclidean norm of sum_{n=j}^{m} (e_0 + e_n) and its q-law ratio.

    The sum is materialized as a concrete vector in dimension m + 1 and
    normed directly; with s = m - j + 1 the returned ratio is
    sqrt(s^2 + s) / (sqrt(2) s^(1/q)), the quantity whose growth shows that
    a one-sided prefix condition cannot replace the alternating one.
    """
    if not (1 <= j <= m):
        raise ValueError("need 1 <= j <= m")
    if not q > 0:
        raise ValueError("q must be positive")
    s = m - j + 1
    vec = np.zeros(m + 1)
    vec[0] = float(s)
    vec[j : m + 1] = 1.0
    norm_value = float(math.sqrt(exact_sum(vec * vec)))
    ratio = math.sqrt(float(s) ** 2 + float(s)) / (math.sqrt(2.0) * float(s) ** (1.0 / q))
    return norm_value, ratio


def dual_norm_estimate(
    norm: NormOracle, phi: np.ndarray, restarts: int = 64, seed: int = 7
) -> float:
    """Lower estimate of the dual norm sup { <phi, f> : ||f|| <= 1 }.

    Multi-start maximization of the pairing over the unit sphere; always a
    lower bound, flagged approximate wherever it is surfaced.
    """
    phi = np.asarray(phi, dtype=float)
    dim = norm.dimension
    rng = make_rng(seed)
    best = 0.0

    def neg_ratio(x):
        nx = norm.evaluate(x)
        if nx <= 0:
            return 0.0
        return -float(phi @ x) / nx

    starts = [phi.copy()]
    order = np.argsort(-np.abs(phi))
    for i in order[: min(4, dim)]:
        e = np.zeros(dim)
        e[i] = math.copysign(1.0, phi[i]) if phi[i] != 0 else 1.0
        starts.append(e)
    while len(starts) < restarts:
        starts.append(rng.standard_normal(dim))
    for x0 in starts:
        if not np.any(x0):
            continue
        res = optimize.minimize(neg_ratio, x0, method="Nelder-Mead",
                                options={"maxiter": 200 * dim, "fatol": 1e-12})
        best = max(best, -res.fun)
        best = max(best, -neg_ratio(x0))
    return best
