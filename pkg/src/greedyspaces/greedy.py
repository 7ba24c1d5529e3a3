"""Finite bases with biorthogonal functionals, the thresholding greedy
algorithm, and its quality constants.

Every basis here is a finite family of M vectors in an N-dimensional
ambient space.  All constants (quasi-greedy, democracy profiles,
conditionality, Lebesgue) are finite-horizon quantities: exact modes
enumerate subsets and signs under an explicit evaluation budget, sampled
modes are seeded and deterministic, and sampled values are lower bounds
for their infinite-dimensional counterparts.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .accum import make_rng
from .convexity import NormOracle
from .errors import BudgetExceededError, InvariantViolationError
from .lorentz import LorentzSpec, RealSequence, fundamental_function
from .seqreg import Weight

BIORTHOGONALITY_TOL = 1e-10
DEFAULT_BUDGET = 2_000_000

MODE_EXACT = "exact"
MODE_SAMPLED = "sampled"
MODE_CLOSED_FORM = "closed-form"
MODE_AUTO = "auto"


@dataclass(frozen=True)
class Basis:
    """M vectors with biorthogonal functionals over a norm oracle.

    ``phi_u_closed_form`` optionally supplies the analytic sup-over-signs
    profile for catalog bases where it is known; generic estimators are used
    otherwise.
    """

    vectors: np.ndarray
    duals: np.ndarray
    ambient: NormOracle
    dual_ambient: Optional[NormOracle] = None
    name: str = "basis"
    phi_u_closed_form: Optional[Callable[[int], float]] = None
    norm_range: tuple = field(init=False, compare=False)

    def __post_init__(self):
        vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float)).copy()
        duals = np.atleast_2d(np.asarray(self.duals, dtype=float)).copy()
        if vectors.shape != duals.shape:
            raise ValueError("vectors and duals must have matching shapes")
        if vectors.shape[1] != self.ambient.dimension:
            raise ValueError("ambient dimension does not match the vectors")
        gram = duals @ vectors.T
        err = np.max(np.abs(gram - np.eye(vectors.shape[0])))
        if err > BIORTHOGONALITY_TOL:
            raise InvariantViolationError(
                f"biorthogonality defect {err:.3e} exceeds {BIORTHOGONALITY_TOL:g}"
            )
        vectors.flags.writeable = False
        duals.flags.writeable = False
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "duals", duals)
        norms = self.ambient.evaluate_many(vectors)
        object.__setattr__(self, "norm_range", (float(norms.min()), float(norms.max())))

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __repr__(self):
        return f"Basis({self.name}, M={self.size}, N={self.dimension})"


def coefficient_transform(f, basis: Basis) -> RealSequence:
    """The coefficient sequence (x*_n(f))_n."""
    f = np.asarray(f, dtype=float)
    if f.shape != (basis.dimension,):
        raise ValueError("vector dimension does not match the basis ambient")
    return RealSequence(basis.duals @ f)


@dataclass(frozen=True)
class GreedyState:
    """Greedy ordering of the coefficients of one vector.

    ``ordering`` lists coefficient indices by decreasing magnitude, equal
    magnitudes in basis order.
    """

    f: np.ndarray
    coeffs: np.ndarray
    ordering: np.ndarray

    def support(self, m: int) -> np.ndarray:
        return self.ordering[:m]


def greedy_state(f, basis: Basis) -> GreedyState:
    f = np.asarray(f, dtype=float)
    coeffs = basis.duals @ f
    ordering = np.argsort(-np.abs(coeffs), kind="stable")
    return GreedyState(f=f, coeffs=coeffs, ordering=ordering)


def greedy_step(f, basis: Basis, m: int) -> np.ndarray:
    """The m-term thresholding approximation of f."""
    if not 0 <= m <= basis.size:
        raise ValueError(f"m={m} out of range 0..{basis.size}")
    state = greedy_state(f, basis)
    sel = state.support(m)
    return basis.vectors[sel].T @ state.coeffs[sel]


def _greedy_prefix_stack(coeffs: np.ndarray, basis: Basis) -> np.ndarray:
    """Row m-1 holds the m-term greedy approximation of sum coeffs_n x_n."""
    ordering = np.argsort(-np.abs(coeffs), kind="stable")
    steps = basis.vectors[ordering] * coeffs[ordering, None]
    return np.cumsum(steps, axis=0)


def _coefficient_patterns(m_size: int, samples: int, rng) -> list:
    """Random plus structured adversarial coefficient vectors.

    The structured families (same-sign blocks, alternating blocks, geometric
    decays, flat dyadic levels) are what push conditional bases toward their
    worst ratios; random unit-sphere draws fill in the rest.
    """
    patterns = []
    sizes = sorted({2**j for j in range(int(math.log2(m_size)) + 1)} | {m_size})
    for k in sizes:
        block = np.zeros(m_size)
        block[:k] = 1.0
        patterns.append(block)
        alt = np.zeros(m_size)
        alt[:k] = [(-1.0) ** i for i in range(k)]
        patterns.append(alt)
        # balanced signs, plus side first: ties send the greedy picks there
        bal = np.zeros(m_size)
        bal[: (k + 1) // 2] = 1.0
        bal[(k + 1) // 2 : k] = -1.0
        patterns.append(bal)
    n = np.arange(1, m_size + 1, dtype=float)
    for r in (0.5, 0.9):
        decay = r**n
        patterns.append(decay)
        patterns.append(decay * np.where(np.arange(m_size) % 2 == 0, 1.0, -1.0))
    levels = np.zeros(m_size)
    width = max(1, m_size // 8)
    for j in range(0, m_size, width):
        levels[j : j + width] = 2.0 ** (-(j // width))
    patterns.append(levels)
    for _ in range(samples):
        g = rng.standard_normal(m_size)
        patterns.append(g / np.linalg.norm(g))
    return patterns


def quasi_greedy_constant(basis: Basis, samples: int = 200, seed: int = 1) -> float:
    """Empirical lower bound for max(||f - G_m f||, ||G_m f||) / ||f||.

    Sampling mixes seeded unit-sphere coefficients with adversarial
    patterns; the supremum over the horizon can only be larger.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = make_rng(seed)
    best = 0.0
    for a in _coefficient_patterns(basis.size, samples, rng):
        f = basis.vectors.T @ a
        nf = basis.ambient.evaluate(f)
        if nf == 0.0:
            continue
        prefix = _greedy_prefix_stack(basis.duals @ f, basis)
        proj_norms = basis.ambient.evaluate_many(prefix)
        tail_norms = basis.ambient.evaluate_many(f[None, :] - prefix)
        best = max(best, float(np.max(np.maximum(proj_norms, tail_norms)) / nf))
    return best


def _sign_matrix(k: int) -> np.ndarray:
    out = np.empty((2**k, k))
    for i, signs in enumerate(itertools.product((1.0, -1.0), repeat=k)):
        out[i] = signs
    return out


def _exact_cost(m_size: int, sizes: Sequence[int]) -> int:
    return sum(math.comb(m_size, k) * 2**k for k in sizes)


def _extreme_over_sets(
    basis: Basis, sizes: Sequence[int], reduce_max: bool
) -> np.ndarray:
    """Exact max (or min) of ||sum_{n in A} eps_n x_n|| per subset size."""
    out = np.full(len(sizes), -math.inf if reduce_max else math.inf)
    for i, k in enumerate(sizes):
        signs = _sign_matrix(k)
        for subset in itertools.combinations(range(basis.size), k):
            vals = basis.ambient.evaluate_many(signs @ basis.vectors[list(subset)])
            v = float(vals.max() if reduce_max else vals.min())
            out[i] = max(out[i], v) if reduce_max else min(out[i], v)
    return out


def _sampled_extreme_over_sets(
    basis: Basis, sizes: Sequence[int], reduce_max: bool, samples: int, seed: int
) -> np.ndarray:
    rng = make_rng(seed)
    size_list = list(sizes)
    out = np.full(len(size_list), -math.inf if reduce_max else math.inf)
    for i, k in enumerate(size_list):
        candidates = []
        prefix = list(range(k))
        candidates.append((prefix, np.ones(k)))
        candidates.append((prefix, np.array([(-1.0) ** j for j in range(k)])))
        for _ in range(max(1, samples // len(size_list))):
            subset = sorted(rng.choice(basis.size, size=k, replace=False).tolist())
            signs = rng.choice([-1.0, 1.0], size=k)
            candidates.append((subset, signs))
            candidates.append((subset, np.ones(k)))
        for subset, signs in candidates:
            v = basis.ambient.evaluate(signs @ basis.vectors[list(subset)])
            out[i] = max(out[i], v) if reduce_max else min(out[i], v)
    return out


def super_democracy_profile(
    basis: Basis,
    m_max: int,
    mode: str = MODE_AUTO,
    budget: int = DEFAULT_BUDGET,
    samples: int = 2000,
    seed: int = 2,
) -> tuple:
    """(phi_u(1..m_max), mode used).  phi_u(m) sups over |A| <= m and signs."""
    if not 1 <= m_max <= basis.size:
        raise ValueError(f"m_max={m_max} out of range 1..{basis.size}")
    if basis.phi_u_closed_form is not None and mode in (MODE_AUTO, MODE_CLOSED_FORM):
        vals = np.array([basis.phi_u_closed_form(m) for m in range(1, m_max + 1)])
        return vals, MODE_CLOSED_FORM
    sizes = range(1, m_max + 1)
    cost = _exact_cost(basis.size, sizes)
    if mode == MODE_EXACT or (mode == MODE_AUTO and cost <= budget):
        if cost > budget:
            raise BudgetExceededError(
                f"exact profile needs {cost} evaluations, budget is {budget}"
            )
        per_size = _extreme_over_sets(basis, sizes, reduce_max=True)
        return np.maximum.accumulate(per_size), MODE_EXACT
    per_size = _sampled_extreme_over_sets(basis, sizes, True, samples, seed)
    return np.maximum.accumulate(per_size), MODE_SAMPLED


def super_democracy_upper(
    basis: Basis,
    m: int,
    mode: str = MODE_AUTO,
    budget: int = DEFAULT_BUDGET,
    samples: int = 2000,
    seed: int = 2,
) -> float:
    """sup ||sum_{n in A} eps_n x_n|| over |A| <= m and unimodular signs."""
    profile, _ = super_democracy_profile(basis, m, mode, budget, samples, seed)
    return float(profile[m - 1])


def super_democracy_lower(
    basis: Basis,
    m: int,
    mode: str = MODE_AUTO,
    budget: int = DEFAULT_BUDGET,
    samples: int = 2000,
    seed: int = 3,
) -> float:
    """inf ||sum_{n in A} eps_n x_n|| over |A| >= m and unimodular signs."""
    if not 1 <= m <= basis.size:
        raise ValueError(f"m={m} out of range 1..{basis.size}")
    sizes = range(m, basis.size + 1)
    cost = _exact_cost(basis.size, sizes)
    if mode == MODE_EXACT or (mode == MODE_AUTO and cost <= budget):
        if cost > budget:
            raise BudgetExceededError(
                f"exact profile needs {cost} evaluations, budget is {budget}"
            )
        per_size = _extreme_over_sets(basis, sizes, reduce_max=False)
        return float(per_size.min())
    per_size = _sampled_extreme_over_sets(basis, sizes, False, samples, seed)
    return float(per_size.min())


def _spectral_norm_euclidean(v_sel: np.ndarray, d_sel: np.ndarray, tol: float = 1e-10) -> float:
    """Largest singular value of f -> sum_n <d_n, f> v_n by power iteration.

    Iterates the k x k product of the two Gram matrices (k = |A|), which has
    the same nonzero spectrum as the full N x N operator composed with its
    adjoint.
    """
    gv = v_sel @ v_sel.T
    gd = d_sel @ d_sel.T
    c = gv @ gd
    k = c.shape[0]
    x = np.ones(k) + np.arange(k) * 1e-3
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(1000):
        y = c @ x
        lam = float(np.linalg.norm(y))
        if lam == 0.0:
            return 0.0
        x = y / lam
        if abs(lam - prev) <= tol * max(1.0, lam):
            break
        prev = lam
    return math.sqrt(lam)


def _estimate_operator_norm(
    basis: Basis, subset: Sequence[int], restarts: int, rng
) -> float:
    """Lower estimate of ||S_A|| by multi-start ratio maximization."""
    sel = list(subset)
    v_sel = basis.vectors[sel]
    d_sel = basis.duals[sel]

    def ratio(x):
        nx = basis.ambient.evaluate(x)
        if nx <= 0:
            return 0.0
        return basis.ambient.evaluate(v_sel.T @ (d_sel @ x)) / nx

    best = 0.0
    starts = [basis.vectors[i] for i in sel[: max(1, restarts // 2)]]
    while len(starts) < restarts:
        starts.append(rng.standard_normal(basis.dimension))
    for x0 in starts:
        best = max(best, ratio(x0))
        res = optimize.minimize(
            lambda x: -ratio(x), x0, method="Nelder-Mead",
            options={"maxiter": 40 * basis.dimension, "fatol": 1e-10},
        )
        best = max(best, -float(res.fun))
    return best


def conditionality_constant(
    basis: Basis,
    m: int,
    mode: str = MODE_AUTO,
    budget: int = DEFAULT_BUDGET,
    restarts: int = 8,
    samples: int = 128,
    seed: int = 4,
) -> float:
    """sup over |A| <= m of the coordinate-projection norm ||S_A||.

    Euclidean ambients get the exact spectral norm per subset (power
    iteration to 1e-10); other ambients get a multi-start lower estimate and
    the result should be read as a lower bound.
    """
    if not 1 <= m <= basis.size:
        raise ValueError(f"m={m} out of range 1..{basis.size}")
    n_subsets = sum(math.comb(basis.size, k) for k in range(1, m + 1))
    rng = make_rng(seed)
    if mode == MODE_EXACT or (mode == MODE_AUTO and n_subsets <= min(budget, 20000)):
        if n_subsets > budget:
            raise BudgetExceededError(
                f"exact scan needs {n_subsets} subsets, budget is {budget}"
            )
        subsets = itertools.chain.from_iterable(
            itertools.combinations(range(basis.size), k) for k in range(1, m + 1)
        )
    else:
        chosen = set()
        for k in range(1, m + 1):
            chosen.add(tuple(range(k)))
        while len(chosen) < samples:
            k = int(rng.integers(1, m + 1))
            chosen.add(tuple(sorted(rng.choice(basis.size, size=k, replace=False).tolist())))
        subsets = sorted(chosen)
    best = 0.0
    for subset in subsets:
        sel = list(subset)
        if basis.ambient.is_euclidean:
            val = _spectral_norm_euclidean(basis.vectors[sel], basis.duals[sel])
        else:
            val = _estimate_operator_norm(basis, sel, restarts, rng)
        best = max(best, val)
    return best


def lebesgue_constant_lower(
    basis: Basis, m: int, samples: int = 64, seed: int = 5
) -> float:
    """Empirical lower bound for the m-term Lebesgue constant.

    For each sampled f the competitors g run over coefficient truncations on
    candidate supports (greedy, perturbed greedy, random) and, in euclidean
    ambients, the best least-squares combination on those supports.  Any
    competitor only raises the reported ratio toward the true constant.
    """
    if not 1 <= m <= basis.size:
        raise ValueError(f"m={m} out of range 1..{basis.size}")
    rng = make_rng(seed)
    best = 1.0
    for a in _coefficient_patterns(basis.size, samples, rng):
        f = basis.vectors.T @ a
        state = greedy_state(f, basis)
        g_m = basis.vectors[state.support(m)].T @ state.coeffs[state.support(m)]
        resid = basis.ambient.evaluate(f - g_m)
        if resid == 0.0:
            continue
        supports = [tuple(sorted(state.support(m).tolist()))]
        swap = state.ordering[: m + 1].tolist()
        if len(swap) > m:
            supports.append(tuple(sorted(swap[1:])))
        for _ in range(8):
            supports.append(
                tuple(sorted(rng.choice(basis.size, size=m, replace=False).tolist()))
            )
        for sup in supports:
            sel = list(sup)
            g = basis.vectors[sel].T @ state.coeffs[sel]
            err = basis.ambient.evaluate(f - g)
            if err > 0:
                best = max(best, resid / err)
            if basis.ambient.is_euclidean:
                coef, *_ = np.linalg.lstsq(basis.vectors[sel].T, f, rcond=None)
                err2 = basis.ambient.evaluate(f - basis.vectors[sel].T @ coef)
                if err2 > 0:
                    best = max(best, resid / err2)
    return best


@dataclass(frozen=True)
class FundamentalWeight:
    """Weight whose partial sums realize the sup-democracy profile."""

    weight: Weight
    degenerate_indices: tuple  # 1-based n with phi_u(n) - phi_u(n-1) <= 0
    mode: str


def weight_from_fundamental(
    basis: Basis,
    mode: str = MODE_AUTO,
    m_max: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
    samples: int = 2000,
    seed: int = 2,
) -> FundamentalWeight:
    """Telescope phi_u into a weight: w_n = phi_u(n) - phi_u(n-1).

    Sampled profiles are monotonized by running maxima before telescoping;
    nonincreasing steps are flagged as degenerate rather than rejected.
    """
    m_max = basis.size if m_max is None else m_max
    profile, used = super_democracy_profile(basis, m_max, mode, budget, samples, seed)
    monotone = np.maximum.accumulate(profile)
    degenerate = tuple(
        int(n) for n in range(2, m_max + 1) if monotone[n - 1] <= monotone[n - 2]
    )
    return FundamentalWeight(
        weight=Weight.from_primitive(monotone),
        degenerate_indices=degenerate,
        mode=used,
    )


def dual_basis(basis: Basis) -> Basis:
    """Swap vectors and functionals, normed in the dual ambient.

    The dual ambient must be supplied at construction or derivable from an
    lp descriptor; anything else needs an explicit estimated oracle.
    """
    if basis.dual_ambient is not None:
        amb = basis.dual_ambient
    else:
        amb = basis.ambient.dual()
    return Basis(
        vectors=basis.duals,
        duals=basis.vectors,
        ambient=amb,
        dual_ambient=basis.ambient,
        name=basis.name + "*",
    )


def bidemocracy_ratio(
    basis: Basis,
    m: int,
    mode: str = MODE_AUTO,
    budget: int = DEFAULT_BUDGET,
    samples: int = 2000,
    seed: int = 2,
) -> float:
    """(1/m) phi_u(m) phi_u*(m) for the basis and its dual."""
    phi = super_democracy_upper(basis, m, mode, budget, samples, seed)
    phi_dual = super_democracy_upper(dual_basis(basis), m, mode, budget, samples, seed)
    return phi * phi_dual / m


# ---------------------------------------------------------------------------
# Catalog

def canonical_basis(p: float, m_size: int) -> Basis:
    """Unit vector system of lp in dimension m_size."""
    eye = np.eye(m_size)
    ambient = NormOracle.lp(p, m_size)
    if math.isinf(p):
        phi = lambda m: 1.0
    else:
        phi = lambda m: float(m) ** (1.0 / p)
    return Basis(
        vectors=eye,
        duals=eye,
        ambient=ambient,
        dual_ambient=ambient.dual(),
        name=f"canonical-l{p:g}",
        phi_u_closed_form=phi,
    )


def offset_basis(m_size: int) -> Basis:
    """x_n = e_0 + e_n in euclidean space, functionals x*_n = e*_n.

    Every vector carries the same offset direction e_0, so same-sign sums
    grow like the set size while the functionals stay bounded; the standard
    control case for conditional behavior.
    """
    dim = m_size + 1
    vectors = np.zeros((m_size, dim))
    duals = np.zeros((m_size, dim))
    for n in range(m_size):
        vectors[n, 0] = 1.0
        vectors[n, n + 1] = 1.0
        duals[n, n + 1] = 1.0
    return Basis(
        vectors=vectors,
        duals=duals,
        ambient=NormOracle.lp(2.0, dim),
        dual_ambient=NormOracle.lp(2.0, dim),
        name="offset-l2",
        phi_u_closed_form=lambda m: math.sqrt(float(m) ** 2 + float(m)),
    )


def lorentz_unit_basis(spec: LorentzSpec, m_size: Optional[int] = None) -> Basis:
    """Unit vector system of a primitive-form Lorentz space."""
    dim = m_size if m_size is not None else len(spec.weight)
    if dim > len(spec.weight):
        raise ValueError("basis size exceeds the weight horizon")
    eye = np.eye(dim)
    return Basis(
        vectors=eye,
        duals=eye,
        ambient=NormOracle.from_lorentz(spec, dim),
        dual_ambient=None,
        name=f"lorentz-uvs-q{spec.q:g}",
        phi_u_closed_form=lambda m: fundamental_function(spec, m),
    )


def difference_basis(m_size: int, p: float = 2.0) -> Basis:
    """x_n = e_n - e_{n+1} (x_M = e_M) with partial-sum functionals.

    A classically conditional system, shipped as a control for the
    conditionality and Lebesgue estimators.
    """
    vectors = np.zeros((m_size, m_size))
    duals = np.zeros((m_size, m_size))
    for n in range(m_size):
        vectors[n, n] = 1.0
        if n + 1 < m_size:
            vectors[n, n + 1] = -1.0
        duals[n, : n + 1] = 1.0
    ambient = NormOracle.lp(p, m_size)
    return Basis(
        vectors=vectors,
        duals=duals,
        ambient=ambient,
        dual_ambient=ambient.dual(),
        name=f"difference-l{p:g}",
    )


CATALOG = {
    "l1": lambda m: canonical_basis(1.0, m),
    "l1.5": lambda m: canonical_basis(1.5, m),
    "l2": lambda m: canonical_basis(2.0, m),
    "l4": lambda m: canonical_basis(4.0, m),
    "linf": lambda m: canonical_basis(math.inf, m),
    "offset": lambda m: offset_basis(m),
    "difference": lambda m: difference_basis(m),
    "lorentz-q2-sqrt": lambda m: lorentz_unit_basis(
        LorentzSpec(
            q=2.0,
            weight=Weight.from_primitive(np.sqrt(np.arange(1.0, m + 1.0))),
        ),
        m,
    ),
}


def catalog_names() -> list:
    return sorted(CATALOG)


def make_catalog_basis(name: str, m_size: int) -> Basis:
    if name not in CATALOG:
        raise ValueError(f"unknown catalog basis {name!r}; try one of {catalog_names()}")
    return CATALOG[name](m_size)
