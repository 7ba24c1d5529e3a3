"""Weighted Lorentz and Marcinkiewicz sequence norms at finite horizon.

Norm conventions, for f with nonincreasing rearrangement f* = (a_n) and a
weight w with partial sums s_n:

    primitive form   ||f||_{1,q,w}   = ( sum_n (a_n s_n)^q w_n / s_n )^(1/q)
    direct form      ||f||_(u,q)     = ( sum_n a_n^q u_n )^(1/q)
    marcinkiewicz    ||f||_m(w)      = sup_m (1/s_m) sum_{n<=m} a_n

The q = inf modification of the primitive form is sup_n a_n s_n; it is the
unique choice whose fundamental function is exactly s_m.

Equivalences between norms are never reported as booleans, only as
(lo, hi) ratio bands over an index range or a sample set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .accum import canonical_rowsum, exact_sum
from .errors import HorizonExhaustedError
from .seqreg import PositiveSequence, Weight, doubling_ratio, lrp_witness, urp_witness

DEFAULT_DOUBLING_CAP = 1024.0

FLAVORS = ("primitive", "direct", "marcinkiewicz")


class RealSequence:
    """Finite real coefficient vector with its nonincreasing rearrangement."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable):
        arr = np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs,
                         dtype=float)
        if arr.ndim != 1:
            raise ValueError("coefficients must form a 1-d vector")
        self._coeffs = arr.copy()
        self._coeffs.flags.writeable = False

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def support(self) -> np.ndarray:
        """0-based indices of the nonzero coefficients."""
        return np.flatnonzero(self._coeffs)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __repr__(self) -> str:
        return f"RealSequence(len={len(self)}, nnz={len(self.support)})"


def _coeffs_of(f) -> np.ndarray:
    if isinstance(f, RealSequence):
        return f.coeffs
    return np.asarray(f, dtype=float)


def rearrangement(f) -> RealSequence:
    """Nonincreasing rearrangement of |coefficients|; ties keep input order."""
    a = _coeffs_of(f)
    order = np.argsort(-np.abs(a), kind="stable")
    return RealSequence(np.abs(a)[order])


def rearranged_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise nonincreasing rearrangement of absolute values."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return -np.sort(-np.abs(x), axis=1)


@dataclass(frozen=True)
class LorentzSpec:
    """Parameter pair (q, w) plus the norm flavor it selects.

    Construction verifies that the partial sums of the weight are doubling
    within ``doubling_cap`` on the stored horizon; weights whose partial sums
    blow up geometrically are rejected here rather than producing junk norms.
    """

    q: float
    weight: Weight
    flavor: str = "primitive"
    doubling_cap: float = DEFAULT_DOUBLING_CAP
    doubling: float = field(init=False, compare=False)

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        if not (self.q > 0):
            raise ValueError("q must be positive (math.inf allowed)")
        ratio = doubling_ratio(self.weight.primitive_sequence())
        if ratio > self.doubling_cap:
            raise ValueError(
                f"primitive sequence doubling ratio {ratio:g} exceeds cap "
                f"{self.doubling_cap:g}"
            )
        object.__setattr__(self, "doubling", ratio)

    @property
    def horizon(self) -> int:
        return len(self.weight)


def _check_width(width: int, spec_len: int):
    if width > spec_len:
        raise ValueError(
            f"vector length {width} exceeds weight horizon {spec_len}"
        )


def lorentz_norm_many(x: np.ndarray, spec: LorentzSpec) -> np.ndarray:
    """Primitive-form norms of the rows of x."""
    a = rearranged_rows(x)
    _check_width(a.shape[1], len(spec.weight))
    s = spec.weight.primitive_values[: a.shape[1]]
    w = spec.weight.w[: a.shape[1]]
    if math.isinf(spec.q):
        return np.max(a * s, axis=1, initial=0.0)
    terms = (a * s) ** spec.q * (w / s)
    total = canonical_rowsum(terms)
    return total ** (1.0 / spec.q)


def lorentz_norm(f, spec: LorentzSpec) -> float:
    """Primitive-form norm; the q = inf modification is sup_n a_n s_n."""
    if spec.flavor != "primitive":
        raise ValueError("lorentz_norm expects a primitive-form spec")
    return float(lorentz_norm_many(_coeffs_of(f)[None, :], spec)[0])


def lorentz_norm_direct(f, u: Weight, q: float) -> float:
    """Direct form ( sum_n (f*_n)^q u_n )^(1/q), 0 < q < inf."""
    if not (0 < q < math.inf):
        raise ValueError("direct form requires finite positive q")
    a = rearranged_rows(_coeffs_of(f))
    _check_width(a.shape[1], len(u))
    terms = a[0] ** q * u.w[: a.shape[1]]
    return float(canonical_rowsum(terms[None, :])[0] ** (1.0 / q))


def _prefix_rows(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    s = np.zeros(x.shape[0])
    c = np.zeros(x.shape[0])
    for j in range(x.shape[1]):
        v = x[:, j]
        t = s + v
        big = np.abs(s) >= np.abs(v)
        c = c + np.where(big, (s - t) + v, (v - t) + s)
        s = t
        out[:, j] = s + c
    return out


def marcinkiewicz_norm_many(x: np.ndarray, w: Weight) -> np.ndarray:
    a = rearranged_rows(x)
    _check_width(a.shape[1], len(w))
    s = w.primitive_values[: a.shape[1]]
    return np.max(_prefix_rows(a) / s, axis=1, initial=0.0)


def marcinkiewicz_norm(f, w: Weight) -> float:
    """sup_m (1/s_m) sum_{n<=m} f*_n over the horizon."""
    return float(marcinkiewicz_norm_many(_coeffs_of(f)[None, :], w)[0])


def norm(f, spec: LorentzSpec) -> float:
    """Dispatch on the spec's flavor."""
    if spec.flavor == "primitive":
        return lorentz_norm(f, spec)
    if spec.flavor == "direct":
        return lorentz_norm_direct(f, spec.weight, spec.q)
    return marcinkiewicz_norm(f, spec.weight)


def discrete_hardy(f) -> RealSequence:
    """Running averages (1/m) sum_{n<=m} a_n of the coefficients as given.

    Each average is the correctly rounded value of the exact rational
    running mean (floats are dyadic rationals), so constant runs average
    exactly and averages of a nonincreasing input never drop below its
    entries.
    """
    a = _coeffs_of(f)
    out = np.empty(len(a))
    acc = Fraction(0)
    for i, x in enumerate(a):
        acc += Fraction(float(x))
        out[i] = float(acc / (i + 1))
    return RealSequence(out)


def hardy_equivalence_band(spec: LorentzSpec, samples: Sequence) -> tuple:
    """(min, max) over samples of ||H(f*)||_{1,q,w} / ||f||_{1,q,w}.

    Requires 1 < q < inf and an upper-regularity witness for the partial
    sums; the lower end is at least 1 because each running average of a
    nonincreasing sequence dominates the entry at its index.
    """
    if not (1 < spec.q < math.inf):
        raise ValueError("hardy equivalence band requires q in (1, inf)")
    if urp_witness(spec.weight.primitive_sequence(), 64) is None:
        raise ValueError("primitive sequence has no upper-regularity witness")
    if len(samples) == 0:
        raise ValueError("empty sample set")
    ratios = []
    for f in samples:
        fstar = rearrangement(f).coeffs
        denom = lorentz_norm(fstar, spec)
        if denom == 0.0:
            continue
        ratios.append(lorentz_norm(discrete_hardy(fstar).coeffs, spec) / denom)
    if not ratios:
        raise ValueError("all samples were zero")
    return (min(ratios), max(ratios))


def fundamental_function(spec: LorentzSpec, m: int) -> float:
    """Norm of the indicator of the first m coordinates."""
    if not 1 <= m <= len(spec.weight):
        raise IndexError(f"m={m} out of range 1..{len(spec.weight)}")
    return norm(np.ones(m), spec)


def embedding_gap_H(w: Weight, m: int) -> float:
    """H_m = sum_{n<=m} w_n / s_n (exactly rounded)."""
    if not 1 <= m <= len(w):
        raise IndexError(f"m={m} out of range 1..{len(w)}")
    return exact_sum(w.w[:m] / w.primitive_values[:m])


def delta_m(w: Weight, q: float, r: float, m: int) -> float:
    """Scale gap (H_m)^(1/q - 1/r) between indices q <= r over one weight.

    This is the largest possible ratio of the q-index norm to the r-index
    norm of a nonincreasing nonnegative vector supported on the first m
    coordinates (1/inf reads as 0).
    """
    if not (0 < q <= r):
        raise ValueError("need 0 < q <= r (r may be inf)")
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    inv_r = 0.0 if math.isinf(r) else 1.0 / r
    return embedding_gap_H(w, m) ** (inv_q - inv_r)


def allen_dual_weight(sigma: PositiveSequence, q: float) -> Weight:
    """Dual-scale weight u_1 = s_1^(-q'), u_n = n^q' (s_{n-1}^(-q') - s_n^(-q')).

    q' = q/(q-1).  Requires the partial-sum sequence to be strictly
    increasing, otherwise some u_n would vanish.
    """
    if not (1 < q < math.inf):
        raise ValueError("q must lie in (1, inf)")
    s_exact = sigma.exact
    if any(a >= b for a, b in zip(s_exact, s_exact[1:])):
        raise ValueError("partial-sum sequence must be strictly increasing")
    qp = q / (q - 1.0)
    s = sigma.values
    u = np.empty(len(s))
    u[0] = s[0] ** (-qp)
    n = np.arange(2, len(s) + 1, dtype=float)
    u[1:] = n**qp * (s[:-1] ** (-qp) - s[1:] ** (-qp))
    return Weight.from_weights(u)


def p_convexify(spec: LorentzSpec, p: float) -> LorentzSpec:
    """Spec of the p-convexified scale: index p*q, partial sums s^(1/p)."""
    if not p > 0:
        raise ValueError("p must be positive")
    if spec.flavor != "primitive":
        raise ValueError("p_convexify expects a primitive-form spec")
    if p == 1:
        return spec
    new_primitive = spec.weight.primitive_values ** (1.0 / p)
    return LorentzSpec(
        q=spec.q * p,
        weight=Weight.from_primitive(new_primitive),
        flavor="primitive",
        doubling_cap=spec.doubling_cap,
    )


@dataclass(frozen=True)
class ScaleEquivalenceReport:
    """Nonincreasing weight v with m v_m and sum v_n both comparable to s_m."""

    weight: Weight
    pointwise_band: tuple  # (lo, hi) of m v_m / s_m
    sum_band: tuple  # (lo, hi) of (sum_{n<=m} v_n) / s_m


def lrp_equivalent_weight(
    w: Weight, *, b_max: int = 64, ei_cap: float = 64.0
) -> ScaleEquivalenceReport:
    """Running-min smoothing of (s_n / n) into a nonincreasing weight.

    Preconditions: the partial sums admit a lower-regularity witness and
    their dual sequence is essentially increasing (ratio below ``ei_cap``).
    The running-min construction is one admissible choice of smoothing; the
    report carries the two equivalence bands so callers can judge it.
    """
    from .seqreg import dual_sequence, essentially_increasing_ratio

    sigma = w.primitive_sequence()
    if lrp_witness(sigma, b_max) is None:
        raise ValueError("partial sums have no lower-regularity witness")
    ei = essentially_increasing_ratio(dual_sequence(sigma))
    if ei > ei_cap:
        raise ValueError(
            f"dual sequence essentially-increasing ratio {ei:g} exceeds cap"
        )
    s = w.primitive_values
    n = np.arange(1, len(w) + 1, dtype=float)
    v = np.minimum.accumulate(s / n)
    vw = Weight.from_weights(v)
    pointwise = n * v / s
    sums = vw.primitive_values / s
    return ScaleEquivalenceReport(
        weight=vw,
        pointwise_band=(float(pointwise.min()), float(pointwise.max())),
        sum_band=(float(sums.min()), float(sums.max())),
    )


@dataclass(frozen=True)
class BlockConstruction:
    """Disjoint flat blocks whose signed sums have unit-size marcinkiewicz norm."""

    blocks: tuple  # of RealSequence, all of length end_index
    end_indices: tuple  # 1-based right endpoints n_1 < ... < n_K
    lam: float
    sign_band: tuple  # (lo, hi) of ||sum eps_k x_k||_m(w) / max|eps| over signs


def block_ellinfty_construction(
    w: Weight, lam: float, count: int, *, max_sign_blocks: int = 10
) -> BlockConstruction:
    """Greedy block construction inside the marcinkiewicz space of w.

    Right endpoints n_k are chosen minimally so that n/s_n attains a running
    maximum at n_k and s_{n_1} + ... + s_{n_{k-1}} <= (lam - 1) s_{n_k}.
    Block k is the indicator of (n_{k-1}, n_k] scaled by s_{n_k} / n_k.
    Raises when the horizon cannot host ``count`` blocks.
    """
    if not lam > 1:
        raise ValueError("lam must exceed 1")
    if count < 1:
        raise ValueError("count must be at least 1")
    s = w.primitive_values
    n_over_s = np.arange(1, len(w) + 1, dtype=float) / s
    running_max = np.maximum.accumulate(n_over_s)

    ends = []
    prev_sum = 0.0
    for n in range(1, len(w) + 1):
        if len(ends) == count:
            break
        if ends and n <= ends[-1]:
            continue
        if n_over_s[n - 1] < running_max[n - 1]:
            continue
        if prev_sum > (lam - 1.0) * s[n - 1]:
            continue
        ends.append(n)
        prev_sum += s[n - 1]
    if len(ends) < count:
        raise HorizonExhaustedError(
            f"found only {len(ends)} of {count} blocks within horizon {len(w)}"
        )

    dim = ends[-1]
    blocks = []
    left = 0
    for n_k in ends:
        coeffs = np.zeros(dim)
        coeffs[left:n_k] = s[n_k - 1] / n_k
        blocks.append(RealSequence(coeffs))
        left = n_k

    k_signs = min(count, max_sign_blocks)
    ratios = []
    for mask in range(2 ** k_signs):
        signs = np.array([1.0 if mask >> i & 1 == 0 else -1.0 for i in range(k_signs)])
        combo = np.zeros(dim)
        for sgn, blk in zip(signs, blocks[:k_signs]):
            combo += sgn * blk.coeffs
        ratios.append(marcinkiewicz_norm(combo, w))
    return BlockConstruction(
        blocks=tuple(blocks),
        end_indices=tuple(ends),
        lam=lam,
        sign_band=(min(ratios), max(ratios)),
    )


def spec_from_json(obj: dict, n: int) -> LorentzSpec:
    """Build a LorentzSpec from its JSON form.

    {"q": number|"inf", "weight": <generator string or list>,
     "flavor": "primitive"|"direct"|"marcinkiewicz"}
    """
    from .seqreg import parse_weight

    if not isinstance(obj, dict) or "q" not in obj or "weight" not in obj:
        raise ValueError("spec JSON needs at least 'q' and 'weight'")
    q = obj["q"]
    q = math.inf if q in ("inf", "Infinity") else float(q)
    wspec = obj["weight"]
    if isinstance(wspec, str):
        weight = parse_weight(wspec, n)
    else:
        weight = Weight.from_weights(wspec)
    flavor = obj.get("flavor", "primitive")
    cap = float(obj.get("doubling_cap", DEFAULT_DOUBLING_CAP))
    return LorentzSpec(q=q, weight=weight, flavor=flavor, doubling_cap=cap)
