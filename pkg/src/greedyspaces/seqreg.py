"""Positive scalar sequences and their finite-horizon regularity tests.

Everything here works on truncations of length N.  Witnesses and ratios are
statements about the stored horizon only, never about an infinite sequence;
callers (and the CLI) should label them accordingly.

Sequence entries are kept as exact dyadic rationals (every float converts
exactly to a ``Fraction``), so order comparisons, duality and the telescoping
identity between a weight and its partial sums hold exactly, not just up to
rounding.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .accum import compensated_prefix


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


class PositiveSequence:
    """Finite sequence (t_1, ..., t_N) of strictly positive reals."""

    __slots__ = ("_exact", "_values")

    def __init__(self, values: Iterable):
        exact = tuple(_to_fraction(v) for v in values)
        if len(exact) == 0:
            raise ValueError("sequence must have at least one entry")
        if any(t <= 0 for t in exact):
            raise ValueError("sequence entries must be strictly positive")
        self._exact = exact
        self._values = np.array([float(t) for t in exact])
        self._values.flags.writeable = False

    @property
    def exact(self) -> tuple:
        return self._exact

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return len(self._exact)

    def __eq__(self, other) -> bool:
        return isinstance(other, PositiveSequence) and self._exact == other._exact

    def __hash__(self):
        return hash(self._exact)

    def __repr__(self) -> str:
        head = ", ".join(f"{v:g}" for v in self._values[:4])
        tail = ", ..." if len(self) > 4 else ""
        return f"PositiveSequence([{head}{tail}], N={len(self)})"

    def is_nondecreasing(self) -> bool:
        return all(a <= b for a, b in zip(self._exact, self._exact[1:]))


class Weight:
    """Weight w_n >= 0 (w_1 > 0) together with its partial sums s_m.

    The partial sums are accumulated in exact dyadic arithmetic, so
    ``primitive[m] - primitive[m-1] == w[m]`` holds without drift no matter
    which constructor was used.
    """

    __slots__ = ("_w_exact", "_s_exact", "_w", "_s")

    def __init__(self, w_exact: tuple, s_exact: tuple):
        if len(w_exact) == 0:
            raise ValueError("weight must have at least one entry")
        if w_exact[0] <= 0:
            raise ValueError("w_1 must be strictly positive")
        if any(w < 0 for w in w_exact):
            raise ValueError("weight entries must be nonnegative")
        self._w_exact = w_exact
        self._s_exact = s_exact
        self._w = np.array([float(v) for v in w_exact])
        self._s = np.array([float(v) for v in s_exact])
        self._w.flags.writeable = False
        self._s.flags.writeable = False

    @classmethod
    def from_weights(cls, values: Iterable) -> "Weight":
        w = tuple(_to_fraction(v) for v in values)
        s = []
        acc = Fraction(0)
        for v in w:
            acc += v
            s.append(acc)
        return cls(w, tuple(s))

    @classmethod
    def from_primitive(cls, svalues: Iterable) -> "Weight":
        s = tuple(_to_fraction(v) for v in svalues)
        if len(s) == 0:
            raise ValueError("primitive must have at least one entry")
        if s[0] <= 0:
            raise ValueError("s_1 must be strictly positive")
        w = [s[0]]
        for a, b in zip(s, s[1:]):
            if b < a:
                raise ValueError("primitive sequence must be nondecreasing")
            w.append(b - a)
        return cls(tuple(w), s)

    @property
    def w(self) -> np.ndarray:
        return self._w

    @property
    def w_exact(self) -> tuple:
        return self._w_exact

    @property
    def primitive_values(self) -> np.ndarray:
        return self._s

    @property
    def primitive_exact(self) -> tuple:
        return self._s_exact

    def primitive_sequence(self) -> PositiveSequence:
        return PositiveSequence(self._s_exact)

    def strictly_positive(self) -> bool:
        return all(v > 0 for v in self._w_exact)

    def __len__(self) -> int:
        return len(self._w_exact)

    def __repr__(self) -> str:
        return f"Weight(N={len(self)}, s_N={self._s[-1]:g})"


def primitive(w: Weight, m: int) -> float:
    """Partial sum s_m = w_1 + ... + w_m (m is 1-based)."""
    if not 1 <= m <= len(w):
        raise IndexError(f"m={m} out of range 1..{len(w)}")
    return float(w.primitive_exact[m - 1])


def doubling_ratio(sigma: PositiveSequence) -> float:
    """max_m s_m / s_ceil(m/2) for a nondecreasing positive sequence."""
    if not sigma.is_nondecreasing():
        raise ValueError("doubling ratio requires a nondecreasing sequence")
    s = sigma.exact
    best = Fraction(0)
    for m in range(1, len(s) + 1):
        r = s[m - 1] / s[(m + 1) // 2 - 1]
        if r > best:
            best = r
    return float(best)


def urp_witness(tau: PositiveSequence, b_max: int) -> Optional[int]:
    """Smallest b in [2, b_max] with t_{b n} <= (b/2) t_n on the horizon.

    Returns ``None`` when no such b exists up to b_max; at a finite horizon
    that is an admissible answer, not an error.  Values of b beyond the
    horizon would be vacuous (no index to check) and never count.
    """
    if b_max < 2:
        raise ValueError("b_max must be at least 2")
    t = tau.exact
    n_len = len(t)
    for b in range(2, min(b_max, n_len) + 1):
        half_b = Fraction(b, 2)
        ok = True
        for n in range(1, n_len // b + 1):
            if t[b * n - 1] > half_b * t[n - 1]:
                ok = False
                break
        if ok:
            return b
    return None


def lrp_witness(tau: PositiveSequence, b_max: int) -> Optional[int]:
    """Smallest b in [2, b_max] with 2 t_m <= t_{b m} on the horizon.

    As for the upper property, b beyond the horizon is vacuous and never
    counts as a witness.
    """
    if b_max < 2:
        raise ValueError("b_max must be at least 2")
    t = tau.exact
    n_len = len(t)
    for b in range(2, min(b_max, n_len) + 1):
        ok = True
        for m in range(1, n_len // b + 1):
            if 2 * t[m - 1] > t[b * m - 1]:
                ok = False
                break
        if ok:
            return b
    return None


def essentially_increasing_ratio(tau: PositiveSequence) -> float:
    """max over n <= m of t_n / t_m (equals 1 iff nondecreasing)."""
    t = tau.exact
    best = Fraction(1)
    prefix_max = t[0]
    for m in range(len(t)):
        if t[m] > prefix_max:
            prefix_max = t[m]
        r = prefix_max / t[m]
        if r > best:
            best = r
    return float(best)


def dual_sequence(tau: PositiveSequence) -> PositiveSequence:
    """The sequence (n / t_n), computed exactly so duality is an involution."""
    return PositiveSequence(
        Fraction(n) / t for n, t in enumerate(tau.exact, start=1)
    )


def urp_condition_c(tau: PositiveSequence) -> float:
    """Smallest C on the horizon with (1/m) sum_{n<=m} 1/t_n <= C / t_m.

    Equivalently max_m t_m * u_m with u_m the running average of 1/t_n.
    Computed in compensated floating point; a bounded answer is evidence
    for upper regularity, a growing one for its failure.
    """
    t = tau.values
    prefix = compensated_prefix(1.0 / t)
    m = np.arange(1, len(t) + 1, dtype=float)
    return float(np.max(t * prefix / m))


def power_sequence(tau: PositiveSequence, p: float) -> PositiveSequence:
    """Entrywise p-th power, p > 0.  p == 1 returns the sequence unchanged."""
    if not p > 0:
        raise ValueError("p must be positive")
    if p == 1:
        return tau
    return PositiveSequence(float(t) ** p for t in tau.values)


def running_max_monotone(tau: PositiveSequence) -> PositiveSequence:
    """Nondecreasing majorant via running maxima.

    One of many monotone sequences equivalent to an essentially increasing
    input; provided as a convenience, nothing downstream depends on this
    particular choice.
    """
    out = []
    cur = tau.exact[0]
    for t in tau.exact:
        if t > cur:
            cur = t
        out.append(cur)
    return PositiveSequence(out)


# ---------------------------------------------------------------------------
# Named generators ("unit", "power:a", "geometric:r", "explicit:[...]")

def _parse_generator(spec: str):
    if ":" not in spec:
        return spec, None
    head, arg = spec.split(":", 1)
    return head, arg


def parse_positive_sequence(spec: str, n: int) -> PositiveSequence:
    """Build a length-n sequence from a generator string."""
    if n < 1:
        raise ValueError("n must be at least 1")
    head, arg = _parse_generator(spec)
    idx = np.arange(1, n + 1, dtype=float)
    if head == "unit":
        return PositiveSequence(np.ones(n))
    if head == "power":
        a = float(arg)
        return PositiveSequence(idx**a)
    if head == "geometric":
        r = float(arg)
        if r <= 0:
            raise ValueError("geometric ratio must be positive")
        return PositiveSequence(r ** (idx - 1.0))
    if head == "explicit":
        vals = json.loads(arg)
        return PositiveSequence(vals)
    raise ValueError(f"unknown sequence generator {spec!r}")


def parse_weight(spec: str, n: int) -> Weight:
    """Build a length-n weight from a generator string.

    ``power:a`` pins the partial sums to s_m = m**a (the weight is the
    telescoped difference), matching how power-type weights are referred to
    by their primitive throughout the package.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    head, arg = _parse_generator(spec)
    idx = np.arange(1, n + 1, dtype=float)
    if head == "unit":
        return Weight.from_weights(np.ones(n))
    if head == "power":
        a = float(arg)
        return Weight.from_primitive(idx**a)
    if head == "geometric":
        r = float(arg)
        if r <= 0:
            raise ValueError("geometric ratio must be positive")
        return Weight.from_weights(r ** (idx - 1.0))
    if head == "explicit":
        vals = json.loads(arg)
        return Weight.from_weights(vals)
    raise ValueError(f"unknown weight generator {spec!r}")
