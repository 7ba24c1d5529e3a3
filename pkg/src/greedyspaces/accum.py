"""Reproducible floating-point accumulation and seeded randomness.

Scalar series are reduced with ``math.fsum`` (error-free transformation,
exactly rounded).  Batch reductions use a vectorized Kahan-Babuska-Neumaier
loop so that a one-row batch and a repeated run produce identical bits.
All sampled computations draw from a counter-based Philox generator.
"""

from __future__ import annotations

import math

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the seed fully determines every draw."""
    return np.random.Generator(np.random.Philox(seed))


def exact_sum(terms) -> float:
    """Exactly rounded sum of a 1-d collection of floats."""
    return math.fsum(np.asarray(terms, dtype=float).ravel().tolist())


def neumaier_rowsum(terms: np.ndarray) -> np.ndarray:
    """Compensated row sums of a 2-d array, columns added left to right.

    Neumaier's variant of Kahan summation: the compensation term also
    captures the case where the incoming summand exceeds the running sum.
    """
    terms = np.asarray(terms, dtype=float)
    if terms.ndim != 2:
        raise ValueError("expected a 2-d array of terms")
    s = np.zeros(terms.shape[0])
    c = np.zeros(terms.shape[0])
    for j in range(terms.shape[1]):
        x = terms[:, j]
        t = s + x
        big = np.abs(s) >= np.abs(x)
        c += np.where(big, (s - t) + x, (x - t) + s)
        s = t
    return s + c


def canonical_rowsum(terms: np.ndarray) -> np.ndarray:
    """Row sums in descending-magnitude order with compensation.

    Sorting makes the result independent of how each row was assembled,
    which is what pins byte-identical output across repeated runs.
    """
    terms = np.asarray(terms, dtype=float)
    if terms.ndim == 1:
        terms = terms[None, :]
    order = np.argsort(-np.abs(terms), axis=1, kind="stable")
    return neumaier_rowsum(np.take_along_axis(terms, order, axis=1))


def compensated_prefix(values: np.ndarray) -> np.ndarray:
    """Running prefix sums with the compensation folded into each entry.

    Exact whenever the true prefix sums are representable (e.g. repeated
    equal values), which keeps order comparisons against the inputs safe.
    """
    values = np.asarray(values, dtype=float)
    out = np.empty_like(values)
    s = 0.0
    c = 0.0
    for i, x in enumerate(values):
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        out[i] = s + c
    return out
