"""Geometry of midpoint dyadic partitions of the unit cube.

Splitting [0, 1] at midpoints ``c`` times produces the 2**c dyadic cells
((m-1)/2**c, m/2**c]; a query point is addressed by the 1-based index of
the cell it falls in.  Cells are left-open and right-closed, and t = 0 is
assigned to cell 1 so that every point of [0, 1] has exactly one address.
Everything downstream (tree walks, grid partitions, closed-form kernels)
is built on these one-dimensional primitives plus the combinatorics of
distributing a split budget over coordinates.

All functions here are pure and safe to call from any number of threads.
"""

from __future__ import annotations

import math
from typing import Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "EXACT_TOTAL_LIMIT",
    "CellAddress",
    "as_point",
    "cell_index",
    "cell_indices",
    "same_cell_1d",
    "match_depth",
    "compositions",
    "composition_count",
    "multinomial_int",
    "multinomial_weight",
]

# Largest split budget k for which multinomial weights use exact integer
# arithmetic; beyond it the log-gamma path avoids huge intermediates.
EXACT_TOTAL_LIMIT = 20


class CellAddress(NamedTuple):
    """Grid-cell address: 1-based per-coordinate indices, relative to the
    per-coordinate split counts that define the grid."""

    indices: tuple[int, ...]
    counts: tuple[int, ...]


def as_point(x, d: int | None = None) -> np.ndarray:
    """Validate a query point and return it as a 1-D float64 array.

    Parameters
    ----------
    x : array_like
        Coordinates of a point in the unit cube.
    d : int, optional
        Expected dimension; a mismatch raises ``ValueError``.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"a point must be a 1-D vector with d >= 1, got shape {arr.shape}")
    if d is not None and arr.size != d:
        raise ValueError(f"dimension mismatch: expected {d} coordinates, got {arr.size}")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("all coordinates must lie in the closed interval [0, 1]")
    return arr


def cell_index(t: float, c: int) -> int:
    """1-based index of the depth-``c`` dyadic cell of [0, 1] containing ``t``.

    The unit interval split at midpoints ``c`` times yields cells
    ((m-1)/2**c, m/2**c] for m = 1..2**c.  Returns max(1, ceil(2**c * t)),
    so t = 0 joins cell 1 and t = 1 joins the topmost cell.

    Parameters
    ----------
    t : float
        Coordinate in [0, 1].
    c : int
        Number of midpoint splits, >= 0.

    Returns
    -------
    int
        Cell index in {1, ..., 2**c}.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"coordinate must lie in [0, 1], got {t}")
    if c < 0:
        raise ValueError(f"split count must be non-negative, got {c}")
    # ldexp scales by a power of two without rounding, so the ceiling is exact.
    return max(1, math.ceil(math.ldexp(t, c)))


def cell_indices(t, c) -> np.ndarray:
    """Vectorized :func:`cell_index`: dyadic cell indices of an array of
    coordinates, all at split depth ``c`` (or a matching array of depths)."""
    scaled = np.ldexp(np.asarray(t, dtype=float), c)
    return np.maximum(1, np.ceil(scaled)).astype(np.int64)


def same_cell_1d(a: float, b: float, c: int) -> bool:
    """True iff ``a`` and ``b`` fall in the same depth-``c`` dyadic cell."""
    return cell_index(a, c) == cell_index(b, c)


def match_depth(a: float, b: float, cap: int) -> int:
    """Deepest split count c <= cap at which ``a`` and ``b`` still share a cell.

    Sharing a cell at depth c implies sharing at every shallower depth, so
    the set of co-cell depths is {0, ..., match_depth(a, b, cap)}.
    """
    if cap < 0:
        raise ValueError(f"cap must be non-negative, got {cap}")
    for c in range(1, cap + 1):
        if not same_cell_1d(a, b, c):
            return c - 1
    return cap


def compositions(k: int, d: int) -> Iterator[tuple[int, ...]]:
    """Yield every ordered d-tuple of non-negative integers summing to k.

    Exactly C(k+d-1, d-1) tuples are produced, in colexicographic order
    (sorted by last coordinate, then by the one before it, and so on), so
    the iteration order is deterministic and testable.

    Parameters
    ----------
    k : int
        Total to distribute, >= 0.
    d : int
        Number of parts, >= 1.
    """
    if d < 1:
        raise ValueError(f"number of parts must be >= 1, got {d}")
    if k < 0:
        raise ValueError(f"total must be non-negative, got {k}")
    yield from _compositions(k, d)


def _compositions(k: int, d: int) -> Iterator[tuple[int, ...]]:
    if d == 1:
        yield (k,)
        return
    for last in range(k + 1):
        for head in _compositions(k - last, d - 1):
            yield head + (last,)


def composition_count(k: int, d: int) -> int:
    """Number of compositions of k into d non-negative parts: C(k+d-1, d-1)."""
    if d < 1:
        raise ValueError(f"number of parts must be >= 1, got {d}")
    return math.comb(k + d - 1, d - 1)


def _validated_counts(counts: Sequence[int], d: int | None = None) -> tuple[int, ...]:
    out = tuple(int(c) for c in counts)
    if any(c < 0 for c in out):
        raise ValueError(f"split counts must be non-negative, got {out}")
    if d is not None and len(out) != d:
        raise ValueError(f"expected {d} split counts, got {len(out)}")
    return out


def multinomial_int(counts: Sequence[int]) -> int:
    """Exact multinomial coefficient k! / (k_1! ... k_d!) with k = sum(counts)."""
    counts = _validated_counts(counts)
    out, partial = 1, 0
    for c in counts:
        partial += c
        out *= math.comb(partial, c)
    return out


def multinomial_weight(counts: Sequence[int], d: int) -> float:
    """Probability that d-way uniform coordinate choices over k = sum(counts)
    draws produce exactly the given per-coordinate counts.

    Equals k!/(k_1! ... k_d!) * d**(-k).  For k <= EXACT_TOTAL_LIMIT the
    value is one correctly rounded division of exact integers; larger
    budgets accumulate log-factorials to avoid overflow.

    Parameters
    ----------
    counts : sequence of int
        Per-coordinate counts, length d, each >= 0.
    d : int
        Number of coordinates, >= 1.

    Returns
    -------
    float
        Weight in (0, 1].
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    counts = _validated_counts(counts, d)
    k = sum(counts)
    if k <= EXACT_TOTAL_LIMIT:
        return multinomial_int(counts) / d**k
    log_w = math.lgamma(k + 1) - sum(math.lgamma(c + 1) for c in counts)
    return math.exp(log_w - k * math.log(d))
