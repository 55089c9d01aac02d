"""Kernel views of purely random forests (KeRF).

A forest of M partitions induces the proximity kernel
K_M(x, z) = (fraction of the M partitions in which x and z share a cell),
and the KeRF regression estimate is the K_M-weighted mean of the training
responses.  Pooling all cells containing a point at once means empty cells
contribute no weight, unlike the classic per-tree average.

As M grows the proximity kernel converges to the connection probability of
a single random partition, which for midpoint splits with uniform
coordinate choices has a closed form: a multinomial mixture over the ways
of distributing the k splits across coordinates, with one dyadic co-cell
indicator per coordinate.  Directional (per-level) coordinate choices
induce exactly the same connection probability, so one closed form and one
infinite-forest predictor serve both flavors.

Pure read-only computation; batch prediction parallelizes freely across
query points.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .forests import (
    ALGORITHMS,
    Partition,
    TrainingSet,
    partition_cell_count,
    partition_cell_ids,
)
from .partition import as_point, compositions, match_depth, multinomial_int, multinomial_weight

__all__ = [
    "KernelSpec",
    "proximity_finite",
    "centered_kernel",
    "kerf_predict_finite",
    "kerf_predict_finite_batch",
    "kerf_predict_infinite",
]

# int64 is safe for the composition table whenever the total weight d**k
# fits; larger (k, d) fall back to per-term float weights.
_INT64_SAFE = 2**62


@dataclass(frozen=True)
class KernelSpec:
    """Depth, dimension and flavor of a connection-probability kernel.

    The flavor is retained for bookkeeping only: centered and directional
    partitions share the same kernel values.
    """

    depth: int
    dimension: int
    flavor: str = "centered"

    def __post_init__(self) -> None:
        if self.depth < 0 or self.dimension < 1:
            raise ValueError("need depth >= 0 and dimension >= 1")
        if self.flavor not in ALGORITHMS:
            raise ValueError(f"flavor must be one of {ALGORITHMS}, got {self.flavor!r}")


def proximity_finite(partitions: Sequence[Partition], x, z) -> float:
    """Fraction of the M partitions in which ``x`` and ``z`` share a cell."""
    if len(partitions) < 1:
        raise ValueError("need at least one partition")
    x = as_point(x)
    z = as_point(z, x.size)
    pair = np.vstack([x, z])
    hits = 0
    for p in partitions:
        ids = partition_cell_ids(p, pair)
        hits += int(ids[0] == ids[1])
    return hits / len(partitions)


@lru_cache(maxsize=256)
def _composition_table(k: int, d: int):
    """All compositions of k into d parts, with multinomial weights.

    Returns (comps, ints, weights): comps is an (n, d) int64 array; ints
    holds exact integer multinomial coefficients (summing to d**k) when
    they fit in int64, else None; weights always holds float weights.
    """
    comps = np.array(list(compositions(k, d)), dtype=np.int64).reshape(-1, d)
    ints = None
    if d**k < _INT64_SAFE:
        ints = np.array([multinomial_int(c) for c in compositions(k, d)], dtype=np.int64)
    weights = np.array([multinomial_weight(c, d) for c in compositions(k, d)], dtype=float)
    return comps, ints, weights


def centered_kernel(spec: KernelSpec, x, z) -> float:
    """Closed-form connection probability of ``x`` and ``z`` at depth k.

    Sums, over every way (k_1, ..., k_d) of distributing the k splits
    across coordinates, the multinomial weight k!/(k_1!...k_d!) d**(-k)
    times the product of per-coordinate dyadic co-cell indicators.  The
    indicator for coordinate j holds iff k_j does not exceed the deepest
    split count at which x_j and z_j still share a cell, so each term
    costs O(1) after a per-coordinate precomputation.

    When exact integer weights are available the result is a single
    correctly rounded division, making K(x, x) = 1 exact and preserving
    monotonicity in k through rounding.
    """
    k, d = spec.depth, spec.dimension
    x = as_point(x, d)
    z = as_point(z, d)
    cstar = np.array([match_depth(x[j], z[j], k) for j in range(d)], dtype=np.int64)
    comps, ints, weights = _composition_table(k, d)
    mask = np.all(comps <= cstar, axis=1)
    if ints is not None:
        return int(ints[mask].sum()) / d**k
    return float(weights[mask].sum())


def _pooled_cell_sums(partitions, data: TrainingSet, X: np.ndarray):
    """Pooled occupancy of the query points' cells across all partitions:
    per-query total training count and total response sum."""
    num = np.zeros(X.shape[0], dtype=float)
    den = np.zeros(X.shape[0], dtype=np.int64)
    for p in partitions:
        n_cells = partition_cell_count(p)
        train_ids = partition_cell_ids(p, data.points)
        query_ids = partition_cell_ids(p, X)
        counts = np.bincount(train_ids, minlength=n_cells)
        sums = np.bincount(train_ids, weights=data.responses, minlength=n_cells)
        den += counts[query_ids]
        num += sums[query_ids]
    return num, den


def kerf_predict_finite_batch(
    partitions: Sequence[Partition],
    data: TrainingSet,
    X,
    method: str = "aggregation",
) -> tuple[np.ndarray, np.ndarray]:
    """Finite-forest KeRF estimates at the rows of ``X``.

    Two algebraically identical routes are exposed:

    * ``"aggregation"`` pools, over all partitions, the training counts
      and response sums of the cell containing each query point, then
      divides once;
    * ``"kernel"`` materializes the proximity kernel between each query
      point and every training point and forms the kernel-weighted mean.

    Returns ``(values, empty)``; queries whose pooled cells contain no
    training point get value 0.0 and an empty flag.
    """
    if len(partitions) < 1:
        raise ValueError("need at least one partition")
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != data.dimension:
        raise ValueError(f"expected shape (m, {data.dimension}), got {X.shape}")
    if method == "aggregation":
        num, den = _pooled_cell_sums(partitions, data, X)
        empty = den == 0
        values = np.where(empty, 0.0, num / np.where(empty, 1, den))
        return values, empty
    if method == "kernel":
        M = len(partitions)
        weights = np.zeros((X.shape[0], data.n), dtype=float)
        for p in partitions:
            train_ids = partition_cell_ids(p, data.points)
            query_ids = partition_cell_ids(p, X)
            weights += query_ids[:, None] == train_ids[None, :]
        weights /= M
        num = weights @ data.responses
        den = weights.sum(axis=1)
        empty = den == 0
        values = np.where(empty, 0.0, num / np.where(empty, 1.0, den))
        return values, empty
    raise ValueError(f"method must be 'aggregation' or 'kernel', got {method!r}")


def kerf_predict_finite(
    partitions: Sequence[Partition],
    data: TrainingSet,
    x,
    method: str = "aggregation",
    return_empty: bool = False,
):
    """Finite-forest KeRF estimate at a single point ``x``.

    Kernel-weighted mean of the training responses under the M-partition
    proximity kernel; equivalently (and by default) computed by pooling
    cell counts and response sums across partitions.  A zero denominator
    yields 0.0; ``return_empty=True`` also returns that flag.
    """
    x = as_point(x, data.dimension)
    values, empty = kerf_predict_finite_batch(partitions, data, x[None, :], method=method)
    value, is_empty = float(values[0]), bool(empty[0])
    return (value, is_empty) if return_empty else value


def kerf_predict_infinite(spec: KernelSpec, data: TrainingSet, x, return_empty: bool = False):
    """Infinite-forest KeRF estimate at ``x``: training responses weighted
    by the closed-form connection kernel.

    Because centered and directional partitions share one connection
    kernel, this single implementation is the infinite-forest limit for
    both flavors.  A zero denominator yields 0.0 (plus a flag when
    ``return_empty=True``).
    """
    if data.n < 1:
        raise ValueError("need a non-empty training set")
    x = as_point(x, data.dimension)
    w = np.array([centered_kernel(spec, x, xi) for xi in data.points])
    den = float(w.sum())
    empty = den == 0.0
    value = 0.0 if empty else float(w @ data.responses) / den
    return (value, empty) if return_empty else value
