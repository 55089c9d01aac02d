"""Purely random partitions of the unit cube and the classic forest estimators.

Two partition schemes, both independent of the training data:

* centered trees: every internal node of a complete depth-k binary tree
  picks a coordinate uniformly at random and splits its cell at the
  midpoint of that coordinate's interval;
* directional schedules: one coordinate is picked uniformly per level and
  every node of that level splits on it, so the depth-k partition is the
  dyadic grid determined by the per-coordinate split counts.

Partitions are immutable after construction and prediction is read-only,
so any number of threads may query them concurrently.  Sampling takes an
explicit generator; forest-level sampling derives one substream per tree
from a master seed so results do not depend on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from .partition import CellAddress, as_point, cell_index, cell_indices
from .streams import seed_sequence

__all__ = [
    "ALGORITHMS",
    "CenteredTree",
    "DirectionalSchedule",
    "TrainingSet",
    "CellStats",
    "Partition",
    "sample_centered_tree",
    "sample_directional_schedule",
    "sample_partitions",
    "directional_counts",
    "directional_cell_of",
    "centered_leaf_of",
    "centered_leaf_ids",
    "directional_cell_ids",
    "partition_cell_ids",
    "partition_cell_count",
    "cell_stats",
    "tree_predict",
    "forest_predict",
    "serialize_partition",
    "parse_partitions",
    "dump_partitions",
    "load_partitions",
]

ALGORITHMS = ("centered", "directional")


@dataclass(eq=False)
class CenteredTree:
    """Complete binary tree of depth k with a coordinate label at every
    internal node; stored as a flat heap array (node i's children sit at
    2i+1 and 2i+2), which makes cell assignment O(k) per query.

    ``labels`` holds the 2**k - 1 internal-node labels, 1-based in
    {1, ..., d}, in heap order.
    """

    depth: int
    dimension: int
    labels: np.ndarray

    def __post_init__(self) -> None:
        if self.depth < 0 or self.dimension < 1:
            raise ValueError("need depth >= 0 and dimension >= 1")
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (2**self.depth - 1,):
            raise ValueError(
                f"a depth-{self.depth} tree has {2**self.depth - 1} internal nodes, "
                f"got {self.labels.size} labels"
            )
        if self.labels.size and (self.labels.min() < 1 or self.labels.max() > self.dimension):
            raise ValueError(f"labels must lie in 1..{self.dimension}")


@dataclass(eq=False)
class DirectionalSchedule:
    """Length-k sequence of 1-based coordinate labels, one per level; all
    nodes of level l split on ``sequence[l]``."""

    dimension: int
    sequence: np.ndarray

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("need dimension >= 1")
        self.sequence = np.asarray(self.sequence, dtype=np.int64)
        if self.sequence.ndim != 1:
            raise ValueError("sequence must be one-dimensional")
        if self.sequence.size and (
            self.sequence.min() < 1 or self.sequence.max() > self.dimension
        ):
            raise ValueError(f"coordinates must lie in 1..{self.dimension}")

    @property
    def depth(self) -> int:
        return int(self.sequence.size)


Partition = Union[CenteredTree, DirectionalSchedule]


@dataclass(eq=False)
class TrainingSet:
    """Regression sample: points in [0, 1]^d with real-valued responses."""

    points: np.ndarray
    responses: np.ndarray

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float)
        self.responses = np.asarray(self.responses, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] < 1:
            raise ValueError(f"points must be a (n, d) array with d >= 1, got {self.points.shape}")
        if self.responses.shape != (self.points.shape[0],):
            raise ValueError("points and responses must have equal length")
        if self.points.size and (self.points.min() < 0.0 or self.points.max() > 1.0):
            raise ValueError("all point coordinates must lie in [0, 1]")

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])


class CellStats(NamedTuple):
    """Occupancy of one partition cell: training-point count and response sum."""

    count: int
    response_sum: float


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_centered_tree(k: int, d: int, rng: np.random.Generator) -> CenteredTree:
    """Draw a centered tree of depth k: all 2**k - 1 internal labels are
    independent uniform picks from {1, ..., d}."""
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    labels = rng.integers(1, d + 1, size=2**k - 1, dtype=np.int64)
    return CenteredTree(depth=k, dimension=d, labels=labels)


def sample_directional_schedule(k: int, d: int, rng: np.random.Generator) -> DirectionalSchedule:
    """Draw a directional schedule: k independent uniform picks from
    {1, ..., d}, so all d**k schedules are equally likely."""
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    seq = rng.integers(1, d + 1, size=k, dtype=np.int64)
    return DirectionalSchedule(dimension=d, sequence=seq)


def sample_partitions(flavor: str, M: int, k: int, d: int, seed: int) -> list[Partition]:
    """Draw M partitions of the given flavor ("centered" or "directional").

    Tree i consumes the substream addressed by counter i under ``seed``,
    so the forest is reproducible regardless of whether trees are drawn
    serially or in parallel.
    """
    if flavor not in ALGORITHMS:
        raise ValueError(f"flavor must be one of {ALGORITHMS}, got {flavor!r}")
    if M < 0:
        raise ValueError(f"need M >= 0, got {M}")
    sampler = sample_centered_tree if flavor == "centered" else sample_directional_schedule
    out: list[Partition] = []
    for i in range(M):
        rng = np.random.default_rng(seed_sequence(seed, i))
        out.append(sampler(k, d, rng))
    return out


# ---------------------------------------------------------------------------
# Cell assignment
# ---------------------------------------------------------------------------


def directional_counts(schedule: DirectionalSchedule) -> tuple[int, ...]:
    """Per-coordinate split counts (k_1, ..., k_d) of a schedule; their sum
    is the schedule's depth k."""
    seq = schedule.sequence
    return tuple(int((seq == j).sum()) for j in range(1, schedule.dimension + 1))


def directional_cell_of(schedule: DirectionalSchedule, x) -> CellAddress:
    """Grid-cell address of ``x`` under a schedule's partition.

    The address depends on the schedule only through its per-coordinate
    split counts, so schedules that permute the same multiset of
    coordinates induce the same partition.
    """
    x = as_point(x, schedule.dimension)
    counts = directional_counts(schedule)
    indices = tuple(cell_index(x[j], counts[j]) for j in range(schedule.dimension))
    return CellAddress(indices=indices, counts=counts)


def centered_leaf_ids(tree: CenteredTree, X) -> np.ndarray:
    """Leaf ids (in {0, ..., 2**k - 1}) of the rows of ``X`` under a tree.

    Walks all points down the tree level by level; at a node labelled j
    whose cell spans (a, b] in coordinate j, a point descends left iff
    x_j <= (a+b)/2.  The leaf id's binary digits, most significant first,
    are the right-turn indicators of the root-to-leaf path.

    Midpoint splits make the walk equivalent to consuming, per coordinate,
    the bits of the point's full-depth dyadic index: after c splits of
    coordinate j the cell is the depth-c dyadic cell of x_j, and the next
    bit of ``cell_index(x_j, k) - 1`` says which half x_j falls in.  The
    implementation keeps one shift register per (point, coordinate), which
    turns each level into a handful of flat integer operations.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != tree.dimension:
        raise ValueError(f"expected shape (n, {tree.dimension}), got {X.shape}")
    n, k, d = X.shape[0], tree.depth, tree.dimension
    if k == 0 or n == 0:
        return np.zeros(n, dtype=np.int64)
    # Top bit (position k-1) of each register is the go-right indicator at
    # that coordinate's next split; consuming a bit shifts the register.
    bits = (cell_indices(X, k) - 1).astype(np.int64).ravel()
    keep = (1 << k) - 1
    labels0 = (tree.labels - 1).astype(np.int64)
    rows_d = np.arange(n) * d
    node = np.zeros(n, dtype=np.int64)
    top = k - 1
    for _ in range(k):
        at = rows_d + labels0[node]
        reg = bits[at]
        bits[at] = (reg << 1) & keep
        node = 2 * node + 1 + (reg >> top)
    return node - (2**k - 1)


def centered_leaf_of(tree: CenteredTree, x) -> int:
    """Leaf id of a single point under a centered tree."""
    x = as_point(x, tree.dimension)
    return int(centered_leaf_ids(tree, x[None, :])[0])


def directional_cell_ids(schedule: DirectionalSchedule, X) -> np.ndarray:
    """Flattened grid-cell ids (in {0, ..., 2**k - 1}) of the rows of ``X``
    under a schedule's dyadic-grid partition."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != schedule.dimension:
        raise ValueError(f"expected shape (n, {schedule.dimension}), got {X.shape}")
    counts = directional_counts(schedule)
    out = np.zeros(X.shape[0], dtype=np.int64)
    stride = 1
    for j, c in enumerate(counts):
        out += (cell_indices(X[:, j], c) - 1) * stride
        stride <<= c
    return out


def partition_cell_ids(partition: Partition, X) -> np.ndarray:
    """Cell ids of the rows of ``X`` under either partition flavor."""
    if isinstance(partition, CenteredTree):
        return centered_leaf_ids(partition, X)
    if isinstance(partition, DirectionalSchedule):
        return directional_cell_ids(partition, X)
    raise TypeError(f"not a partition: {type(partition).__name__}")


def partition_cell_count(partition: Partition) -> int:
    """Number of cells (2**k for both flavors)."""
    return 2**partition.depth


# ---------------------------------------------------------------------------
# Classic per-tree and finite-forest estimators
# ---------------------------------------------------------------------------


def cell_stats(partition: Partition, data: TrainingSet, x) -> CellStats:
    """Count and response sum of the training points sharing x's cell."""
    x = as_point(x, partition.dimension)
    if data.dimension != partition.dimension:
        raise ValueError("training set and partition dimensions differ")
    ids = partition_cell_ids(partition, data.points)
    xid = partition_cell_ids(partition, x[None, :])[0]
    mask = ids == xid
    count = int(mask.sum())
    return CellStats(count, float(data.responses[mask].sum()) if count else 0.0)


def tree_predict(partition: Partition, data: TrainingSet, x, return_empty: bool = False):
    """Single-tree regression estimate at ``x``: the mean response of the
    training points in x's cell.

    An empty cell yields 0.0; pass ``return_empty=True`` to additionally
    get the empty-cell flag as ``(value, empty)``.
    """
    stats = cell_stats(partition, data, x)
    empty = stats.count == 0
    value = 0.0 if empty else stats.response_sum / stats.count
    return (value, empty) if return_empty else value


def forest_predict(partitions: Sequence[Partition], data: TrainingSet, x) -> float:
    """Finite-forest estimate at ``x``: arithmetic mean of the M per-tree
    estimates."""
    if len(partitions) < 1:
        raise ValueError("need at least one partition")
    return sum(tree_predict(p, data, x) for p in partitions) / len(partitions)


# ---------------------------------------------------------------------------
# Plain-text serialization
# ---------------------------------------------------------------------------
# Format, one partition per stanza:
#   centered <k> <d>
#   <2**k - 1 space-separated labels>
# or
#   directional <k> <d>
#   <k space-separated labels>
# The label line is present (possibly empty) even when k = 0.


def serialize_partition(partition: Partition) -> str:
    """Render one partition in the documented plain-text form."""
    if isinstance(partition, CenteredTree):
        head = f"centered {partition.depth} {partition.dimension}"
        body = " ".join(str(int(v)) for v in partition.labels)
    elif isinstance(partition, DirectionalSchedule):
        head = f"directional {partition.depth} {partition.dimension}"
        body = " ".join(str(int(v)) for v in partition.sequence)
    else:
        raise TypeError(f"not a partition: {type(partition).__name__}")
    return f"{head}\n{body}\n"


def parse_partitions(text: str) -> list[Partition]:
    """Parse a concatenation of serialized partitions."""
    tokens = text.split()
    out: list[Partition] = []
    pos = 0
    while pos < len(tokens):
        flavor = tokens[pos]
        if flavor not in ALGORITHMS:
            raise ValueError(f"unknown partition flavor {flavor!r}")
        k, d = int(tokens[pos + 1]), int(tokens[pos + 2])
        n_labels = 2**k - 1 if flavor == "centered" else k
        labels = [int(t) for t in tokens[pos + 3 : pos + 3 + n_labels]]
        if len(labels) != n_labels:
            raise ValueError(f"truncated {flavor} partition: expected {n_labels} labels")
        if flavor == "centered":
            out.append(CenteredTree(depth=k, dimension=d, labels=np.array(labels, dtype=np.int64)))
        else:
            out.append(DirectionalSchedule(dimension=d, sequence=np.array(labels, dtype=np.int64)))
        pos += 3 + n_labels
    return out


def dump_partitions(partitions: Iterable[Partition], path) -> None:
    """Write partitions to ``path`` in the plain-text form."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        for p in partitions:
            fh.write(serialize_partition(p))


def load_partitions(path) -> list[Partition]:
    """Read partitions written by :func:`dump_partitions`."""
    with open(path, "r", encoding="ascii") as fh:
        return parse_partitions(fh.read())
