"""Three independent verifiers that both partition flavors share one kernel.

The claim under test: for every depth k and every pair of points, the
probability of landing in the same cell is identical for centered trees
and directional schedules, and equals the closed-form multinomial kernel.
Each verifier takes a different route:

* an exact recursion on the connection probability (descend one level,
  rescale the surviving half-cells back to the unit cube);
* exhaustive enumeration of every labeled tree / every schedule at small
  depth, counting co-cell outcomes with exact integers;
* seeded Monte Carlo over freshly sampled partitions of either flavor.

Enumeration ratios are exact rationals; floating-point comparison happens
only against the closed form.  Capacity caps are enforced up front so
enumeration stays desk-scale.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import sqrt
from typing import Sequence

import numpy as np

from .forests import CenteredTree, centered_leaf_of
from .kerf import KernelSpec, centered_kernel
from .partition import as_point, cell_index, compositions, multinomial_int, same_cell_1d
from .streams import DOMAIN_MC, substream

__all__ = [
    "CapacityError",
    "ConnectionCount",
    "CENTERED_ENUM_LIMIT",
    "DIRECTIONAL_ENUM_LIMIT",
    "exact_connection_centered",
    "centered_kernel_exact",
    "enumerate_centered",
    "enumerate_directional",
    "mc_connection",
    "EquivalenceRow",
    "equivalence_report",
    "write_equivalence_csv",
    "EQUIVALENCE_CSV_HEADER",
    "EXACT_TOL",
]

# Largest labeled-tree count d**(2**k - 1) we will enumerate, and largest
# schedule count d**k; both refuse (rather than grind) above the cap.
CENTERED_ENUM_LIMIT = 128
DIRECTIONAL_ENUM_LIMIT = 10_000_000

# Tolerance for comparing exact quantities after float conversion.
EXACT_TOL = 1e-12

_ENUM_CHUNK = 1 << 20
_MC_CHUNK = 1 << 16


class CapacityError(ValueError):
    """An enumeration was refused because it exceeds the desk-scale caps."""


@dataclass(frozen=True)
class ConnectionCount:
    """Exact co-cell tally over an exhaustive family of partitions."""

    connected: int
    total: int

    def __post_init__(self) -> None:
        if not 0 <= self.connected <= self.total:
            raise ValueError("need 0 <= connected <= total")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.connected, self.total)


def exact_connection_centered(k: int, x, z, exact: bool = False):
    """Connection probability of ``x`` and ``z`` under a depth-k centered tree.

    Recursion: with probability 1/d the root splits coordinate j; the pair
    stays connected iff both points share the same half in that coordinate,
    and then the problem repeats at depth k-1 on the half-cell rescaled to
    the unit cube (t -> 2t - (half index)).  The rescaling is exact in
    binary floating point, so with ``exact=True`` the whole computation is
    carried out in rational arithmetic and the result is an exact Fraction.

    Parameters
    ----------
    k : int
        Tree depth, >= 0.
    x, z : array_like
        Points in the unit cube with equal dimension.
    exact : bool
        Return an exact ``Fraction`` instead of a float.
    """
    if k < 0:
        raise ValueError(f"need k >= 0, got {k}")
    x = as_point(x)
    z = as_point(z, x.size)
    d = x.size
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    inv_d = Fraction(1, d) if exact else 1.0 / d
    memo: dict = {}

    def rec(depth: int, xs: tuple, zs: tuple):
        if depth == 0:
            return one
        key = (depth, xs, zs)
        cached = memo.get(key)
        if cached is not None:
            return cached
        acc = zero
        for j in range(d):
            if same_cell_1d(xs[j], zs[j], 1):
                shift = cell_index(xs[j], 1) - 1
                xs2 = xs[:j] + (2.0 * xs[j] - shift,) + xs[j + 1 :]
                zs2 = zs[:j] + (2.0 * zs[j] - shift,) + zs[j + 1 :]
                acc = acc + rec(depth - 1, xs2, zs2)
        value = acc * inv_d
        memo[key] = value
        return value

    return rec(k, tuple(x), tuple(z))


def centered_kernel_exact(k: int, d: int, x, z) -> Fraction:
    """Closed-form kernel evaluated in exact rational arithmetic: the sum
    of integer multinomial coefficients over the connected compositions,
    divided by d**k."""
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    x = as_point(x, d)
    z = as_point(z, d)
    num = 0
    for comp in compositions(k, d):
        if all(same_cell_1d(x[j], z[j], comp[j]) for j in range(d)):
            num += multinomial_int(comp)
    return Fraction(num, d**k)


def enumerate_centered(k: int, x, z) -> ConnectionCount:
    """Co-cell tally of ``x`` and ``z`` over ALL labeled centered trees of
    depth k (each of the d**(2**k - 1) label assignments once).

    Every labeled tree is equally likely under independent uniform node
    labels, so connected/total is the exact connection probability.
    Refuses with :class:`CapacityError` above ``CENTERED_ENUM_LIMIT``.
    """
    if k < 0:
        raise ValueError(f"need k >= 0, got {k}")
    x = as_point(x)
    z = as_point(z, x.size)
    d = x.size
    n_nodes = 2**k - 1
    total = d**n_nodes
    if total > CENTERED_ENUM_LIMIT:
        raise CapacityError(
            f"{total} labeled trees exceed the enumeration cap of {CENTERED_ENUM_LIMIT}"
        )
    connected = 0
    for labels in product(range(1, d + 1), repeat=n_nodes):
        tree = CenteredTree(depth=k, dimension=d, labels=np.array(labels, dtype=np.int64))
        connected += int(centered_leaf_of(tree, x) == centered_leaf_of(tree, z))
    return ConnectionCount(connected=connected, total=total)


def enumerate_directional(k: int, d: int, x, z) -> ConnectionCount:
    """Co-cell tally of ``x`` and ``z`` over ALL d**k directional schedules.

    Each schedule is tested individually: its per-coordinate split counts
    define a dyadic grid, and the pair is connected iff they share every
    per-coordinate dyadic cell.  Refuses above ``DIRECTIONAL_ENUM_LIMIT``.
    """
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    x = as_point(x, d)
    z = as_point(z, d)
    total = d**k
    if total > DIRECTIONAL_ENUM_LIMIT:
        raise CapacityError(
            f"{total} schedules exceed the enumeration cap of {DIRECTIONAL_ENUM_LIMIT}"
        )
    # Co-cell indicator per coordinate and split count, evaluated directly.
    same = np.array(
        [[same_cell_1d(x[j], z[j], c) for c in range(k + 1)] for j in range(d)], dtype=bool
    )
    connected = 0
    for start in range(0, total, _ENUM_CHUNK):
        ids = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.int64)
        rows = np.arange(ids.size)
        counts = np.zeros((ids.size, d), dtype=np.int64)
        rem = ids
        for _ in range(k):
            rem, digit = np.divmod(rem, d)
            counts[rows, digit] += 1
        ok = np.ones(ids.size, dtype=bool)
        for j in range(d):
            ok &= same[j, counts[:, j]]
        connected += int(ok.sum())
    return ConnectionCount(connected=connected, total=total)


def _parity_table(point: np.ndarray, k: int) -> np.ndarray:
    """(d, k+1) table: entry [j, c] is True iff the point's depth-c dyadic
    cell in coordinate j is the left child of its depth-(c-1) cell."""
    d = point.size
    table = np.zeros((d, k + 1), dtype=bool)
    for j in range(d):
        for c in range(1, k + 1):
            table[j, c] = cell_index(point[j], c) % 2 == 1
    return table


def _mc_centered(k, d, x, z, M, rng) -> int:
    left_x = _parity_table(x, k)
    left_z = _parity_table(z, k)
    n_nodes = 2**k - 1
    connected = 0
    remaining = M
    while remaining > 0:
        m = min(_MC_CHUNK, remaining)
        labels = rng.integers(0, d, size=(m, n_nodes))
        rows = np.arange(m)
        node_x = np.zeros(m, dtype=np.int64)
        node_z = np.zeros(m, dtype=np.int64)
        cnt_x = np.zeros((m, d), dtype=np.int64)
        cnt_z = np.zeros((m, d), dtype=np.int64)
        for _ in range(k):
            jx = labels[rows, node_x]
            cx = cnt_x[rows, jx] + 1
            cnt_x[rows, jx] = cx
            node_x = 2 * node_x + np.where(left_x[jx, cx], 1, 2)
            jz = labels[rows, node_z]
            cz = cnt_z[rows, jz] + 1
            cnt_z[rows, jz] = cz
            node_z = 2 * node_z + np.where(left_z[jz, cz], 1, 2)
        connected += int((node_x == node_z).sum())
        remaining -= m
    return connected


def _mc_directional(k, d, x, z, M, rng) -> int:
    same = np.array(
        [[same_cell_1d(x[j], z[j], c) for c in range(k + 1)] for j in range(d)], dtype=bool
    )
    connected = 0
    remaining = M
    while remaining > 0:
        m = min(_MC_CHUNK, remaining)
        schedules = rng.integers(0, d, size=(m, k))
        ok = np.ones(m, dtype=bool)
        for j in range(d):
            ok &= same[j, (schedules == j).sum(axis=1)]
        connected += int(ok.sum())
        remaining -= m
    return connected


def mc_connection(flavor: str, k: int, d: int, x, z, M: int, rng: np.random.Generator) -> float:
    """Monte Carlo co-cell frequency of ``x`` and ``z`` over M freshly
    sampled partitions of the given flavor.  Deterministic given the
    generator state."""
    if flavor not in ("centered", "directional"):
        raise ValueError(f"flavor must be 'centered' or 'directional', got {flavor!r}")
    if M < 1:
        raise ValueError(f"need M >= 1, got {M}")
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    x = as_point(x, d)
    z = as_point(z, d)
    count = (_mc_centered if flavor == "centered" else _mc_directional)(k, d, x, z, M, rng)
    return count / M


# ---------------------------------------------------------------------------
# Structured report
# ---------------------------------------------------------------------------

EQUIVALENCE_CSV_HEADER = [
    "d",
    "k",
    "x",
    "z",
    "kernel_closed_form",
    "oracle_exact",
    "enum_centered",
    "enum_directional",
    "mc_centered",
    "mc_directional",
    "M",
    "seed",
    "pass",
]


@dataclass(frozen=True)
class EquivalenceRow:
    """One (pair, k, d) instance with all five estimates and the verdict.

    Enumeration fields are None when the instance exceeds the capacity
    caps; such rows are skipped for those columns, not failed.
    """

    d: int
    k: int
    x: tuple[float, ...]
    z: tuple[float, ...]
    kernel_closed_form: float
    oracle_exact: float
    enum_centered: float | None
    enum_directional: float | None
    mc_centered: float
    mc_directional: float
    M: int
    seed: int
    passed: bool


def _row_passes(kernel, oracle, enum_c, enum_d, mc_c, mc_d, M) -> bool:
    if abs(kernel - oracle) > EXACT_TOL:
        return False
    for enum_value in (enum_c, enum_d):
        if enum_value is not None and abs(enum_value - kernel) > EXACT_TOL:
            return False
    band = 5.0 * sqrt(oracle * (1.0 - oracle) / M) + 1e-6
    return abs(mc_c - oracle) <= band and abs(mc_d - oracle) <= band


def equivalence_report(
    pairs: Sequence[tuple],
    k_values: Sequence[int],
    d_values: Sequence[int],
    mc_samples: int,
    seed: int,
) -> list[EquivalenceRow]:
    """Tabulate all five connection estimates for every (d, pair, k) instance.

    Pairs must carry at least max(d_values) coordinates; each instance uses
    the first d of them.  Monte Carlo substreams are derived per instance
    and flavor from ``seed``, so the report is reproducible at any degree
    of parallelism.  Capacity overruns in the enumerations become per-row
    skips (None fields), never a global failure.
    """
    if not pairs:
        raise ValueError("need at least one pair")
    if mc_samples < 1:
        raise ValueError("need mc_samples >= 1")
    rows = []
    for d in d_values:
        for pair_idx, (px, pz) in enumerate(pairs):
            x = as_point(np.asarray(px, dtype=float)[:d], d)
            z = as_point(np.asarray(pz, dtype=float)[:d], d)
            for k in k_values:
                kernel = centered_kernel(KernelSpec(depth=k, dimension=d), x, z)
                oracle = exact_connection_centered(k, x, z)
                try:
                    enum_c = float(enumerate_centered(k, x, z).fraction)
                except CapacityError:
                    enum_c = None
                try:
                    enum_d = float(enumerate_directional(k, d, x, z).fraction)
                except CapacityError:
                    enum_d = None
                mc_c = mc_connection(
                    "centered", k, d, x, z, mc_samples,
                    substream(seed, DOMAIN_MC, d, k, pair_idx, 0),
                )
                mc_d = mc_connection(
                    "directional", k, d, x, z, mc_samples,
                    substream(seed, DOMAIN_MC, d, k, pair_idx, 1),
                )
                rows.append(
                    EquivalenceRow(
                        d=d,
                        k=k,
                        x=tuple(float(v) for v in x),
                        z=tuple(float(v) for v in z),
                        kernel_closed_form=kernel,
                        oracle_exact=oracle,
                        enum_centered=enum_c,
                        enum_directional=enum_d,
                        mc_centered=mc_c,
                        mc_directional=mc_d,
                        M=mc_samples,
                        seed=seed,
                        passed=_row_passes(kernel, oracle, enum_c, enum_d, mc_c, mc_d, mc_samples),
                    )
                )
    return rows


def write_equivalence_csv(rows: Sequence[EquivalenceRow], path) -> None:
    """Serialize report rows with the documented column set."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EQUIVALENCE_CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.d,
                    r.k,
                    ";".join(repr(v) for v in r.x),
                    ";".join(repr(v) for v in r.z),
                    repr(r.kernel_closed_form),
                    repr(r.oracle_exact),
                    "" if r.enum_centered is None else repr(r.enum_centered),
                    "" if r.enum_directional is None else repr(r.enum_directional),
                    repr(r.mc_centered),
                    repr(r.mc_directional),
                    r.M,
                    r.seed,
                    "true" if r.passed else "false",
                ]
            )
