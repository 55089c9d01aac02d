"""End-to-end error benchmark comparing the two KeRF flavors.

Synthetic regression data on the unit square, an 80/20 split, and a sweep
over forest sizes M: for every repetition a fresh dataset is drawn, and
for every (M, algorithm) cell a fresh forest of that flavor is built and
scored by squared error on the held-out points.  Within one repetition
both algorithms see the identical data and split, so their error
difference reflects only the partition scheme.

Every random draw is addressed by a counter path under the master seed
(see :mod:`kerflab.streams`), making the full record set a pure function
of the configuration regardless of how many workers execute the sweep.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .forests import ALGORITHMS, TrainingSet, sample_partitions
from .kerf import kerf_predict_finite_batch
from .streams import DOMAIN_DATASET, DOMAIN_PARTITIONS, derive_seed, substream

__all__ = [
    "TARGET_KINDS",
    "DEFAULT_NOISE_VARIANCE",
    "TargetFunction",
    "make_target",
    "ExperimentConfig",
    "ExperimentRecord",
    "SummaryRow",
    "generate_dataset",
    "train_test_split",
    "run_sweep",
    "summarize",
    "emit_outputs",
    "RECORDS_CSV_HEADER",
    "SUMMARY_CSV_HEADER",
]

TARGET_KINDS = ("linear", "quadratic", "exp2d")

# Default noise variance for the noisy targets; the exponential target
# carries no noise term.
DEFAULT_NOISE_VARIANCE = 0.5

RECORDS_CSV_HEADER = [
    "target", "algorithm", "n_train", "n_test", "d", "k", "M", "rep",
    "seed", "l2_sum", "mse", "empty_predictions",
]
SUMMARY_CSV_HEADER = ["target", "algorithm", "M", "mean_mse", "std_mse", "reps"]


@dataclass(frozen=True)
class TargetFunction:
    """A regression target: its mean function and additive noise variance."""

    kind: str
    noise_variance: float

    def __post_init__(self) -> None:
        if self.kind not in TARGET_KINDS:
            raise ValueError(f"kind must be one of {TARGET_KINDS}, got {self.kind!r}")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be non-negative")
        if self.kind == "exp2d" and self.noise_variance != 0.0:
            raise ValueError("the exp2d target carries no noise term")

    def mean(self, X) -> np.ndarray:
        """Noise-free target values at the rows of ``X`` (uses the first
        two coordinates)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] < 2:
            raise ValueError("targets are defined on points with d >= 2")
        x1, x2 = X[:, 0], X[:, 1]
        if self.kind == "linear":
            return x1 + x2
        if self.kind == "quadratic":
            return x1**2 + x2**2
        return 2.0 * x1 + np.exp(-(x2**2))


def make_target(kind: str, noise_variance: float | None = None) -> TargetFunction:
    """Target by name with its default noise variance (0 for exp2d)."""
    if noise_variance is None:
        noise_variance = 0.0 if kind == "exp2d" else DEFAULT_NOISE_VARIANCE
    return TargetFunction(kind=kind, noise_variance=noise_variance)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines one sweep; the record set is a pure function
    of this object."""

    target: TargetFunction
    n: int = 1500
    d: int = 2
    k: int = 11
    m_values: tuple[int, ...] = (1, 50, 100, 200, 300, 400, 500)
    reps: int = 30
    test_fraction: float = 0.2
    master_seed: int = 42
    algorithms: tuple[str, ...] = ALGORITHMS

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("need n >= 2")
        if self.d < 2:
            raise ValueError("the built-in targets need d >= 2")
        if self.k < 0:
            raise ValueError("need k >= 0")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test fraction must lie strictly between 0 and 1")
        if self.reps < 1:
            raise ValueError("need reps >= 1")
        ms = tuple(int(m) for m in self.m_values)
        if not ms or any(b <= a for a, b in zip(ms, ms[1:])) or ms[0] < 1:
            raise ValueError("m_values must be non-empty, positive and strictly increasing")
        object.__setattr__(self, "m_values", ms)
        algs = tuple(self.algorithms)
        if not algs or any(a not in ALGORITHMS for a in algs) or len(set(algs)) != len(algs):
            raise ValueError(f"algorithms must be a non-empty subset of {ALGORITHMS}")
        object.__setattr__(self, "algorithms", algs)


@dataclass(frozen=True)
class ExperimentRecord:
    """One (target, algorithm, M, repetition) measurement."""

    target: str
    algorithm: str
    n_train: int
    n_test: int
    d: int
    k: int
    M: int
    rep: int
    seed: int
    l2_sum: float
    mse: float
    empty_predictions: int

    def __post_init__(self) -> None:
        if abs(self.mse * self.n_test - self.l2_sum) > 1e-9 * max(1.0, abs(self.l2_sum)):
            raise ValueError("mse and l2_sum are inconsistent")


@dataclass(frozen=True)
class SummaryRow:
    """Across-repetition mean and standard deviation of mse for one
    (target, algorithm, M) group.  ``low_replication`` flags groups with a
    single repetition, where the std is reported as 0."""

    target: str
    algorithm: str
    M: int
    mean_mse: float
    std_mse: float
    reps: int
    low_replication: bool


# ---------------------------------------------------------------------------
# Data generation
# ---------------------------------------------------------------------------


def generate_dataset(
    target: TargetFunction, n: int, d: int, rng: np.random.Generator
) -> TrainingSet:
    """Draw n points uniformly on [0, 1]^d and evaluate the target with
    additive centered Gaussian noise of the configured variance."""
    if n < 1:
        raise ValueError("need n >= 1")
    if d < 2:
        raise ValueError("the built-in targets need d >= 2")
    X = rng.uniform(size=(n, d))
    y = target.mean(X) + rng.normal(0.0, math.sqrt(target.noise_variance), size=n)
    return TrainingSet(points=X, responses=y)


def train_test_split(
    data: TrainingSet, test_fraction: float, rng: np.random.Generator
) -> tuple[TrainingSet, TrainingSet]:
    """Uniformly random disjoint split into ceil(n*(1-f)) training and
    n - ceil(n*(1-f)) test points."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test fraction must lie strictly between 0 and 1")
    n = data.n
    # round() guards the ceiling against float fuzz in n*(1-f), e.g. 1500*0.8.
    n_train = math.ceil(round(n * (1.0 - test_fraction), 9))
    if n_train < 1 or n_train >= n:
        raise ValueError(f"degenerate split: {n_train} train / {n - n_train} test")
    perm = rng.permutation(n)
    tr, te = perm[:n_train], perm[n_train:]
    return (
        TrainingSet(points=data.points[tr], responses=data.responses[tr]),
        TrainingSet(points=data.points[te], responses=data.responses[te]),
    )


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


def _rep_data(config: ExperimentConfig, rep: int) -> tuple[TrainingSet, TrainingSet]:
    """Dataset and split for one repetition; identical across all (M,
    algorithm) cells of the repetition by construction."""
    rng = substream(config.master_seed, DOMAIN_DATASET, rep)
    data = generate_dataset(config.target, config.n, config.d, rng)
    return train_test_split(data, config.test_fraction, rng)


def cell_seed(config: ExperimentConfig, rep: int, m_index: int, alg_index: int) -> int:
    """Partition-sampling seed of one sweep cell; recorded in its record,
    so a cell's forest can be rebuilt from the CSV alone."""
    return derive_seed(config.master_seed, DOMAIN_PARTITIONS, rep, m_index, alg_index)


def _run_cell(args: tuple) -> ExperimentRecord:
    config, rep, m_index, alg_index = args
    M = config.m_values[m_index]
    algorithm = config.algorithms[alg_index]
    train, test = _rep_data(config, rep)
    seed = cell_seed(config, rep, m_index, alg_index)
    partitions = sample_partitions(algorithm, M, config.k, config.d, seed)
    predictions, empty = kerf_predict_finite_batch(partitions, train, test.points)
    residuals = predictions - test.responses
    l2_sum = float(residuals @ residuals)
    return ExperimentRecord(
        target=config.target.kind,
        algorithm=algorithm,
        n_train=train.n,
        n_test=test.n,
        d=config.d,
        k=config.k,
        M=M,
        rep=rep,
        seed=seed,
        l2_sum=l2_sum,
        mse=l2_sum / test.n,
        empty_predictions=int(empty.sum()),
    )


def run_sweep(config: ExperimentConfig, jobs: int = 1) -> list[ExperimentRecord]:
    """Run every (rep, M, algorithm) cell of the sweep.

    Cells are independent jobs; with ``jobs > 1`` they run in a process
    pool.  Records come back in cell order (rep-major, then M, then
    algorithm) and are identical at any degree of parallelism.
    """
    if jobs < 1:
        raise ValueError("need jobs >= 1")
    cells = [
        (config, rep, mi, ai)
        for rep in range(config.reps)
        for mi in range(len(config.m_values))
        for ai in range(len(config.algorithms))
    ]
    if jobs == 1:
        return [_run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_cell, cells, chunksize=max(1, len(cells) // (4 * jobs))))


def summarize(records: Sequence[ExperimentRecord]) -> list[SummaryRow]:
    """Group records by (target, algorithm, M) and report the mean and the
    across-repetition standard deviation (n-1 denominator) of mse.

    Rows come back sorted by (target, algorithm, M).
    """
    if not records:
        raise ValueError("need at least one record")
    groups: dict[tuple, list[float]] = {}
    for r in records:
        groups.setdefault((r.target, r.algorithm, r.M), []).append(r.mse)
    rows = []
    for (target, algorithm, M), mses in sorted(groups.items()):
        arr = np.array(mses)
        rows.append(
            SummaryRow(
                target=target,
                algorithm=algorithm,
                M=M,
                mean_mse=float(arr.mean()),
                std_mse=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                reps=int(arr.size),
                low_replication=arr.size < 2,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def emit_outputs(
    records: Sequence[ExperimentRecord],
    summaries: Sequence[SummaryRow],
    out_dir,
    render_plots: bool = False,
) -> list[Path]:
    """Write records.csv, summary.csv and one plot-data file per (target,
    metric) under ``out_dir``; optionally render error/std line charts.

    Output bytes are a pure function of the inputs (full-precision float
    formatting, fixed newline), so identical runs yield identical files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    records_path = out_dir / "records.csv"
    _write_csv(
        records_path,
        RECORDS_CSV_HEADER,
        (
            [
                r.target, r.algorithm, r.n_train, r.n_test, r.d, r.k, r.M, r.rep,
                r.seed, _fmt(r.l2_sum), _fmt(r.mse), r.empty_predictions,
            ]
            for r in records
        ),
    )
    written.append(records_path)

    summary_path = out_dir / "summary.csv"
    _write_csv(
        summary_path,
        SUMMARY_CSV_HEADER,
        ([s.target, s.algorithm, s.M, _fmt(s.mean_mse), _fmt(s.std_mse), s.reps] for s in summaries),
    )
    written.append(summary_path)

    by_target: dict[str, dict[int, dict[str, SummaryRow]]] = {}
    for s in summaries:
        by_target.setdefault(s.target, {}).setdefault(s.M, {})[s.algorithm] = s
    for target, by_m in sorted(by_target.items()):
        for metric in ("mean_mse", "std_mse"):
            rows = []
            for M in sorted(by_m):
                cen = by_m[M].get("centered")
                dire = by_m[M].get("directional")
                rows.append(
                    [
                        M,
                        "" if cen is None else _fmt(getattr(cen, metric)),
                        "" if dire is None else _fmt(getattr(dire, metric)),
                    ]
                )
            path = out_dir / f"plot_{target}_{metric}.csv"
            _write_csv(path, ["M", "centered_value", "directional_value"], rows)
            written.append(path)

    if render_plots:
        written.extend(_render_plots(by_target, out_dir))
    return written


def _render_plots(by_target, out_dir: Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    label = {"mean_mse": "mean squared error", "std_mse": "std of squared error"}
    for target, by_m in sorted(by_target.items()):
        ms = sorted(by_m)
        fig, axes = plt.subplots(1, 2, figsize=(11, 4))
        for ax, metric in zip(axes, ("mean_mse", "std_mse")):
            for algorithm in ALGORITHMS:
                values = [
                    getattr(by_m[M][algorithm], metric) for M in ms if algorithm in by_m[M]
                ]
                if values:
                    ax.plot(ms[: len(values)], values, marker="o", label=algorithm)
            ax.set_xlabel("number of trees M")
            ax.set_ylabel(label[metric])
            ax.legend()
        fig.suptitle(f"target: {target}")
        fig.tight_layout()
        path = out_dir / f"figure_{target}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
