"""Purely random forests, their KeRF kernel estimators, and an
equivalence-verification lab for the shared connection kernel, plus an
error-benchmark harness comparing the centered and directional flavors."""

from .partition import (
    CellAddress,
    as_point,
    cell_index,
    cell_indices,
    same_cell_1d,
    match_depth,
    compositions,
    composition_count,
    multinomial_int,
    multinomial_weight,
)
from .forests import (
    ALGORITHMS,
    CenteredTree,
    DirectionalSchedule,
    TrainingSet,
    CellStats,
    sample_centered_tree,
    sample_directional_schedule,
    sample_partitions,
    directional_counts,
    directional_cell_of,
    centered_leaf_of,
    centered_leaf_ids,
    directional_cell_ids,
    partition_cell_ids,
    cell_stats,
    tree_predict,
    forest_predict,
    serialize_partition,
    parse_partitions,
    dump_partitions,
    load_partitions,
)
from .kerf import (
    KernelSpec,
    proximity_finite,
    centered_kernel,
    kerf_predict_finite,
    kerf_predict_finite_batch,
    kerf_predict_infinite,
)
from .equivalence import (
    CapacityError,
    ConnectionCount,
    exact_connection_centered,
    centered_kernel_exact,
    enumerate_centered,
    enumerate_directional,
    mc_connection,
    EquivalenceRow,
    equivalence_report,
    write_equivalence_csv,
)
from .experiment import (
    TargetFunction,
    make_target,
    ExperimentConfig,
    ExperimentRecord,
    SummaryRow,
    generate_dataset,
    train_test_split,
    run_sweep,
    summarize,
    emit_outputs,
)
from .streams import seed_sequence, substream, derive_seed

__version__ = "0.1.0"
