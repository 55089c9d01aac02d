"""Counter-based derivation of independent random streams from one master seed.

Every consumer of randomness in the package addresses its stream by an
integer path (for example ``(domain, rep, m_index, algorithm_index)``), so
any worker can reconstruct exactly the stream it needs without coordinating
with the others.  Results are therefore reproducible at any degree of
parallelism and in any execution order.
"""

from __future__ import annotations

import numpy as np

__all__ = ["seed_sequence", "substream", "derive_seed"]

# Domain tags keep unrelated substream families disjoint.
DOMAIN_DATASET = 0
DOMAIN_PARTITIONS = 1
DOMAIN_MC = 2
DOMAIN_PAIRS = 3


def seed_sequence(master_seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence for the substream addressed by ``path`` under the master seed."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(int(p) for p in path))


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream addressed by ``path`` under the master seed."""
    return np.random.default_rng(seed_sequence(master_seed, *path))


def derive_seed(master_seed: int, *path: int) -> int:
    """Single integer naming the substream at ``path``; feeding it back into
    :func:`substream` (with no path) reproduces an equivalent stream root."""
    return int(seed_sequence(master_seed, *path).generate_state(1, np.uint64)[0])
