import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kerflab.forests import (
    CenteredTree,
    DirectionalSchedule,
    TrainingSet,
    sample_partitions,
)
from kerflab.kerf import (
    KernelSpec,
    centered_kernel,
    kerf_predict_finite,
    kerf_predict_finite_batch,
    kerf_predict_infinite,
    proximity_finite,
)
from kerflab.partition import cell_indices

PAIR = ((0.1, 0.6), (0.2, 0.4))  # worked pair with known kernel values


class TestProximity:
    def test_self_proximity_is_one(self):
        parts = sample_partitions("centered", 7, 3, 2, 11)
        assert proximity_finite(parts, (0.3, 0.8), (0.3, 0.8)) == 1.0

    def test_disjoint_single_tree(self):
        tree = CenteredTree(1, 1, np.array([1]))
        assert proximity_finite([tree], (0.2,), (0.8,)) == 0.0

    def test_three_of_four(self):
        # coordinate 1 keeps the pair together, coordinate 2 separates it
        one = DirectionalSchedule(2, np.array([1]))
        two = DirectionalSchedule(2, np.array([2]))
        parts = [one, one, one, two]
        assert proximity_finite(parts, (0.1, 0.1), (0.2, 0.9)) == 0.75

    def test_needs_partitions(self):
        with pytest.raises(ValueError):
            proximity_finite([], (0.1,), (0.2,))


class TestCenteredKernel:
    def test_depth_zero(self):
        assert centered_kernel(KernelSpec(0, 2), *PAIR) == 1.0

    def test_worked_pair(self):
        assert centered_kernel(KernelSpec(1, 2), *PAIR) == 0.5
        assert centered_kernel(KernelSpec(2, 2), *PAIR) == 0.25

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            centered_kernel(KernelSpec(1, 3), *PAIR)

    def test_kernel_spec_validation(self):
        with pytest.raises(ValueError):
            KernelSpec(-1, 2)
        with pytest.raises(ValueError):
            KernelSpec(1, 2, flavor="uniform")

    @given(
        data=st.data(),
        k=st.integers(min_value=0, max_value=8),
        d=st.integers(min_value=1, max_value=4),
    )
    @settings(max_examples=200)
    def test_symmetry_normalization_range(self, data, k, d):
        unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
        x = data.draw(st.lists(unit, min_size=d, max_size=d))
        z = data.draw(st.lists(unit, min_size=d, max_size=d))
        spec = KernelSpec(k, d)
        v = centered_kernel(spec, x, z)
        assert v == centered_kernel(spec, z, x)
        assert 0.0 <= v <= 1.0
        assert centered_kernel(spec, x, x) == 1.0

    @given(
        data=st.data(),
        k=st.integers(min_value=0, max_value=8),
        d=st.integers(min_value=1, max_value=4),
    )
    @settings(max_examples=200)
    def test_depth_monotone(self, data, k, d):
        unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
        x = data.draw(st.lists(unit, min_size=d, max_size=d))
        z = data.draw(st.lists(unit, min_size=d, max_size=d))
        assert centered_kernel(KernelSpec(k + 1, d), x, z) <= centered_kernel(
            KernelSpec(k, d), x, z
        )


class TestFiniteKerf:
    def test_single_point_single_tree(self):
        data = TrainingSet(points=np.array([[0.2, 0.2]]), responses=np.array([2.5]))
        tree = CenteredTree(1, 2, np.array([1]))
        assert kerf_predict_finite([tree], data, (0.3, 0.9)) == 2.5

    def test_constant_responses(self):
        rng = np.random.default_rng(2)
        data = TrainingSet(points=rng.uniform(size=(30, 2)), responses=np.full(30, 4.2))
        parts = sample_partitions("centered", 6, 3, 2, 7)
        value, empty = kerf_predict_finite(parts, data, (0.4, 0.3), return_empty=True)
        assert not empty
        assert value == pytest.approx(4.2, abs=1e-12)

    def test_zero_denominator_flag(self):
        data = TrainingSet(points=np.array([[0.1, 0.1]]), responses=np.array([9.0]))
        tree = CenteredTree(1, 2, np.array([1]))
        value, empty = kerf_predict_finite([tree], data, (0.9, 0.9), return_empty=True)
        assert value == 0.0 and empty

    def test_aggregation_equals_kernel_form(self):
        # the two routes of the weighted-mean identity agree to 1e-12
        rng = np.random.default_rng(20)
        data = TrainingSet(
            points=rng.uniform(size=(20, 2)), responses=rng.normal(size=20)
        )
        parts = sample_partitions("centered", 5, 3, 2, 21)
        X = rng.uniform(size=(15, 2))
        agg, empty_a = kerf_predict_finite_batch(parts, data, X, method="aggregation")
        ker, empty_k = kerf_predict_finite_batch(parts, data, X, method="kernel")
        assert np.array_equal(empty_a, empty_k)
        assert np.max(np.abs(agg - ker)) <= 1e-12

    def test_matches_proximity_weighted_oracle(self):
        # independent route: assemble the estimate from per-point proximities
        rng = np.random.default_rng(23)
        data = TrainingSet(
            points=rng.uniform(size=(12, 2)), responses=rng.normal(size=12)
        )
        parts = sample_partitions("directional", 4, 3, 2, 3)
        x = rng.uniform(size=2)
        weights = np.array([proximity_finite(parts, x, xi) for xi in data.points])
        expected = float(weights @ data.responses / weights.sum())
        assert kerf_predict_finite(parts, data, x) == pytest.approx(expected, abs=1e-12)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(31)
        data = TrainingSet(points=rng.uniform(size=(25, 3)), responses=rng.normal(size=25))
        parts = sample_partitions("centered", 3, 2, 3, 5) + sample_partitions(
            "directional", 3, 2, 3, 6
        )
        X = rng.uniform(size=(10, 3))
        values, empty = kerf_predict_finite_batch(parts, data, X)
        for i, x in enumerate(X):
            v, e = kerf_predict_finite(parts, data, x, return_empty=True)
            assert v == values[i] and e == empty[i]

    def test_method_validation(self):
        data = TrainingSet(points=np.array([[0.5, 0.5]]), responses=np.array([1.0]))
        tree = CenteredTree(0, 2, np.array([], dtype=int))
        with pytest.raises(ValueError):
            kerf_predict_finite([tree], data, (0.5, 0.5), method="magic")
        with pytest.raises(ValueError):
            kerf_predict_finite([], data, (0.5, 0.5))


class TestInfiniteKerf:
    def test_depth_zero_is_global_mean(self):
        rng = np.random.default_rng(40)
        data = TrainingSet(points=rng.uniform(size=(17, 2)), responses=rng.normal(size=17))
        got = kerf_predict_infinite(KernelSpec(0, 2), data, (0.5, 0.5))
        assert got == pytest.approx(float(data.responses.mean()), abs=1e-12)

    def test_isolated_match_dominates(self):
        # the only point with positive kernel weight determines the value
        data = TrainingSet(points=np.array([[0.1], [0.9], [0.8]]), responses=np.array([7.0, 1.0, 2.0]))
        got = kerf_predict_infinite(KernelSpec(1, 1), data, (0.1,))
        assert got == 7.0

    def test_zero_denominator_flag(self):
        data = TrainingSet(points=np.array([[0.9]]), responses=np.array([3.0]))
        value, empty = kerf_predict_infinite(KernelSpec(1, 1), data, (0.1,), return_empty=True)
        assert value == 0.0 and empty


def _finite_kerf_mc(data, x, k, M, rng, chunk=1 << 14):
    """Finite KeRF at x over M freshly sampled centered trees, walked in
    vectorized chunks, plus a delta-method standard error of the ratio."""
    pts = np.vstack([data.points, x[None, :]])
    n, d = data.points.shape
    regs0 = (cell_indices(pts, k) - 1).astype(np.int64)
    keep = (1 << k) - 1
    top = k - 1
    s_a = s_b = s_aa = s_bb = s_ab = 0.0
    done = 0
    while done < M:
        m = min(chunk, M - done)
        labels = rng.integers(0, d, size=(m, 2**k - 1))
        rows = np.arange(m)
        leaves = np.empty((n + 1, m), dtype=np.int64)
        for p in range(n + 1):
            reg = np.broadcast_to(regs0[p], (m, d)).copy()
            node = np.zeros(m, dtype=np.int64)
            for _ in range(k):
                j = labels[rows, node]
                v = reg[rows, j]
                reg[rows, j] = (v << 1) & keep
                node = 2 * node + 1 + (v >> top)
            leaves[p] = node
        co = leaves[:n] == leaves[n]
        b = co.sum(axis=0).astype(float)
        a = data.responses @ co
        s_a += a.sum()
        s_b += b.sum()
        s_aa += float(a @ a)
        s_bb += float(b @ b)
        s_ab += float(a @ b)
        done += m
    a_bar, b_bar = s_a / M, s_b / M
    ratio = a_bar / b_bar
    var_a = s_aa / M - a_bar**2
    var_b = s_bb / M - b_bar**2
    cov = s_ab / M - a_bar * b_bar
    se = math.sqrt(max(0.0, var_a - 2 * ratio * cov + ratio**2 * var_b) / M) / b_bar
    return ratio, se


class TestMonteCarloConsistency:
    def test_infinite_kerf_is_the_many_tree_limit(self):
        # finite KeRF over 10**6 sampled trees within 3 MC standard errors
        rng = np.random.default_rng(50)
        data = TrainingSet(points=rng.uniform(size=(50, 2)), responses=rng.normal(size=50))
        x = rng.uniform(size=2)
        infinite = kerf_predict_infinite(KernelSpec(4, 2), data, x)
        finite, se = _finite_kerf_mc(data, x, k=4, M=10**6, rng=np.random.default_rng(51))
        assert abs(finite - infinite) <= 3 * se + 1e-9

    @pytest.mark.parametrize("flavor", ["centered", "directional"])
    def test_proximity_converges_to_kernel(self, flavor):
        # library-object route: proximity over sampled partitions vs closed form
        M = 20_000
        x, z = np.array([0.23, 0.61]), np.array([0.27, 0.52])
        p = centered_kernel(KernelSpec(3, 2), x, z)
        parts = sample_partitions(flavor, M, 3, 2, 1234)
        est = proximity_finite(parts, x, z)
        band = 5 * math.sqrt(p * (1 - p) / M) + 1e-6
        assert abs(est - p) <= band
