"""Random streams, sharded tallies, Wilson intervals, and the estimators."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whirly_lab import (
    DepthMismatchError,
    LevelVector,
    RngStream,
    acted_set,
    as_generator,
    boolean_combine,
    default_block_size,
    disk_mass,
    disk_product,
    estimate_conditional_measure,
    estimate_joint_events,
    estimate_measure,
    make_gsk,
    tally_blocks,
    wilson_interval,
)


class TestRngStream:
    def test_validation(self):
        with pytest.raises(ValueError):
            RngStream(-1)
        with pytest.raises(ValueError):
            RngStream(1 << 64)
        with pytest.raises(ValueError):
            RngStream(0, -2)

    def test_generator_is_repeatable(self):
        a = RngStream(5, 3).generator().standard_normal(8)
        b = RngStream(5, 3).generator().standard_normal(8)
        np.testing.assert_array_equal(a, b)

    def test_blocks_are_distinct_and_stable(self):
        s = RngStream(5)
        a0 = s.block(0).standard_normal(8)
        a1 = s.block(1).standard_normal(8)
        assert np.max(np.abs(a0 - a1)) > 1e-3
        np.testing.assert_array_equal(a0, RngStream(5).block(0).standard_normal(8))

    def test_child_ids_nest_without_collision(self):
        root = RngStream(1, 0)
        first = {root.child(i).stream_id for i in range(63)}
        assert len(first) == 63
        grand = {root.child(0).child(i).stream_id for i in range(63)}
        assert not (first & grand)

    def test_child_index_bounds(self):
        with pytest.raises(ValueError):
            RngStream(1).child(63)
        with pytest.raises(ValueError):
            RngStream(1).child(-1)

    def test_as_generator_accepts_both(self):
        assert isinstance(as_generator(RngStream(2)), np.random.Generator)
        gen = RngStream(2).generator()
        assert as_generator(gen) is gen
        with pytest.raises(TypeError):
            as_generator(42)


class TestTallyBlocks:
    @staticmethod
    def _counting_fn(gen: np.random.Generator, count: int) -> np.ndarray:
        draws = gen.standard_normal(count)
        return np.array([count, int(np.count_nonzero(draws > 0))], dtype=np.int64)

    def test_counts_every_sample_once(self):
        out = tally_blocks(self._counting_fn, 10_001, RngStream(71), block_size=1000)
        assert out[0] == 10_001

    def test_worker_count_does_not_change_sums(self):
        serial = tally_blocks(self._counting_fn, 50_000, RngStream(72), block_size=4096, workers=1)
        threaded = tally_blocks(self._counting_fn, 50_000, RngStream(72), block_size=4096, workers=4)
        np.testing.assert_array_equal(serial, threaded)

    def test_block_size_shrinks_with_depth(self):
        assert default_block_size(0) >= default_block_size(8)
        assert default_block_size(30) >= 64


class TestWilson:
    def test_frozen_anchor(self):
        low, high = wilson_interval(500, 1000)
        assert low == pytest.approx(0.46907, abs=5e-6)
        assert high == pytest.approx(0.53093, abs=5e-6)

    def test_boundary_cases(self):
        low, high = wilson_interval(0, 100)
        assert low == 0.0 and high < 0.1
        low, high = wilson_interval(100, 100)
        assert high == 1.0 and low > 0.9

    def test_validation(self):
        with pytest.raises(ValueError):
            wilson_interval(-1, 10)
        with pytest.raises(ValueError):
            wilson_interval(11, 10)
        with pytest.raises(ValueError):
            wilson_interval(5, 0)
        with pytest.raises(ValueError):
            wilson_interval(5, 10, confidence=1.0)

    @given(st.integers(min_value=0, max_value=2000), st.integers(min_value=1, max_value=2000))
    @settings(deadline=None, derandomize=True, max_examples=60)
    def test_bracket_contains_point_estimate(self, hits, samples):
        hits = min(hits, samples)
        low, high = wilson_interval(hits, samples)
        assert 0.0 <= low <= hits / samples <= high <= 1.0


class TestEstimateMeasure:
    def test_matches_disk_mass(self):
        est = estimate_measure(disk_product(0, 0j, 1.0), 0, 100_000, RngStream(73))
        exact = disk_mass(1.0)
        assert abs(est.estimate - exact) < 4.0 * math.sqrt(exact * (1.0 - exact) / est.samples)
        assert est.ci_low < exact < est.ci_high

    def test_deeper_sampling_estimates_the_same_mass(self):
        est = estimate_measure(disk_product(0, 0j, 1.0), 3, 50_000, RngStream(74))
        exact = disk_mass(1.0)
        assert abs(est.estimate - exact) < 4.0 * math.sqrt(exact * (1.0 - exact) / est.samples)

    def test_validation(self):
        d = disk_product(2, 0j, 1.0)
        with pytest.raises(DepthMismatchError):
            estimate_measure(d, 1, 1000, RngStream(75))
        with pytest.raises(ValueError):
            estimate_measure(d, 2, 50, RngStream(75))

    def test_worker_invariance_is_byte_exact(self):
        d = disk_product(1, 0j, 1.2)
        a = estimate_measure(d, 1, 30_000, RngStream(76), workers=1)
        b = estimate_measure(d, 1, 30_000, RngStream(76), workers=4)
        assert a.to_json() == b.to_json()

    def test_json_shape(self):
        est = estimate_measure(disk_product(0, 0j, 1.0), 0, 1000, RngStream(77))
        payload = est.json_dict()
        assert set(payload) == {"estimate", "ci", "samples", "hits", "seed", "confidence"}
        assert payload["ci"][0] == est.ci_low
        assert est.std_error == pytest.approx(
            math.sqrt(est.estimate * (1.0 - est.estimate) / est.samples)
        )


class TestConditionalMeasure:
    def test_pinned_vector_in_set_gives_one(self):
        z = LevelVector(1, [0.1 + 0j, -0.1 + 0j])
        d = disk_product(1, z.entries, 0.5)
        est = estimate_conditional_measure(d, z, 1, 1000, RngStream(78))
        assert est.estimate == 1.0

    def test_whirled_disk_given_zero_root(self):
        # conditioned on a zero root, the unit disk whirled at strength 1
        # has conditional mass equal to the mass of the sqrt(2)-dilated disk
        z = LevelVector(0, [0j])
        moved = acted_set(make_gsk(1.0, 0), disk_product(0, 0j, 1.0))
        est = estimate_conditional_measure(moved, z, 1, 100_000, RngStream(79))
        exact = disk_mass(math.sqrt(2.0))
        assert abs(est.estimate - exact) < 4.0 * math.sqrt(exact * (1.0 - exact) / est.samples)

    def test_depth_must_reach_both_levels(self):
        z = LevelVector(2, np.zeros(4, dtype=complex))
        d = disk_product(0, 0j, 1.0)
        with pytest.raises(DepthMismatchError):
            estimate_conditional_measure(d, z, 1, 1000, RngStream(80))


class TestJointEvents:
    def test_single_event_marginal_matches_estimate(self):
        d = disk_product(0, 0j, 1.0)
        table = estimate_joint_events([d], 0, 80_000, RngStream(81))
        exact = disk_mass(1.0)
        assert abs(table.marginal(0) - exact) < 4.0 * math.sqrt(exact * (1.0 - exact) / table.samples)

    def test_exclusive_events_never_cooccur(self):
        d = disk_product(0, 0j, 1.0)
        table = estimate_joint_events([d, boolean_combine("complement", [d])], 0, 5000, RngStream(82))
        assert table.cell([1, 1]) == 0.0
        assert table.cell([0, 0]) == 0.0
        assert table.marginal(0) + table.marginal(1) == pytest.approx(1.0)

    def test_independent_coordinates_factorize(self):
        first = disk_product(1, 0j, [1.0, math.inf])
        second = disk_product(1, 0j, [math.inf, 1.0])
        table = estimate_joint_events([first, second], 1, 100_000, RngStream(83))
        p0, p1 = table.marginal(0), table.marginal(1)
        joint = table.cell([1, 1])
        se = 2.0 * math.sqrt(p0 * p1 * (1.0 - p0 * p1) / table.samples)
        assert abs(joint - p0 * p1) < 4.0 * se

    def test_counts_are_worker_invariant(self):
        d = disk_product(0, 0j, 1.0)
        a = estimate_joint_events([d, acted_set(make_gsk(1.0, 0), d)], 1, 30_000, RngStream(84), workers=1)
        b = estimate_joint_events([d, acted_set(make_gsk(1.0, 0), d)], 1, 30_000, RngStream(84), workers=4)
        assert a.counts == b.counts

    def test_event_count_bounds(self):
        d = disk_product(0, 0j, 1.0)
        with pytest.raises(ValueError):
            estimate_joint_events([], 0, 1000, RngStream(85))
        with pytest.raises(ValueError):
            estimate_joint_events([d] * 13, 0, 1000, RngStream(85))

    def test_json_shape(self):
        d = disk_product(0, 0j, 1.0)
        table = estimate_joint_events([d], 0, 1000, RngStream(86))
        payload = table.json_dict()
        assert set(payload) == {"events", "counts", "samples", "seed"}
        assert sum(payload["counts"]) == payload["samples"]
