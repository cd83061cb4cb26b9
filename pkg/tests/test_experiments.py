"""Verifier experiments: happy paths at reduced samples, negative controls
that must fail, and report mechanics."""

import math

import numpy as np
import pytest

from whirly_lab import (
    ExperimentReport,
    LevelVector,
    RngStream,
    disk_product,
    identity,
    make_gsk,
    positivity_scan,
    sharpness_check,
    standard_complex,
    verify_action_identity,
    verify_conditional_independence,
    verify_continuity,
    verify_convolution,
    verify_marginals,
    whirly_search,
)

UNIT_DISK = disk_product(0, 0j, 1.0)


def bad_sampler(depth, count, gen):
    """Innovation recursion with the sqrt(2) renormalization dropped."""
    levels = [standard_complex(gen, (count, 1))]
    for n in range(depth):
        parent = levels[n]
        innovation = standard_complex(gen, parent.shape)
        nxt = np.empty((count, parent.shape[1] * 2), dtype=np.complex128)
        nxt[:, 0::2] = parent + innovation
        nxt[:, 1::2] = parent - innovation
        levels.append(nxt)
    return levels


class TestReportMechanics:
    def test_evaluate_ops(self):
        observed = {"x": 2.0}
        assert ExperimentReport.evaluate(observed, {"x": {"max": 2.0}})
        assert not ExperimentReport.evaluate(observed, {"x": {"lt": 2.0}})
        assert ExperimentReport.evaluate(observed, {"x": {"min": 2.0}})
        assert not ExperimentReport.evaluate(observed, {"x": {"gt": 2.0}})
        with pytest.raises(ValueError):
            ExperimentReport.evaluate(observed, {"x": {"near": 2.0}})

    def test_pass_flag_is_recomputable(self):
        report = verify_action_identity(0, 1, 0.5, 10, RngStream(101))
        assert report.passed == ExperimentReport.evaluate(report.observed, report.thresholds)

    def test_json_isolates_runtime(self):
        report = verify_action_identity(0, 1, 0.5, 10, RngStream(102))
        with_runtime = report.json_dict()
        without = report.json_dict(include_runtime=False)
        assert "runtime_ms" in with_runtime
        assert "runtime_ms" not in without
        assert without["pass"] is True
        assert without["seed"] == 102

    def test_reports_are_deterministic(self):
        a = verify_marginals(1, 4000, RngStream(103))
        b = verify_marginals(1, 4000, RngStream(103))
        assert a.to_json(include_runtime=False) == b.to_json(include_runtime=False)


class TestMarginals:
    def test_passes_on_the_real_sampler(self):
        report = verify_marginals(1, 20_000, RngStream(104))
        assert report.passed

    def test_catches_missing_renormalization(self):
        report = verify_marginals(1, 5000, RngStream(105), level_sampler=bad_sampler)
        assert not report.passed
        assert report.observed["max_second_moment_sigma"] > 10.0

    def test_validation(self):
        with pytest.raises(ValueError):
            verify_marginals(9, 5000, RngStream(106))
        with pytest.raises(ValueError):
            verify_marginals(1, 50, RngStream(106))


class TestActionIdentity:
    def test_exact_for_various_strengths(self):
        for s in (0.0, -1.5, 2.0):
            report = verify_action_identity(1, 2, s, 25, RngStream(107))
            assert report.passed
            assert report.observed["max_residual"] < 1e-10

    def test_validation(self):
        with pytest.raises(ValueError):
            verify_action_identity(3, 2, 1.0, 10, RngStream(108))
        with pytest.raises(ValueError):
            verify_action_identity(0, 0, 1.0, 0, RngStream(108))


class TestContinuity:
    def test_nearby_pairs_move_little(self):
        report = verify_continuity(1.0, 0j, 0.2, 3, 4000, RngStream(109), pairs=4)
        assert report.passed
        assert report.observed["max_pair_distance"] < report.observed["delta"]

    def test_far_pairs_break_the_bound(self):
        report = verify_continuity(
            1.0, 1.5 + 0j, 0.1, 4, 10_000, RngStream(110), pairs=6, pair_distance_factor=300.0
        )
        assert not report.passed
        assert report.observed["max_symdiff_clearance"] > 0.1

    def test_relaxed_delta_is_larger(self):
        tight = verify_continuity(1.0, 0j, 0.2, 2, 2000, RngStream(111), pairs=2)
        loose = verify_continuity(1.0, 0j, 0.2, 2, 2000, RngStream(111), pairs=2, relaxed_delta=True)
        ratio = loose.observed["delta"] / tight.observed["delta"]
        assert ratio == pytest.approx(math.sqrt(2.0))

    def test_validation(self):
        with pytest.raises(ValueError):
            verify_continuity(-1.0, 0j, 0.1, 2, 2000, RngStream(112))
        with pytest.raises(ValueError):
            verify_continuity(1.0, 0j, 1.5, 2, 2000, RngStream(112))


class TestConvolution:
    def test_identity_holds(self):
        for a in (0.0, -1.0):
            report = verify_convolution(UNIT_DISK, a, 30_000, RngStream(113))
            assert report.passed

    def test_both_routes_are_near_the_disk_mass(self):
        report = verify_convolution(UNIT_DISK, 2.0, 50_000, RngStream(114))
        assert report.observed["fubini_estimate"] == pytest.approx(0.3935, abs=0.01)
        assert report.observed["direct_estimate"] == pytest.approx(0.3935, abs=0.01)


class TestConditionalIndependence:
    def test_whirled_events_factorize(self):
        report = verify_conditional_independence(
            UNIT_DISK, 1.0, 2, 30_000, RngStream(115), given=LevelVector(0, [0j])
        )
        assert report.passed
        assert report.observed["reference_marginal"] == pytest.approx(0.632, abs=0.02)

    def test_identical_events_fail_the_product_test(self):
        report = verify_conditional_independence(
            UNIT_DISK,
            1.0,
            3,
            30_000,
            RngStream(116),
            given=LevelVector(0, [0j]),
            element_factory=lambda s, k: make_gsk(s, 0),
        )
        assert not report.passed
        assert report.observed["max_cell_sigma"] > 10.0

    def test_validation(self):
        with pytest.raises(ValueError):
            verify_conditional_independence(UNIT_DISK, -1.0, 2, 1000, RngStream(117))
        with pytest.raises(ValueError):
            verify_conditional_independence(UNIT_DISK, 1.0, 7, 1000, RngStream(117))
        with pytest.raises(ValueError):
            verify_conditional_independence(
                UNIT_DISK, 1.0, 2, 1000, RngStream(117), given=LevelVector(1, [0j, 0j])
            )


class TestPositivity:
    def test_small_displacement_keeps_everything_positive(self):
        report = positivity_scan(UNIT_DISK, -0.5, 40, 2000, RngStream(118))
        assert report.passed
        assert report.observed["fraction_positive"] == 1.0

    def test_quantiles_are_monotone(self):
        report = positivity_scan(UNIT_DISK, -1.0, 40, 2000, RngStream(119))
        obs = report.observed
        assert obs["delta_at_50"] >= obs["delta_at_75"] >= obs["delta_at_87"] >= obs["delta_at_95"]

    def test_null_set_is_an_error(self):
        point = disk_product(0, 10.0 + 0j, 0.01)
        with pytest.raises(ValueError):
            positivity_scan(point, -2.0, 20, 2000, RngStream(120))


class TestWhirlySearch:
    def test_finds_inflating_elements(self):
        report = whirly_search(UNIT_DISK, 0.5, 10_000, 8, RngStream(121), z_samples=50, inner_samples=2000)
        assert report.passed
        assert report.observed["found"] == 1.0
        assert report.observed["union_margin"] > 0.5

    def test_union_curve_is_monotone_in_m(self):
        report = whirly_search(UNIT_DISK, 0.6, 8_000, 6, RngStream(122), z_samples=40, inner_samples=1500)
        n0 = int(report.observed["found_n"]) if report.observed["found"] else 0
        curve = [v for k, v in sorted(report.observed.items()) if k.startswith(f"union_n{n0}_m")]
        assert all(b >= a for a, b in zip(curve, curve[1:]))

    def test_identity_elements_never_inflate(self):
        report = whirly_search(
            UNIT_DISK,
            0.5,
            5_000,
            4,
            RngStream(123),
            z_samples=20,
            inner_samples=1000,
            element_factory=lambda s, k: identity(k + 1),
        )
        assert not report.passed
        assert report.observed["union_margin"] < 0.45

    def test_validation(self):
        with pytest.raises(ValueError):
            whirly_search(UNIT_DISK, 1.5, 5000, 6, RngStream(124))
        with pytest.raises(ValueError):
            whirly_search(UNIT_DISK, 0.5, 5000, 0, RngStream(124))


class TestSharpness:
    def test_matched_coefficients_concentrate_at_one(self):
        report = sharpness_check(math.sqrt(2.0), 1.0, 4000, 50, RngStream(125))
        assert report.passed
        assert report.observed["inverse_mean"] == pytest.approx(1.0, abs=0.01)
        assert report.observed["criterion_gap"] < 1e-12

    def test_mismatched_coefficients_report_their_gap(self):
        report = sharpness_check(2.0, 1.0, 4000, 50, RngStream(126))
        assert report.passed
        assert report.observed["inverse_mean"] == pytest.approx(math.sqrt(2.0) / 2.0, abs=0.01)
        assert report.observed["criterion_gap"] == pytest.approx(2.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            sharpness_check(0.0, 1.0, 4000, 50, RngStream(127))
        with pytest.raises(ValueError):
            sharpness_check(1.0, 1.0, 100, 50, RngStream(127))
