import math

import numpy as np
import pytest

from pdacmri.sampling import (
    MaskConfigError,
    ScheduleError,
    heuristic_confidence,
    make_acquisition_mask,
    make_schedule,
    mask_budget,
    next_mask,
    oracle_confidence,
    severity_context,
    squashed_column_error,
    validate_schedule,
)


class TestAcquisitionMask:
    def test_384_8x_matches_published_budget(self):
        mask = make_acquisition_mask(384, 8, 0.04, seed=0)
        assert mask_budget(mask) == 48
        # 15 = round(0.04 * 384) contiguous center columns, symmetric around 192
        assert mask[185:200].all()

    def test_320_8x_budget(self):
        mask = make_acquisition_mask(320, 8, 0.04, seed=3)
        assert mask_budget(mask) == 40

    def test_acceleration_one_gives_full_mask(self):
        for cf in (0.04, 0.2, 0.5):
            mask = make_acquisition_mask(64, 1, cf, seed=1)
            assert mask_budget(mask) == 64

    def test_deterministic_per_seed(self):
        a = make_acquisition_mask(256, 6, 0.08, seed=42)
        b = make_acquisition_mask(256, 6, 0.08, seed=42)
        assert np.array_equal(a, b)

    def test_center_block_symmetric_even_count(self):
        # round(0.05 * 80) = 4 center columns: one left of column 40, two right
        mask = make_acquisition_mask(80, 8, 0.05, seed=0)
        assert mask[39:43].all()

    def test_budget_below_center_block_rejected(self):
        with pytest.raises(MaskConfigError):
            make_acquisition_mask(100, 50, 0.5, seed=0)


class TestSchedules:
    def test_published_multicoil_8x_schedule_valid(self):
        budgets = [48, 192, 288, 320, 336, 352, 364, 376, 384]
        assert validate_schedule(budgets, 384, 48) == budgets

    def test_published_singlecoil_4x_schedule_valid(self):
        budgets = [80, 160, 240, 264, 280, 292, 304, 312, 320]
        assert validate_schedule(budgets, 320, 80) == budgets

    def test_non_increasing_rejected_with_index(self):
        with pytest.raises(ScheduleError, match="index 1"):
            validate_schedule([40, 40, 320], 320, 40)

    def test_wrong_endpoint_rejected(self):
        with pytest.raises(ScheduleError, match="index 2"):
            validate_schedule([40, 80, 300], 320, 40)
        with pytest.raises(ScheduleError, match="index 0"):
            validate_schedule([41, 80, 320], 320, 40)

    def test_uniform_equal_increments(self):
        got = make_schedule(320, 40, 8, "uniform")
        assert got == [40, 75, 110, 145, 180, 215, 250, 285, 320]

    def test_fine_to_coarse_reverses_coarse_to_fine(self):
        c2f = make_schedule(384, 48, 8, "coarse-to-fine")
        f2c = make_schedule(384, 48, 8, "fine-to-coarse")
        inc_c2f = np.diff(c2f)
        inc_f2c = np.diff(f2c)
        assert np.array_equal(inc_f2c, inc_c2f[::-1])

    def test_coarse_to_fine_increments_weakly_decreasing(self):
        for width, m0, steps in [(384, 48, 8), (320, 40, 8), (128, 16, 8), (64, 8, 6)]:
            budgets = make_schedule(width, m0, steps, "coarse-to-fine")
            incs = np.diff(budgets)
            assert (incs >= 1).all()
            assert (incs[:-1] >= incs[1:]).all()
            assert budgets[-1] == width

    def test_too_many_steps_rejected(self):
        with pytest.raises(ScheduleError):
            make_schedule(20, 16, 8, "uniform")


class TestNextMask:
    def test_single_top_probability_added(self):
        m = next_mask(np.array([1, 0, 0, 1]), np.array([0.9, 0.3, 0.7, 0.1]), 3)
        assert np.array_equal(m, [1, 0, 1, 1])

    def test_equal_budget_is_identity(self):
        prev = np.array([1, 0, 1, 0, 1])
        m = next_mask(prev, np.random.default_rng(0).uniform(size=5), 3)
        assert np.array_equal(m, prev)

    def test_full_budget_fills_regardless_of_probs(self):
        m = next_mask(np.array([1, 0, 0, 0]), np.zeros(4), 4)
        assert m.all()

    def test_budget_beyond_width_rejected(self):
        with pytest.raises(ScheduleError):
            next_mask(np.array([1, 0]), np.array([0.5, 0.5]), 3)

    def test_ties_broken_toward_smaller_index(self):
        m = next_mask(np.array([0, 0, 0, 0]), np.array([0.5, 0.5, 0.5, 0.5]), 2)
        assert np.array_equal(m, [1, 1, 0, 0])

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            width = 17
            m_prev = (rng.uniform(size=width) < 0.4).astype(np.uint8)
            probs = rng.permutation(np.linspace(0.01, 0.99, width))  # distinct
            b_next = int(mask_budget(m_prev)) + 4
            perm = rng.permutation(width)
            direct = next_mask(m_prev, probs, b_next)[perm]
            permuted = next_mask(m_prev[perm], probs[perm], b_next)
            assert np.array_equal(direct, permuted)

    def test_nesting_and_budgets_along_schedule(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            width = int(rng.integers(12, 40))
            steps = int(rng.integers(1, 7))
            m0_budget = int(rng.integers(1, width - steps))
            budgets = sorted(rng.choice(np.arange(m0_budget + 1, width), size=steps - 1, replace=False).tolist()) if steps > 1 else []
            budgets = [m0_budget] + budgets + [width]
            mask = np.zeros(width, dtype=np.uint8)
            mask[rng.choice(width, size=m0_budget, replace=False)] = 1
            prev = mask
            for b in budgets[1:]:
                cur = next_mask(prev, rng.uniform(size=width), b)
                assert mask_budget(cur) == b
                assert np.all(cur >= prev)  # support nesting
                prev = cur
            assert prev.all()  # final mask full


def sigmoid(v):
    return 1.0 / (1.0 + math.exp(-v))


class TestConfidences:
    def test_perfect_reconstruction_gives_all_ones(self):
        rng = np.random.default_rng(2)
        gt = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
        assert np.allclose(oracle_confidence(gt, gt), 1.0)

    def test_known_column_sums(self):
        # column 0: gt sums to 10, recon to 11 -> e = 0.1; column 1 exact
        gt = np.array([[5.0, 3.0], [5.0, 4.0]], dtype=complex)
        recon = np.array([[5.5, 3.0], [5.5, 4.0]], dtype=complex)
        probs = oracle_confidence(recon, gt)
        expected = 2.0 - 2.0 * sigmoid(0.1)
        assert abs(probs[0] - expected) < 1e-12
        assert abs(expected - 0.95004) < 5e-6
        assert probs[1] == 1.0

    def test_huge_error_drives_confidence_to_zero(self):
        gt = np.full((4, 3), 1.0 + 0j)
        recon = gt.copy()
        recon[:, 1] += 1e9
        probs = oracle_confidence(recon, gt)
        assert probs[1] < 1e-6

    def test_zero_sum_column_guarded(self):
        gt = np.array([[1.0, -1.0], [-1.0, 1.0]], dtype=complex)  # both columns sum to 0
        recon = np.ones((2, 2), dtype=complex)
        probs = oracle_confidence(recon, gt)
        assert np.array_equal(probs, [0.0, 0.0])
        assert np.array_equal(squashed_column_error(recon, gt), [1.0, 1.0])

    def test_multi_coil_sums_over_coils(self):
        rng = np.random.default_rng(3)
        gt = rng.standard_normal((3, 4, 5)) + 1j * rng.standard_normal((3, 4, 5))
        stacked_gt = gt.sum(axis=0)[None]
        assert np.allclose(
            oracle_confidence(gt * 1.1, gt), oracle_confidence(stacked_gt * 1.1, stacked_gt)
        )

    def test_heuristic_matches_oracle_squashing_shape(self):
        # one column with relative disagreement 0.1
        z_pre = np.zeros((2, 2), dtype=complex)
        z_pre[:, 0] = [3.0, 4.0]  # norm 5
        z_pre[:, 1] = [1.0, 0.0]
        z_post = z_pre.copy()
        z_post[0, 0] += 0.5  # diff norm 0.5 -> r = 0.1
        conf = heuristic_confidence(z_pre, z_post)
        assert abs(conf[0] - (2.0 - 2.0 * sigmoid(0.1))) < 1e-9
        assert conf[1] == 1.0

    def test_heuristic_identical_inputs(self):
        rng = np.random.default_rng(4)
        z = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
        assert np.allclose(heuristic_confidence(z, z), 1.0)

    def test_heuristic_range(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = rng.standard_normal((3, 7)) + 1j * rng.standard_normal((3, 7))
            b = rng.standard_normal((3, 7)) + 1j * rng.standard_normal((3, 7))
            conf = heuristic_confidence(a, b)
            assert np.all(conf >= 0.0) and np.all(conf <= 1.0)


class TestSeverityContext:
    def test_full_mask_unit_confidence(self):
        ctx = severity_context(np.ones(6, dtype=np.uint8), np.ones(6), 2)
        assert np.array_equal(ctx.masked_confidence, np.ones(6))
        assert ctx.budget_fraction == 1.0
        assert ctx.mean_support_confidence() == 1.0

    def test_masking_definition(self):
        ctx = severity_context(np.array([1, 0]), np.array([0.5, 0.9]), 1)
        assert np.allclose(ctx.masked_confidence, [0.5, 0.0])
        assert ctx.budget_fraction == 0.5

    def test_off_support_always_zero(self):
        rng = np.random.default_rng(6)
        mask = (rng.uniform(size=12) < 0.5).astype(np.uint8)
        mask[0] = 1
        ctx = severity_context(mask, rng.uniform(size=12), 3)
        assert np.all(ctx.masked_confidence[mask == 0] == 0)
