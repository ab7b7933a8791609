import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossdistill import (
    ConstantBayes,
    ConstantStudent,
    InvalidInputError,
    LinearStudent,
    SmoothLogisticBayes,
    UndefinedMetricError,
    accuracy,
    auc_binary,
    fit_rate_slope,
    student_mse_to_f0,
    teacher_mse,
)
from conftest import brute_force_auc


class TestAucBinary:
    def test_perfect_separation(self):
        assert auc_binary(np.array([1.0, 2.0, 3.0, 4.0]), np.array([0, 0, 1, 1])) == 1.0

    def test_all_ties(self):
        assert auc_binary(np.zeros(6), np.array([0, 1, 0, 1, 0, 1])) == 0.5

    def test_worked_example(self):
        scores = np.array([0.1, 0.4, 0.35, 0.8])
        labels = np.array([0, 0, 1, 1])
        assert auc_binary(scores, labels) == 0.75

    def test_single_class_undefined(self):
        with pytest.raises(UndefinedMetricError):
            auc_binary(np.array([0.5, 0.7]), np.array([1, 1]))

    @given(st.integers(0, 2**32 - 1), st.integers(2, 200), st.booleans())
    @settings(max_examples=120, deadline=None)
    def test_equals_brute_force_exactly(self, seed, n, coarse):
        r = np.random.default_rng(seed)
        labels = np.zeros(n, dtype=int)
        labels[r.permutation(n)[: max(1, int(r.integers(1, n)))] ] = 1
        if labels.all() or not labels.any():
            labels[0] = 1 - labels[0]
        scores = r.normal(size=n)
        if coarse:  # force plenty of ties
            scores = np.round(scores * 2) / 2
        assert auc_binary(scores, labels) == brute_force_auc(scores, labels)


class TestAccuracy:
    def test_argmax_rule(self):
        scores = np.array([[0.1, 0.9], [2.0, -1.0], [0.0, 0.0]])
        assert accuracy(scores, np.array([1, 0, 1])) == pytest.approx(2.0 / 3.0)


class TestTeacherMse:
    def test_zero_when_equal(self, rng):
        p = rng.random((20, 2))
        assert teacher_mse(p, p)[0] == 0.0

    def test_constant_shift(self):
        p = np.tile([0.5, 0.5], (10, 1))
        q = p.copy()
        q[:, 0] += 0.1
        value, se = teacher_mse(q, p)
        assert abs(value - 0.01) < 1e-15 and se < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            teacher_mse(np.zeros((2, 2)), np.zeros((3, 2)))


class TestStudentMseToF0:
    def test_zero_for_exact_student(self):
        oracle = ConstantBayes(np.array([0.7, 0.3]), d=1)
        student = ConstantStudent(np.log([0.7, 0.3]))
        value, se = student_mse_to_f0(student, oracle, 0, 0)
        assert value == 0.0 and se == 0.0

    def test_constant_case_is_exact(self):
        oracle = ConstantBayes(np.array([0.7, 0.3]), d=1)
        student = ConstantStudent(np.log([0.6, 0.4]))
        value, _ = student_mse_to_f0(student, oracle, 0, 0)
        expected = float(np.sum((np.log([0.6, 0.4]) - np.log([0.7, 0.3])) ** 2))
        assert abs(value - expected) < 1e-15

    def test_self_consistent_across_mc_sizes(self):
        oracle = SmoothLogisticBayes(d=2, seed=7)
        student = LinearStudent(np.zeros((2, 2)), np.array([-0.7, -0.7]))
        v1, se1 = student_mse_to_f0(student, oracle, 20_000, seed=0)
        v2, se2 = student_mse_to_f0(student, oracle, 200_000, seed=1)
        assert abs(v1 - v2) <= 3.0 * np.hypot(se1, se2)


class TestFitRateSlope:
    def test_exact_inverse_law(self):
        points = [(n, 1.0 / n) for n in (10, 100, 1000, 10_000)]
        s = fit_rate_slope(points)
        assert abs(s.slope + 1.0) < 1e-9
        assert s.hi - s.lo < 1e-8

    def test_exact_root_law(self):
        points = [(n, n**-0.5) for n in (16, 64, 256, 1024, 4096)]
        assert abs(fit_rate_slope(points).slope + 0.5) < 1e-9

    def test_needs_four_points(self):
        with pytest.raises(InvalidInputError):
            fit_rate_slope([(10, 1.0), (100, 0.1), (1000, 0.01)])

    def test_rejects_nonpositive_errors(self):
        with pytest.raises(InvalidInputError):
            fit_rate_slope([(10, 1.0), (100, 0.0), (1000, 0.1), (10000, 0.1)])

    @pytest.mark.slow
    def test_interval_covers_noisy_power_law(self):
        # 10% multiplicative noise: the 95% interval should catch the true
        # exponent in at least 90 of 100 trials
        rng = np.random.default_rng(123)
        true = -0.7
        hits = 0
        grid = (32, 64, 128, 256, 512, 1024, 2048)
        for _ in range(100):
            pts = [(n, float(n**true) * (1.0 + 0.1 * rng.normal())) for n in grid]
            s = fit_rate_slope(pts)
            hits += s.lo <= true <= s.hi
        assert hits >= 90
