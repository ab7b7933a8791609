import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from crossdistill import (
    InvalidInputError,
    LabeledDataset,
    ProbabilityField,
    clip_probabilities,
    log_scores,
    one_hot,
)


class TestClipProbabilities:
    def test_clips_zero_up_to_floor(self):
        field = clip_probabilities(np.array([[0.0, 1.0]]), 1e-3)
        assert np.array_equal(field.probs, [[0.001, 1.0]])

    def test_no_entry_below_floor_unchanged(self):
        field = clip_probabilities(np.array([[0.5, 0.5]]), 1e-3)
        assert np.array_equal(field.probs, [[0.5, 0.5]])

    def test_coordinatewise_max(self):
        field = clip_probabilities(np.array([[0.0004, 0.9996]]), 1e-3)
        assert np.array_equal(field.probs, [[0.001, 0.9996]])

    def test_rows_need_not_sum_to_one(self):
        field = clip_probabilities(np.array([[0.0, 1.0]]), 1e-3)
        assert field.probs.sum() > 1.0

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            clip_probabilities(np.array([[np.nan, 0.5]]), 1e-3)

    def test_rejects_out_of_range_floor(self):
        with pytest.raises(InvalidInputError):
            clip_probabilities(np.array([[0.5, 0.5]]), 0.6)

    @given(
        arrays(np.float64, (7, 3), elements=st.floats(0.0, 1.0)),
        st.floats(1e-6, 0.33),
    )
    def test_idempotent(self, p, eps):
        once = clip_probabilities(p, eps).probs
        twice = clip_probabilities(once, eps).probs
        assert np.array_equal(once, twice)

    @given(
        arrays(np.float64, (5, 2), elements=st.floats(0.0, 1.0)),
        arrays(np.float64, (5, 2), elements=st.floats(0.0, 1.0)),
        st.floats(1e-6, 0.49),
    )
    def test_monotone(self, p, q, eps):
        lo = np.minimum(p, q)
        hi = np.maximum(p, q)
        assert np.all(
            clip_probabilities(lo, eps).probs <= clip_probabilities(hi, eps).probs
        )


class TestOneHot:
    def test_two_classes(self):
        assert np.array_equal(one_hot([0, 1], 2), [[1, 0], [0, 1]])

    def test_three_classes(self):
        assert np.array_equal(one_hot([2], 3), [[0, 0, 1]])

    def test_empty(self):
        assert one_hot([], 2).shape == (0, 2)

    def test_index_out_of_range(self):
        with pytest.raises(InvalidInputError):
            one_hot([2], 2)
        with pytest.raises(InvalidInputError):
            one_hot([-1], 2)

    @given(st.lists(st.integers(0, 4), min_size=1, max_size=30))
    def test_rows_sum_to_one(self, idx):
        assert np.all(one_hot(idx, 5).sum(axis=1) == 1.0)


class TestLogScores:
    def test_log_one_is_zero(self):
        field = ProbabilityField(np.array([[1.0, 1.0]]), 0.1)
        assert np.array_equal(log_scores(field), [[0.0, 0.0]])

    def test_exp_minus_one(self):
        out = log_scores(np.array([[np.exp(-1.0), 1.0]]))
        assert np.allclose(out, [[-1.0, 0.0]], atol=1e-15)

    def test_against_high_precision_log(self):
        # oracle: 50-digit value of log(1/2)
        log_half = -0.69314718055994530941723212145817656807550013436026
        out = log_scores(np.array([[0.5, 0.5]]))
        assert np.allclose(out, log_half, rtol=0, atol=1e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidInputError):
            log_scores(np.array([[0.0, 1.0]]))

    @given(arrays(np.float64, (4, 2), elements=st.floats(np.log(1e-3), 0.0)))
    def test_inverse_of_exp_on_score_box(self, scores):
        assert np.allclose(log_scores(np.exp(scores)), scores, atol=1e-12)


class TestLabeledDataset:
    def test_accepts_one_hot(self):
        d = LabeledDataset(np.zeros((3, 2)), one_hot([0, 1, 0], 2))
        assert (d.n, d.d, d.k) == (3, 2, 2)
        assert np.array_equal(d.class_indices, [0, 1, 0])

    def test_rejects_soft_labels(self):
        with pytest.raises(InvalidInputError):
            LabeledDataset(np.zeros((1, 1)), np.array([[0.5, 0.5]]))

    def test_rejects_multi_hot(self):
        with pytest.raises(InvalidInputError):
            LabeledDataset(np.zeros((1, 1)), np.array([[1.0, 1.0]]))

    def test_rejects_non_finite_features(self):
        with pytest.raises(InvalidInputError):
            LabeledDataset(np.array([[np.inf]]), np.array([[1.0, 0.0]]))

    def test_arrays_are_read_only(self):
        d = LabeledDataset(np.zeros((2, 2)), one_hot([0, 1], 2))
        with pytest.raises(ValueError):
            d.features[0, 0] = 1.0
        with pytest.raises(ValueError):
            d.labels[0, 0] = 0.0

    def test_subset(self):
        d = LabeledDataset(np.arange(8.0).reshape(4, 2), one_hot([0, 1, 0, 1], 2))
        s = d.subset(np.array([2, 3]))
        assert np.array_equal(s.features, [[4.0, 5.0], [6.0, 7.0]])


class TestProbabilityFieldInvariants:
    def test_rejects_entries_below_floor(self):
        with pytest.raises(InvalidInputError):
            ProbabilityField(np.array([[0.0005, 0.9]]), 1e-3)

    def test_rejects_entries_above_one(self):
        with pytest.raises(InvalidInputError):
            ProbabilityField(np.array([[0.5, 1.1]]), 1e-3)

    def test_rejects_floor_at_or_above_uniform(self):
        with pytest.raises(InvalidInputError):
            ProbabilityField(np.array([[0.5, 0.5]]), 0.5)

    def test_read_only(self):
        field = ProbabilityField(np.array([[0.4, 0.6]]), 1e-3)
        with pytest.raises(ValueError):
            field.probs[0, 0] = 0.9


class TestCorrectionFieldInvariants:
    def test_rejects_negative(self):
        from crossdistill import CorrectionField

        with pytest.raises(InvalidInputError):
            CorrectionField(np.array([[-0.1, 0.0]]))

    def test_zeros_constructor(self):
        from crossdistill import CorrectionField

        z = CorrectionField.zeros(3, 2)
        assert z.v.shape == (3, 2) and not z.v.any()
