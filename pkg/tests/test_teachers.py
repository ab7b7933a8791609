import numpy as np
import pytest
from sklearn.ensemble import RandomForestClassifier

from crossdistill import (
    ForestTeacherConfig,
    InvalidInputError,
    LabeledDataset,
    NadarayaWatsonTeacherConfig,
    RidgeMeanTeacherConfig,
    SmoothLogisticBayes,
    TabularMixtureBayes,
    fit_rate_slope,
    fit_teacher,
    generate,
    one_hot,
    teacher_mse,
)

def _mixture_data(n, seed, d=4):
    return generate(TabularMixtureBayes(d=d, seed=5), n, seed=seed).dataset


class TestForestTeacher:
    def test_deterministic_given_seed(self):
        data = _mixture_data(300, 1)
        probe = _mixture_data(100, 2).features
        cfg = ForestTeacherConfig(n_trees=25, seed=9)
        p1 = fit_teacher(data, cfg).predict_proba(probe).probs
        p2 = fit_teacher(data, cfg).predict_proba(probe).probs
        assert np.array_equal(p1, p2)

    def test_matches_sklearn_probabilities(self):
        # the extracted-array predictor must agree with the fitted ensemble
        data = _mixture_data(400, 3)
        cfg = ForestTeacherConfig(n_trees=40, seed=2)
        teacher = fit_teacher(data, cfg)
        ref = RandomForestClassifier(
            n_estimators=40, max_features="sqrt", bootstrap=True, random_state=2
        ).fit(data.features, data.class_indices)
        probe = _mixture_data(200, 4).features
        ours = teacher.predict_raw(probe)
        theirs = ref.predict_proba(probe)
        assert np.abs(ours - theirs).max() < 1e-12

    def test_depth_zero_is_constant(self):
        data = _mixture_data(200, 5)
        teacher = fit_teacher(data, ForestTeacherConfig(n_trees=1, max_depth=0, seed=0))
        probe = _mixture_data(50, 6).features
        out = teacher.predict_raw(probe)
        assert np.all(out == out[0])
        assert abs(out[0].sum() - 1.0) < 1e-12

    def test_single_class_dataset_predicts_it(self):
        X = np.random.default_rng(0).normal(size=(40, 3))
        data = LabeledDataset(X, one_hot(np.zeros(40, dtype=int), 2))
        with pytest.warns(UserWarning):
            teacher = fit_teacher(data, ForestTeacherConfig(n_trees=10, seed=1))
        raw = teacher.predict_raw(X)
        assert np.array_equal(raw, np.tile([1.0, 0.0], (40, 1)))

    def test_interpolation_regime_on_separable_data(self):
        # unlimited depth and many trees: near-perfect training accuracy
        rng = np.random.default_rng(7)
        X = np.vstack([rng.normal(-3, 1, size=(150, 2)), rng.normal(3, 1, size=(150, 2))])
        y = np.repeat([0, 1], 150)
        data = LabeledDataset(X, one_hot(y, 2))
        teacher = fit_teacher(data, ForestTeacherConfig(n_trees=500, seed=0))
        acc = np.mean(np.argmax(teacher.predict_raw(X), axis=1) == y)
        assert acc >= 0.99

    def test_overfit_proxy_unlimited_vs_stump(self):
        data = _mixture_data(400, 8)
        deep = fit_teacher(data, ForestTeacherConfig(n_trees=50, seed=3))
        stump = fit_teacher(data, ForestTeacherConfig(n_trees=50, max_depth=1, seed=3))
        true = data.labels
        p_deep = (deep.predict_raw(data.features) * true).sum(axis=1).mean()
        p_stump = (stump.predict_raw(data.features) * true).sum(axis=1).mean()
        assert p_deep >= p_stump

    def test_dimension_mismatch(self):
        data = _mixture_data(60, 9)
        teacher = fit_teacher(data, ForestTeacherConfig(n_trees=5, seed=0))
        with pytest.raises(InvalidInputError):
            teacher.predict_proba(np.zeros((3, data.d + 1)))

    def test_probabilities_clipped(self):
        data = _mixture_data(300, 10)
        teacher = fit_teacher(data, ForestTeacherConfig(n_trees=10, seed=4, clip_floor=1e-2))
        field = teacher.predict_proba(data.features)
        assert field.probs.min() >= 1e-2
        assert field.clip_floor == 1e-2

    def test_missing_class_in_bootstrap_handled(self):
        # k=3 with a rare class: extracted trees keep full k-column output
        rng = np.random.default_rng(11)
        y = np.array([0] * 50 + [1] * 50 + [2] * 2)
        X = rng.normal(size=(102, 2))
        data = LabeledDataset(X, one_hot(y, 3))
        teacher = fit_teacher(data, ForestTeacherConfig(n_trees=20, seed=5))
        out = teacher.predict_raw(X)
        assert out.shape == (102, 3)
        assert np.all(out >= 0) and np.allclose(out.sum(axis=1), 1.0)


class TestRidgeMeanTeacher:
    def test_all_class_zero_worked_example(self):
        data = LabeledDataset(np.zeros((16, 1)), one_hot(np.zeros(16, dtype=int), 2))
        with pytest.warns(UserWarning):
            teacher = fit_teacher(data, RidgeMeanTeacherConfig(c=1.0))
        assert teacher.lam == 0.5
        probs = teacher.constant_probs()
        assert abs(probs[0] - 2.0 / 3.0) < 1e-15
        assert probs[1] == 0.001

    def test_small_c_recovers_label_mean(self):
        data = generate(TabularMixtureBayes(seed=5), 200, seed=1).dataset
        teacher = fit_teacher(data, RidgeMeanTeacherConfig(c=1e-9))
        mean = data.labels.mean(axis=0)
        assert np.allclose(teacher.constant_probs(), np.maximum(mean, 1e-3), rtol=1e-8)

    def test_constant_in_features(self):
        data = generate(TabularMixtureBayes(seed=5), 100, seed=2).dataset
        teacher = fit_teacher(data, RidgeMeanTeacherConfig())
        out = teacher.predict_proba(np.random.default_rng(0).normal(size=(30, data.d)))
        assert np.all(out.probs == out.probs[0])

    def test_law_of_large_numbers(self):
        # at n = 1e5 the shrunken mean sits within 3 standard errors of
        # p0 / (1 + lambda)
        from crossdistill import ConstantBayes

        p0 = np.array([0.7, 0.3])
        data = generate(ConstantBayes(p0, d=1), 100_000, seed=4).dataset
        teacher = fit_teacher(data, RidgeMeanTeacherConfig(c=1.0))
        shrink = 1.0 + teacher.lam
        se = np.sqrt(p0 * (1.0 - p0) / data.n) / shrink
        assert np.all(np.abs(teacher.constant_probs() - p0 / shrink) <= 3.0 * se)

    def test_rejects_nonpositive_c(self):
        data = generate(TabularMixtureBayes(seed=5), 20, seed=0).dataset
        with pytest.raises(InvalidInputError):
            fit_teacher(data, RidgeMeanTeacherConfig(c=0.0))


class TestNadarayaWatsonTeacher:
    def test_interpolates_training_points(self):
        draw = generate(SmoothLogisticBayes(d=2, seed=7), 500, seed=1)
        teacher = fit_teacher(draw.dataset, NadarayaWatsonTeacherConfig())
        raw = teacher.predict_raw(draw.dataset.features)
        assert np.array_equal(raw, draw.dataset.labels)

    def test_single_point_dominates_within_bandwidth(self):
        X = np.array([[0.5, 0.5]])
        data = LabeledDataset(np.vstack([X, [[99.0, 99.0]]]), one_hot([1, 0], 2))
        teacher = fit_teacher(data, NadarayaWatsonTeacherConfig())
        q = X + teacher.bandwidth * 0.5
        assert np.array_equal(teacher.predict_raw(q)[0], [0.0, 1.0])

    def test_empty_neighborhood_falls_back_to_label_mean(self):
        data = LabeledDataset(np.zeros((4, 2)), one_hot([0, 0, 1, 0], 2))
        teacher = fit_teacher(data, NadarayaWatsonTeacherConfig())
        out = teacher.predict_raw(np.array([[50.0, 50.0]]))
        assert np.allclose(out[0], [0.75, 0.25])
        assert teacher.empty_neighborhoods == 1

    def test_convex_combination_of_labels(self):
        draw = generate(SmoothLogisticBayes(d=2, seed=7), 400, seed=3)
        teacher = fit_teacher(draw.dataset, NadarayaWatsonTeacherConfig())
        fresh = generate(SmoothLogisticBayes(d=2, seed=7), 200, seed=4)
        out = teacher.predict_raw(fresh.dataset.features)
        assert out.min() >= -1e-12 and out.max() <= 1.0 + 1e-12
        assert np.allclose(out.sum(axis=1), 1.0, atol=1e-9)

    def test_bandwidth_rule(self):
        draw = generate(SmoothLogisticBayes(d=2, seed=7), 4096, seed=5)
        teacher = fit_teacher(draw.dataset, NadarayaWatsonTeacherConfig())
        assert abs(teacher.bandwidth - 4096 ** (-1.0 / 6.0)) < 1e-15

    def test_rejects_bad_exponent(self):
        draw = generate(SmoothLogisticBayes(d=2, seed=7), 50, seed=6)
        with pytest.raises(InvalidInputError):
            fit_teacher(draw.dataset, NadarayaWatsonTeacherConfig(a=1.0))  # d/2 = 1

    @pytest.mark.slow
    def test_held_out_mse_rate(self):
        # squared-error decay against the true probabilities at log-log
        # slope near -4/(4+d) for d=2
        oracle = SmoothLogisticBayes(d=2, seed=7)
        points = []
        for n in (256, 512, 1024, 2048, 4096, 8192):
            vals = []
            for s in range(5):
                draw = generate(oracle, n, seed=100 * s + n)
                teacher = fit_teacher(draw.dataset, NadarayaWatsonTeacherConfig())
                fresh = generate(oracle, 2048, seed=777 + s)
                mse, _ = teacher_mse(
                    teacher.predict_proba(fresh.dataset.features), fresh.bayes_probs
                )
                vals.append(mse)
            points.append((n, float(np.mean(vals))))
        slope = fit_rate_slope(points).slope
        assert -0.87 <= slope <= -0.47
