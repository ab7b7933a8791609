import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossdistill import (
    ConstantBayes,
    ConstantStudentConfig,
    CorrectionPolicy,
    ForestStudentConfig,
    ForestTeacherConfig,
    InvalidInputError,
    LinearStudentConfig,
    LossSpec,
    NadarayaWatsonTeacherConfig,
    RidgeMeanTeacherConfig,
    SmoothLogisticBayes,
    TabularMixtureBayes,
    distill_vanilla,
    fit_nuisances,
    fit_student_on_bundle,
    generate,
    make_folds,
    pooled_objective,
    run_crossfit,
    verify_fold_isolation,
)
from crossdistill.crossfit import (
    DistillConfig,
    NuisanceBundle,
    excluded_indices_hash,
    rebundle,
)


class TestMakeFolds:
    def test_singleton_folds(self):
        plan = make_folds(10, 10, seed=0)
        assert sorted(plan.assignments.tolist()) == list(range(10))

    def test_two_equal_folds(self):
        plan = make_folds(10, 2, seed=1)
        sizes = np.bincount(plan.assignments)
        assert sizes.tolist() == [5, 5]

    def test_deterministic(self):
        a = make_folds(57, 7, seed=3).assignments
        b = make_folds(57, 7, seed=3).assignments
        assert np.array_equal(a, b)

    def test_rejects_more_folds_than_examples(self):
        with pytest.raises(InvalidInputError):
            make_folds(5, 6, seed=0)
        with pytest.raises(InvalidInputError):
            make_folds(5, 1, seed=0)

    @given(st.integers(2, 12), st.integers(0, 10**6), st.integers(12, 200))
    @settings(max_examples=60)
    def test_partition_with_near_equal_sizes(self, B, seed, n):
        plan = make_folds(n, B, seed)
        sizes = np.bincount(plan.assignments, minlength=B)
        assert sizes.sum() == n
        assert sizes.max() - sizes.min() <= 1
        # earlier folds absorb the remainder
        assert np.all(np.diff(sizes) <= 0) or n % B == 0

    def test_stratified_balances_classes(self):
        labels = np.array([0] * 30 + [1] * 10)
        plan = make_folds(40, 5, seed=2, stratify_labels=labels)
        for t in range(5):
            fold = plan.fold_indices(t)
            assert np.count_nonzero(labels[fold] == 1) == 2

    def test_fold_and_complement_partition(self):
        plan = make_folds(23, 4, seed=5)
        for t in range(4):
            fold = set(plan.fold_indices(t).tolist())
            rest = set(plan.complement_indices(t).tolist())
            assert fold | rest == set(range(23)) and not fold & rest


class TestFitNuisances:
    def test_no_leakage_forest(self):
        data = generate(TabularMixtureBayes(d=4, seed=5), 120, seed=0).dataset
        plan = make_folds(data.n, 3, seed=1)
        assert all(verify_fold_isolation(data, plan, ForestTeacherConfig(n_trees=10, seed=7)))

    def test_zero_policy_gives_zero_corrections(self):
        data = generate(ConstantBayes(np.array([0.6, 0.4]), d=1), 60, seed=1).dataset
        plan = make_folds(data.n, 3, seed=0)
        bundle = fit_nuisances(data, plan, RidgeMeanTeacherConfig(), CorrectionPolicy("zero"))
        assert not bundle.corrections.v.any()

    def test_every_example_covered_once(self):
        data = generate(TabularMixtureBayes(d=4, seed=5), 90, seed=2).dataset
        plan = make_folds(data.n, 4, seed=3)
        bundle = fit_nuisances(
            data, plan, ForestTeacherConfig(n_trees=5, seed=1), CorrectionPolicy("orthogonal")
        )
        assert bundle.probs.probs.shape == (90, 2)
        assert np.all(bundle.probs.probs >= bundle.probs.clip_floor)
        assert np.all(bundle.corrections.v > 0)

    def test_provenance_hashes_match_folds(self):
        data = generate(TabularMixtureBayes(d=4, seed=5), 40, seed=3).dataset
        plan = make_folds(data.n, 2, seed=4)
        bundle = fit_nuisances(
            data, plan, ForestTeacherConfig(n_trees=3, seed=2), CorrectionPolicy("zero")
        )
        for prov in bundle.provenance:
            assert prov.excluded_hash == excluded_indices_hash(plan.fold_indices(prov.fold))

    def test_ridge_fold_spread_shrinks_like_root_n(self):
        # CLT scaling: the across-fold spread of the constant teacher value
        # halves when n quadruples (slope -1/2 within 3 standard errors)
        from crossdistill.metrics import fit_rate_slope

        oracle = ConstantBayes(np.array([0.7, 0.3]), d=1)
        sizes = (300, 900, 2700, 8100)
        mean_spread = []
        for n in sizes:
            spreads = []
            for s in range(60):
                data = generate(oracle, n, seed=1000 * n + s).dataset
                plan = make_folds(n, 4, seed=s)
                bundle = fit_nuisances(
                    data, plan, RidgeMeanTeacherConfig(c=1.0), CorrectionPolicy("zero")
                )
                per_fold = [
                    bundle.probs.probs[plan.fold_indices(t)][0, 0] for t in range(4)
                ]
                spreads.append(np.std(per_fold))
            mean_spread.append((n, float(np.mean(spreads))))
        slope = fit_rate_slope(mean_spread)
        assert slope.lo - 3 * slope.stderr <= -0.5 <= slope.hi + 3 * slope.stderr

    def test_plan_size_mismatch_rejected(self):
        data = generate(TabularMixtureBayes(d=4, seed=5), 30, seed=4).dataset
        with pytest.raises(InvalidInputError):
            fit_nuisances(
                data, make_folds(29, 2, seed=0),
                ForestTeacherConfig(n_trees=2, seed=0), CorrectionPolicy("zero"),
            )


class TestPipelines:
    def test_vanilla_constant_teacher_closed_form(self):
        # constant teacher + constant student: the student is exactly log p
        data = generate(ConstantBayes(np.array([0.7, 0.3]), d=1), 200, seed=5).dataset
        res = distill_vanilla(data, RidgeMeanTeacherConfig(c=1.0), ConstantStudentConfig())
        expected = np.log(res.teacher.constant_probs())
        assert np.abs(res.student.value - expected).max() < 1e-12

    def test_vanilla_interpolating_teacher_closed_form(self):
        # interpolating teacher + data reuse: student is the mean of
        # log(max(y, floor))
        draw = generate(SmoothLogisticBayes(d=2, seed=7), 150, seed=6)
        res = distill_vanilla(
            draw.dataset, NadarayaWatsonTeacherConfig(), ConstantStudentConfig()
        )
        expected = np.log(np.maximum(draw.dataset.labels, 1e-3)).mean(axis=0)
        assert np.abs(res.student.value - expected).max() < 1e-12

    def test_crossfit_with_common_field_matches_vanilla(self):
        # same probabilities in every fold and zero corrections: the two
        # pipelines fit the same student
        data = generate(TabularMixtureBayes(d=4, seed=5), 120, seed=7).dataset
        tcfg = ForestTeacherConfig(n_trees=10, seed=3)
        scfg = ForestStudentConfig(n_trees=5, seed=9)
        van = distill_vanilla(data, tcfg, scfg)
        plan = make_folds(data.n, 3, seed=1)
        bundle = NuisanceBundle(
            probs=van.probs,
            corrections=rebundle(
                fit_nuisances(data, plan, RidgeMeanTeacherConfig(), CorrectionPolicy("zero")),
                data, CorrectionPolicy("zero"),
            ).corrections,
            plan=plan,
            provenance=tuple(),
        )
        student = fit_student_on_bundle(data, bundle, scfg, LossSpec("sel"))
        probe = generate(TabularMixtureBayes(d=4, seed=5), 50, seed=8).dataset.features
        assert np.abs(student.predict(probe) - van.student.predict(probe)).max() < 1e-9

    def test_pooled_objective_identity(self):
        # pooled corrected loss equals the fold-size-weighted average of
        # per-fold corrected losses
        data = generate(TabularMixtureBayes(d=4, seed=5), 60, seed=9).dataset
        plan = make_folds(data.n, 4, seed=2)
        bundle = fit_nuisances(
            data, plan, ForestTeacherConfig(n_trees=5, seed=4), CorrectionPolicy("orthogonal")
        )
        rng = np.random.default_rng(0)
        scores = rng.normal(size=(data.n, data.k))
        loss = LossSpec("sel")
        total = pooled_objective(scores, data, bundle, loss)
        per_fold = 0.0
        from crossdistill import corrected_loss

        for t in range(plan.B):
            idx = plan.fold_indices(t)
            vals = [
                corrected_loss(
                    loss, scores[i], bundle.probs.probs[i], data.labels[i],
                    bundle.corrections.v[i],
                )
                for i in idx
            ]
            per_fold += len(idx) * np.mean(vals)
        assert abs(total - per_fold / data.n) < 1e-12

    def test_linear_student_pipeline(self):
        data = generate(TabularMixtureBayes(d=4, seed=5), 150, seed=10).dataset
        cfg = DistillConfig(
            teacher=ForestTeacherConfig(n_trees=10, seed=5),
            student=LinearStudentConfig(),
            policy=CorrectionPolicy("balanced", alpha=1.0),
            folds=3,
        )
        res = run_crossfit(data, cfg, seed=11)
        out = res.student.predict(data.features)
        assert out.shape == (150, 2) and np.all(np.isfinite(out))

    def test_ace_pipeline_runs(self):
        from crossdistill import SgdConfig

        data = generate(TabularMixtureBayes(d=4, seed=5), 90, seed=12).dataset
        cfg = DistillConfig(
            teacher=ForestTeacherConfig(n_trees=5, seed=6),
            student=LinearStudentConfig(),
            loss=LossSpec("ace", beta=2.0),
            policy=CorrectionPolicy("zero"),
            folds=3,
            sgd=SgdConfig(step0=0.05, decay_t0=500.0, epochs=5, seed=0),
        )
        res = run_crossfit(data, cfg, seed=13)
        assert np.all(np.isfinite(res.student.predict(data.features)))

    def test_forest_student_requires_sel(self):
        data = generate(TabularMixtureBayes(d=4, seed=5), 60, seed=14).dataset
        cfg = DistillConfig(
            teacher=ForestTeacherConfig(n_trees=5, seed=7),
            student=ForestStudentConfig(n_trees=3, seed=0),
            loss=LossSpec("ace", beta=1.0),
            folds=3,
        )
        with pytest.raises(InvalidInputError):
            run_crossfit(data, cfg, seed=15)

    def test_rebundle_reuses_probabilities(self):
        data = generate(TabularMixtureBayes(d=4, seed=5), 60, seed=16).dataset
        plan = make_folds(data.n, 3, seed=3)
        base = fit_nuisances(
            data, plan, ForestTeacherConfig(n_trees=4, seed=8), CorrectionPolicy("zero")
        )
        ortho = rebundle(base, data, CorrectionPolicy("orthogonal"))
        assert ortho.probs is base.probs
        assert np.array_equal(ortho.corrections.v, 1.0 / base.probs.probs)
