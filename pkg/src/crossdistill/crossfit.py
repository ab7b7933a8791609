"""Fold planning and the two distillation pipelines.

``distill_vanilla`` fits the teacher on all data and distills the student
from the teacher's predictions on that same data (deliberate reuse).
``run_crossfit`` partitions the data into B near-equal folds, fits each
fold's teacher and correction weights strictly out of fold, and fits one
student on the pooled corrected objective.  Fold provenance (teacher seed
and a hash of the excluded indices) is recorded so data reuse can be
audited after the fact.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import CorrectionField, InvalidInputError, LabeledDataset, ProbabilityField
from .losses import LossSpec, corrected_loss, corrected_sel_labels
from .metrics import accuracy, auc_binary
from .policy import CorrectionPolicy
from .students import (
    ConstantStudent,
    ConstantStudentConfig,
    ForestStudentConfig,
    LinearStudent,
    LinearStudentConfig,
    SgdConfig,
    fit_constant_sel,
    fit_forest_student,
    fit_linear_sel,
    sgd_fit,
)
from .teachers import fit_teacher, reseeded


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of each example to one of B folds; sizes differ by at
    most one, with earlier folds taking the extra examples."""

    assignments: np.ndarray
    B: int
    seed: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if self.B < 2:
            raise InvalidInputError("need at least two folds")
        if a.ndim != 1 or a.size < self.B:
            raise InvalidInputError("more folds than examples")
        if a.min() < 0 or a.max() >= self.B:
            raise InvalidInputError("fold ids out of range")
        sizes = np.bincount(a, minlength=self.B)
        if sizes.max() - sizes.min() > 1:
            raise InvalidInputError("fold sizes differ by more than one")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignments", a)

    @property
    def n(self):
        return self.assignments.shape[0]

    def fold_indices(self, t):
        return np.flatnonzero(self.assignments == t)

    def complement_indices(self, t):
        return np.flatnonzero(self.assignments != t)


def make_folds(n, B, seed, stratify_labels=None):
    """Seeded permutation chunked into B near-equal folds.  Passing class
    indices as ``stratify_labels`` deals each class round-robin instead."""
    if not 2 <= B <= n:
        raise InvalidInputError(f"need 2 <= B <= n, got B={B}, n={n}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=np.int64)
    if stratify_labels is None:
        perm = rng.permutation(n)
        sizes = np.full(B, n // B)
        sizes[: n % B] += 1
        start = 0
        for t in range(B):
            assignments[perm[start : start + sizes[t]]] = t
            start += sizes[t]
    else:
        stratify_labels = np.asarray(stratify_labels)
        offset = 0
        for cls in np.unique(stratify_labels):
            idx = np.flatnonzero(stratify_labels == cls)
            idx = idx[rng.permutation(idx.size)]
            assignments[idx] = (np.arange(idx.size) + offset) % B
            offset += idx.size
    return FoldPlan(assignments, B, seed)


def excluded_indices_hash(indices):
    data = np.sort(np.asarray(indices, dtype=np.int64)).tobytes()
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class FoldProvenance:
    fold: int
    teacher_seed: int | None
    excluded_hash: str


@dataclass(frozen=True)
class NuisanceBundle:
    """Out-of-fold teacher probabilities and correction weights for every
    example, plus the plan and per-fold provenance they were built under."""

    probs: ProbabilityField
    corrections: CorrectionField
    plan: FoldPlan
    provenance: tuple

    def __post_init__(self):
        if self.probs.n != self.plan.n or self.corrections.v.shape != self.probs.probs.shape:
            raise InvalidInputError("bundle fields must cover every example")


def _fold_seed(seed, t):
    return int((seed * 1000003 + 7919 * (t + 1)) % (2**31 - 1))


def fit_nuisances(data, plan, teacher_config, policy, seed=0):
    """Fit each fold's teacher on the fold's complement and evaluate
    probabilities and correction weights on the fold itself."""
    if plan.n != data.n:
        raise InvalidInputError("plan does not match dataset size")
    probs = np.empty_like(data.labels)
    v = np.empty_like(data.labels)
    provenance = []
    clip_floor = teacher_config.clip_floor
    for t in range(plan.B):
        fold = plan.fold_indices(t)
        rest = plan.complement_indices(t)
        cfg = reseeded(teacher_config, _fold_seed(seed, t))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            single_class = data.labels[rest].sum(axis=0).max() == rest.size
            teacher = fit_teacher(data.subset(rest), cfg)
        if single_class:
            warnings.warn(
                f"fold {t}: out-of-fold sample has a single class; teacher degenerates",
                stacklevel=2,
            )
        field = teacher.predict_proba(data.features[fold])
        probs[fold] = field.probs
        v[fold] = policy.weights(data.labels[fold], field.probs)
        provenance.append(
            FoldProvenance(
                fold=t,
                teacher_seed=getattr(cfg, "seed", None),
                excluded_hash=excluded_indices_hash(fold),
            )
        )
    return NuisanceBundle(
        probs=ProbabilityField(probs, clip_floor),
        corrections=CorrectionField(v),
        plan=plan,
        provenance=tuple(provenance),
    )


def rebundle(bundle, data, policy):
    """Recompute the correction weights of a bundle under a new policy.

    The out-of-fold probabilities (and hence the fold teachers) are reused,
    so sweeping over policies costs no additional teacher fits.
    """
    v = policy.weights(data.labels, bundle.probs.probs)
    return NuisanceBundle(
        probs=bundle.probs,
        corrections=CorrectionField(v),
        plan=bundle.plan,
        provenance=bundle.provenance,
    )


@dataclass(frozen=True)
class DistillConfig:
    """Everything the cross-fitted pipeline needs besides the data."""

    teacher: object
    student: object
    loss: LossSpec = LossSpec("sel")
    policy: CorrectionPolicy = CorrectionPolicy("zero")
    folds: int = 10
    sgd: SgdConfig = SgdConfig(step0=0.05, decay_t0=2000.0, epochs=20)

    def with_policy(self, policy):
        return replace(self, policy=policy)


def _fit_student_sel(features, targets, student_config):
    if isinstance(student_config, ConstantStudentConfig):
        return fit_constant_sel(targets, student_config.clip_floor)
    if isinstance(student_config, LinearStudentConfig):
        return fit_linear_sel(features, targets)
    if isinstance(student_config, ForestStudentConfig):
        return fit_forest_student(features, targets, student_config)
    raise InvalidInputError(f"unknown student config {type(student_config).__name__}")


def _fit_student_generic(data, probs, corrections, loss, student_config, sgd_cfg):
    if isinstance(student_config, ForestStudentConfig):
        raise InvalidInputError("forest students require the squared-loss reduction")
    if isinstance(student_config, ConstantStudentConfig):
        init = ConstantStudent(np.zeros(data.k), student_config.clip_floor)
    else:
        init = LinearStudent(np.zeros((data.k, data.d)), np.zeros(data.k))
    student, _ = sgd_fit(init, data, probs, corrections, loss, sgd_cfg)
    return student


def fit_student_on_bundle(data, bundle, student_config, loss, sgd_cfg=None):
    """Fit one student on the pooled corrected objective of a bundle."""
    if bundle.plan.n != data.n:
        raise InvalidInputError("bundle does not cover the dataset")
    if loss.kind == "sel":
        targets = corrected_sel_labels(
            bundle.probs.probs, data.labels, bundle.corrections.v
        )
        return _fit_student_sel(data.features, targets, student_config)
    return _fit_student_generic(
        data, bundle.probs, bundle.corrections, loss, student_config,
        sgd_cfg or SgdConfig(),
    )


@dataclass
class CrossfitResult:
    student: object
    bundle: NuisanceBundle
    plan: FoldPlan


def run_crossfit(data, config, seed=0):
    """The full pipeline: plan folds, fit out-of-fold nuisances, fit the
    student on the pooled corrected objective."""
    plan = make_folds(data.n, config.folds, seed)
    bundle = fit_nuisances(data, plan, config.teacher, config.policy, seed=seed)
    student = fit_student_on_bundle(data, bundle, config.student, config.loss, config.sgd)
    return CrossfitResult(student=student, bundle=bundle, plan=plan)


@dataclass
class VanillaResult:
    student: object
    teacher: object
    probs: ProbabilityField


def distill_vanilla(data, teacher_config, student_config, loss=LossSpec("sel"), sgd_cfg=None):
    """Plug-in distillation with deliberate data reuse: the teacher is fit
    on all the data and the student mimics it on those same points."""
    teacher = fit_teacher(data, teacher_config)
    probs = teacher.predict_proba(data.features)
    zeros = CorrectionField.zeros(data.n, data.k)
    if loss.kind == "sel":
        targets = corrected_sel_labels(probs.probs, data.labels, zeros.v)
        student = _fit_student_sel(data.features, targets, student_config)
    else:
        student = _fit_student_generic(
            data, probs, zeros, loss, student_config, sgd_cfg or SgdConfig()
        )
    return VanillaResult(student=student, teacher=teacher, probs=probs)


def pooled_objective(scores, data, bundle, loss):
    """Average corrected loss of fixed score rows under a bundle."""
    scores = np.asarray(scores, dtype=np.float64)
    P = bundle.probs.probs
    V = bundle.corrections.v
    return float(
        np.mean(
            [
                corrected_loss(loss, scores[i], P[i], data.labels[i], V[i])
                for i in range(data.n)
            ]
        )
    )


def make_holdout_scorer(train, val, config, metric="corrected_sq"):
    """Build a reusable ``scorer(student) -> float`` for held-out data.

    ``corrected_sq`` measures squared distance to orthogonally corrected
    targets built from a teacher fit once on the training split (lower is
    better, and independent of whatever policy trained the student);
    ``auc`` and ``accuracy`` are the usual ranking/classification metrics
    (higher is better).
    """
    if metric == "corrected_sq":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            teacher = fit_teacher(train, config.teacher)
        field = teacher.predict_proba(val.features)
        targets = corrected_sel_labels(field.probs, val.labels, 1.0 / field.probs)

        def scorer(student):
            r = student.predict(val.features) - targets
            return float(0.5 * np.mean(np.sum(r * r, axis=1)))

        return scorer
    if metric == "auc":
        if val.k != 2:
            raise InvalidInputError("AUC needs a binary problem")

        def scorer(student):
            scores = student.predict(val.features)
            return auc_binary(scores[:, 1] - scores[:, 0], val.class_indices)

        return scorer
    if metric == "accuracy":

        def scorer(student):
            return accuracy(student.predict(val.features), val.class_indices)

        return scorer
    raise InvalidInputError(f"unknown metric {metric!r}")


def holdout_score(student, train, val, config, metric="corrected_sq"):
    return make_holdout_scorer(train, val, config, metric)(student)


def verify_fold_isolation(data, plan, teacher_config, seed=0, perm_seed=12345):
    """Permutation audit: for each fold, refit its teacher after shuffling
    that fold's labels and check the fold predictions are unchanged.
    Returns one bool per fold."""
    rng = np.random.default_rng(perm_seed)
    ok = []
    for t in range(plan.B):
        fold = plan.fold_indices(t)
        rest = plan.complement_indices(t)
        cfg = reseeded(teacher_config, _fold_seed(seed, t))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            base = fit_teacher(data.subset(rest), cfg).predict_proba(data.features[fold])
            labels = data.labels.copy()
            labels[fold] = labels[fold][rng.permutation(fold.size)]
            permuted = LabeledDataset(data.features, labels)
            again = fit_teacher(permuted.subset(rest), cfg).predict_proba(
                permuted.features[fold]
            )
        ok.append(bool(np.array_equal(base.probs, again.probs)))
    return ok
