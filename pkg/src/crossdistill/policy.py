"""Selection of the per-example correction weights v(x).

Three modes:

* ``zero``        -- no correction (plain plug-in distillation),
* ``orthogonal``  -- v = 1/p, the fully debiasing choice, which can blow up
                     the variance when probabilities sit near the clip floor,
* ``balanced``    -- the closed-form minimizer of a bias/variance objective
                     with tradeoff weight alpha:

                         |v * (y - p)|^2 + alpha * |1/p - v|^2

                     which separates per coordinate and gives
                         v_j = (alpha / p_j) / ((y_j - p_j)^2 + alpha).

Large alpha recovers the orthogonal weights, small alpha the zero weights.
The "plugin" variance estimate replaces the sampled (y_j - p_j)^2 with
p_j^2 (1 - p_j)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError

ALPHA_GRID_DEFAULT = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class CorrectionPolicy:
    mode: str = "zero"
    alpha: float = 1.0
    variance_estimate: str = "sample"

    def __post_init__(self):
        if self.mode not in ("zero", "orthogonal", "balanced"):
            raise InvalidInputError(f"unknown policy mode {self.mode!r}")
        if self.mode == "balanced" and not self.alpha > 0.0:
            raise InvalidInputError("balanced mode needs alpha > 0")
        if self.variance_estimate not in ("sample", "plugin"):
            raise InvalidInputError(
                f"unknown variance estimate {self.variance_estimate!r}"
            )

    def weights(self, y, p):
        """Correction weights for labels y and clipped probabilities p
        (either (k,) vectors or (n, k) batches)."""
        p = np.asarray(p, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.mode == "zero":
            return np.zeros_like(p)
        if self.mode == "orthogonal":
            return 1.0 / p
        if self.variance_estimate == "sample":
            return balanced_weights(y, p, self.alpha)
        return balanced_weights_plugin(p, self.alpha)


def policy_from_alpha(alpha, variance_estimate="sample"):
    """Map a sweep grid value onto a policy: 0 -> zero, inf -> orthogonal,
    otherwise the balanced closed form."""
    if alpha == 0:
        return CorrectionPolicy("zero")
    if math.isinf(alpha):
        return CorrectionPolicy("orthogonal")
    return CorrectionPolicy("balanced", alpha=alpha, variance_estimate=variance_estimate)


def correction_objective(v, y, p, alpha):
    """The per-example tradeoff objective minimized by the balanced weights."""
    v = np.asarray(v, dtype=np.float64)
    diff = v * (y - p)
    pull = 1.0 / p - v
    return float(np.sum(diff * diff) + alpha * np.sum(pull * pull))


def balanced_weights(y, p, alpha):
    """Closed-form minimizer of the sampled tradeoff objective."""
    if not alpha > 0.0:
        raise InvalidInputError("alpha must be positive")
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if p.size == 0 or p.min() <= 0.0:
        raise InvalidInputError("probabilities must be strictly positive")
    r = y - p
    return (alpha / p) / (r * r + alpha)


def balanced_weights_plugin(p, alpha):
    """Closed-form minimizer with the plug-in variance p^2 (1-p)^2."""
    if not alpha > 0.0:
        raise InvalidInputError("alpha must be positive")
    p = np.asarray(p, dtype=np.float64)
    if p.size == 0 or p.min() <= 0.0:
        raise InvalidInputError("probabilities must be strictly positive")
    s = p * (1.0 - p)
    return (alpha / p) / (s * s + alpha)


def select_alpha_cv(dataset, candidates, folds, config, seed=0, metric="corrected_sq"):
    """Pick the tradeoff weight alpha by cross-validation.

    Each candidate is mapped through :func:`policy_from_alpha`, the full
    cross-fitted distillation pipeline in ``config`` is run on the training
    folds, and the held-out fold is scored with ``metric`` ("corrected_sq"
    square loss against orthogonally corrected held-out targets, "auc", or
    "accuracy").  Returns ``(best_alpha, scores)`` with one score per
    candidate, in candidate order; ties resolve toward the smaller alpha,
    duplicates toward the first occurrence.
    """
    from . import crossfit  # deferred: crossfit imports this module

    candidates = list(candidates)
    if not candidates:
        raise InvalidInputError("need at least one alpha candidate")
    for a in candidates:
        if a < 0:
            raise InvalidInputError("alpha candidates must be nonnegative")
    if folds < 2:
        raise InvalidInputError("need at least two folds")
    if dataset.n < folds:
        raise InvalidInputError("fewer examples than folds")

    plan = crossfit.make_folds(dataset.n, folds, seed)
    per_fold = [[] for _ in candidates]
    for t in range(folds):
        train = dataset.subset(np.flatnonzero(plan.assignments != t))
        val = dataset.subset(np.flatnonzero(plan.assignments == t))
        # the fold teachers do not depend on alpha: fit them once and only
        # swap the correction weights per candidate
        inner_plan = crossfit.make_folds(train.n, config.folds, seed + 1000 * t)
        base = crossfit.fit_nuisances(
            train, inner_plan, config.teacher, CorrectionPolicy("zero"),
            seed=seed + 1000 * t,
        )
        scorer = crossfit.make_holdout_scorer(train, val, config, metric)
        for i, a in enumerate(candidates):
            policy = policy_from_alpha(a, config.policy.variance_estimate)
            bundle = crossfit.rebundle(base, train, policy)
            student = crossfit.fit_student_on_bundle(
                train, bundle, config.student, config.loss, config.sgd
            )
            per_fold[i].append(scorer(student))
    scores = [float(np.mean(s)) for s in per_fold]

    higher_better = metric in ("auc", "accuracy")
    best_i = 0
    for i in range(1, len(candidates)):
        better = scores[i] > scores[best_i] if higher_better else scores[i] < scores[best_i]
        if better or (scores[i] == scores[best_i] and candidates[i] < candidates[best_i]):
            best_i = i
    return candidates[best_i], scores
