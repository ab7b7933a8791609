"""Evaluation metrics: rank-based AUC, accuracy, oracle mean squared
errors against the true class-probability function, and log-log rate
slopes with confidence intervals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import InvalidInputError, UndefinedMetricError
from .students import ConstantStudent


def _midranks(x):
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(x.shape[0])
    sx = x[order]
    i = 0
    while i < sx.shape[0]:
        j = i
        while j + 1 < sx.shape[0] and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc_binary(scores, labels):
    """Probability that a random positive outscores a random negative,
    ties counted one half, via the midrank statistic."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise InvalidInputError("scores and labels must be equal-length vectors")
    pos = labels == 1
    n_pos = int(np.count_nonzero(pos))
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC undefined: only one class present")
    ranks = _midranks(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def accuracy(scores, class_indices):
    scores = np.asarray(scores, dtype=np.float64)
    return float(np.mean(np.argmax(scores, axis=1) == np.asarray(class_indices)))


def teacher_mse(probs, bayes_probs):
    """Mean squared row distance between predicted and true probabilities,
    with its standard error."""
    p = probs.probs if hasattr(probs, "probs") else np.asarray(probs, dtype=np.float64)
    q = np.asarray(bayes_probs, dtype=np.float64)
    if p.shape != q.shape:
        raise InvalidInputError("probability matrices must share a shape")
    sq = np.sum((p - q) ** 2, axis=1)
    se = float(sq.std(ddof=1) / np.sqrt(sq.shape[0])) if sq.shape[0] > 1 else 0.0
    return float(sq.mean()), se


def student_mse_to_f0(student, oracle, m, seed):
    """Monte-Carlo estimate of the expected squared score distance between
    a student and the population-optimal student of its class.

    For constant students the optimal target is the constant
    E[log p0(X)] supplied by the oracle and the distance is computed
    exactly (the only uncertainty is the oracle's own target error, which
    is propagated).  Otherwise the target is log p0 pointwise on m fresh
    draws.
    """
    if isinstance(student, ConstantStudent):
        target, target_se = oracle.constant_log_target()
        diff = student.value - target
        value = float(np.sum(diff * diff))
        se = float(np.sqrt(np.sum((2.0 * np.abs(diff) * target_se) ** 2)))
        return value, se
    rng = np.random.default_rng(seed)
    X = oracle.sample_features(m, rng)
    f0 = np.log(oracle.p0(X))
    diff = student.predict(X) - f0
    sq = np.sum(diff * diff, axis=1)
    return float(sq.mean()), float(sq.std(ddof=1) / np.sqrt(m))


@dataclass(frozen=True)
class RateSlope:
    slope: float
    lo: float
    hi: float
    stderr: float


def fit_rate_slope(points, confidence=0.95):
    """Least-squares slope of log(error) on log(n) with a residual-based
    confidence interval."""
    pts = [(float(n), float(e)) for n, e in points]
    if len(pts) < 4:
        raise InvalidInputError("need at least four (n, error) points")
    if any(e <= 0.0 for _, e in pts):
        raise InvalidInputError("errors must be positive")
    x = np.log([n for n, _ in pts])
    y = np.log([e for _, e in pts])
    xc = x - x.mean()
    sxx = float(np.sum(xc * xc))
    slope = float(np.sum(xc * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = len(pts) - 2
    sigma2 = float(np.sum(resid * resid) / dof)
    stderr = float(np.sqrt(sigma2 / sxx))
    tcrit = float(stats.t.ppf(0.5 + confidence / 2.0, dof))
    return RateSlope(slope, slope - tcrit * stderr, slope + tcrit * stderr, stderr)
