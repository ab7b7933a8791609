"""Student models and their fitting routines.

Students map features to a k-vector of scores.  Squared-loss fitting always
goes through the corrected-target reduction (regress onto
``corrected_sel_labels``): a constant student takes the clamped target
mean, a linear student the least-squares solution, and a forest student a
multi-output regression forest.  The stochastic gradient loop implements
the singly-stochastic corrected update

    theta <- theta - eta_t * J_theta(x)^T grad_f corrected_loss

and is used for the annealed cross-entropy loss and for step-size
experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.ensemble import RandomForestRegressor

from .core import DEFAULT_CLIP, DivergenceError, InvalidInputError
from .losses import grad_corrected
from .teachers import extract_trees


@dataclass(frozen=True)
class ConstantStudentConfig:
    clip_floor: float = DEFAULT_CLIP


@dataclass(frozen=True)
class LinearStudentConfig:
    pass


@dataclass(frozen=True)
class ForestStudentConfig:
    n_trees: int = 10
    max_depth: int | None = None
    min_leaf: int = 1
    seed: int = 0


@dataclass
class ConstantStudent:
    """Predicts the same score vector everywhere; coordinates live in the
    box [log(clip_floor), 0]."""

    value: np.ndarray
    clip_floor: float = DEFAULT_CLIP

    def __post_init__(self):
        lo = np.log(self.clip_floor)
        self.value = np.clip(np.asarray(self.value, dtype=np.float64), lo, 0.0)

    @property
    def k(self):
        return self.value.shape[0]

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        return np.tile(self.value, (X.shape[0], 1))


@dataclass
class LinearStudent:
    weights: np.ndarray  # (k, d)
    bias: np.ndarray  # (k,)

    @property
    def k(self):
        return self.bias.shape[0]

    @property
    def d(self):
        return self.weights.shape[1]

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise InvalidInputError(f"expected {self.d} feature columns")
        return X @ self.weights.T + self.bias

    def theta(self):
        return np.concatenate([self.weights.ravel(), self.bias])


@dataclass
class RegressionForestStudent:
    trees: list
    k: int
    d: int
    config: ForestStudentConfig

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise InvalidInputError(f"expected {self.d} feature columns")
        acc = np.zeros((X.shape[0], self.k))
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / len(self.trees)


def predict_scores(student, X):
    """Score matrix for any student; class prediction is the row argmax and
    binary ranking uses the margin f_1 - f_0."""
    return student.predict(np.asarray(X, dtype=np.float64))


def fit_constant_sel(targets, clip_floor=DEFAULT_CLIP):
    """Constant minimizer of the empirical squared loss on the given
    (n, k) targets: the columnwise mean clamped into the score box."""
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim != 2 or targets.shape[0] == 0:
        raise InvalidInputError("need a nonempty 2-d target matrix")
    if not np.all(np.isfinite(targets)):
        raise InvalidInputError("targets must be finite")
    return ConstantStudent(targets.mean(axis=0), clip_floor)


def fit_linear_sel(features, targets):
    """Least-squares linear fit of the targets on the features."""
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    design = np.hstack([features, np.ones((features.shape[0], 1))])
    coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
    return LinearStudent(weights=coef[:-1].T.copy(), bias=coef[-1].copy())


def fit_forest_student(features, targets, config):
    """Multi-output regression forest (variance-reduction splits) on the
    corrected targets; deterministic given the seed."""
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if not np.all(np.isfinite(targets)):
        raise InvalidInputError("targets must be finite")
    if targets.ndim != 2:
        raise InvalidInputError("targets must be (n, k)")
    forest = RandomForestRegressor(
        n_estimators=config.n_trees,
        max_depth=config.max_depth,
        min_samples_leaf=config.min_leaf,
        criterion="squared_error",
        bootstrap=True,
        random_state=config.seed,
    )
    forest.fit(features, targets)
    trees = extract_trees(forest, targets.shape[1])
    return RegressionForestStudent(trees, targets.shape[1], features.shape[1], config)


@dataclass(frozen=True)
class SgdConfig:
    """step_t = step0 (constant) or step0 / (1 + t / decay_t0)."""

    step0: float = 0.1
    decay_t0: float | None = None
    epochs: int = 10
    batch_size: int = 1
    seed: int = 0

    def step(self, t):
        if self.decay_t0 is None:
            return self.step0
        return self.step0 / (1.0 + t / self.decay_t0)


def sgd_fit(student, data, probs, v, loss, cfg):
    """Run seeded single-pass-per-epoch SGD on the corrected loss.

    ``student`` provides the initial parameters (a LinearStudent or, for
    gradient steps on the score vector alone, a ConstantStudent).  Returns
    ``(fitted_student, per_epoch_objective)``; raises DivergenceError
    naming the iteration if parameters stop being finite.
    """
    X = data.features
    Y = data.labels
    P = probs.probs if hasattr(probs, "probs") else np.asarray(probs, dtype=np.float64)
    V = v.v if hasattr(v, "v") else np.asarray(v, dtype=np.float64)
    n = X.shape[0]
    if P.shape != Y.shape or V.shape != Y.shape:
        raise InvalidInputError("probability and correction fields must be (n, k)")
    if not cfg.step0 >= 0.0:
        raise InvalidInputError("step size must be nonnegative")

    constant = isinstance(student, ConstantStudent)
    if constant:
        W = None
        b = student.value.copy()
    else:
        W = student.weights.copy()
        b = student.bias.copy()

    rng = np.random.default_rng(cfg.seed)
    trace = []
    t = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            rows = order[start : start + cfg.batch_size]
            eta = cfg.step(t)
            gW = None
            gb = np.zeros_like(b)
            for i in rows:
                f = b if constant else W @ X[i] + b
                g = grad_corrected(loss, f, P[i], Y[i], V[i])
                if not np.all(np.isfinite(g)):
                    raise DivergenceError(f"non-finite gradient at iteration {t}")
                gb += g
                if not constant:
                    gW = np.outer(g, X[i]) if gW is None else gW + np.outer(g, X[i])
            scale = eta / len(rows)
            b -= scale * gb
            if not constant:
                W -= scale * gW
            if not np.all(np.isfinite(b)) or (W is not None and not np.all(np.isfinite(W))):
                raise DivergenceError(f"parameters diverged at iteration {t}")
            t += 1
        F = np.tile(b, (n, 1)) if constant else X @ W.T + b
        with np.errstate(over="ignore"):
            obj = _mean_corrected_objective(F, P, Y, V, loss)
        if not np.isfinite(obj):
            raise DivergenceError(f"objective diverged at iteration {t}")
        trace.append(obj)

    if constant:
        fitted = ConstantStudent(b, student.clip_floor)
    else:
        fitted = LinearStudent(W, b)
    return fitted, trace


def _mean_corrected_objective(F, P, Y, V, loss):
    from .losses import corrected_loss

    n = F.shape[0]
    return float(
        np.mean([corrected_loss(loss, F[i], P[i], Y[i], V[i]) for i in range(n)])
    )
