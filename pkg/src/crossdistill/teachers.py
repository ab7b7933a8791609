"""Teacher models producing the clipped probability fields students distill from.

Three teachers:

* :class:`ForestTeacher` -- a random-forest classifier (bootstrap, Gini,
  sqrt(d) features per split).  Fitting is delegated to scikit-learn for
  speed, but the fitted trees are immediately extracted into plain arrays;
  all predictions run through those arrays, so a serialized teacher
  reproduces its predictions bit for bit.
* :class:`RidgeMeanTeacher` -- the constant shrunken label mean
  mean(y) / (1 + lambda) with lambda = c * n^(-1/4), clipped at the floor.
* :class:`NadarayaWatsonTeacher` -- kernel smoothing with the singular
  kernel K(u) = |u|^(-a) on |u| <= 1 and bandwidth h = n^(-1/(4+d)), which
  interpolates the training labels exactly at the training points.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from .core import (
    DEFAULT_CLIP,
    InvalidInputError,
    ProbabilityField,
    clip_probabilities,
)

COINCIDENT_DISTANCE = 1e-12


@dataclass(frozen=True)
class ForestTeacherConfig:
    n_trees: int = 100
    max_depth: int | None = None
    min_leaf: int = 1
    seed: int = 0
    clip_floor: float = DEFAULT_CLIP


@dataclass(frozen=True)
class RidgeMeanTeacherConfig:
    c: float = 1.0
    clip_floor: float = DEFAULT_CLIP


@dataclass(frozen=True)
class NadarayaWatsonTeacherConfig:
    a: float | None = None  # singularity exponent; defaults to d/4
    clip_floor: float = DEFAULT_CLIP


@dataclass
class TreeArrays:
    """One decision tree flattened to arrays.  Leaves have left == -1;
    value rows hold per-class probabilities (or regression means)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            mask = self.left[node] >= 0
            if not mask.any():
                return node
            at = node[mask]
            go_left = X[mask, self.feature[at]] <= self.threshold[at]
            node[mask] = np.where(go_left, self.left[at], self.right[at])

    def predict(self, X):
        return self.value[self.apply(X)]

    def to_payload(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_payload(cls, d):
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=np.float64),
        )


def extract_trees(forest, k, class_map=None):
    """Flatten a fitted scikit-learn ensemble into :class:`TreeArrays`.

    ``class_map`` gives the output column for each of the estimator's
    classes; classes absent from the training sample get zero probability.
    """
    out = []
    for est in forest.estimators_:
        t = est.tree_
        value = t.value.astype(np.float64)
        if class_map is not None:
            local = value.reshape(t.node_count, -1)
            sums = local.sum(axis=1, keepdims=True)
            sums[sums == 0.0] = 1.0
            local = local / sums
            full = np.zeros((t.node_count, k))
            full[:, class_map] = local
        else:
            full = value.reshape(t.node_count, -1)
            if full.shape[1] != k:
                raise InvalidInputError("tree output width does not match k")
        out.append(
            TreeArrays(
                feature=t.feature.astype(np.int64),
                threshold=t.threshold.astype(np.float64),
                left=t.children_left.astype(np.int64),
                right=t.children_right.astype(np.int64),
                value=full,
            )
        )
    return out


def _root_only_trees(data, n_trees, seed):
    # depth 0: every tree is a single leaf holding its bootstrap class mix
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        idx = rng.integers(0, data.n, size=data.n)
        freq = data.labels[idx].mean(axis=0)
        trees.append(
            TreeArrays(
                feature=np.array([-2], dtype=np.int64),
                threshold=np.array([-2.0]),
                left=np.array([-1], dtype=np.int64),
                right=np.array([-1], dtype=np.int64),
                value=freq[None, :],
            )
        )
    return trees


@dataclass
class ForestTeacher:
    trees: list
    k: int
    d: int
    config: ForestTeacherConfig

    def predict_raw(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise InvalidInputError(f"expected {self.d} feature columns")
        acc = np.zeros((X.shape[0], self.k))
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / len(self.trees)

    def predict_proba(self, X):
        return clip_probabilities(self.predict_raw(X), self.config.clip_floor)


def fit_forest_teacher(data, config):
    if data.n < 2:
        raise InvalidInputError("forest teacher needs at least two examples")
    if config.n_trees < 1:
        raise InvalidInputError("need at least one tree")
    if config.max_depth == 0:
        trees = _root_only_trees(data, config.n_trees, config.seed)
        return ForestTeacher(trees, data.k, data.d, config)
    y = data.class_indices
    forest = RandomForestClassifier(
        n_estimators=config.n_trees,
        max_depth=config.max_depth,
        min_samples_leaf=config.min_leaf,
        max_features="sqrt",
        bootstrap=True,
        random_state=config.seed,
    )
    forest.fit(data.features, y)
    class_map = forest.classes_.astype(np.int64)
    trees = extract_trees(forest, data.k, class_map)
    return ForestTeacher(trees, data.k, data.d, config)


@dataclass
class RidgeMeanTeacher:
    c: float
    lam: float
    label_mean: np.ndarray
    clip_floor: float

    @property
    def k(self):
        return self.label_mean.shape[0]

    def constant_probs(self):
        return np.maximum(self.label_mean / (1.0 + self.lam), self.clip_floor)

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        row = self.constant_probs()
        return ProbabilityField(np.tile(row, (X.shape[0], 1)), self.clip_floor)


def fit_ridge_mean_teacher(data, config):
    if not config.c > 0.0:
        raise InvalidInputError("shrinkage scale c must be positive")
    lam = config.c * data.n ** (-0.25)
    return RidgeMeanTeacher(
        c=config.c,
        lam=lam,
        label_mean=data.labels.mean(axis=0),
        clip_floor=config.clip_floor,
    )


@dataclass
class NadarayaWatsonTeacher:
    a: float
    bandwidth: float
    train_features: np.ndarray
    train_labels: np.ndarray
    clip_floor: float
    fallback: np.ndarray
    empty_neighborhoods: int = 0

    @property
    def k(self):
        return self.train_labels.shape[1]

    @property
    def d(self):
        return self.train_features.shape[1]

    def predict_raw(self, X, chunk=512):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise InvalidInputError(f"expected {self.d} feature columns")
        out = np.empty((X.shape[0], self.k))
        empties = 0
        train_sq = np.sum(self.train_features * self.train_features, axis=1)
        h_sq = self.bandwidth * self.bandwidth
        hit_sq = COINCIDENT_DISTANCE * COINCIDENT_DISTANCE
        # squared distances via the inner-product expansion lose ~eps*|x|^2
        # near zero, so candidate coincidences are re-resolved exactly
        scale = float(train_sq.max(initial=0.0)) + 1.0
        cand_sq = hit_sq + 64.0 * np.finfo(np.float64).eps * scale
        for start in range(0, X.shape[0], chunk):
            block = X[start : start + chunk]
            sq = np.sum(block * block, axis=1)[:, None] - 2.0 * (
                block @ self.train_features.T
            )
            sq += train_sq[None, :]
            np.maximum(sq, 0.0, out=sq)
            cand = np.argwhere(sq <= cand_sq)
            if cand.size:
                diff = block[cand[:, 0]] - self.train_features[cand[:, 1]]
                sq[cand[:, 0], cand[:, 1]] = np.sum(diff * diff, axis=1)
            hit = sq <= hit_sq
            # singular kernel: weight ~ dist^(-a) on the bandwidth ball;
            # the power is only evaluated on in-ball entries
            mask = (sq <= h_sq) & ~hit
            w = np.zeros_like(sq)
            w[mask] = np.maximum(sq[mask], hit_sq) ** (-0.5 * self.a)
            totals = w.sum(axis=1)
            empty = totals == 0.0
            safe = np.where(empty, 1.0, totals)
            block_out = (w @ self.train_labels) / safe[:, None]
            block_out[empty] = self.fallback
            hit_rows = np.flatnonzero(hit.any(axis=1))
            if hit_rows.size:
                block_out[hit_rows] = self.train_labels[np.argmax(hit[hit_rows], axis=1)]
                empty[hit_rows] = False
            empties += int(np.count_nonzero(empty))
            out[start : start + chunk] = block_out
        self.empty_neighborhoods += empties
        return out

    def predict_proba(self, X):
        return clip_probabilities(self.predict_raw(X), self.clip_floor)


def fit_nadaraya_watson_teacher(data, config):
    a = config.a if config.a is not None else data.d / 4.0
    if not 0.0 < a < data.d / 2.0:
        raise InvalidInputError(
            f"singularity exponent must lie in (0, {data.d / 2.0})"
        )
    return NadarayaWatsonTeacher(
        a=a,
        bandwidth=data.n ** (-1.0 / (4.0 + data.d)),
        train_features=data.features,
        train_labels=data.labels,
        clip_floor=config.clip_floor,
        fallback=data.labels.mean(axis=0),
    )


def fit_teacher(data, config):
    """Dispatch on the config type; warns when only one class is present."""
    if data.labels.sum(axis=0).max() == data.n:
        warnings.warn("teacher trained on a single-class sample", stacklevel=2)
    if isinstance(config, ForestTeacherConfig):
        return fit_forest_teacher(data, config)
    if isinstance(config, RidgeMeanTeacherConfig):
        return fit_ridge_mean_teacher(data, config)
    if isinstance(config, NadarayaWatsonTeacherConfig):
        return fit_nadaraya_watson_teacher(data, config)
    raise InvalidInputError(f"unknown teacher config {type(config).__name__}")


def reseeded(config, seed):
    """Copy of a teacher config with a new seed where one applies."""
    if isinstance(config, ForestTeacherConfig):
        return ForestTeacherConfig(
            n_trees=config.n_trees,
            max_depth=config.max_depth,
            min_leaf=config.min_leaf,
            seed=seed,
            clip_floor=config.clip_floor,
        )
    return config
