"""Synthetic families with known class-probability functions, plus CSV
ingestion for real tabular data.

Every synthetic family exposes the true conditional class probabilities
p0(x), so teacher error and student error against the population-optimal
score function can be measured directly.  Three families:

* ``constant``       -- p0 does not vary with x (entries at least twice the
                        clip floor); covariates are uniform noise.
* ``smooth-logistic``-- binary labels with p0 = sigmoid of an affine plus
                        sine score on Uniform[0,1]^d; the score has bounded
                        coefficients, so p0 has a Lipschitz gradient and
                        stays well inside (0, 1).
* ``tabular-mixture``-- binary labels from overlapping per-class Gaussian
                        mixtures; p0 follows from Bayes' rule.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .core import (
    DEFAULT_CLIP,
    InvalidInputError,
    LabeledDataset,
    ParseError,
    one_hot,
)

F0_MC_DRAWS = 1_000_000


class BayesOracle:
    """Base class: subclasses define k, d, sample_features and p0."""

    def p0(self, X):
        raise NotImplementedError

    def sample_features(self, n, rng):
        raise NotImplementedError

    def constant_log_target(self):
        """E[log p0(X)] with a standard error, the target of the constant
        student class.  Estimated once by Monte Carlo and cached."""
        cached = getattr(self, "_log_target", None)
        if cached is None:
            rng = np.random.default_rng(getattr(self, "seed", 0) + 987654321)
            logs = np.log(self.p0(self.sample_features(F0_MC_DRAWS, rng)))
            cached = (
                logs.mean(axis=0),
                logs.std(axis=0, ddof=1) / np.sqrt(F0_MC_DRAWS),
            )
            self._log_target = cached
        return cached


@dataclass
class ConstantBayes(BayesOracle):
    """p0 identical at every x; features are Uniform[0,1]^d noise."""

    probs: np.ndarray
    d: int = 1
    clip_floor: float = DEFAULT_CLIP

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.shape[0] < 2:
            raise InvalidInputError("need a probability vector with k >= 2")
        if abs(p.sum() - 1.0) > 1e-9:
            raise InvalidInputError("class probabilities must sum to one")
        if p.min() < 2.0 * self.clip_floor:
            raise InvalidInputError(
                "constant family requires every class probability to be at "
                "least twice the clip floor"
            )
        self.probs = p

    @property
    def k(self):
        return self.probs.shape[0]

    def sample_features(self, n, rng):
        return rng.random((n, self.d))

    def p0(self, X):
        return np.tile(self.probs, (np.asarray(X).shape[0], 1))

    def constant_log_target(self):
        return np.log(self.probs), np.zeros_like(self.probs)


@dataclass
class SmoothLogisticBayes(BayesOracle):
    """Binary labels with p0(x) = sigmoid(linear + sine score) on the unit
    cube.  Coefficient scales are bounded so the score stays within
    +-(linear_scale * sqrt(d)/2 + amplitude)."""

    d: int = 2
    seed: int = 0
    linear_scale: float = 1.2
    amplitude: float = 1.0
    frequency: float = 0.5
    clip_floor: float = DEFAULT_CLIP
    k: int = field(default=2, init=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        direction = rng.normal(size=self.d)
        self.direction = direction / np.linalg.norm(direction)
        slope = rng.normal(size=self.d)
        self.slope = self.linear_scale * slope / np.linalg.norm(slope)
        self.phase = rng.random() * 2.0 * np.pi
        bound = self.linear_scale * np.sqrt(self.d) / 2.0 + self.amplitude
        floor = 1.0 / (1.0 + np.exp(bound))
        if floor < 2.0 * self.clip_floor:
            raise InvalidInputError(
                "score bound too large: p0 would leave [2*floor, 1 - 2*floor]"
            )
        self._check_floor_condition()

    def _score(self, X):
        centered = X - 0.5
        return centered @ self.slope + self.amplitude * np.sin(
            2.0 * np.pi * self.frequency * (X @ self.direction) + self.phase
        )

    def sample_features(self, n, rng):
        return rng.random((n, self.d))

    def p0(self, X):
        X = np.asarray(X, dtype=np.float64)
        s = 1.0 / (1.0 + np.exp(-self._score(X)))
        return np.column_stack([1.0 - s, s])

    def _check_floor_condition(self):
        # the interpolating-teacher analysis needs the clip floor below
        # E[p (1-p)^2] / (4 E[(1-p)/p]) for each class; warn if violated
        rng = np.random.default_rng(self.seed + 13)
        p = self.p0(self.sample_features(20000, rng))
        bound = (p * (1.0 - p) ** 2).mean(axis=0) / (
            4.0 * ((1.0 - p) / p).mean(axis=0)
        )
        if (self.clip_floor >= bound).any():
            warnings.warn(
                f"clip floor {self.clip_floor} exceeds the admissible bound "
                f"{bound.min():.2e} for this family",
                stacklevel=2,
            )


@dataclass
class TabularMixtureBayes(BayesOracle):
    """Binary labels from two overlapping Gaussian mixtures; overlap
    (spread vs. separation) controls how noisy the labels are."""

    d: int = 6
    clusters: int = 4
    separation: float = 0.9
    spread: float = 1.0
    seed: int = 42
    k: int = field(default=2, init=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        self.means = rng.normal(scale=self.separation, size=(2, self.clusters, self.d))

    def sample_features(self, n, rng):
        cls = rng.integers(0, 2, size=n)
        comp = rng.integers(0, self.clusters, size=n)
        return self.means[cls, comp] + rng.normal(scale=self.spread, size=(n, self.d))

    def _class_log_density(self, X):
        # log of the mixture density of each class at each row
        diff = X[:, None, None, :] - self.means[None, :, :, :]
        sq = np.sum(diff * diff, axis=3)
        log_comp = -0.5 * sq / (self.spread**2)
        return logsumexp(log_comp, axis=2) - np.log(self.clusters)

    def p0(self, X):
        X = np.asarray(X, dtype=np.float64)
        logd = self._class_log_density(X)
        p1 = 1.0 / (1.0 + np.exp(logd[:, 0] - logd[:, 1]))
        return np.column_stack([1.0 - p1, p1])


@dataclass(frozen=True)
class SyntheticDraw:
    dataset: LabeledDataset
    bayes_probs: np.ndarray


def generate(oracle, n, seed):
    """Draw n examples: X from the family's covariate law, labels from
    Multinomial(p0(X)).  The true p0 values are returned alongside."""
    if n < 1:
        raise InvalidInputError("need at least one example")
    rng = np.random.default_rng(seed)
    X = oracle.sample_features(n, rng)
    p0 = oracle.p0(X)
    cum = np.cumsum(p0, axis=1)
    cum[:, -1] = 1.0
    draws = rng.random((n, 1))
    idx = np.sum(draws > cum[:, :-1], axis=1)
    return SyntheticDraw(
        dataset=LabeledDataset(X, one_hot(idx, oracle.k)),
        bayes_probs=p0,
    )


@dataclass(frozen=True)
class CsvSchema:
    label_column: str
    feature_columns: tuple | None = None


@dataclass(frozen=True)
class LoadedTable:
    dataset: LabeledDataset
    feature_names: tuple
    classes: tuple


def _try_float(value):
    try:
        return float(value)
    except ValueError:
        return None


def load_csv(path, schema):
    """Read an RFC-4180 CSV with a header row into a LabeledDataset.

    Feature columns whose every cell parses as a number stay numeric;
    anything else is one-hot encoded in sorted category order.  Label
    values map to class indices in sorted order.  All failures raise
    ParseError with the offending line number.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(str(exc)) from exc
    if not rows:
        raise ParseError("empty file")
    header = rows[0]
    if schema.label_column not in header:
        raise ParseError(f"label column {schema.label_column!r} not found", line=1)
    if len(rows) < 2:
        raise ParseError("no data rows", line=1)
    names = (
        list(schema.feature_columns)
        if schema.feature_columns is not None
        else [h for h in header if h != schema.label_column]
    )
    for name in names:
        if name not in header:
            raise ParseError(f"feature column {name!r} not found", line=1)
    col_of = {h: i for i, h in enumerate(header)}
    label_i = col_of[schema.label_column]

    raw = {name: [] for name in names}
    labels = []
    for ln, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} cells, found {len(row)}", line=ln
            )
        labels.append(row[label_i])
        for name in names:
            raw[name].append(row[col_of[name]])

    columns = []
    feature_names = []
    for name in names:
        values = raw[name]
        floats = [_try_float(v) for v in values]
        if all(f is not None for f in floats):
            columns.append(np.asarray(floats, dtype=np.float64))
            feature_names.append(name)
        else:
            for cat in sorted(set(values)):
                columns.append(np.asarray([1.0 if v == cat else 0.0 for v in values]))
                feature_names.append(f"{name}={cat}")

    classes = sorted(set(labels))
    numeric = [_try_float(c) for c in classes]
    if all(v is not None for v in numeric):
        classes = [c for _, c in sorted(zip(numeric, classes))]
    if len(classes) < 2:
        raise ParseError("label column has fewer than two classes", line=2)
    class_index = {c: i for i, c in enumerate(classes)}
    idx = np.asarray([class_index[v] for v in labels], dtype=np.int64)

    features = np.column_stack(columns) if columns else np.empty((len(labels), 0))
    if features.shape[1] == 0:
        raise ParseError("no feature columns", line=1)
    if not np.all(np.isfinite(features)):
        bad = int(np.argwhere(~np.isfinite(features))[0][0])
        raise ParseError("non-finite feature value", line=bad + 2)
    return LoadedTable(
        dataset=LabeledDataset(features, one_hot(idx, len(classes))),
        feature_names=tuple(feature_names),
        classes=tuple(classes),
    )


def save_csv(path, features, class_indices, feature_names=None, label_column="label",
             classes=None):
    """Write features and labels as CSV; float cells use repr so a reload
    reproduces the matrix exactly."""
    features = np.asarray(features, dtype=np.float64)
    class_indices = np.asarray(class_indices)
    n, d = features.shape
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(d)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(feature_names) + [label_column])
        for i in range(n):
            label = class_indices[i] if classes is None else classes[class_indices[i]]
            writer.writerow([repr(float(v)) for v in features[i]] + [label])
