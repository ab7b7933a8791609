"""Shared numeric types: labeled datasets, clipped probability fields,
diagonal correction fields, and the small simplex utilities everything
else builds on.

All arrays are float64 / int64 numpy arrays.  Types are frozen after
construction and their arrays are marked read-only, so instances can be
shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_CLIP = 1e-3


class InvalidInputError(ValueError):
    """Raised when an operation receives inputs outside its domain."""


class UndefinedMetricError(ValueError):
    """Raised when a metric is undefined for the given data (e.g. AUC with one class)."""


class DivergenceError(RuntimeError):
    """Raised when an iterative fit produces non-finite values."""


class ParseError(ValueError):
    """Raised on malformed input files; carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _require_finite(a, name):
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite values")


@dataclass(frozen=True)
class LabeledDataset:
    """An (n, d) feature matrix paired with (n, k) one-hot labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.float64)
        if features.ndim != 2 or labels.ndim != 2:
            raise InvalidInputError("features and labels must be 2-d arrays")
        n, d = features.shape
        if labels.shape[0] != n:
            raise InvalidInputError(
                f"features have {n} rows but labels have {labels.shape[0]}"
            )
        if n < 1 or d < 1:
            raise InvalidInputError("need at least one example and one feature")
        if labels.shape[1] < 2:
            raise InvalidInputError("need at least two classes")
        _require_finite(features, "features")
        if not np.all((labels == 0.0) | (labels == 1.0)):
            raise InvalidInputError("labels must be binary")
        if not np.all(labels.sum(axis=1) == 1.0):
            raise InvalidInputError("each label row must be one-hot")
        object.__setattr__(self, "features", _freeze(features))
        object.__setattr__(self, "labels", _freeze(labels))

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    @property
    def k(self):
        return self.labels.shape[1]

    @property
    def class_indices(self):
        return np.argmax(self.labels, axis=1)

    def subset(self, idx):
        return LabeledDataset(self.features[idx], self.labels[idx])


@dataclass(frozen=True)
class ProbabilityField:
    """Per-example predicted class probabilities after coordinatewise clipping.

    Rows need not sum to one: clipping takes a coordinatewise max with the
    floor and never renormalizes, which is what keeps the closed-form
    constant-teacher results exact.
    """

    probs: np.ndarray
    clip_floor: float

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise InvalidInputError("probs must be a 2-d array")
        k = probs.shape[1]
        if not (0.0 < self.clip_floor < 1.0 / k):
            raise InvalidInputError(f"clip floor must lie in (0, 1/{k})")
        _require_finite(probs, "probs")
        if probs.size and (probs.min() < self.clip_floor or probs.max() > 1.0):
            raise InvalidInputError("probabilities must lie in [clip_floor, 1]")
        object.__setattr__(self, "probs", _freeze(probs))

    @property
    def n(self):
        return self.probs.shape[0]

    @property
    def k(self):
        return self.probs.shape[1]


@dataclass(frozen=True)
class CorrectionField:
    """Per-example nonnegative diagonal correction weights, stored as an
    (n, k) matrix of the diagonals.  All zeros recovers the plain loss."""

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.float64)
        if v.ndim != 2:
            raise InvalidInputError("correction weights must be a 2-d array")
        _require_finite(v, "correction weights")
        if v.size and v.min() < 0.0:
            raise InvalidInputError("correction weights must be nonnegative")
        object.__setattr__(self, "v", _freeze(v))

    @classmethod
    def zeros(cls, n, k):
        return cls(np.zeros((n, k)))


def clip_probabilities(p, floor=DEFAULT_CLIP):
    """Coordinatewise max(p, floor), without renormalizing rows.

    Idempotent and monotone; requires raw entries in [0, 1].
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim == 1:
        p = p[None, :]
    _require_finite(p, "probabilities")
    k = p.shape[1]
    if not (0.0 < floor < 1.0 / k):
        raise InvalidInputError(f"clip floor must lie in (0, 1/{k})")
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise InvalidInputError("raw probabilities must lie in [0, 1]")
    return ProbabilityField(np.maximum(p, floor), floor)


def one_hot(labels, k):
    """Encode integer class indices in [0, k) as an (n, k) 0/1 matrix."""
    labels = np.asarray(labels)
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == np.floor(labels)):
            raise InvalidInputError("class indices must be integers")
        labels = labels.astype(np.int64)
    if k < 2:
        raise InvalidInputError("need at least two classes")
    out = np.zeros((labels.shape[0], k))
    if labels.size:
        if labels.min() < 0 or labels.max() >= k:
            raise InvalidInputError(f"class indices must lie in [0, {k})")
        out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def log_scores(p):
    """Entrywise natural log of a probability field (or positive matrix)."""
    probs = p.probs if isinstance(p, ProbabilityField) else np.asarray(p, dtype=np.float64)
    _require_finite(probs, "probabilities")
    if probs.size and probs.min() <= 0.0:
        raise InvalidInputError("log requires strictly positive entries")
    return np.log(probs)
