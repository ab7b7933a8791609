"""Versioned JSON artifacts for teachers, students, and nuisance bundles.

Every artifact is a JSON object with the envelope

    {"format": "crossdistill-artifact", "version": 1,
     "kind": "<kind>", "payload": {...}}

Forest payloads store each tree explicitly as parallel arrays
(feature, threshold, left, right, value); see the README for the full
schema.  Loading reconstructs predictors that reproduce the original
predictions exactly, because all forest predictions run through these
arrays in the first place.
"""

from __future__ import annotations

import json

import numpy as np

from .core import CorrectionField, InvalidInputError, ProbabilityField
from .crossfit import FoldPlan, FoldProvenance, NuisanceBundle
from .students import (
    ConstantStudent,
    ForestStudentConfig,
    LinearStudent,
    RegressionForestStudent,
)
from .teachers import (
    ForestTeacher,
    ForestTeacherConfig,
    NadarayaWatsonTeacher,
    RidgeMeanTeacher,
    TreeArrays,
)

FORMAT = "crossdistill-artifact"
VERSION = 1


def _forest_teacher_payload(t):
    return {
        "k": t.k,
        "d": t.d,
        "config": {
            "n_trees": t.config.n_trees,
            "max_depth": t.config.max_depth,
            "min_leaf": t.config.min_leaf,
            "seed": t.config.seed,
            "clip_floor": t.config.clip_floor,
        },
        "trees": [tree.to_payload() for tree in t.trees],
    }


def _forest_teacher_restore(p):
    cfg = ForestTeacherConfig(**p["config"])
    trees = [TreeArrays.from_payload(tp) for tp in p["trees"]]
    return ForestTeacher(trees, p["k"], p["d"], cfg)


def _ridge_restore(p):
    return RidgeMeanTeacher(
        c=p["c"],
        lam=p["lam"],
        label_mean=np.asarray(p["label_mean"], dtype=np.float64),
        clip_floor=p["clip_floor"],
    )


def _nw_restore(p):
    return NadarayaWatsonTeacher(
        a=p["a"],
        bandwidth=p["bandwidth"],
        train_features=np.asarray(p["train_features"], dtype=np.float64),
        train_labels=np.asarray(p["train_labels"], dtype=np.float64),
        clip_floor=p["clip_floor"],
        fallback=np.asarray(p["fallback"], dtype=np.float64),
    )


def _bundle_payload(b):
    return {
        "probs": b.probs.probs.tolist(),
        "clip_floor": b.probs.clip_floor,
        "corrections": b.corrections.v.tolist(),
        "plan": {
            "assignments": b.plan.assignments.tolist(),
            "B": b.plan.B,
            "seed": b.plan.seed,
        },
        "provenance": [
            {"fold": f.fold, "teacher_seed": f.teacher_seed, "excluded_hash": f.excluded_hash}
            for f in b.provenance
        ],
    }


def _bundle_restore(p):
    return NuisanceBundle(
        probs=ProbabilityField(np.asarray(p["probs"]), p["clip_floor"]),
        corrections=CorrectionField(np.asarray(p["corrections"])),
        plan=FoldPlan(np.asarray(p["plan"]["assignments"]), p["plan"]["B"], p["plan"]["seed"]),
        provenance=tuple(FoldProvenance(**f) for f in p["provenance"]),
    )


def _kind_and_payload(obj):
    if isinstance(obj, ForestTeacher):
        return "forest_teacher", _forest_teacher_payload(obj)
    if isinstance(obj, RidgeMeanTeacher):
        return "ridge_mean_teacher", {
            "c": obj.c,
            "lam": obj.lam,
            "label_mean": obj.label_mean.tolist(),
            "clip_floor": obj.clip_floor,
        }
    if isinstance(obj, NadarayaWatsonTeacher):
        return "nadaraya_watson_teacher", {
            "a": obj.a,
            "bandwidth": obj.bandwidth,
            "train_features": obj.train_features.tolist(),
            "train_labels": obj.train_labels.tolist(),
            "clip_floor": obj.clip_floor,
            "fallback": obj.fallback.tolist(),
        }
    if isinstance(obj, ConstantStudent):
        return "constant_student", {
            "value": obj.value.tolist(),
            "clip_floor": obj.clip_floor,
        }
    if isinstance(obj, LinearStudent):
        return "linear_student", {
            "weights": obj.weights.tolist(),
            "bias": obj.bias.tolist(),
        }
    if isinstance(obj, RegressionForestStudent):
        return "forest_student", {
            "k": obj.k,
            "d": obj.d,
            "config": {
                "n_trees": obj.config.n_trees,
                "max_depth": obj.config.max_depth,
                "min_leaf": obj.config.min_leaf,
                "seed": obj.config.seed,
            },
            "trees": [tree.to_payload() for tree in obj.trees],
        }
    if isinstance(obj, NuisanceBundle):
        return "nuisance_bundle", _bundle_payload(obj)
    raise InvalidInputError(f"cannot serialize {type(obj).__name__}")


def save_artifact(path, obj):
    kind, payload = _kind_and_payload(obj)
    doc = {"format": FORMAT, "version": VERSION, "kind": kind, "payload": payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_artifact(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT:
        raise InvalidInputError(f"not a {FORMAT} file")
    if doc.get("version") != VERSION:
        raise InvalidInputError(f"unsupported artifact version {doc.get('version')}")
    kind, p = doc["kind"], doc["payload"]
    if kind == "forest_teacher":
        return _forest_teacher_restore(p)
    if kind == "ridge_mean_teacher":
        return _ridge_restore(p)
    if kind == "nadaraya_watson_teacher":
        return _nw_restore(p)
    if kind == "constant_student":
        return ConstantStudent(np.asarray(p["value"]), p["clip_floor"])
    if kind == "linear_student":
        return LinearStudent(np.asarray(p["weights"]), np.asarray(p["bias"]))
    if kind == "forest_student":
        cfg = ForestStudentConfig(**p["config"])
        trees = [TreeArrays.from_payload(tp) for tp in p["trees"]]
        return RegressionForestStudent(trees, p["k"], p["d"], cfg)
    if kind == "nuisance_bundle":
        return _bundle_restore(p)
    raise InvalidInputError(f"unknown artifact kind {kind!r}")
