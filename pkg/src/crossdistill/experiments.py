"""Experiment harness behind the command-line runner.

Each ``run_*`` function is a pure function of its config dataclass: it
returns a sorted list of :class:`ResultRecord` rows plus a JSON-ready
summary dict.  Identical configs produce byte-identical CSV output, so
wall-clock time is reported only in the summary, never in the rows.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
import time
import zlib
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .core import DEFAULT_CLIP, InvalidInputError
from .crossfit import (
    DistillConfig,
    distill_vanilla,
    fit_nuisances,
    fit_student_on_bundle,
    make_folds,
    make_holdout_scorer,
    rebundle,
    run_crossfit,
    verify_fold_isolation,
)
from .data import (
    ConstantBayes,
    CsvSchema,
    SmoothLogisticBayes,
    TabularMixtureBayes,
    generate,
    load_csv,
)
from .losses import LossSpec
from .metrics import auc_binary, fit_rate_slope, student_mse_to_f0
from .policy import ALPHA_GRID_DEFAULT, CorrectionPolicy, policy_from_alpha, select_alpha_cv
from .students import ConstantStudentConfig, ForestStudentConfig, fit_forest_student
from .teachers import (
    ForestTeacherConfig,
    NadarayaWatsonTeacherConfig,
    RidgeMeanTeacherConfig,
    fit_teacher,
)


@dataclass(frozen=True)
class ResultRecord:
    experiment: str
    metric: str
    value: float
    std_err: float = 0.0
    n: int = 0
    B: int = 0
    alpha: float | None = None
    policy: str = ""
    seed: int = -1

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise InvalidInputError(f"non-finite result value for {self.metric}")
        if self.std_err < 0.0:
            raise InvalidInputError("standard error must be nonnegative")

    def sort_key(self):
        a = self.alpha
        a_key = (2, 0.0) if a is None else ((1, math.inf) if math.isinf(a) else (0, a))
        return (self.experiment, self.metric, self.policy, self.n, a_key, self.seed)


CSV_COLUMNS = ("experiment", "metric", "policy", "n", "B", "alpha", "seed", "value", "std_err")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def write_results_csv(path, records):
    rows = sorted(records, key=lambda r: r.sort_key())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([_cell(getattr(r, c)) for c in CSV_COLUMNS])


def version_string():
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except OSError:
        pass
    return __version__


def write_summary(path, experiment, config, extras, wall_time_s):
    doc = {
        "experiment": experiment,
        "version": version_string(),
        "config": config_dict(config),
        "wall_time_s": wall_time_s,
    }
    doc.update(extras)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def config_dict(config):
    out = {}
    for k, v in asdict(config).items():
        if isinstance(v, float) and math.isinf(v):
            v = "inf"
        elif isinstance(v, tuple):
            v = ["inf" if isinstance(x, float) and math.isinf(x) else x for x in v]
        out[k] = v
    return out


def _seed_for(base, tag, *parts):
    entropy = [base, zlib.crc32(tag.encode())] + [int(p) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def _slope_record(experiment, policy, points):
    s = fit_rate_slope(points)
    return (
        ResultRecord(experiment=experiment, metric="rate_slope", policy=policy,
                     value=s.slope, std_err=s.stderr),
        s,
    )


# ---------------------------------------------------------------------------
# teacher-underfitting rates: constant-probability family, shrunken-mean
# teacher, constant student; plug-in vs cross-fit with 1/p correction


@dataclass(frozen=True)
class Prop1Config:
    n_grid: tuple = (256, 512, 1024, 2048, 4096, 8192, 16384)
    seeds: int = 20
    folds: int = 10
    p0: tuple = (0.7, 0.3)
    ridge_c: float = 1.0
    clip_floor: float = DEFAULT_CLIP
    seed: int = 0
    plots: bool = False


def run_prop1(cfg):
    if len(cfg.n_grid) < 4:
        raise InvalidInputError("need at least four sample sizes")
    t0 = time.time()
    oracle = ConstantBayes(np.asarray(cfg.p0), d=1, clip_floor=cfg.clip_floor)
    teacher_cfg = RidgeMeanTeacherConfig(c=cfg.ridge_c, clip_floor=cfg.clip_floor)
    student_cfg = ConstantStudentConfig(clip_floor=cfg.clip_floor)
    records = []
    means = {"vanilla": [], "orthogonal": []}
    for n in cfg.n_grid:
        errs = {"vanilla": [], "orthogonal": []}
        for s in range(cfg.seeds):
            data = generate(oracle, n, _seed_for(cfg.seed, "prop1-data", n, s)).dataset
            van = distill_vanilla(data, teacher_cfg, student_cfg)
            e, se = student_mse_to_f0(van.student, oracle, 0, 0)
            errs["vanilla"].append(e)
            records.append(ResultRecord(
                "prop1", "student_mse_to_f0", e, se, n=n, B=1, policy="vanilla", seed=s,
            ))
            pipe = DistillConfig(teacher=teacher_cfg, student=student_cfg,
                                 policy=CorrectionPolicy("orthogonal"), folds=cfg.folds)
            res = run_crossfit(data, pipe, seed=_seed_for(cfg.seed, "prop1-cf", n, s))
            e, se = student_mse_to_f0(res.student, oracle, 0, 0)
            errs["orthogonal"].append(e)
            records.append(ResultRecord(
                "prop1", "student_mse_to_f0", e, se, n=n, B=cfg.folds,
                policy="crossfit_orthogonal", seed=s,
            ))
        for key in means:
            m = float(np.mean(errs[key]))
            se = float(np.std(errs[key], ddof=1) / np.sqrt(cfg.seeds)) if cfg.seeds > 1 else 0.0
            means[key].append((n, m))
            records.append(ResultRecord(
                "prop1", "student_mse_to_f0_mean", m, se, n=n,
                B=1 if key == "vanilla" else cfg.folds,
                policy="vanilla" if key == "vanilla" else "crossfit_orthogonal",
            ))
    rec_v, slope_v = _slope_record("prop1", "vanilla", means["vanilla"])
    rec_o, slope_o = _slope_record("prop1", "crossfit_orthogonal", means["orthogonal"])
    records += [rec_v, rec_o]
    summary = {
        "slopes": {
            "vanilla": {"slope": slope_v.slope, "lo": slope_v.lo, "hi": slope_v.hi},
            "crossfit_orthogonal": {"slope": slope_o.slope, "lo": slope_o.lo, "hi": slope_o.hi},
        },
        "mean_errors": {k: v for k, v in means.items()},
    }
    return records, summary, time.time() - t0, {
        "vanilla": means["vanilla"], "crossfit + 1/p correction": means["orthogonal"],
    }


# ---------------------------------------------------------------------------
# teacher-overfitting rates: smooth logistic family, interpolating kernel
# teacher, constant student; data reuse vs plain cross-fitting


@dataclass(frozen=True)
class Prop2Config:
    n_grid: tuple = (256, 512, 1024, 2048, 4096, 8192)
    seeds: int = 20
    folds: int = 10
    dim: int = 2
    family_seed: int = 7
    clip_floor: float = DEFAULT_CLIP
    seed: int = 0
    plots: bool = False


def run_prop2(cfg):
    if len(cfg.n_grid) < 4:
        raise InvalidInputError("need at least four sample sizes")
    if min(cfg.n_grid) < 2 * cfg.folds:
        raise InvalidInputError("smallest n must be at least twice the fold count")
    t0 = time.time()
    oracle = SmoothLogisticBayes(d=cfg.dim, seed=cfg.family_seed, clip_floor=cfg.clip_floor)
    teacher_cfg = NadarayaWatsonTeacherConfig(clip_floor=cfg.clip_floor)
    student_cfg = ConstantStudentConfig(clip_floor=cfg.clip_floor)
    records = []
    means = {"vanilla": [], "crossfit": []}
    for n in cfg.n_grid:
        errs = {"vanilla": [], "crossfit": []}
        for s in range(cfg.seeds):
            data = generate(oracle, n, _seed_for(cfg.seed, "prop2-data", n, s)).dataset
            van = distill_vanilla(data, teacher_cfg, student_cfg)
            e, se = student_mse_to_f0(van.student, oracle, 0, 0)
            errs["vanilla"].append(e)
            records.append(ResultRecord(
                "prop2", "student_mse_to_f0", e, se, n=n, B=1, policy="vanilla", seed=s,
            ))
            pipe = DistillConfig(teacher=teacher_cfg, student=student_cfg,
                                 policy=CorrectionPolicy("zero"), folds=cfg.folds)
            res = run_crossfit(data, pipe, seed=_seed_for(cfg.seed, "prop2-cf", n, s))
            e, se = student_mse_to_f0(res.student, oracle, 0, 0)
            errs["crossfit"].append(e)
            records.append(ResultRecord(
                "prop2", "student_mse_to_f0", e, se, n=n, B=cfg.folds, policy="crossfit", seed=s,
            ))
        for key in means:
            m = float(np.mean(errs[key]))
            se = float(np.std(errs[key], ddof=1) / np.sqrt(cfg.seeds)) if cfg.seeds > 1 else 0.0
            means[key].append((n, m))
            records.append(ResultRecord(
                "prop2", "student_mse_to_f0_mean", m, se, n=n,
                B=1 if key == "vanilla" else cfg.folds, policy=key,
            ))
    rec_v, slope_v = _slope_record("prop2", "vanilla", means["vanilla"])
    rec_c, slope_c = _slope_record("prop2", "crossfit", means["crossfit"])
    records += [rec_v, rec_c]
    summary = {
        "slopes": {
            "vanilla": {"slope": slope_v.slope, "lo": slope_v.lo, "hi": slope_v.hi},
            "crossfit": {"slope": slope_c.slope, "lo": slope_c.lo, "hi": slope_c.hi},
        },
        "vanilla_floor_at_largest_n": means["vanilla"][-1][1],
        "target_slope": -4.0 / (4.0 + cfg.dim),
        "mean_errors": {k: v for k, v in means.items()},
    }
    return records, summary, time.time() - t0, {
        "vanilla (data reuse)": means["vanilla"], "crossfit": means["crossfit"],
    }


# ---------------------------------------------------------------------------
# capacity sweeps with random-forest teachers and students


@dataclass(frozen=True)
class SweepConfig:
    axis: str = "student_trees"  # or "teacher_depth"
    student_trees: tuple = (1, 5, 10, 20)
    teacher_depths: tuple = (1, 2, 4, 8, 16)
    teacher_trees: int = 500
    fixed_student_trees: int = 10
    fixed_teacher_trees: int = 100
    n_train: int = 1024
    n_test: int = 4096
    folds: int = 10
    seeds: int = 5
    alpha: float | str = "cv"  # fixed value or "cv" for 5-fold selection
    alpha_folds: int = 5
    curves: tuple = ("teacher", "scratch", "vanilla", "crossfit", "corrected")
    csv: str | None = None
    label_column: str = "label"
    test_fraction: float = 0.25
    clip_floor: float = DEFAULT_CLIP
    mixture_d: int = 6
    mixture_clusters: int = 4
    mixture_separation: float = 0.9
    mixture_spread: float = 1.0
    mixture_seed: int = 42
    seed: int = 0
    plots: bool = False


def _sweep_data(cfg, s):
    if cfg.csv is not None:
        table = load_csv(cfg.csv, CsvSchema(cfg.label_column))
        data = table.dataset
        rng = np.random.default_rng(_seed_for(cfg.seed, "sweep-split", s))
        perm = rng.permutation(data.n)
        n_test = max(1, int(data.n * cfg.test_fraction))
        return data.subset(perm[n_test:]), data.subset(perm[:n_test])
    oracle = TabularMixtureBayes(
        d=cfg.mixture_d, clusters=cfg.mixture_clusters,
        separation=cfg.mixture_separation, spread=cfg.mixture_spread,
        seed=cfg.mixture_seed,
    )
    train = generate(oracle, cfg.n_train, _seed_for(cfg.seed, "sweep-train", s)).dataset
    test = generate(oracle, cfg.n_test, _seed_for(cfg.seed, "sweep-test", s)).dataset
    return train, test


def _metric_for(data):
    return "auc" if data.k == 2 else "accuracy"


def _eval_scores(scores, test, metric):
    if metric == "auc":
        return auc_binary(scores[:, 1] - scores[:, 0], test.class_indices)
    return float(np.mean(np.argmax(scores, axis=1) == test.class_indices))


def _grid_for(cfg):
    if cfg.axis == "student_trees":
        return cfg.student_trees
    if cfg.axis == "teacher_depth":
        return cfg.teacher_depths
    raise InvalidInputError(f"unknown sweep axis {cfg.axis!r}")


def run_sweep(cfg):
    t0 = time.time()
    grid = _grid_for(cfg)
    records = []
    cells = {(c, x): [] for c in cfg.curves for x in grid}
    metric = "auc"
    for s in range(cfg.seeds):
        train, test = _sweep_data(cfg, s)
        metric = _metric_for(train)
        cache = {}  # teacher fits and fold bundles, shared along the grid
        for x in grid:
            if cfg.axis == "student_trees":
                teacher_cfg = ForestTeacherConfig(
                    n_trees=cfg.teacher_trees, max_depth=None,
                    seed=_seed_for(cfg.seed, "sweep-teacher", s), clip_floor=cfg.clip_floor,
                )
                student_cfg = ForestStudentConfig(
                    n_trees=x, seed=_seed_for(cfg.seed, "sweep-student", s),
                )
            else:
                teacher_cfg = ForestTeacherConfig(
                    n_trees=cfg.fixed_teacher_trees, max_depth=x,
                    seed=_seed_for(cfg.seed, "sweep-teacher", s), clip_floor=cfg.clip_floor,
                )
                student_cfg = ForestStudentConfig(
                    n_trees=cfg.fixed_student_trees,
                    seed=_seed_for(cfg.seed, "sweep-student", s),
                )
            values = _sweep_cell(cfg, train, test, teacher_cfg, student_cfg, metric, s, x, cache)
            for curve, value in values.items():
                cells[(curve, x)].append(value)
                records.append(ResultRecord(
                    "sweep", metric, value, n=x, B=cfg.folds, policy=curve, seed=s,
                ))
    curve_means = {c: [] for c in cfg.curves}
    for curve in cfg.curves:
        for x in grid:
            vals = cells[(curve, x)]
            m = float(np.mean(vals))
            se = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
            curve_means[curve].append((x, m))
            records.append(ResultRecord(
                "sweep", f"{metric}_mean", m, se, n=x, B=cfg.folds, policy=curve,
            ))
    summary = {
        "axis": cfg.axis,
        "grid": list(grid),
        "metric": metric,
        "curve_means": {k: v for k, v in curve_means.items()},
    }
    return records, summary, time.time() - t0, curve_means


def _sweep_cell(cfg, train, test, teacher_cfg, student_cfg, metric, s, x, cache):
    out = {}
    curves = set(cfg.curves)
    if {"teacher", "vanilla"} & curves and ("plugin", teacher_cfg) not in cache:
        teacher = fit_teacher(train, teacher_cfg)
        cache[("plugin", teacher_cfg)] = (
            teacher.predict_proba(train.features),
            _eval_scores(np.log(teacher.predict_proba(test.features).probs), test, metric),
        )
    if "teacher" in curves:
        out["teacher"] = cache[("plugin", teacher_cfg)][1]
    if "scratch" in curves:
        if ("scratch", student_cfg) not in cache:
            scratch = fit_forest_student(
                train.features, np.log(np.maximum(train.labels, cfg.clip_floor)),
                student_cfg,
            )
            cache[("scratch", student_cfg)] = _eval_scores(
                scratch.predict(test.features), test, metric
            )
        out["scratch"] = cache[("scratch", student_cfg)]
    if "vanilla" in curves:
        probs_all = cache[("plugin", teacher_cfg)][0]
        student = fit_forest_student(train.features, np.log(probs_all.probs), student_cfg)
        out["vanilla"] = _eval_scores(student.predict(test.features), test, metric)
    if {"crossfit", "corrected"} & curves:
        if ("bundle", teacher_cfg) not in cache:
            plan = make_folds(train.n, cfg.folds, _seed_for(cfg.seed, "sweep-folds", s))
            cache[("bundle", teacher_cfg)] = fit_nuisances(
                train, plan, teacher_cfg, CorrectionPolicy("zero"),
                seed=_seed_for(cfg.seed, "sweep-nuis", s),
            )
        base = cache[("bundle", teacher_cfg)]
    if "crossfit" in curves:
        student = fit_forest_student(train.features, np.log(base.probs.probs), student_cfg)
        out["crossfit"] = _eval_scores(student.predict(test.features), test, metric)
    if "corrected" in curves:
        pipe = DistillConfig(teacher=teacher_cfg, student=student_cfg, folds=cfg.folds)
        if cfg.alpha == "cv":
            alpha, _ = select_alpha_cv(
                train, list(ALPHA_GRID_DEFAULT), cfg.alpha_folds, pipe,
                seed=_seed_for(cfg.seed, "sweep-alpha", s, x),
            )
        else:
            alpha = float(cfg.alpha)
        bundle = rebundle(base, train, policy_from_alpha(alpha))
        student = fit_student_on_bundle(train, bundle, student_cfg, LossSpec("sel"))
        out["corrected"] = _eval_scores(student.predict(test.features), test, metric)
    return out


# ---------------------------------------------------------------------------
# held-out loss as the correction tradeoff weight alpha varies


@dataclass(frozen=True)
class AlphaSweepConfig:
    alphas: tuple = (0.0,) + ALPHA_GRID_DEFAULT + (math.inf,)
    n: int = 4096
    dim: int = 3
    p0: tuple = (0.7, 0.3)
    ridge_c: float = 2.0
    student_trees: int = 20
    student_min_leaf: int = 25
    folds: int = 10
    seeds: int = 5
    val_fraction: float = 0.25
    clip_floor: float = DEFAULT_CLIP
    seed: int = 0
    plots: bool = False


def run_alpha_sweep(cfg):
    if 0.0 not in cfg.alphas or not any(math.isinf(a) for a in cfg.alphas):
        raise InvalidInputError("alpha grid must include 0 and the orthogonal sentinel inf")
    t0 = time.time()
    oracle = ConstantBayes(np.asarray(cfg.p0), d=cfg.dim, clip_floor=cfg.clip_floor)
    records = []
    losses = {a: [] for a in cfg.alphas}
    accs = {a: [] for a in cfg.alphas}
    for s in range(cfg.seeds):
        data = generate(oracle, cfg.n, _seed_for(cfg.seed, "alpha-data", s)).dataset
        rng = np.random.default_rng(_seed_for(cfg.seed, "alpha-split", s))
        perm = rng.permutation(data.n)
        n_val = max(1, int(data.n * cfg.val_fraction))
        val = data.subset(perm[:n_val])
        train = data.subset(perm[n_val:])
        teacher_cfg = RidgeMeanTeacherConfig(c=cfg.ridge_c, clip_floor=cfg.clip_floor)
        student_cfg = ForestStudentConfig(
            n_trees=cfg.student_trees, min_leaf=cfg.student_min_leaf, seed=11,
        )
        pipe = DistillConfig(teacher=teacher_cfg, student=student_cfg, folds=cfg.folds)
        plan = make_folds(train.n, cfg.folds, _seed_for(cfg.seed, "alpha-folds", s))
        base = fit_nuisances(train, plan, teacher_cfg, CorrectionPolicy("zero"),
                             seed=_seed_for(cfg.seed, "alpha-nuis", s))
        loss_scorer = make_holdout_scorer(train, val, pipe, "corrected_sq")
        acc_scorer = make_holdout_scorer(train, val, pipe, "accuracy")
        for a in cfg.alphas:
            bundle = rebundle(base, train, policy_from_alpha(a))
            student = fit_student_on_bundle(train, bundle, student_cfg, LossSpec("sel"))
            lo = loss_scorer(student)
            ac = acc_scorer(student)
            losses[a].append(lo)
            accs[a].append(ac)
            records.append(ResultRecord(
                "alpha_sweep", "holdout_corrected_sq", lo, n=cfg.n, B=cfg.folds,
                alpha=a, policy=policy_from_alpha(a).mode, seed=s,
            ))
            records.append(ResultRecord(
                "alpha_sweep", "holdout_accuracy", ac, n=cfg.n, B=cfg.folds,
                alpha=a, policy=policy_from_alpha(a).mode, seed=s,
            ))
    mean_loss = {}
    for a in cfg.alphas:
        m = float(np.mean(losses[a]))
        se = float(np.std(losses[a], ddof=1) / np.sqrt(cfg.seeds)) if cfg.seeds > 1 else 0.0
        mean_loss[a] = m
        records.append(ResultRecord(
            "alpha_sweep", "holdout_corrected_sq_mean", m, se, n=cfg.n, B=cfg.folds,
            alpha=a, policy=policy_from_alpha(a).mode,
        ))
        records.append(ResultRecord(
            "alpha_sweep", "holdout_accuracy_mean", float(np.mean(accs[a])),
            n=cfg.n, B=cfg.folds, alpha=a, policy=policy_from_alpha(a).mode,
        ))
    finite = {a: v for a, v in mean_loss.items() if a != 0.0 and not math.isinf(a)}
    best_finite = min(finite, key=finite.get) if finite else None
    summary = {
        "mean_holdout_loss": {_cell(a): v for a, v in mean_loss.items()},
        "best_finite_alpha": best_finite,
        "finite_alpha_no_worse_than_endpoints": bool(
            finite
            and finite[best_finite] <= mean_loss[0.0]
            and finite[best_finite] <= mean_loss[math.inf]
        ),
    }
    plot_series = {
        "holdout loss": [(a, mean_loss[a]) for a in cfg.alphas
                         if a != 0.0 and not math.isinf(a)]
    }
    return records, summary, time.time() - t0, plot_series


# ---------------------------------------------------------------------------
# end-user entry point: cross-fitted corrected distillation on a CSV


@dataclass(frozen=True)
class DistillCmdConfig:
    csv: str = ""
    label_column: str = "label"
    teacher_trees: int = 100
    teacher_depth: int | None = None
    student_trees: int = 10
    student_depth: int | None = None
    folds: int = 10
    alpha: float | str = "cv"
    alpha_folds: int = 5
    val_fraction: float = 0.2
    audit: bool = True
    clip_floor: float = DEFAULT_CLIP
    seed: int = 0
    plots: bool = False


def run_distill(cfg):
    t0 = time.time()
    table = load_csv(cfg.csv, CsvSchema(cfg.label_column))
    data = table.dataset
    rng = np.random.default_rng(_seed_for(cfg.seed, "distill-split"))
    perm = rng.permutation(data.n)
    n_val = max(1, int(data.n * cfg.val_fraction))
    val = data.subset(perm[:n_val])
    train = data.subset(perm[n_val:])

    teacher_cfg = ForestTeacherConfig(
        n_trees=cfg.teacher_trees, max_depth=cfg.teacher_depth,
        seed=_seed_for(cfg.seed, "distill-teacher"), clip_floor=cfg.clip_floor,
    )
    student_cfg = ForestStudentConfig(
        n_trees=cfg.student_trees, max_depth=cfg.student_depth,
        seed=_seed_for(cfg.seed, "distill-student"),
    )
    pipe = DistillConfig(teacher=teacher_cfg, student=student_cfg, folds=cfg.folds)
    if cfg.alpha == "cv":
        alpha, alpha_scores = select_alpha_cv(
            train, list(ALPHA_GRID_DEFAULT), cfg.alpha_folds, pipe,
            seed=_seed_for(cfg.seed, "distill-alpha"),
        )
    else:
        alpha, alpha_scores = float(cfg.alpha), None
    pipe = pipe.with_policy(policy_from_alpha(alpha))
    result = run_crossfit(train, pipe, seed=_seed_for(cfg.seed, "distill-cf"))

    metric = _metric_for(train)
    scorer = make_holdout_scorer(train, val, pipe, metric)
    student_score = scorer(result.student)
    teacher = fit_teacher(train, teacher_cfg)
    teacher_score = _eval_scores(np.log(teacher.predict_proba(val.features).probs), val, metric)

    records = [
        ResultRecord("distill", f"holdout_{metric}", student_score, n=train.n,
                     B=cfg.folds, alpha=alpha, policy="student"),
        ResultRecord("distill", f"holdout_{metric}", teacher_score, n=train.n,
                     B=cfg.folds, policy="teacher"),
    ]
    audit = {
        "folds": [
            {"fold": p.fold, "teacher_seed": p.teacher_seed, "excluded_hash": p.excluded_hash}
            for p in result.bundle.provenance
        ],
    }
    if cfg.audit:
        isolated = verify_fold_isolation(
            train, result.plan, teacher_cfg,
            seed=_seed_for(cfg.seed, "distill-cf"),
            perm_seed=_seed_for(cfg.seed, "distill-audit"),
        )
        audit["label_permutation_isolated"] = isolated
        audit["passed"] = bool(all(isolated))
    summary = {
        "chosen_alpha": alpha,
        "alpha_scores": alpha_scores,
        "holdout_metric": metric,
        "student_score": student_score,
        "teacher_score": teacher_score,
        "classes": list(table.classes),
        "feature_names": list(table.feature_names),
        "audit": audit,
    }
    return records, summary, time.time() - t0, result
