"""Command-line experiment runner.

Subcommands: ``prop1`` (teacher-underfitting rate experiment), ``prop2``
(teacher-overfitting rate experiment), ``sweep`` (capacity sweeps with
forest teachers/students), ``alpha-sweep`` (held-out loss across the
correction tradeoff weight), and ``distill`` (run the full pipeline on a
CSV and emit the student artifact).

Every command writes ``results.csv`` and ``summary.json`` (and optional
``plot_*.svg``) into the output directory, which is resolved from
``--outdir``, then the ``CROSSDISTILL_OUTDIR`` environment variable, then
``./results``.  A ``--config FILE`` of flat ``key = value`` lines supplies
defaults; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import fields
from pathlib import Path

from .experiments import (
    AlphaSweepConfig,
    DistillCmdConfig,
    Prop1Config,
    Prop2Config,
    SweepConfig,
    run_alpha_sweep,
    run_distill,
    run_prop1,
    run_prop2,
    run_sweep,
    write_results_csv,
    write_summary,
)


def _int_tuple(text):
    return tuple(int(v) for v in str(text).split(",") if v != "")

def _float_or_inf(v):
    v = str(v).strip().lower()
    return math.inf if v in ("inf", "infinity", "orthogonal") else float(v)

def _float_tuple(text):
    return tuple(_float_or_inf(v) for v in str(text).split(",") if v != "")

def _str_tuple(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())

def _alpha(v):
    return "cv" if str(v).strip().lower() == "cv" else float(v)

def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {v!r}")

def _opt_int(v):
    s = str(v).strip().lower()
    return None if s in ("none", "unlimited", "") else int(s)


# per-command field converters; shared by the flag parser and --config files
FIELD_TYPES = {
    "prop1": {
        "n_grid": _int_tuple, "seeds": int, "folds": int, "p0": _float_tuple,
        "ridge_c": float, "clip_floor": float, "seed": int, "plots": _bool,
    },
    "prop2": {
        "n_grid": _int_tuple, "seeds": int, "folds": int, "dim": int,
        "family_seed": int, "clip_floor": float, "seed": int, "plots": _bool,
    },
    "sweep": {
        "axis": str, "student_trees": _int_tuple, "teacher_depths": _int_tuple,
        "teacher_trees": int, "fixed_student_trees": int, "fixed_teacher_trees": int,
        "n_train": int, "n_test": int, "folds": int, "seeds": int, "alpha": _alpha,
        "alpha_folds": int, "curves": _str_tuple, "csv": str, "label_column": str,
        "test_fraction": float, "clip_floor": float, "mixture_d": int,
        "mixture_clusters": int, "mixture_separation": float, "mixture_spread": float,
        "mixture_seed": int, "seed": int, "plots": _bool,
    },
    "alpha-sweep": {
        "alphas": _float_tuple, "n": int, "dim": int, "p0": _float_tuple,
        "ridge_c": float, "student_trees": int, "student_min_leaf": int,
        "folds": int, "seeds": int, "val_fraction": float, "clip_floor": float,
        "seed": int, "plots": _bool,
    },
    "distill": {
        "csv": str, "label_column": str, "teacher_trees": int,
        "teacher_depth": _opt_int, "student_trees": int, "student_depth": _opt_int,
        "folds": int, "alpha": _alpha, "alpha_folds": int, "val_fraction": float,
        "audit": _bool, "clip_floor": float, "seed": int, "plots": _bool,
    },
}

CONFIG_CLASSES = {
    "prop1": Prop1Config,
    "prop2": Prop2Config,
    "sweep": SweepConfig,
    "alpha-sweep": AlphaSweepConfig,
    "distill": DistillCmdConfig,
}

RUNNERS = {
    "prop1": run_prop1,
    "prop2": run_prop2,
    "sweep": run_sweep,
    "alpha-sweep": run_alpha_sweep,
    "distill": run_distill,
}

HELP = {
    "prop1": "rate experiment: biased constant teacher, with and without 1/p correction",
    "prop2": "rate experiment: interpolating kernel teacher, data reuse vs cross-fitting",
    "sweep": "capacity sweeps (forest teachers/students) on synthetic or CSV data",
    "alpha-sweep": "held-out loss across the correction tradeoff weight alpha",
    "distill": "run cross-fitted corrected distillation on a CSV and save the student",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="crossdistill",
        description="cross-fitted and loss-corrected knowledge distillation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, types in FIELD_TYPES.items():
        p = sub.add_parser(command, help=HELP[command])
        p.add_argument("--outdir", default=None, help="output directory")
        p.add_argument("--config", default=None, help="flat key = value defaults file")
        for key, conv in types.items():
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=conv, default=None)
    return parser


def read_config_file(path, types):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in types:
                raise ValueError(f"{path}:{ln}: unknown key {key!r}")
            out[key] = types[key](value)
    return out


def resolve_config(command, args):
    cls = CONFIG_CLASSES[command]
    values = {}
    if args.config:
        values.update(read_config_file(args.config, FIELD_TYPES[command]))
    for f in fields(cls):
        given = getattr(args, f.name, None)
        if given is not None:
            values[f.name] = given
    return cls(**values)


def resolve_outdir(args):
    outdir = args.outdir or os.environ.get("CROSSDISTILL_OUTDIR") or "results"
    path = Path(outdir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_plots(command, outdir, plot_data, summary):
    from .svgplot import line_plot

    if command in ("prop1", "prop2"):
        line_plot(outdir / "plot_rates.svg", plot_data, xlabel="n",
                  ylabel="squared score error", title=f"{command} rates", loglog=True)
    elif command == "sweep":
        line_plot(outdir / "plot_sweep.svg", plot_data, xlabel=summary["axis"],
                  ylabel=summary["metric"], title="capacity sweep")
    elif command == "alpha-sweep":
        line_plot(outdir / "plot_alpha.svg", plot_data, xlabel="alpha",
                  ylabel="held-out loss", title="correction tradeoff", loglog=True)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        cfg = resolve_config(command, args)
        outdir = resolve_outdir(args)
        records, summary, elapsed, plot_data = RUNNERS[command](cfg)
        write_results_csv(outdir / "results.csv", records)
        if command == "distill":
            from .artifact import save_artifact

            save_artifact(outdir / "student.json", plot_data.student)
            save_artifact(outdir / "bundle.json", plot_data.bundle)
            summary = dict(summary)
            summary["student_artifact"] = str(outdir / "student.json")
            summary["bundle_artifact"] = str(outdir / "bundle.json")
        elif cfg.plots:
            _write_plots(command, outdir, plot_data, summary)
        write_summary(outdir / "summary.json", command, cfg, summary, elapsed)
        print(f"{command}: wrote {outdir / 'results.csv'} and {outdir / 'summary.json'}")
        return 0
    except Exception as exc:  # CLI contract: nonzero exit on any failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
