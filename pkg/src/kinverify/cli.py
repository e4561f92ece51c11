"""Command line interface: ``kinverify gen-synth | train | score | eval``."""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import dataset_io
from .evaluation import kfold_evaluate
from .msida import DEFAULT_EPSILON, DEFAULT_MAX_ITERATIONS
from .numerics import DEFAULT_RHO
from .pairs import PairSet, assign_folds
from .scoring import score_pairs
from .synth import SynthConfig, generate_synthetic
from .wccn import METHODS, PipelineConfig, fit_method


class CliError(Exception):
    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", f"{self.prog}: {message}")


RUN_KEYS = {"method", "dims", "max_iterations", "epsilon", "rho", "folds", "seed",
            "manifest", "synth", "out", "holdout_fold"}
_FLAG_TO_KEY = {"max_iter": "max_iterations", "eps": "epsilon"}


def _parse_dims(text):
    if isinstance(text, list):
        return text
    try:
        return [int(x) for x in str(text).split(",")]
    except ValueError:
        raise CliError("config", f"--dims must be comma separated integers, got {text!r}") from None


def _load_json(path, what):
    path = Path(path)
    if not path.is_file():
        raise CliError("input", f"{what} {path} not found")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError("input", f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None


def _merge_run_config(args):
    """Config file values overridden by explicit flags; paths resolved against the config file."""
    cfg = {}
    if args.config:
        raw = _load_json(args.config, "config")
        unknown = sorted(set(raw) - RUN_KEYS)
        if unknown:
            raise CliError("config", f"unknown config keys: {', '.join(unknown)}")
        base = Path(args.config).parent
        for key in ("manifest", "synth", "out"):
            if raw.get(key):
                raw[key] = str(base / raw[key]) if not Path(raw[key]).is_absolute() else raw[key]
        cfg.update(raw)
    for name, value in vars(args).items():
        key = _FLAG_TO_KEY.get(name, name)
        if key in RUN_KEYS and value is not None:
            cfg[key] = value
    if "dims" in cfg and cfg["dims"] is not None:
        cfg["dims"] = _parse_dims(cfg["dims"])
    return cfg


def _methods(value, allow_many):
    if value is None:
        return []
    names = list(METHODS) if value == "all" else [m.strip() for m in str(value).split(",")]
    if not allow_many and len(names) != 1:
        raise CliError("config", "exactly one --method is required")
    return names


def _validate(cfg, allow_many=True, need_out=True):
    problems = []
    methods = []
    try:
        methods = _methods(cfg.get("method"), allow_many)
    except CliError as exc:
        problems.append(str(exc))
    if not methods and "method" not in cfg:
        problems.append("--method is required")
    for m in methods:
        if m not in METHODS:
            problems.append(f"unknown method {m!r} (choose from {', '.join(METHODS)} or all)")
    msida_used = any(m.startswith("msida") for m in methods)
    for key, flag in (("epsilon", "--eps"), ("max_iterations", "--max-iter")):
        if key in cfg and methods and not msida_used:
            problems.append(f"{flag} only applies to msida methods")
    dims = cfg.get("dims")
    if dims is not None and (not dims or any(not isinstance(v, int) or v < 1 for v in dims)):
        problems.append("--dims entries must be positive integers")
    if cfg.get("max_iterations", 1) < 1:
        problems.append("--max-iter must be >= 1")
    if cfg.get("epsilon", 1.0) <= 0:
        problems.append("--eps must be > 0")
    if cfg.get("rho", 0.0) < 0:
        problems.append("--rho must be >= 0")
    if cfg.get("folds") is not None and cfg["folds"] < 2:
        problems.append("--folds must be >= 2")
    if bool(cfg.get("manifest")) == bool(cfg.get("synth")):
        problems.append("give exactly one of --manifest or --synth")
    if need_out and not cfg.get("out"):
        problems.append("--out is required")
    if problems:
        raise CliError("config", "; ".join(problems))
    return methods


def _pipeline_config(cfg):
    dims = cfg.get("dims")
    return PipelineConfig(
        dims=tuple(dims) if dims is not None else None,
        max_iterations=cfg.get("max_iterations", DEFAULT_MAX_ITERATIONS),
        epsilon=cfg.get("epsilon", DEFAULT_EPSILON),
        rho=cfg.get("rho", DEFAULT_RHO),
    )


def _synth_config(path, seed=None, folds=None):
    raw = _load_json(path, "synth config")
    if seed is not None:
        raw["seed"] = seed
    if folds is not None:
        raw["folds"] = folds
    try:
        return SynthConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise CliError("config", f"{path}: {exc}") from None


def _load_data(cfg):
    if cfg.get("synth"):
        return generate_synthetic(_synth_config(cfg["synth"], cfg.get("seed"), cfg.get("folds")))
    try:
        ds, pairs = dataset_io.load_dataset(cfg["manifest"])
    except dataset_io.DatasetFormatError as exc:
        raise CliError("input", str(exc)) from None
    k = cfg.get("folds")
    if k is not None and k != pairs.n_folds:
        if cfg.get("seed") is None:
            raise CliError("config", f"dataset defines {pairs.n_folds} folds but --folds is {k}; "
                                     "pass --seed to reassign folds")
        pairs = dataclasses.replace(pairs, folds=assign_folds(pairs.labels, k, cfg["seed"]))
    return ds, pairs


# ---------------------------------------------------------------- commands

def cmd_gen_synth(args):
    if not args.config:
        raise CliError("config", "--config is required")
    if not args.out:
        raise CliError("config", "--out is required")
    cfg = _synth_config(args.config, args.seed, args.folds)
    ds, pairs = generate_synthetic(cfg)
    out = Path(args.out)
    manifest = dataset_io.write_dataset(ds, pairs, out, seed=cfg.seed)
    dataset_io.atomic_write_text(out / "synth_config.json",
                                 json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {manifest} ({len(ds)} samples, {len(pairs)} pairs, "
          f"digest {dataset_io.dataset_digest(ds, pairs)[:12]})")


def cmd_train(args):
    cfg = _merge_run_config(args)
    methods = _validate(cfg, allow_many=False)
    ds, pairs = _load_data(cfg)
    train = pairs
    if cfg.get("holdout_fold") is not None:
        train = pairs.subset(pairs.folds != cfg["holdout_fold"])
        if len(train) == len(pairs):
            raise CliError("config", f"fold {cfg['holdout_fold']} does not exist")
    model = fit_method(methods[0], ds, train, _pipeline_config(cfg))
    dataset_io.save_model(model, cfg["out"])
    print(f"wrote {cfg['out']} ({model.method}, trained on {len(train)} pairs)")


def cmd_score(args):
    if not args.model or not args.out:
        raise CliError("config", "--model and --out are required")
    if not args.manifest:
        raise CliError("config", "--manifest is required (it supplies the features)")
    try:
        model = dataset_io.load_model(args.model)
    except dataset_io.BundleError as exc:
        raise CliError("input", str(exc)) from None
    try:
        if args.pairs:
            ds, _ = dataset_io.load_features(args.manifest)
            index, labels, folds = dataset_io.read_pairs(
                args.pairs, {sid: i for i, sid in enumerate(ds.ids)})
            pairs = PairSet(index, labels, np.where(folds == 0, 1, folds))
        else:
            ds, pairs = dataset_io.load_dataset(args.manifest)
    except dataset_io.DatasetFormatError as exc:
        raise CliError("input", str(exc)) from None
    scored = score_pairs(model, ds, pairs)
    dataset_io.atomic_write_text(args.out, dataset_io.scores_csv(scored))
    print(f"wrote {args.out} ({len(scored)} pairs)")


def cmd_eval(args):
    cfg = _merge_run_config(args)
    methods = _validate(cfg, allow_many=True)
    ds, pairs = _load_data(cfg)
    report = kfold_evaluate(ds, pairs, methods, _pipeline_config(cfg), pairs.n_folds)
    out = Path(cfg["out"])
    for row in report.rows:
        for f in row.folds:
            dataset_io.atomic_write_text(out / f"{row.method}_{f.fold}.roc.csv",
                                         dataset_io.roc_csv(f.roc))
    dataset_io.atomic_write_text(out / "report.csv", dataset_io.report_csv(report))
    for row in report.rows:
        print(f"{row.method:12s} mean accuracy {row.mean:6.2f}%")


# ------------------------------------------------------------------ parser

def _add_run_flags(p, many):
    p.add_argument("--config", help="JSON run config; explicit flags override its values")
    p.add_argument("--method", help=("method name, comma separated list or 'all'" if many
                                     else "method name") + f" ({', '.join(METHODS)})")
    p.add_argument("--dims", help="output dims: one per tensor mode (msida) or one value (sild)")
    p.add_argument("--max-iter", type=int, help="maximum MSIDA sweeps (default 10)")
    p.add_argument("--eps", type=float, help="MSIDA stopping epsilon (default 1e-6)")
    p.add_argument("--rho", type=float, help="ridge used when a scatter is singular (default 1e-6)")
    p.add_argument("--folds", type=int, help="number of folds (default 5)")
    p.add_argument("--seed", type=int, help="synthetic data seed / fold reassignment seed")
    p.add_argument("--manifest", help="dataset manifest JSON")
    p.add_argument("--synth", help="synthetic data config JSON (instead of --manifest)")
    p.add_argument("--out", help="output path")


def build_parser():
    parser = _Parser(prog="kinverify", description="Pair-verification metric learning "
                                                   "(SILD, MSIDA, WCCN) with cosine scoring.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-synth", help="generate a synthetic dataset as manifest + CSV files")
    p.add_argument("--config", help="synthetic data config JSON")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--folds", type=int, help="override the number of folds")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("train", help="fit one method and write a model bundle")
    _add_run_flags(p, many=False)
    p.add_argument("--holdout-fold", type=int, help="exclude this fold from training")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score pairs with a model bundle")
    p.add_argument("--model", help="model bundle directory")
    p.add_argument("--manifest", help="dataset manifest JSON supplying features")
    p.add_argument("--pairs", help="pair CSV (default: the manifest's pairs)")
    p.add_argument("--out", help="output score CSV")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="k-fold cross-validation report and ROC files")
    _add_run_flags(p, many=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except CliError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return 2 if exc.kind in ("usage", "config") else 1
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerics: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__.lower()}: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
