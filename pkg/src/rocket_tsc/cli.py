"""Command-line interface.

Subcommands: `train` fits a model on one file and writes a single versioned
model file; `eval` scores a model file against a test file; `repro` runs the
default pipeline over a dataset manifest for several seeds and emits a
mean/std CSV; `sensitivity` executes a plan file with a resumable results
CSV; `bench` measures scaling against training-set size or series length.

Reports go to stdout, logs to stderr. Exit codes: 0 success, 1 usage or
configuration error, 2 data error, 3 numerical error.
"""

import argparse
import csv
import dataclasses
import io
import json
import sys
import time

import numpy as np

from .data import load_split, load_ucr
from .errors import ConfigError, DataError, NumericalError, TransformError
from .kernels import GeneratorConfig
from .model_io import load_model, save_model
from .pipeline import evaluate_pipeline, train_pipeline
from .sensitivity import (
    DatasetManifest,
    format_rank_csv,
    load_plan,
    mean_ranks,
    run_plan,
)
from . import bench

REPRO_CSV_COLUMNS = ("dataset", "seeds", "mean_accuracy", "std_accuracy")


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _log(message):
    print(message, file=sys.stderr)


def _set_threads(threads):
    if threads is not None:
        import numba

        numba.set_num_threads(int(threads))


def _load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataError(f"config file {path} must contain a JSON object")
    return GeneratorConfig.from_dict(payload)


def _build_config(args):
    """Generator config from --config file, with explicit flags on top."""
    if getattr(args, "config", None) is not None:
        config = _load_config_file(args.config)
    else:
        config = GeneratorConfig()
    overrides = {}
    if getattr(args, "kernels", None) is not None:
        overrides["num_kernels"] = args.kernels
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return dataclasses.replace(config, **overrides) if overrides else config


def _add_common_flags(parser, classifier=False, normalize=False, config=False):
    parser.add_argument("--kernels", type=int, default=None,
                        help="number of kernels (default 10000)")
    parser.add_argument("--seed", type=int, default=None,
                        help="random seed (default 0)")
    parser.add_argument("--threads", type=int, default=None,
                        help="thread count for the transform")
    if classifier:
        parser.add_argument("--classifier", choices=("ridge", "sgd"),
                            default="ridge", help="classifier (default ridge)")
    if normalize:
        parser.add_argument("--normalize", choices=("on", "off"), default="on",
                            help="z-normalize each series (default on)")
    if config:
        parser.add_argument("--config", default=None,
                            help="JSON file with generator settings; explicit "
                                 "--kernels/--seed flags override it")


def build_parser():
    parser = _ArgumentParser(
        prog="rocket",
        description="Time series classification with random convolutional "
                    "kernels.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_train = subparsers.add_parser("train", help="fit a model and save it")
    p_train.add_argument("train_file", help="training split (label-first text)")
    p_train.add_argument("model_file", help="output model file (JSON)")
    _add_common_flags(p_train, classifier=True, normalize=True, config=True)

    p_eval = subparsers.add_parser("eval", help="score a model on a test file")
    p_eval.add_argument("model_file", help="model file written by train")
    p_eval.add_argument("test_file", help="test split (label-first text)")
    p_eval.add_argument("--threads", type=int, default=None,
                        help="thread count for the transform")

    p_repro = subparsers.add_parser(
        "repro", help="mean/std accuracy over datasets x seeds")
    p_repro.add_argument("manifest", help="JSON list of "
                         '{"name","train","test"[,"normalize"]} entries')
    p_repro.add_argument("output_csv", help="where to write the summary CSV")
    p_repro.add_argument("--seeds", default=None,
                         help="comma-separated seeds (default 0-9)")
    _add_common_flags(p_repro, classifier=True, normalize=True, config=True)

    p_sens = subparsers.add_parser(
        "sensitivity", help="run a variant plan with a resumable results CSV")
    p_sens.add_argument("plan", help="plan JSON (variants, datasets, seeds)")
    p_sens.add_argument("results_csv", help="per-cell results CSV (appended)")
    p_sens.add_argument("--threads", type=int, default=None,
                        help="thread count for the transform")

    p_bench = subparsers.add_parser(
        "bench", help="scaling benchmark on the synthetic task")
    p_bench.add_argument("--scale", choices=("n", "l"), required=True,
                         help="axis to grow: training size or series length")
    p_bench.add_argument("--values", required=True,
                         help="comma-separated axis values")
    p_bench.add_argument("--series", type=int, default=1000,
                         help="training-set size when scaling length")
    p_bench.add_argument("--length", type=int, default=100,
                         help="series length when scaling training size")
    p_bench.add_argument("--kernels", type=int, default=1000,
                         help="kernel count (default 1000)")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--repeats", type=int, default=bench.DEFAULT_REPEATS,
                         help="timed repeats per cell (median reported)")
    p_bench.add_argument("--threads", type=int, default=1,
                         help="recorded thread count (default 1)")
    p_bench.add_argument("--out", default=None,
                         help="also write the CSV to this file")
    return parser


def _parse_seed_list(text):
    if text is None:
        return list(range(10))
    try:
        seeds = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"--seeds must be comma-separated integers: {exc}")
    if not seeds:
        raise ConfigError("--seeds lists no seeds")
    return seeds


def _read_manifest(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise DataError(f"manifest {path} must be a JSON list")
    entries = []
    for i, entry in enumerate(payload):
        try:
            entries.append(DatasetManifest(**entry))
        except TypeError as exc:
            raise DataError(f"manifest {path} entry {i} is malformed: {exc}")
    return entries


def cmd_train(args):
    _set_threads(args.threads)
    config = _build_config(args)
    train = load_split(args.train_file)
    _log(f"training on {train.n_examples} examples, "
         f"{train.n_classes} classes, {config.num_kernels} kernels")
    t0 = time.perf_counter()
    fitted = train_pipeline(train, config, classifier=args.classifier,
                            normalize=(args.normalize == "on"))
    _log(f"fitted {fitted.classifier_kind} classifier in "
         f"{time.perf_counter() - t0:.2f}s")
    save_model(args.model_file, fitted)
    print(f"model written to {args.model_file}")
    return 0


def cmd_eval(args):
    _set_threads(args.threads)
    fitted = load_model(args.model_file)
    test = load_split(args.test_file, vocabulary=fitted.label_vocabulary)
    report = evaluate_pipeline(fitted, test)
    out = [f"accuracy {report['accuracy']:.6f}"]
    for token in fitted.label_vocabulary:
        if token in report["per_class"]:
            out.append(f"per_class {token} {report['per_class'][token]:.6f}")
    out.append(f"n_examples {report['n_examples']}")
    out.append(f"transform_seconds {report['transform_seconds']:.4f}")
    out.append(f"predict_seconds {report['predict_seconds']:.4f}")
    print("\n".join(out))
    return 0


def cmd_repro(args):
    _set_threads(args.threads)
    config = _build_config(args)
    seeds = _parse_seed_list(args.seeds)
    manifests = _read_manifest(args.manifest)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPRO_CSV_COLUMNS)
    for manifest in manifests:
        train, test = load_ucr(manifest.train, manifest.test)
        accuracies = []
        for seed in seeds:
            run_config = dataclasses.replace(config, seed=seed)
            fitted = train_pipeline(train, run_config,
                                    classifier=args.classifier,
                                    normalize=manifest.normalize)
            report = evaluate_pipeline(fitted, test)
            accuracies.append(report["accuracy"])
            _log(f"{manifest.name} seed {seed}: accuracy "
                 f"{report['accuracy']:.4f}")
        writer.writerow([manifest.name, len(seeds),
                         float(np.mean(accuracies)),
                         float(np.std(accuracies))])
    text = buffer.getvalue()
    with open(args.output_csv, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    print(text, end="")
    return 0


def cmd_sensitivity(args):
    _set_threads(args.threads)
    plan = load_plan(args.plan)
    table = run_plan(plan, csv_path=args.results_csv)
    try:
        ranks = mean_ranks(table, variants=list(plan.variants),
                           datasets=[m.name for m in plan.datasets])
    except DataError as exc:
        _log(f"grid incomplete, no rank summary: {exc}")
        _log("rerun the same command to retry failed cells")
        return 0
    print(format_rank_csv(ranks), end="")
    return 0


def cmd_bench(args):
    try:
        values = [int(tok) for tok in args.values.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be comma-separated integers: {exc}")
    if not values:
        raise ConfigError("--values lists no values")
    if args.scale == "n":
        rows = bench.scale_n(values, length=args.length,
                             num_kernels=args.kernels, seed=args.seed,
                             repeats=args.repeats, threads=args.threads)
    else:
        rows = bench.scale_l(values, n=args.series, num_kernels=args.kernels,
                             seed=args.seed, repeats=args.repeats,
                             threads=args.threads)
    text = bench.format_bench_csv(rows)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    print(text, end="")
    return 0


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "repro": cmd_repro,
    "sensitivity": cmd_sensitivity,
    "bench": cmd_bench,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        _log(f"error: {exc}")
        return 1
    except (DataError, TransformError) as exc:
        _log(f"data error: {exc}")
        return 2
    except NumericalError as exc:
        _log(f"numerical error: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
