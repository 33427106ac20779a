"""Sensitivity analysis: run configuration variants over a dataset collection.

A plan names a set of generator-config variants (each differing from the
defaults in at most one axis), a list of dataset manifests, and a list of
seeds. The runner executes every (variant, dataset, seed) cell, records
per-cell accuracy and timing to a CSV, and aggregates mean/std accuracy per
(variant, dataset). Reruns skip cells that already have a finite recorded
accuracy, so an interrupted run resumes where it stopped; failed cells are
recorded as NaN and retried on the next run.

Summaries: `mean_ranks` (rank 1 is best, ties share the average rank) and
`win_draw_loss` for pairwise comparisons. Significance testing is out of
scope — export the CSV to external statistics tooling for that.
"""

import csv
import dataclasses
import json
import math
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .data import load_ucr
from .errors import ConfigError, DataError
from .kernels import GeneratorConfig
from .pipeline import evaluate_pipeline, train_pipeline

CSV_COLUMNS = ("variant", "dataset", "seed", "accuracy",
               "transform_seconds", "train_seconds")

# Generator-config axes a variant may change (seed is supplied per run).
VARIANT_AXES = ("num_kernels", "lengths", "weight_mode", "centering_mode",
                "bias_mode", "dilation_mode", "padding_mode", "feature_mode")

DEFAULT_SEEDS = tuple(range(10))


def changed_axes(config, base=None):
    """Names of the generator axes where `config` differs from `base`."""
    base = base if base is not None else GeneratorConfig()
    return [axis for axis in VARIANT_AXES
            if getattr(config, axis) != getattr(base, axis)]


@dataclass
class DatasetManifest:
    """One dataset entry in a plan: a name and its train/test files."""

    name: str
    train: str
    test: str
    normalize: bool = True


@dataclass
class ExperimentPlan:
    """Named variants x dataset manifests x seeds."""

    variants: dict  # name -> GeneratorConfig
    datasets: list  # of DatasetManifest
    seeds: tuple = DEFAULT_SEEDS

    def __post_init__(self):
        if not self.variants:
            raise ConfigError("plan has no variants")
        if not self.datasets:
            raise ConfigError("plan has no datasets")
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise ConfigError("plan has no seeds")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("plan seeds contain duplicates")
        names = [m.name for m in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError("dataset names in a plan must be unique")
        for name, config in self.variants.items():
            if not isinstance(name, str) or not name:
                raise ConfigError(f"variant name {name!r} is not a non-empty string")
            axes = changed_axes(config)
            if len(axes) > 1:
                raise ConfigError(
                    f"variant {name!r} changes more than one axis from the "
                    f"defaults: {', '.join(axes)}"
                )


def default_catalog():
    """The standard variant catalog: defaults plus every one-axis change.

    Covers kernel length (fixed lengths 3..15 and four length triples),
    weight, centering, bias, dilation and padding distributions, the two
    single-feature modes, and kernel counts from 10 to 100,000.
    """
    base = GeneratorConfig()
    variants = {"default": base}
    for length in (3, 5, 7, 9, 11, 13, 15):
        variants[f"length_{length}"] = dataclasses.replace(base, lengths=(length,))
    for triple in ((3, 5, 7), (5, 7, 9), (9, 11, 13), (11, 13, 15)):
        name = "lengths_" + "_".join(str(l) for l in triple)
        variants[name] = dataclasses.replace(base, lengths=triple)
    for mode in ("uniform", "integer"):
        variants[f"weights_{mode}"] = dataclasses.replace(base, weight_mode=mode)
    for mode in ("never", "random"):
        variants[f"centering_{mode}"] = dataclasses.replace(base, centering_mode=mode)
    for mode in ("zero", "normal"):
        variants[f"bias_{mode}"] = dataclasses.replace(base, bias_mode=mode)
    for mode in ("none", "uniform"):
        variants[f"dilation_{mode}"] = dataclasses.replace(base, dilation_mode=mode)
    for mode in ("always", "uniform", "never"):
        variants[f"padding_{mode}"] = dataclasses.replace(base, padding_mode=mode)
    variants["features_ppv"] = dataclasses.replace(base, feature_mode="ppv_only")
    variants["features_max"] = dataclasses.replace(base, feature_mode="max_only")
    for k in (10, 50, 100, 500, 1000, 5000, 50000, 100000):
        variants[f"k_{k}"] = dataclasses.replace(base, num_kernels=k)
    return variants


def save_plan(plan, path):
    """Write a plan as human-editable JSON."""
    payload = {
        "variants": {name: cfg.to_dict() for name, cfg in plan.variants.items()},
        "datasets": [dataclasses.asdict(m) for m in plan.datasets],
        "seeds": list(plan.seeds),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_plan(path):
    """Read a plan written by save_plan (or by hand)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read plan file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"plan file {path} is not valid JSON: {exc}") from exc
    try:
        variants = {name: GeneratorConfig.from_dict(cfg)
                    for name, cfg in payload["variants"].items()}
        datasets = [DatasetManifest(**entry) for entry in payload["datasets"]]
        seeds = payload.get("seeds", DEFAULT_SEEDS)
    except (KeyError, TypeError) as exc:
        raise DataError(f"plan file {path} is malformed: {exc}") from exc
    return ExperimentPlan(variants=variants, datasets=datasets, seeds=seeds)


def _read_result_rows(csv_path):
    rows = []
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return rows
        if tuple(header) != CSV_COLUMNS:
            raise DataError(
                f"{csv_path}: unexpected header {header!r}; "
                f"expected {','.join(CSV_COLUMNS)}"
            )
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(CSV_COLUMNS):
                raise DataError(f"{csv_path}: line {lineno}: malformed row")
            rows.append({
                "variant": record[0],
                "dataset": record[1],
                "seed": int(record[2]),
                "accuracy": float(record[3]),
                "transform_seconds": float(record[4]),
                "train_seconds": float(record[5]),
            })
    return rows


def _run_cell(datasets, manifest, config, classifier, schedule):
    train, test = datasets
    fitted = train_pipeline(train, config, classifier=classifier,
                            schedule=schedule, normalize=manifest.normalize)
    report = evaluate_pipeline(fitted, test)
    transform = (fitted.train_timings.get("transform_seconds", 0.0)
                 + report["transform_seconds"])
    return {
        "accuracy": report["accuracy"],
        "transform_seconds": transform,
        "train_seconds": fitted.train_timings.get("train_seconds", 0.0),
    }


def run_plan(plan, csv_path=None, threads=1, classifier="auto", schedule=None,
             log=None):
    """Execute a plan and return the aggregated result table.

    Per-cell results go to `csv_path` (appended; flushed per row) when given.
    Cells already present with a finite accuracy are skipped, making reruns
    resume after an interruption; cells recorded as NaN (failures) are
    retried. The return value maps (variant, dataset) to a dict with
    mean_accuracy and std_accuracy (population std) over the finite seeds.
    Cell jobs run on a `threads`-wide queue; rows are written by the
    collecting thread only.
    """
    log = log if log is not None else sys.stderr
    rows = []
    if csv_path is not None and os.path.exists(csv_path):
        rows = _read_result_rows(csv_path)
    done = {
        (r["variant"], r["dataset"], r["seed"])
        for r in rows if math.isfinite(r["accuracy"])
    }

    loaded = {}
    for manifest in plan.datasets:
        key = (manifest.train, manifest.test)
        if key not in loaded:
            loaded[key] = load_ucr(manifest.train, manifest.test)

    pending = [
        (name, manifest, seed)
        for name, config in plan.variants.items()
        for manifest in plan.datasets
        for seed in plan.seeds
        if (name, manifest.name, seed) not in done
    ]

    writer = None
    handle = None
    if csv_path is not None:
        is_new = not os.path.exists(csv_path) or os.path.getsize(csv_path) == 0
        handle = open(csv_path, "a", encoding="utf-8", newline="")
        writer = csv.writer(handle, lineterminator="\n")
        if is_new:
            writer.writerow(CSV_COLUMNS)
            handle.flush()

    def execute(job):
        name, manifest, seed = job
        config = dataclasses.replace(plan.variants[name], seed=seed)
        try:
            return _run_cell(loaded[(manifest.train, manifest.test)],
                             manifest, config, classifier, schedule)
        except Exception:
            print(f"cell failed: variant={name} dataset={manifest.name} "
                  f"seed={seed}\n{traceback.format_exc()}", file=log)
            return {"accuracy": float("nan"),
                    "transform_seconds": float("nan"),
                    "train_seconds": float("nan")}

    try:
        if threads <= 1:
            results = map(execute, pending)
            for job, result in zip(pending, results):
                rows.append(_collect(job, result, writer, handle))
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for job, result in zip(pending, pool.map(execute, pending)):
                    rows.append(_collect(job, result, writer, handle))
    finally:
        if handle is not None:
            handle.close()
    return aggregate_rows(rows)


def _collect(job, result, writer, handle):
    name, manifest, seed = job
    row = {"variant": name, "dataset": manifest.name, "seed": seed, **result}
    if writer is not None:
        writer.writerow([row[c] for c in CSV_COLUMNS])
        handle.flush()
    return row


def aggregate_rows(rows):
    """Collapse per-seed rows to {(variant, dataset): mean/std accuracy}.

    When a cell was recorded more than once (a failure later retried), the
    last record wins. Cells whose every attempt failed are left out of the
    table entirely, so downstream summaries can report them as missing.
    """
    per_cell = {}
    for row in rows:
        per_cell[(row["variant"], row["dataset"], row["seed"])] = row["accuracy"]
    grouped = {}
    for (variant, dataset, _seed), accuracy in per_cell.items():
        if math.isfinite(accuracy):
            grouped.setdefault((variant, dataset), []).append(accuracy)
    return {
        key: {
            "mean_accuracy": float(np.mean(values)),
            "std_accuracy": float(np.std(values)),
            "n_seeds": len(values),
        }
        for key, values in grouped.items()
    }


def _complete_grid(table, variants=None, datasets=None):
    variants = (sorted({v for v, _ in table}) if variants is None
                else list(variants))
    datasets = (sorted({d for _, d in table}) if datasets is None
                else list(datasets))
    missing = [(v, d) for v in variants for d in datasets if (v, d) not in table]
    if missing:
        listing = ", ".join(f"{v}/{d}" for v, d in missing)
        raise DataError(f"result table has missing cells: {listing}")
    return variants, datasets


def mean_ranks(table, variants=None, datasets=None):
    """Mean rank per variant across datasets (rank 1 = most accurate).

    Ranks are computed per dataset on mean accuracy; tied accuracies share
    the average of their ranks. Every variant must have a value on every
    dataset — missing cells raise an error naming them.
    """
    variants, datasets = _complete_grid(table, variants, datasets)
    totals = np.zeros(len(variants))
    for dataset in datasets:
        accuracies = np.array(
            [table[(v, dataset)]["mean_accuracy"] for v in variants]
        )
        totals += rankdata(-accuracies, method="average")
    return {v: float(totals[i] / len(datasets)) for i, v in enumerate(variants)}


def win_draw_loss(table, variant_a, variant_b, tolerance=0.0):
    """Count datasets where `variant_a` beats, ties, or loses to `variant_b`.

    Mean accuracies within `tolerance` of each other count as a draw
    (default 0: exact equality draws).
    """
    if tolerance < 0:
        raise ConfigError(f"tolerance must be non-negative, got {tolerance}")
    datasets = sorted({d for v, d in table if v in (variant_a, variant_b)})
    if not datasets:
        raise DataError(
            f"result table has no rows for {variant_a!r} or {variant_b!r}"
        )
    _complete_grid(table, [variant_a, variant_b], datasets)
    wins = draws = losses = 0
    for dataset in datasets:
        diff = (table[(variant_a, dataset)]["mean_accuracy"]
                - table[(variant_b, dataset)]["mean_accuracy"])
        if abs(diff) <= tolerance:
            draws += 1
        elif diff > 0:
            wins += 1
        else:
            losses += 1
    return wins, draws, losses


def format_rank_csv(ranks):
    """Render a mean-rank mapping as CSV text, best variant first."""
    lines = ["variant,mean_rank"]
    for variant in sorted(ranks, key=lambda v: (ranks[v], v)):
        lines.append(f"{variant},{ranks[variant]}")
    return "\n".join(lines) + "\n"
