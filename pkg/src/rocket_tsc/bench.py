"""Scalability benchmarks: timing versus training-set size, length, and k.

The transform cost is linear in each of the number of series, series length,
and kernel count; this module measures that directly on a seeded synthetic
task so the curves do not depend on any external data. Timings exclude data
generation and I/O, and every cell is the median of repeated runs on a
recorded (default single) thread count.
"""

import csv

import numba
import numpy as np

from .data import Dataset, znormalize
from .errors import ConfigError
from .kernels import GeneratorConfig
from .pipeline import evaluate_pipeline, train_pipeline

BENCH_CSV_COLUMNS = ("n_or_l", "k", "transform_s", "train_s", "accuracy",
                     "threads")
DEFAULT_REPEATS = 3
_NOISE_SIGMA = 0.5
_TEST_EXAMPLES = 500


def gen_synthetic(n, l, num_classes, seed):
    """A seeded synthetic classification task.

    Each class has a smooth template — the sum of two sinusoids whose
    frequencies and phases depend on the class — and each series is its
    template plus Gaussian noise (sigma 0.5), z-normalized. Learnable, but
    not trivially separable at this noise level.
    """
    if num_classes < 2:
        raise ConfigError(f"need at least 2 classes, got {num_classes}")
    if n < num_classes:
        raise ConfigError(
            f"need at least one example per class: n={n} < {num_classes}"
        )
    if l < 8:
        raise ConfigError(f"series length must be at least 8, got {l}")
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, l)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(num_classes, 2))
    templates = np.empty((num_classes, l))
    for c in range(num_classes):
        templates[c] = (
            np.sin(2.0 * np.pi * (2.0 + c) * t + phases[c, 0])
            + 0.8 * np.sin(2.0 * np.pi * (5.0 + 2.0 * c) * t + phases[c, 1])
        )
    labels = rng.permutation(np.arange(n) % num_classes).astype(np.int64)
    noise = rng.normal(0.0, _NOISE_SIGMA, size=(n, l))
    series = [znormalize(templates[labels[i]] + noise[i]) for i in range(n)]
    vocabulary = [str(c) for c in range(num_classes)]
    return Dataset(series, labels, vocabulary, "fixed", l)


def _timed_cell(train, test, config, repeats):
    """Median transform/train seconds over `repeats` fits, plus accuracy."""
    transform_times = []
    train_times = []
    fitted = None
    for _ in range(max(1, repeats)):
        fitted = train_pipeline(train, config, classifier="auto")
        transform_times.append(fitted.train_timings["transform_seconds"])
        train_times.append(fitted.train_timings["train_seconds"])
    report = evaluate_pipeline(fitted, test)
    return {
        "transform_s": float(np.median(transform_times)),
        "train_s": float(np.median(train_times)),
        "accuracy": report["accuracy"],
    }


def _scale(axis_values, make_datasets, num_kernels, seed, repeats, threads):
    previous_threads = numba.get_num_threads()
    numba.set_num_threads(threads)
    config = GeneratorConfig(num_kernels=num_kernels, seed=seed)
    rows = []
    try:
        for value in axis_values:
            train, test = make_datasets(value)
            cell = _timed_cell(train, test, config, repeats)
            rows.append({"n_or_l": int(value), "k": int(num_kernels),
                         "threads": int(threads), **cell})
    finally:
        numba.set_num_threads(previous_threads)
    return rows


def scale_n(sizes, length, num_kernels, num_classes=3, seed=0,
            repeats=DEFAULT_REPEATS, threads=1):
    """Timing/accuracy rows for growing training-set sizes at fixed length.

    Training uses the closed-form ridge classifier up to the pipeline's size
    threshold and the streaming softmax classifier above it. For streamed
    fits the transform is interleaved with optimization, so transform_s
    stays folded into train_s there.
    """
    def make(n):
        data = gen_synthetic(int(n) + _TEST_EXAMPLES, length, num_classes, seed)
        train_idx = np.arange(int(n))
        test_idx = np.arange(int(n), data.n_examples)
        return _subset(data, train_idx), _subset(data, test_idx)

    return _scale(sizes, make, num_kernels, seed, repeats, threads)


def scale_l(lengths, n, num_kernels, num_classes=3, seed=0,
            repeats=DEFAULT_REPEATS, threads=1):
    """Timing rows for growing series lengths at fixed training-set size."""
    def make(length):
        data = gen_synthetic(int(n) + _TEST_EXAMPLES, int(length),
                             num_classes, seed)
        train_idx = np.arange(int(n))
        test_idx = np.arange(int(n), data.n_examples)
        return _subset(data, train_idx), _subset(data, test_idx)

    return _scale(lengths, make, num_kernels, seed, repeats, threads)


def _subset(dataset, indices):
    return Dataset(
        [dataset.series[i] for i in indices],
        dataset.labels[indices],
        list(dataset.label_vocabulary),
        dataset.length_policy,
        dataset.length,
    )


def write_bench_csv(rows, path):
    """Write benchmark rows in the standard column order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_CSV_COLUMNS)
        for row in rows:
            writer.writerow([row[c] for c in BENCH_CSV_COLUMNS])


def format_bench_csv(rows):
    """Render benchmark rows as CSV text."""
    lines = [",".join(BENCH_CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in BENCH_CSV_COLUMNS))
    return "\n".join(lines) + "\n"
