"""End-to-end training and prediction: data prep, kernels, features, classifier.

This is the layer the CLI, sensitivity runner, and benchmark harness share.
Training cleans the data (interpolation, optional normalization), settles the
length policy, generates kernels for the training length, transforms, and
fits either the ridge classifier (closed-form, preferred) or the streaming
softmax classifier for collections too large to transform in one piece.
Prediction replays the same preparation from the stored state and transforms
in bounded chunks.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .data import (
    Dataset,
    apply_length_policy,
    clean_dataset,
    rescale_series,
    resolve_length_policy,
)
from .errors import ConfigError, DataError
from .kernels import generate_kernels
from .ridge import fit_ridge, predict_ridge
from .sgd import TrainSchedule, fit_logistic, predict_logistic
from .transform import apply_kernels

# Above this many training examples the feature matrix stops fitting
# comfortably in memory and training switches to the streaming classifier.
SGD_THRESHOLD = 20_000
TRANCHE_SIZE = 2_048
PREDICT_CHUNK = 512

CLASSIFIER_KINDS = ("ridge", "sgd", "auto")


@dataclass
class FittedPipeline:
    """Everything needed to reproduce predictions: config, kernels, model."""

    config: "GeneratorConfig"
    kernels: list
    classifier_kind: str  # "ridge" or "sgd"
    model: object
    label_vocabulary: list
    length_policy: str  # "fixed", "rescaled", or "as_is"
    train_length: int  # length kernels were generated for
    normalize: bool
    train_timings: dict = field(default_factory=dict, repr=False)

    @property
    def uses_fallback(self):
        return self.length_policy == "as_is"


def _series_batch(dataset, indices):
    if dataset.length_policy in ("fixed", "rescaled"):
        return np.vstack([dataset.series[i] for i in indices])
    return [dataset.series[i] for i in indices]


def train_pipeline(train, config, classifier="auto", schedule=None, normalize=True):
    """Fit the full pipeline on a training dataset.

    `classifier` is "ridge", "sgd", or "auto" (ridge up to SGD_THRESHOLD
    examples, streaming softmax above). Returns a FittedPipeline whose
    `train_timings` record transform and classifier seconds.
    """
    if classifier not in CLASSIFIER_KINDS:
        raise ConfigError(
            f"classifier must be one of {CLASSIFIER_KINDS}, got {classifier!r}"
        )
    clean = clean_dataset(train, normalize=normalize)
    policy, policy_length = resolve_length_policy(clean, config)
    prepared = apply_length_policy(clean, policy, policy_length)
    train_length = (
        prepared.length if policy in ("fixed", "rescaled") else prepared.max_length
    )
    kernels = generate_kernels(config, train_length)

    n = prepared.n_examples
    kind = classifier
    if kind == "auto":
        kind = "sgd" if n > SGD_THRESHOLD else "ridge"

    timings = {}
    if kind == "ridge":
        batch = _series_batch(prepared, range(n))
        t0 = time.perf_counter()
        features = apply_kernels(
            batch, kernels, config.feature_mode,
            short_series_fallback=(policy == "as_is"),
        )
        timings["transform_seconds"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        model = fit_ridge(features, prepared.labels)
        timings["train_seconds"] = time.perf_counter() - t0
    else:
        model, sgd_timings = _train_sgd(prepared, config, kernels, schedule)
        timings.update(sgd_timings)

    return FittedPipeline(
        config=config,
        kernels=kernels,
        classifier_kind=kind,
        model=model,
        label_vocabulary=list(prepared.label_vocabulary),
        length_policy=policy,
        train_length=train_length,
        normalize=normalize,
        train_timings=timings,
    )


def _train_sgd(prepared, config, kernels, schedule):
    schedule = schedule if schedule is not None else TrainSchedule()
    n = prepared.n_examples
    if n < 4:
        raise DataError(f"streaming training needs at least 4 examples, got {n}")
    order = np.random.default_rng(config.seed).permutation(n)
    val_n = min(schedule.validation_size, max(2, n // 10))
    val_idx, train_idx = order[:val_n], order[val_n:]
    validation = (_series_batch(prepared, val_idx), prepared.labels[val_idx])
    stream = [
        (
            _series_batch(prepared, train_idx[start : start + TRANCHE_SIZE]),
            prepared.labels[train_idx[start : start + TRANCHE_SIZE]],
        )
        for start in range(0, train_idx.shape[0], TRANCHE_SIZE)
    ]
    t0 = time.perf_counter()
    model = fit_logistic(
        stream,
        kernels,
        schedule,
        validation,
        class_labels=np.arange(prepared.n_classes),
        feature_mode=config.feature_mode,
    )
    # The streaming trainer interleaves transform and optimization; report
    # the whole fit as training time.
    return model, {"transform_seconds": 0.0,
                   "train_seconds": time.perf_counter() - t0}


def _prepare_for_prediction(fitted, dataset):
    clean = clean_dataset(dataset, normalize=fitted.normalize)
    if fitted.length_policy == "rescaled":
        series = [rescale_series(s, fitted.train_length) for s in clean.series]
        return Dataset(series, clean.labels, list(clean.label_vocabulary),
                       "rescaled", fitted.train_length)
    return clean


def predict_pipeline(fitted, dataset, return_times=False):
    """Predict label indices for a dataset, transforming in bounded chunks."""
    prepared = _prepare_for_prediction(fitted, dataset)
    n = prepared.n_examples
    predict_one = predict_ridge if fitted.classifier_kind == "ridge" else predict_logistic
    predictions = np.empty(n, dtype=np.int64)
    transform_s = 0.0
    classify_s = 0.0
    for start in range(0, n, PREDICT_CHUNK):
        indices = range(start, min(start + PREDICT_CHUNK, n))
        batch = _series_batch(prepared, indices)
        t0 = time.perf_counter()
        features = apply_kernels(
            batch, fitted.kernels, fitted.config.feature_mode,
            short_series_fallback=fitted.uses_fallback,
        )
        transform_s += time.perf_counter() - t0
        t0 = time.perf_counter()
        predictions[indices.start : indices.stop] = predict_one(fitted.model, features)
        classify_s += time.perf_counter() - t0
    if return_times:
        return predictions, {"transform_seconds": transform_s,
                             "predict_seconds": classify_s}
    return predictions


def evaluate_pipeline(fitted, dataset):
    """Accuracy report for a labeled dataset.

    Returns overall accuracy, per-class accuracy keyed by label token, and
    transform/predict wall times.
    """
    predictions, times = predict_pipeline(fitted, dataset, return_times=True)
    truth = dataset.labels
    accuracy = float(np.mean(predictions == truth))
    per_class = {}
    for c in np.unique(truth):
        mask = truth == c
        per_class[dataset.label_vocabulary[c]] = float(
            np.mean(predictions[mask] == c)
        )
    return {
        "accuracy": accuracy,
        "per_class": per_class,
        "n_examples": int(truth.shape[0]),
        **times,
    }
