"""End-to-end pipeline tests: training, prediction, policies, evaluation."""

import numpy as np
import pytest

from conftest import split_dataset
from rocket_tsc import pipeline
from rocket_tsc.bench import gen_synthetic
from rocket_tsc.data import Dataset
from rocket_tsc.errors import ConfigError, DataError
from rocket_tsc.kernels import GeneratorConfig
from rocket_tsc.pipeline import (
    evaluate_pipeline,
    predict_pipeline,
    train_pipeline,
)


@pytest.fixture(scope="module")
def synth_split():
    full = gen_synthetic(120, 50, 3, seed=11)
    return split_dataset(full, 80)


@pytest.fixture(scope="module")
def config():
    return GeneratorConfig(num_kernels=500, seed=3)


@pytest.fixture(scope="module")
def fitted_ridge(synth_split, config):
    train, _ = synth_split
    return train_pipeline(train, config, classifier="ridge")


def test_ridge_pipeline_is_accurate(fitted_ridge, synth_split):
    _, test = synth_split
    report = evaluate_pipeline(fitted_ridge, test)
    assert report["accuracy"] >= 0.95
    assert report["n_examples"] == test.n_examples


def test_train_timings_are_recorded(fitted_ridge):
    timings = fitted_ridge.train_timings
    assert timings["transform_seconds"] > 0.0
    assert timings["train_seconds"] > 0.0


def test_auto_picks_ridge_below_threshold(synth_split, config):
    train, _ = synth_split
    fitted = train_pipeline(train, config, classifier="auto")
    assert fitted.classifier_kind == "ridge"


def test_forced_sgd_pipeline_works(synth_split, config):
    train, test = synth_split
    fitted = train_pipeline(train, config, classifier="sgd")
    assert fitted.classifier_kind == "sgd"
    report = evaluate_pipeline(fitted, test)
    assert report["accuracy"] >= 0.9


def test_unknown_classifier_rejected(synth_split, config):
    train, _ = synth_split
    with pytest.raises(ConfigError, match="classifier"):
        train_pipeline(train, config, classifier="forest")


def test_predictions_independent_of_chunking(
    fitted_ridge, synth_split, monkeypatch
):
    _, test = synth_split
    whole = predict_pipeline(fitted_ridge, test)
    monkeypatch.setattr(pipeline, "PREDICT_CHUNK", 7)
    chunked = predict_pipeline(fitted_ridge, test)
    assert np.array_equal(whole, chunked)


def test_per_class_accuracies_keyed_by_token(fitted_ridge, synth_split):
    _, test = synth_split
    report = evaluate_pipeline(fitted_ridge, test)
    assert set(report["per_class"]) == set(test.label_vocabulary)
    for value in report["per_class"].values():
        assert 0.0 <= value <= 1.0


def _frequency_task(lengths_rng, n, seed):
    """Two classes distinguished by frequency, with varying lengths."""
    rng = np.random.default_rng(seed)
    series, labels = [], []
    for i in range(n):
        length = int(lengths_rng[0] + rng.integers(0, lengths_rng[1] - lengths_rng[0]))
        t = np.linspace(0.0, 1.0, length)
        c = i % 2
        freq = 3.0 if c == 0 else 9.0
        series.append(np.sin(2.0 * np.pi * freq * t) + rng.normal(0, 0.2, length))
        labels.append(c)
    return Dataset(series, np.array(labels, dtype=np.int64), ["0", "1"],
                   "variable", None)


def test_variable_length_end_to_end():
    train = _frequency_task((30, 50), 40, seed=5)
    test = _frequency_task((30, 50), 20, seed=6)
    config = GeneratorConfig(num_kernels=300, seed=1)
    fitted = train_pipeline(train, config)
    assert fitted.length_policy in ("rescaled", "as_is")
    report = evaluate_pipeline(fitted, test)
    assert report["accuracy"] >= 0.9


def _amplitude_task(n, seed):
    """Classes share a shape and differ only in overall scale.

    The noise scales with the signal, so z-normalization makes the two
    classes statistically identical.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, 40)
    series, labels = [], []
    for i in range(n):
        c = i % 2
        scale = 1.0 if c == 0 else 4.0
        shape = np.sin(2.0 * np.pi * 3.0 * t) + rng.normal(0, 0.2, 40)
        series.append(scale * shape)
        labels.append(c)
    return Dataset(series, np.array(labels, dtype=np.int64), ["0", "1"],
                   "fixed", 40)


def test_normalization_flag_changes_what_is_learnable():
    train = _amplitude_task(60, seed=2)
    test = _amplitude_task(60, seed=3)
    config = GeneratorConfig(num_kernels=300, seed=4)
    raw = train_pipeline(train, config, normalize=False)
    assert raw.normalize is False
    assert evaluate_pipeline(raw, test)["accuracy"] >= 0.9
    # Normalization collapses the amplitude difference, leaving chance level.
    normalized = train_pipeline(train, config, normalize=True)
    assert evaluate_pipeline(normalized, test)["accuracy"] <= 0.75


def test_single_example_rejected():
    data = Dataset([np.sin(np.linspace(0, 6, 30))], np.array([0]), ["a"],
                   "fixed", 30)
    with pytest.raises(DataError):
        train_pipeline(data, GeneratorConfig(num_kernels=50, seed=0))


def test_sgd_needs_enough_examples_to_carve_validation():
    t = np.linspace(0, 1, 30)
    series = [np.sin(2 * np.pi * (3 + c) * t) for c in (0, 1, 0)]
    data = Dataset(series, np.array([0, 1, 0]), ["0", "1"], "fixed", 30)
    with pytest.raises(DataError, match="at least 4"):
        train_pipeline(data, GeneratorConfig(num_kernels=50, seed=0),
                       classifier="sgd")
