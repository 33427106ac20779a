"""Shared test configuration.

The thread-count determinism tests switch numba between 1 and 4 threads at
runtime, which requires the pool to be sized for at least 4 before numba is
first imported (the box may expose a single core). This module runs before
any test imports the package, so the environment variable is set here.
"""

import os

os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def split_dataset(dataset, n_train):
    """Split one Dataset into (train, test) at index n_train."""
    from rocket_tsc.data import Dataset

    def subset(indices):
        return Dataset(
            [dataset.series[i] for i in indices],
            dataset.labels[np.asarray(indices)],
            list(dataset.label_vocabulary),
            dataset.length_policy,
            dataset.length,
        )

    n = dataset.n_examples
    return subset(np.arange(n_train)), subset(np.arange(n_train, n))


@pytest.fixture
def make_ucr_pair(tmp_path):
    """Write a synthetic train/test file pair; returns (train_path, test_path)."""
    from rocket_tsc.bench import gen_synthetic
    from rocket_tsc.data import save_ucr

    def make(name="synth", n_train=40, n_test=20, length=36, num_classes=2,
             seed=100):
        full = gen_synthetic(n_train + n_test, length, num_classes, seed)
        train, test = split_dataset(full, n_train)
        train_path = tmp_path / f"{name}_TRAIN.tsv"
        test_path = tmp_path / f"{name}_TEST.tsv"
        save_ucr(train, train_path)
        save_ucr(test, test_path)
        return str(train_path), str(test_path)

    return make
