"""Synthetic task generator and the scaling harness."""

import numpy as np
import pytest

from conftest import split_dataset
from rocket_tsc.bench import (
    BENCH_CSV_COLUMNS,
    format_bench_csv,
    gen_synthetic,
    scale_l,
    scale_n,
    write_bench_csv,
)
from rocket_tsc.errors import ConfigError
from rocket_tsc.kernels import GeneratorConfig
from rocket_tsc.pipeline import evaluate_pipeline, train_pipeline


@pytest.mark.parametrize("n,l,c", [(1, 46, 2), (100, 7, 3), (3, 46, 4),
                                   (10, 46, 1)])
def test_gen_synthetic_rejects_bad_arguments(n, l, c):
    with pytest.raises(ConfigError):
        gen_synthetic(n, l, c, seed=0)


def test_gen_synthetic_shapes_and_labels():
    data = gen_synthetic(100, 46, 3, seed=0)
    assert data.n_examples == 100
    assert data.length == 46
    assert all(s.shape == (46,) for s in data.series)
    assert data.label_vocabulary == ["0", "1", "2"]
    assert set(np.unique(data.labels)) == {0, 1, 2}


def test_gen_synthetic_is_seeded():
    a = gen_synthetic(20, 30, 2, seed=5)
    b = gen_synthetic(20, 30, 2, seed=5)
    c = gen_synthetic(20, 30, 2, seed=6)
    assert all(np.array_equal(x, y) for x, y in zip(a.series, b.series))
    assert np.array_equal(a.labels, b.labels)
    assert not all(np.array_equal(x, y) for x, y in zip(a.series, c.series))


def test_gen_synthetic_series_are_normalized():
    data = gen_synthetic(10, 64, 2, seed=1)
    for s in data.series:
        assert abs(float(np.mean(s))) < 1e-9
        assert abs(float(np.std(s)) - 1.0) < 1e-9


def test_gen_synthetic_classes_are_balanced():
    data = gen_synthetic(101, 32, 4, seed=2)
    counts = np.bincount(data.labels, minlength=4)
    assert counts.max() - counts.min() <= 1


def test_gen_synthetic_is_not_trivially_separable():
    """Noise keeps nearest-template assignment below perfection."""
    data = gen_synthetic(200, 46, 3, seed=3)
    stacked = np.vstack(data.series)
    # Per-class means as templates; check some spread exists within classes.
    within = []
    for c in range(3):
        rows = stacked[data.labels == c]
        within.append(float(np.mean(np.std(rows, axis=0))))
    assert min(within) > 0.1


@pytest.fixture(scope="module")
def sanity_split():
    full = gen_synthetic(2500, 46, 3, seed=42)
    return split_dataset(full, 2000)


@pytest.fixture(scope="module")
def sanity_accuracies(sanity_split):
    train, test = sanity_split
    scores = {}
    for k in (100, 10_000):
        fitted = train_pipeline(train, GeneratorConfig(num_kernels=k, seed=0))
        scores[k] = evaluate_pipeline(fitted, test)["accuracy"]
    return scores


def test_default_pipeline_reaches_95_percent(sanity_accuracies):
    assert sanity_accuracies[10_000] >= 0.95


def test_more_kernels_do_not_hurt(sanity_accuracies):
    gap = sanity_accuracies[10_000] - sanity_accuracies[100]
    if abs(gap) < 0.01:
        pytest.skip(f"inconclusive: k=100 vs k=10000 within noise ({gap:+.4f})")
    assert gap > 0.0


def test_scale_n_rows_have_expected_structure():
    rows = scale_n([30, 60], length=30, num_kernels=100, seed=0, repeats=1)
    assert [row["n_or_l"] for row in rows] == [30, 60]
    for row in rows:
        assert set(row) == set(BENCH_CSV_COLUMNS)
        assert row["k"] == 100
        assert row["threads"] == 1
        assert row["transform_s"] > 0.0
        assert row["train_s"] > 0.0
        assert 0.0 <= row["accuracy"] <= 1.0


def test_scale_l_rows_have_expected_structure():
    rows = scale_l([32, 64], n=40, num_kernels=100, seed=0, repeats=1)
    assert [row["n_or_l"] for row in rows] == [32, 64]
    for row in rows:
        assert row["transform_s"] > 0.0


def test_bench_csv_writing(tmp_path):
    rows = scale_n([20], length=24, num_kernels=50, seed=1, repeats=1)
    path = tmp_path / "bench.csv"
    write_bench_csv(rows, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == ",".join(BENCH_CSV_COLUMNS)
    assert len(lines) == 2
    assert format_bench_csv(rows).splitlines()[0] == lines[0]
