"""Transform correctness against an independent reference implementation.

The reference below recomputes everything with plain Python loops over an
explicitly zero-padded copy of the series — deliberately nothing like the
compiled implementation — so agreement is meaningful.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rocket_tsc import (
    ConfigError,
    DataError,
    GeneratorConfig,
    TransformError,
    apply_kernels,
    convolve,
    generate_kernels,
)
from rocket_tsc.kernels import Kernel


def reference_activations(series, kernel):
    """Activation map computed the slow, obvious way."""
    padded = [0.0] * kernel.padding + list(series) + [0.0] * kernel.padding
    span = (kernel.length - 1) * kernel.dilation + 1
    acts = []
    for start in range(len(padded) - span + 1):
        total = kernel.bias
        for j in range(kernel.length):
            total += kernel.weights[j] * padded[start + j * kernel.dilation]
        acts.append(total)
    return np.array(acts)


def reference_features(series, kernel):
    acts = reference_activations(series, kernel)
    return (acts > 0).mean(), acts.max()


class TestConvolve:
    def test_undilated_difference_kernel(self):
        k = Kernel(weights=np.array([1.0, 0.0, -1.0]), bias=0.0, dilation=1, padding=0)
        np.testing.assert_array_equal(convolve([0.0, 1.0, 2.0, 3.0], k), [-2.0, -2.0])

    def test_dilated_difference_kernel(self):
        k = Kernel(weights=np.array([1.0, 0.0, -1.0]), bias=0.0, dilation=2, padding=0)
        np.testing.assert_array_equal(convolve([0.0, 1.0, 2.0, 3.0, 4.0], k), [-4.0])

    def test_padding_and_bias(self):
        # Identity tap with one zero on each end: output is the padded series
        # shifted by the bias.
        k = Kernel(weights=np.array([1.0]), bias=0.5, dilation=1, padding=1)
        np.testing.assert_array_equal(
            convolve([1.0, 2.0, 3.0], k), [0.5, 1.5, 2.5, 3.5, 0.5]
        )

    def test_output_length_formula(self):
        rng = np.random.default_rng(0)
        series = rng.standard_normal(50)
        for l_k, d, p in [(3, 1, 0), (5, 4, 0), (7, 2, 6), (11, 3, 15), (9, 6, 24)]:
            k = Kernel(weights=rng.standard_normal(l_k), bias=0.1, dilation=d, padding=p)
            assert convolve(series, k).shape[0] == 50 + 2 * p - (l_k - 1) * d

    def test_span_exceeding_series_raises(self):
        k = Kernel(weights=np.ones(9), bias=0.0, dilation=2, padding=0)
        with pytest.raises(TransformError):
            convolve(np.zeros(10), k)


class TestFeatureSemantics:
    def test_ppv_counts_strictly_positive(self):
        # Activations are exactly [-1, 0, 2]: the zero must not count.
        k = Kernel(weights=np.array([1.0]), bias=0.0, dilation=1, padding=0)
        feats = apply_kernels(np.array([[-1.0, 0.0, 2.0]]), [k])
        assert feats.shape == (1, 2)
        assert feats[0, 0] == pytest.approx(1.0 / 3.0)
        assert feats[0, 1] == 2.0

    def test_max_of_all_negative_activations(self):
        k = Kernel(weights=np.array([1.0]), bias=-10.0, dilation=1, padding=0)
        feats = apply_kernels(np.array([[1.0, 2.0, 3.0]]), [k])
        assert feats[0, 0] == 0.0
        assert feats[0, 1] == -7.0

    def test_interleaved_layout(self):
        kernels = generate_kernels(GeneratorConfig(num_kernels=40, seed=1), 80)
        X = np.random.default_rng(2).standard_normal((6, 80))
        both = apply_kernels(X, kernels, feature_mode="ppv_and_max")
        ppv = apply_kernels(X, kernels, feature_mode="ppv_only")
        mx = apply_kernels(X, kernels, feature_mode="max_only")
        assert both.shape == (6, 80)
        assert ppv.shape == mx.shape == (6, 40)
        np.testing.assert_array_equal(both[:, 0::2], ppv)
        np.testing.assert_array_equal(both[:, 1::2], mx)

    def test_output_dtype_and_layout(self):
        kernels = generate_kernels(GeneratorConfig(num_kernels=5, seed=1), 30)
        feats = apply_kernels(np.zeros((3, 30)), kernels)
        assert feats.dtype == np.float64
        assert feats.flags["C_CONTIGUOUS"]


class TestAgainstReference:
    def test_random_kernels_match_reference(self):
        rng = np.random.default_rng(42)
        kernels = generate_kernels(GeneratorConfig(num_kernels=150, seed=9), 64)
        X = rng.standard_normal((10, 64))
        feats = apply_kernels(X, kernels)
        worst = 0.0
        for i in range(X.shape[0]):
            for j, k in enumerate(kernels):
                ppv, mx = reference_features(X[i], k)
                worst = max(worst, abs(ppv - feats[i, 2 * j]), abs(mx - feats[i, 2 * j + 1]))
        assert worst <= 1e-9

    @settings(max_examples=25, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        length=st.integers(9, 120),
        weight_mode=st.sampled_from(["normal", "uniform"]),
        padding_mode=st.sampled_from(["random", "always", "uniform", "never"]),
    )
    def test_reference_agreement_property(self, seed, length, weight_mode, padding_mode):
        rng = np.random.default_rng(seed)
        cfg = GeneratorConfig(
            num_kernels=12,
            lengths=(3, 5, 7),
            weight_mode=weight_mode,
            padding_mode=padding_mode,
            seed=seed,
        )
        kernels = generate_kernels(cfg, length)
        X = rng.standard_normal((3, length))
        feats = apply_kernels(X, kernels)
        for i in range(3):
            for j, k in enumerate(kernels):
                ppv, mx = reference_features(X[i], k)
                assert feats[i, 2 * j] == pytest.approx(ppv, abs=1e-9)
                assert feats[i, 2 * j + 1] == pytest.approx(mx, abs=1e-9)


class TestVariableLength:
    def test_ragged_input_matches_per_series_calls(self):
        rng = np.random.default_rng(3)
        kernels = generate_kernels(GeneratorConfig(num_kernels=30, seed=4), 40)
        series = [rng.standard_normal(n) for n in (40, 55, 71, 44)]
        ragged = apply_kernels(series, kernels)
        assert ragged.shape == (4, 60)
        for i, s in enumerate(series):
            single = apply_kernels(s[None, :], kernels)
            np.testing.assert_array_equal(ragged[i], single[0])

    def test_short_series_raises_with_indices(self):
        kernels = [
            Kernel(weights=np.ones(3), bias=0.0, dilation=1, padding=0),
            Kernel(weights=np.ones(7), bias=0.0, dilation=8, padding=0),
        ]
        series = [np.zeros(60), np.zeros(20)]
        with pytest.raises(TransformError) as exc_info:
            apply_kernels(series, kernels)
        err = exc_info.value
        assert err.series_index == 1
        assert err.kernel_index == 1
        assert "no valid output position" in str(err)

    def test_short_series_fallback_features(self):
        kernels = [
            Kernel(weights=np.ones(3), bias=0.5, dilation=1, padding=0),
            Kernel(weights=np.ones(7), bias=0.5, dilation=8, padding=0),
        ]
        series = [np.ones(60), np.ones(20)]
        feats = apply_kernels(series, kernels, short_series_fallback=True)
        # Valid pairs computed normally; the invalid pair is exactly (0, 0).
        assert feats[1, 2] == 0.0 and feats[1, 3] == 0.0
        assert feats[0, 3] == pytest.approx(7.5)  # all-ones series, 7 unit taps
        assert feats[0, 2] == 1.0  # every activation positive
        assert feats[1, 0] == 1.0  # ppv of kernel 0 on series 1


class TestValidation:
    def test_rejects_empty_kernel_list(self):
        with pytest.raises(ConfigError):
            apply_kernels(np.zeros((2, 10)), [])

    def test_rejects_unknown_feature_mode(self):
        k = Kernel(weights=np.ones(3), bias=0.0, dilation=1, padding=0)
        with pytest.raises(ConfigError):
            apply_kernels(np.zeros((2, 10)), [k], feature_mode="median")

    def test_rejects_non_finite_values(self):
        k = Kernel(weights=np.ones(3), bias=0.0, dilation=1, padding=0)
        X = np.zeros((3, 10))
        X[1, 4] = np.nan
        with pytest.raises(DataError, match="series 1"):
            apply_kernels(X, [k])


def test_thread_count_does_not_change_features():
    import numba

    kernels = generate_kernels(GeneratorConfig(num_kernels=200, seed=6), 90)
    X = np.random.default_rng(7).standard_normal((12, 90))
    numba.set_num_threads(4)
    multi = apply_kernels(X, kernels)
    numba.set_num_threads(1)
    single = apply_kernels(X, kernels)
    numba.set_num_threads(4)
    assert np.array_equal(multi, single)
