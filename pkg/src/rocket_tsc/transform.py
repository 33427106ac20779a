"""Applying kernels to series: dilated convolution and feature pooling.

The compiled batch routine parallelizes over series (one row of the feature
matrix per thread at a time), while each (series, kernel) pair is computed by
a fixed sequential loop. The per-pair arithmetic is therefore identical no
matter how many threads run, which keeps feature matrices bit-for-bit
reproducible across thread counts.
"""

import numpy as np
from numba import njit, prange

from .errors import ConfigError, DataError, TransformError

_FEATURE_MODE_CODES = {"ppv_and_max": 0, "ppv_only": 1, "max_only": 2}


def convolve(series, kernel):
    """Raw activation map of one kernel over one series (bias included).

    The series is conceptually zero-padded with `kernel.padding` zeros on each
    end; output position t0 covers input indices t0, t0 + d, ..., t0 + (l-1)d
    in the unpadded coordinate system. Output length is
    l_in + 2p - (l_k - 1) d; raises TransformError if that is < 1.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1:
        raise ConfigError(f"convolve expects a 1-d series, got shape {series.shape}")
    l_in = series.shape[0]
    w = np.asarray(kernel.weights, dtype=np.float64)
    l_k = w.shape[0]
    d = int(kernel.dilation)
    p = int(kernel.padding)
    out_len = l_in + 2 * p - (l_k - 1) * d
    if out_len < 1:
        raise TransformError(0, 0)
    padded = np.zeros(l_in + 2 * p, dtype=np.float64)
    padded[p : p + l_in] = series
    idx = np.arange(out_len)[:, None] + d * np.arange(l_k)[None, :]
    return padded[idx] @ w + kernel.bias


def pack_kernels(kernels):
    """Flatten a kernel list into the arrays the compiled routine consumes.

    Returns (weights, weight_offsets, biases, dilations, paddings) where
    kernel k's weights live at weights[weight_offsets[k]:weight_offsets[k+1]].
    """
    lengths = np.array([k.length for k in kernels], dtype=np.int64)
    weight_offsets = np.zeros(len(kernels) + 1, dtype=np.int64)
    np.cumsum(lengths, out=weight_offsets[1:])
    weights = np.empty(int(weight_offsets[-1]), dtype=np.float64)
    for k, kernel in enumerate(kernels):
        weights[weight_offsets[k] : weight_offsets[k + 1]] = kernel.weights
    biases = np.array([k.bias for k in kernels], dtype=np.float64)
    dilations = np.array([k.dilation for k in kernels], dtype=np.int64)
    paddings = np.array([k.padding for k in kernels], dtype=np.int64)
    return weights, weight_offsets, biases, dilations, paddings


@njit(
    "UniTuple(f8, 2)(f8[::1], f8[::1], f8, i8, i8)",
    cache=True,
    fastmath=True,
)
def _kernel_features(series, weights, bias, dilation, padding):
    l_in = series.shape[0]
    l_k = weights.shape[0]
    out_len = l_in + 2 * padding - (l_k - 1) * dilation
    if out_len < 1:
        return 0.0, 0.0
    positive = 0
    _max = -np.inf
    for t0 in range(-padding, l_in + padding - (l_k - 1) * dilation):
        _sum = bias
        t = t0
        for j in range(l_k):
            if -1 < t < l_in:
                _sum += weights[j] * series[t]
            t += dilation
        if _sum > 0:
            positive += 1
        if _sum > _max:
            _max = _sum
    return positive / out_len, _max


@njit(
    "f8[:,::1](f8[::1], i8[::1], f8[::1], i8[::1], f8[::1], i8[::1], i8[::1], i8)",
    cache=True,
    fastmath=True,
    parallel=True,
)
def _apply_batch(values, series_offsets, weights, weight_offsets, biases, dilations, paddings, mode):
    n_series = series_offsets.shape[0] - 1
    n_kernels = weight_offsets.shape[0] - 1
    features_per_kernel = 2 if mode == 0 else 1
    out = np.zeros((n_series, n_kernels * features_per_kernel), dtype=np.float64)
    for i in prange(n_series):
        series = values[series_offsets[i] : series_offsets[i + 1]]
        for k in range(n_kernels):
            w = weights[weight_offsets[k] : weight_offsets[k + 1]]
            ppv, _max = _kernel_features(series, w, biases[k], dilations[k], paddings[k])
            if mode == 0:
                out[i, 2 * k] = ppv
                out[i, 2 * k + 1] = _max
            elif mode == 1:
                out[i, k] = ppv
            else:
                out[i, k] = _max
    return out


def _flatten(X):
    """Normalize input to (values, offsets): handles 2-d arrays and ragged lists."""
    if isinstance(X, np.ndarray) and X.ndim == 2:
        n = X.shape[0]
        values = np.ascontiguousarray(X, dtype=np.float64).ravel()
        offsets = np.arange(n + 1, dtype=np.int64) * X.shape[1]
        return values, offsets
    series_list = [np.ascontiguousarray(s, dtype=np.float64) for s in X]
    for i, s in enumerate(series_list):
        if s.ndim != 1:
            raise ConfigError(f"series {i} is not 1-dimensional (shape {s.shape})")
    offsets = np.zeros(len(series_list) + 1, dtype=np.int64)
    np.cumsum(np.array([s.shape[0] for s in series_list], dtype=np.int64), out=offsets[1:])
    values = (
        np.concatenate(series_list) if series_list else np.zeros(0, dtype=np.float64)
    )
    return values, offsets


def apply_kernels(X, kernels, feature_mode="ppv_and_max", short_series_fallback=False):
    """Transform series into pooled kernel features.

    X may be a 2-d float array (n_series, length) or a sequence of 1-d arrays
    of varying lengths. Output is float64 of shape (n_series, n_features) with
    kernel k's ppv in column 2k and max in column 2k+1 (single-feature modes
    use one column per kernel).

    A kernel whose dilated span exceeds a series' padded length has no valid
    output position: with short_series_fallback the pair's features are
    (ppv=0, max=0), otherwise TransformError identifies the first offending
    (series, kernel) pair.
    """
    if feature_mode not in _FEATURE_MODE_CODES:
        raise ConfigError(
            f"feature_mode must be one of {tuple(_FEATURE_MODE_CODES)}, got {feature_mode!r}"
        )
    if not kernels:
        raise ConfigError("apply_kernels requires at least one kernel")
    values, offsets = _flatten(X)
    if not np.all(np.isfinite(values)):
        first = int(np.flatnonzero(~np.isfinite(values))[0])
        where = int(np.searchsorted(offsets, first, side="right") - 1)
        raise DataError(
            f"series {where} contains non-finite values; interpolate or clean the data first"
        )
    weights, weight_offsets, biases, dilations, paddings = pack_kernels(kernels)
    if not short_series_fallback:
        series_lengths = np.diff(offsets)
        # Minimum series length for kernel k to have >= 1 output position.
        min_required = (weight_offsets[1:] - weight_offsets[:-1] - 1) * dilations - 2 * paddings + 1
        worst = int(min_required.max())
        if series_lengths.size and int(series_lengths.min()) < worst:
            for i in np.flatnonzero(series_lengths < worst):
                bad = np.flatnonzero(min_required > series_lengths[i])
                if bad.size:
                    raise TransformError(int(i), int(bad[0]))
    return _apply_batch(
        values, offsets, weights, weight_offsets, biases, dilations, paddings,
        _FEATURE_MODE_CODES[feature_mode],
    )
