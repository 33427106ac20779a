"""Random convolutional kernel generation.

A kernel is a short weight vector plus a bias, a dilation (spacing between
taps), and a padding amount (zeros conceptually appended to both ends of a
series). Kernels are drawn from a seeded PRNG under a configuration that
exposes every sampling choice as an explicit mode, so ablation variants are
ordinary configurations rather than code paths.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DEFAULT_LENGTHS = (7, 9, 11)

WEIGHT_MODES = ("normal", "uniform", "integer")
CENTERING_MODES = ("always", "never", "random")
BIAS_MODES = ("uniform", "zero", "normal")
DILATION_MODES = ("exponential", "none", "uniform")
PADDING_MODES = ("random", "always", "uniform", "never")
FEATURE_MODES = ("ppv_and_max", "ppv_only", "max_only")


@dataclass(frozen=True)
class GeneratorConfig:
    """Full configuration of the kernel generator.

    Defaults reproduce the standard setup: lengths chosen uniformly from
    {7, 9, 11}, N(0, 1) weights mean-centered, U(-1, 1) bias, dilation on an
    exponential scale, padding applied with probability 1/2, and both ppv and
    max features. `lengths` with a single entry means a fixed kernel length.
    """

    num_kernels: int = 10_000
    lengths: tuple = DEFAULT_LENGTHS
    weight_mode: str = "normal"
    centering_mode: str = "always"
    bias_mode: str = "uniform"
    dilation_mode: str = "exponential"
    padding_mode: str = "random"
    feature_mode: str = "ppv_and_max"
    seed: int = 0

    def __post_init__(self):
        if self.num_kernels < 1:
            raise ConfigError(f"num_kernels must be >= 1, got {self.num_kernels}")
        lengths = tuple(int(l) for l in self.lengths)
        if not lengths:
            raise ConfigError("lengths must be a non-empty set of integers >= 2")
        if any(l < 2 for l in lengths):
            raise ConfigError(f"kernel lengths must be >= 2, got {lengths}")
        object.__setattr__(self, "lengths", lengths)
        for name, value, allowed in (
            ("weight_mode", self.weight_mode, WEIGHT_MODES),
            ("centering_mode", self.centering_mode, CENTERING_MODES),
            ("bias_mode", self.bias_mode, BIAS_MODES),
            ("dilation_mode", self.dilation_mode, DILATION_MODES),
            ("padding_mode", self.padding_mode, PADDING_MODES),
            ("feature_mode", self.feature_mode, FEATURE_MODES),
        ):
            if value not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {value!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    @property
    def features_per_kernel(self):
        return 2 if self.feature_mode == "ppv_and_max" else 1

    @property
    def num_features(self):
        return self.num_kernels * self.features_per_kernel

    def to_dict(self):
        return {
            "num_kernels": self.num_kernels,
            "lengths": list(self.lengths),
            "weight_mode": self.weight_mode,
            "centering_mode": self.centering_mode,
            "bias_mode": self.bias_mode,
            "dilation_mode": self.dilation_mode,
            "padding_mode": self.padding_mode,
            "feature_mode": self.feature_mode,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["lengths"] = tuple(d.get("lengths", DEFAULT_LENGTHS))
        return cls(**d)


@dataclass
class Kernel:
    """One random convolutional kernel.

    `padding` is the number of zeros conceptually appended to EACH end of a
    series (0 means no padding). Instances are treated as immutable and may be
    shared freely across threads.
    """

    weights: np.ndarray
    bias: float
    dilation: int
    padding: int

    @property
    def length(self):
        return self.weights.shape[0]

    @property
    def span(self):
        """Effective reach on the input: (length - 1) * dilation + 1."""
        return (self.length - 1) * self.dilation + 1


def dilation_bound(input_length, kernel_length):
    """Exponent bound A = log2((l_input - 1) / (l_kernel - 1)).

    Drawing x ~ U(0, A) and taking d = floor(2^x) keeps the kernel's effective
    span within the input series. Raises ConfigError when the kernel does not
    fit (callers clamp the kernel length first).
    """
    if kernel_length < 2:
        raise ConfigError(f"kernel_length must be >= 2, got {kernel_length}")
    if input_length < kernel_length:
        raise ConfigError(
            f"input_length {input_length} shorter than kernel_length {kernel_length}"
        )
    return math.log2((input_length - 1) / (kernel_length - 1))


def _clamped_lengths(lengths, input_length):
    # Candidates must satisfy l_kernel <= input_length so A >= 0; drop the ones
    # that do not fit, and if none fit fall back to the largest odd length >= 3
    # below input_length.
    fitting = tuple(l for l in lengths if l < input_length)
    if fitting:
        return fitting
    fallback = input_length - 1
    if fallback % 2 == 0:
        fallback -= 1
    fallback = max(fallback, 3)
    if fallback > input_length:
        raise ConfigError(
            f"input_length {input_length} too short: no kernel of odd length >= 3 fits"
        )
    return (fallback,)


def generate_kernels(config, input_length):
    """Draw `config.num_kernels` kernels for series of length `input_length`.

    Per-kernel draws happen in the fixed order length -> weights -> bias ->
    dilation -> padding, and identical (config, input_length) pairs produce
    identical kernel lists.
    """
    input_length = int(input_length)
    if input_length < 2:
        raise ConfigError(f"input_length must be >= 2, got {input_length}")
    candidates = _clamped_lengths(config.lengths, input_length)
    rng = np.random.default_rng(config.seed)
    kernels = []
    for _ in range(config.num_kernels):
        length = int(candidates[rng.integers(0, len(candidates))]) if len(candidates) > 1 else candidates[0]

        if config.weight_mode == "normal":
            weights = rng.standard_normal(length)
        elif config.weight_mode == "uniform":
            weights = rng.uniform(-1.0, 1.0, length)
        else:  # integer
            weights = rng.integers(-1, 2, length).astype(np.float64)
        if config.centering_mode == "always":
            weights = weights - weights.mean()
        elif config.centering_mode == "random":
            if rng.uniform() < 0.5:
                weights = weights - weights.mean()

        if config.bias_mode == "uniform":
            bias = rng.uniform(-1.0, 1.0)
        elif config.bias_mode == "normal":
            bias = rng.standard_normal()
        else:
            bias = 0.0

        if config.dilation_mode == "exponential":
            bound = max(dilation_bound(input_length, length), 0.0)
            dilation = int(2.0 ** rng.uniform(0.0, bound))
        elif config.dilation_mode == "uniform":
            high = (input_length - 1) / (length - 1)
            dilation = int(rng.uniform(1.0, high)) if high > 1.0 else 1
        else:
            dilation = 1
        dilation = max(dilation, 1)

        center = ((length - 1) * dilation) // 2
        if config.padding_mode == "random":
            padding = center if rng.uniform() < 0.5 else 0
        elif config.padding_mode == "always":
            padding = center
        elif config.padding_mode == "uniform":
            padding = int(rng.integers(0, center + 1))
        else:
            padding = 0

        kernels.append(Kernel(weights=weights, bias=float(bias), dilation=dilation, padding=padding))
    return kernels
