"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError/usage -> 1, DataError -> 2,
NumericalError (and training divergence) -> 3.
"""


class RocketError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RocketError):
    """Invalid generator or run configuration."""


class DataError(RocketError):
    """Malformed input data, dataset/model mismatch, or bad model file."""


class TransformError(RocketError):
    """A kernel/series pair produced an empty feature map in strict mode."""

    def __init__(self, series_index, kernel_index):
        self.series_index = series_index
        self.kernel_index = kernel_index
        super().__init__(
            f"kernel {kernel_index} has no valid output position on series "
            f"{series_index} (effective span exceeds padded length)"
        )


class NumericalError(RocketError):
    """Decomposition failure or divergent optimization."""


class TrainingDivergedError(NumericalError):
    """Loss became non-finite during gradient-descent training."""

    def __init__(self, update, lr):
        self.update = update
        self.lr = lr
        super().__init__(
            f"training loss became non-finite at update {update} "
            f"(learning rate {lr:g}); retry with a smaller initial learning rate"
        )
