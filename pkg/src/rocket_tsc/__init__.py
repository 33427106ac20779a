"""Time series classification with random convolutional kernels."""

from .errors import (
    ConfigError,
    DataError,
    NumericalError,
    RocketError,
    TrainingDivergedError,
    TransformError,
)
from .kernels import GeneratorConfig, Kernel, dilation_bound, generate_kernels
from .transform import apply_kernels, convolve, pack_kernels
from .data import (
    Dataset,
    apply_length_policy,
    clean_dataset,
    interpolate_missing,
    load_split,
    load_ucr,
    rescale_series,
    resolve_length_policy,
    save_ucr,
    znormalize,
)
from .ridge import RidgeModel, fit_ridge, predict_ridge
from .sgd import (
    LogisticModel,
    TrainSchedule,
    fit_logistic,
    predict_logistic,
    predict_probabilities,
)
from .pipeline import (
    FittedPipeline,
    evaluate_pipeline,
    predict_pipeline,
    train_pipeline,
)
from .model_io import load_model, save_model
from .sensitivity import (
    DatasetManifest,
    ExperimentPlan,
    default_catalog,
    load_plan,
    mean_ranks,
    run_plan,
    save_plan,
    win_draw_loss,
)
from .bench import gen_synthetic, scale_l, scale_n

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "NumericalError",
    "RocketError",
    "TrainingDivergedError",
    "TransformError",
    "GeneratorConfig",
    "Kernel",
    "dilation_bound",
    "generate_kernels",
    "apply_kernels",
    "convolve",
    "pack_kernels",
    "Dataset",
    "apply_length_policy",
    "clean_dataset",
    "interpolate_missing",
    "load_split",
    "load_ucr",
    "rescale_series",
    "resolve_length_policy",
    "save_ucr",
    "znormalize",
    "RidgeModel",
    "fit_ridge",
    "predict_ridge",
    "LogisticModel",
    "TrainSchedule",
    "fit_logistic",
    "predict_logistic",
    "predict_probabilities",
    "FittedPipeline",
    "evaluate_pipeline",
    "predict_pipeline",
    "train_pipeline",
    "load_model",
    "save_model",
    "DatasetManifest",
    "ExperimentPlan",
    "default_catalog",
    "load_plan",
    "mean_ranks",
    "run_plan",
    "save_plan",
    "win_draw_loss",
    "gen_synthetic",
    "scale_l",
    "scale_n",
    "__version__",
]
