"""Model persistence: one versioned JSON file per fitted pipeline.

The file contains everything prediction needs — generator config, the drawn
kernels, length policy, normalization flag, label vocabulary, and the
classifier parameters — so a model can be trained once and evaluated
anywhere. Serialization is canonical (sorted keys, no whitespace, repr
floats), so the same fitted pipeline always produces byte-identical files.

Files carry a format version. Loading a file written by a newer format
fails loudly rather than guessing at its layout.
"""

import json

import numpy as np

from .errors import DataError
from .kernels import GeneratorConfig, Kernel
from .pipeline import FittedPipeline
from .ridge import RidgeModel
from .sgd import LogisticModel

FORMAT_VERSION = 1


def _array(values, dtype=np.float64):
    return np.ascontiguousarray(values, dtype=dtype)


def _kernels_to_dict(kernels):
    return {
        "weights": [k.weights.tolist() for k in kernels],
        "biases": [float(k.bias) for k in kernels],
        "dilations": [int(k.dilation) for k in kernels],
        "paddings": [int(k.padding) for k in kernels],
    }


def _kernels_from_dict(payload):
    return [
        Kernel(
            weights=_array(w),
            bias=float(b),
            dilation=int(d),
            padding=int(p),
        )
        for w, b, d, p in zip(
            payload["weights"], payload["biases"],
            payload["dilations"], payload["paddings"],
        )
    ]


def _classifier_to_dict(kind, model):
    if kind == "ridge":
        return {
            "kind": "ridge",
            "coefficients": model.coefficients.tolist(),
            "intercepts": model.intercepts.tolist(),
            "chosen_alpha": float(model.chosen_alpha),
            "feature_means": model.feature_means.tolist(),
            "feature_stds": model.feature_stds.tolist(),
            "class_labels": model.class_labels.tolist(),
        }
    return {
        "kind": "sgd",
        "weights": model.weights.tolist(),
        "biases": model.biases.tolist(),
        "feature_means": model.feature_means.tolist(),
        "feature_stds": model.feature_stds.tolist(),
        "class_labels": model.class_labels.tolist(),
    }


def _classifier_from_dict(payload):
    kind = payload["kind"]
    if kind == "ridge":
        return kind, RidgeModel(
            coefficients=_array(payload["coefficients"]),
            intercepts=_array(payload["intercepts"]),
            chosen_alpha=float(payload["chosen_alpha"]),
            feature_means=_array(payload["feature_means"]),
            feature_stds=_array(payload["feature_stds"]),
            class_labels=_array(payload["class_labels"], dtype=np.int64),
        )
    if kind == "sgd":
        return kind, LogisticModel(
            weights=_array(payload["weights"]),
            biases=_array(payload["biases"]),
            feature_means=_array(payload["feature_means"]),
            feature_stds=_array(payload["feature_stds"]),
            class_labels=_array(payload["class_labels"], dtype=np.int64),
        )
    raise DataError(f"unknown classifier kind {kind!r} in model file")


def model_to_dict(fitted):
    """Serializable dict for a fitted pipeline."""
    return {
        "format_version": FORMAT_VERSION,
        "generator_config": fitted.config.to_dict(),
        "kernels": _kernels_to_dict(fitted.kernels),
        "classifier": _classifier_to_dict(fitted.classifier_kind, fitted.model),
        "label_vocabulary": list(fitted.label_vocabulary),
        "length_policy": fitted.length_policy,
        "train_length": int(fitted.train_length),
        "normalize": bool(fitted.normalize),
    }


def model_from_dict(payload):
    """Rebuild a FittedPipeline from a serialized dict."""
    try:
        version = int(payload["format_version"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError("model file has no readable format_version") from exc
    if version > FORMAT_VERSION:
        raise DataError(
            f"model file has format_version {version}, newer than the "
            f"supported version {FORMAT_VERSION}; upgrade the package to read it"
        )
    try:
        kind, model = _classifier_from_dict(payload["classifier"])
        return FittedPipeline(
            config=GeneratorConfig.from_dict(payload["generator_config"]),
            kernels=_kernels_from_dict(payload["kernels"]),
            classifier_kind=kind,
            model=model,
            label_vocabulary=[str(t) for t in payload["label_vocabulary"]],
            length_policy=str(payload["length_policy"]),
            train_length=int(payload["train_length"]),
            normalize=bool(payload["normalize"]),
        )
    except KeyError as exc:
        raise DataError(f"model file is missing field {exc.args[0]!r}") from exc


def save_model(path, fitted):
    """Write a fitted pipeline to `path` as canonical JSON."""
    payload = json.dumps(model_to_dict(fitted), sort_keys=True,
                         separators=(",", ":"))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(payload)
        fh.write("\n")


def load_model(path):
    """Read a model file written by save_model."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"model file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataError(f"model file {path} does not contain a JSON object")
    return model_from_dict(payload)
