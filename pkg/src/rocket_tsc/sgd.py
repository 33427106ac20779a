"""Softmax regression trained with minibatch Adam over tranche-wise transforms.

For collections too large to hold a full feature matrix, training streams the
data in tranches: each tranche of raw series is transformed, standardized
with statistics frozen from the first tranche, split into minibatches, and
fed to Adam on the cross-entropy loss. Memory therefore scales with the
tranche size, never with the collection.

Scheduling: training always finishes at least `min_epochs` full passes;
afterwards it stops once validation loss (evaluated on a fixed, cached
validation transform after every update) has failed to improve for more than
`patience_val_updates` consecutive updates. The learning rate is halved
whenever training loss has not improved for more than `patience_train_updates`
updates (the halving resets that counter, not the best loss seen). An epoch
cap bounds runtime when validation keeps improving indefinitely.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, TrainingDivergedError
from .transform import apply_kernels

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

LR_SEARCH_CANDIDATES = (1e-2, 1e-3, 1e-4)
LR_SEARCH_UPDATES = 50
MAX_EPOCHS = 500


@dataclass
class TrainSchedule:
    """Knobs for the streaming trainer; defaults follow the training recipe."""

    minibatch_size: int = 256
    initial_lr: float = None  # None -> search LR_SEARCH_CANDIDATES
    patience_val_updates: int = 20
    patience_train_updates: int = 100
    min_epochs: int = 1
    validation_size: int = 2048
    max_epochs: int = MAX_EPOCHS

    def __post_init__(self):
        if self.minibatch_size < 1:
            raise ConfigError(f"minibatch_size must be >= 1, got {self.minibatch_size}")
        if self.initial_lr is not None and not self.initial_lr > 0:
            raise ConfigError(f"initial_lr must be positive, got {self.initial_lr}")
        if self.patience_val_updates < 0 or self.patience_train_updates < 0:
            raise ConfigError("patience values must be >= 0")
        if self.min_epochs < 1:
            raise ConfigError(f"min_epochs must be >= 1, got {self.min_epochs}")
        if self.validation_size < 1:
            raise ConfigError(f"validation_size must be >= 1, got {self.validation_size}")
        if self.max_epochs < self.min_epochs:
            raise ConfigError("max_epochs must be >= min_epochs")


@dataclass
class OptimizerState:
    """Adam moments and step counter for (weights, biases)."""

    m_weights: np.ndarray
    v_weights: np.ndarray
    m_biases: np.ndarray
    v_biases: np.ndarray
    step: int = 0


@dataclass
class ScheduleState:
    best_val_loss: float = np.inf
    val_counter: int = 0
    best_train_loss: float = np.inf
    train_counter: int = 0
    lr: float = 0.0


@dataclass
class LogisticModel:
    """Fitted softmax classifier plus the state that produced it."""

    weights: np.ndarray  # (num_classes, f)
    biases: np.ndarray  # (num_classes,)
    feature_means: np.ndarray
    feature_stds: np.ndarray
    class_labels: np.ndarray
    optimizer_state: OptimizerState = field(default=None, repr=False)
    schedule_state: ScheduleState = field(default=None, repr=False)
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def num_features(self):
        return self.weights.shape[1]


def softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def cross_entropy_and_gradients(weights, biases, X, y):
    """Mean cross-entropy over the batch and its analytic gradients.

    X is standardized features (n, f); y holds class indices (n,).
    """
    logits = X @ weights.T + biases
    probs = softmax(logits)
    n = X.shape[0]
    eps_row = probs[np.arange(n), y]
    loss = float(-np.mean(np.log(np.maximum(eps_row, 1e-300))))
    dlogits = probs
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    return loss, dlogits.T @ X, dlogits.sum(axis=0)


def adam_step(params, grads, m, v, step, lr):
    """One bias-corrected Adam update, in place on params/m/v.

    step is the post-increment step counter (1 on the first call).
    """
    m *= ADAM_BETA1
    m += (1.0 - ADAM_BETA1) * grads
    v *= ADAM_BETA2
    v += (1.0 - ADAM_BETA2) * np.square(grads)
    m_hat = m / (1.0 - ADAM_BETA1**step)
    v_hat = v / (1.0 - ADAM_BETA2**step)
    params -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


class _Trainer:
    def __init__(self, n_classes, n_features, lr):
        self.weights = np.zeros((n_classes, n_features))
        self.biases = np.zeros(n_classes)
        self.opt = OptimizerState(
            m_weights=np.zeros_like(self.weights),
            v_weights=np.zeros_like(self.weights),
            m_biases=np.zeros_like(self.biases),
            v_biases=np.zeros_like(self.biases),
        )
        self.lr = lr

    def update(self, X, y):
        loss, grad_w, grad_b = cross_entropy_and_gradients(
            self.weights, self.biases, X, y
        )
        self.opt.step += 1
        adam_step(self.weights, grad_w, self.opt.m_weights, self.opt.v_weights,
                  self.opt.step, self.lr)
        adam_step(self.biases, grad_b, self.opt.m_biases, self.opt.v_biases,
                  self.opt.step, self.lr)
        return loss

    def loss(self, X, y):
        logits = X @ self.weights.T + self.biases
        probs = softmax(logits)
        picked = probs[np.arange(X.shape[0]), y]
        return float(-np.mean(np.log(np.maximum(picked, 1e-300))))


def _tranche_iterable(stream):
    return stream() if callable(stream) else stream


def _minibatches(n, size):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def _standardize_with(stats, F):
    means, stds = stats
    return (F - means) / stds


def fit_logistic(stream, kernels, schedule, validation, class_labels,
                 feature_mode="ppv_and_max"):
    """Train softmax regression over a re-iterable stream of tranches.

    `stream` is an iterable (or zero-argument callable returning an iterable)
    of (series_batch, labels) tranches, where labels index into
    `class_labels`; it is consumed once per epoch. `validation` is one held
    out (series_batch, labels) pair, disjoint from the stream, transformed
    once and cached. When `schedule.initial_lr` is None, candidate rates are
    probed on the first tranche and the largest that keeps the loss finite
    for 50 updates wins.
    """
    class_labels = np.asarray(class_labels)
    n_classes = class_labels.shape[0]
    if n_classes < 2:
        raise DataError(f"need at least 2 classes, got {n_classes}")

    val_series, val_labels = validation
    val_labels = np.asarray(val_labels, dtype=np.int64)
    if len(val_series) == 0 or val_labels.shape[0] != len(val_series):
        raise DataError("validation batch is empty or misaligned")
    if val_labels.min() < 0 or val_labels.max() >= n_classes:
        raise DataError("validation labels fall outside the class vocabulary")
    if val_labels.shape[0] > schedule.validation_size:
        val_series = val_series[: schedule.validation_size]
        val_labels = val_labels[: schedule.validation_size]

    # First tranche fixes the standardization statistics and hosts the
    # learning-rate search.
    tranches = iter(_tranche_iterable(stream))
    try:
        first_series, first_labels = next(tranches)
    except StopIteration:
        raise DataError("training stream is empty") from None
    first_features = apply_kernels(first_series, kernels, feature_mode)
    means = first_features.mean(axis=0)
    stds = first_features.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)
    stats = (means, stds)

    first_X = _standardize_with(stats, first_features)
    first_y = np.asarray(first_labels, dtype=np.int64)
    n_features = first_X.shape[1]

    val_X = _standardize_with(stats, apply_kernels(val_series, kernels, feature_mode))

    if schedule.initial_lr is not None:
        lr = schedule.initial_lr
    else:
        lr = None
        for candidate in LR_SEARCH_CANDIDATES:
            probe = _Trainer(n_classes, n_features, candidate)
            diverged = False
            updates = 0
            while updates < LR_SEARCH_UPDATES:
                for batch in _minibatches(first_X.shape[0], schedule.minibatch_size):
                    loss = probe.update(first_X[batch], first_y[batch])
                    updates += 1
                    if not np.isfinite(loss):
                        diverged = True
                        break
                    if updates >= LR_SEARCH_UPDATES:
                        break
                if diverged:
                    break
            if not diverged:
                lr = candidate
                break
        if lr is None:
            raise TrainingDivergedError(LR_SEARCH_UPDATES, LR_SEARCH_CANDIDATES[-1])

    trainer = _Trainer(n_classes, n_features, lr)
    state = ScheduleState(lr=lr)
    peak_rows = first_X.shape[0]
    epochs_done = 0
    updates_done = 0
    stop = False

    def run_tranche(X, y):
        nonlocal updates_done, stop
        for batch in _minibatches(X.shape[0], schedule.minibatch_size):
            train_loss = trainer.update(X[batch], y[batch])
            updates_done += 1
            if not np.isfinite(train_loss):
                raise TrainingDivergedError(updates_done, trainer.lr)
            if train_loss < state.best_train_loss:
                state.best_train_loss = train_loss
                state.train_counter = 0
            else:
                state.train_counter += 1
                if state.train_counter > schedule.patience_train_updates:
                    trainer.lr /= 2.0
                    state.lr = trainer.lr
                    state.train_counter = 0
            val_loss = trainer.loss(val_X, val_labels)
            if val_loss < state.best_val_loss:
                state.best_val_loss = val_loss
                state.val_counter = 0
            else:
                state.val_counter += 1
            if (
                epochs_done >= schedule.min_epochs
                and state.val_counter > schedule.patience_val_updates
            ):
                stop = True
                return

    def epoch_pairs(epoch_index):
        """Standardized (X, y) tranches for one pass over the stream."""
        nonlocal peak_rows, first_X, first_y
        if epoch_index == 0:
            it = tranches  # continue the partially consumed first pass
            yield first_X, first_y
        else:
            it = iter(_tranche_iterable(stream))
        for series, labels in it:
            F = apply_kernels(series, kernels, feature_mode)
            peak_rows = max(peak_rows, F.shape[0])
            yield _standardize_with(stats, F), np.asarray(labels, dtype=np.int64)

    while not stop and epochs_done < schedule.max_epochs:
        for X, y in epoch_pairs(epochs_done):
            run_tranche(X, y)
            if stop:
                break
        else:
            epochs_done += 1
            first_X = first_y = None  # epoch 1 done; stream from scratch next pass
            continue
        break

    return LogisticModel(
        weights=trainer.weights,
        biases=trainer.biases,
        feature_means=means,
        feature_stds=stds,
        class_labels=class_labels,
        optimizer_state=trainer.opt,
        schedule_state=state,
        diagnostics={
            "initial_lr": lr,
            "final_lr": trainer.lr,
            "epochs": epochs_done,
            "updates": updates_done,
            "peak_feature_rows": peak_rows,
            "best_val_loss": state.best_val_loss,
        },
    )


def predict_probabilities(model, features):
    """Softmax class probabilities for standardized scoring."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.num_features:
        raise DataError(
            f"feature matrix has shape {X.shape}, model expects"
            f" (*, {model.num_features})"
        )
    Xs = (X - model.feature_means) / model.feature_stds
    return softmax(Xs @ model.weights.T + model.biases)


def predict_logistic(model, features):
    """Argmax of softmax scores; exact ties go to the earliest class label."""
    probs = predict_probabilities(model, features)
    return model.class_labels[np.argmax(probs, axis=1)]
