"""Dataset ingestion and preparation.

Reads label-first delimited text (tab, comma, or whitespace separated), maps
labels through a vocabulary built from the training split, z-normalizes,
interpolates missing values, and settles the rescale-vs-as-is question for
variable-length collections by cross-validating both options.

Missing values may be written as empty fields or a NaN token. Trailing
missing markers on a row are treated as absent values — the series simply
ends there — which covers collections stored as NaN-padded rectangles;
leading and interior gaps are genuine missing values for interpolation.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .kernels import GeneratorConfig, generate_kernels
from .transform import apply_kernels

LENGTH_POLICIES = ("fixed", "variable", "rescaled", "as_is")

# Reduced-size pipeline used only to pick a length policy; the fixed seed
# makes the decision a pure function of the dataset.
_POLICY_CV_KERNELS = 500
_POLICY_CV_SEED = 1729
_POLICY_CV_FOLDS = 10


@dataclass
class Dataset:
    """Series, aligned labels, and the label vocabulary of one split.

    `labels` are integer indices into `label_vocabulary` (original label
    tokens, sorted numerically when every token parses as a number). The
    length policy starts out "fixed" (all series share `length`) or
    "variable" (pending a resolve_length_policy decision) and becomes
    "rescaled" or "as_is" once settled.
    """

    series: list
    labels: np.ndarray
    label_vocabulary: list
    length_policy: str = "fixed"
    length: int = None

    def __post_init__(self):
        self.series = [np.ascontiguousarray(s, dtype=np.float64) for s in self.series]
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.series) != self.labels.shape[0] or not self.series:
            raise DataError(
                f"{len(self.series)} series and {self.labels.shape[0]} labels; "
                "need equal, non-zero counts"
            )
        if not self.label_vocabulary:
            raise DataError("label vocabulary is empty")
        if self.labels.min() < 0 or self.labels.max() >= len(self.label_vocabulary):
            raise DataError("label indices fall outside the vocabulary")
        if self.length_policy not in LENGTH_POLICIES:
            raise DataError(
                f"length_policy must be one of {LENGTH_POLICIES}, got {self.length_policy!r}"
            )
        if self.length_policy in ("fixed", "rescaled"):
            if self.length is None:
                self.length = int(self.series[0].shape[0])
            bad = [i for i, s in enumerate(self.series) if s.shape[0] != self.length]
            if bad:
                raise DataError(
                    f"length_policy {self.length_policy!r} requires all series of "
                    f"length {self.length}, but series {bad[0]} has {self.series[bad[0]].shape[0]}"
                )

    @property
    def n_examples(self):
        return len(self.series)

    @property
    def n_classes(self):
        return len(self.label_vocabulary)

    @property
    def max_length(self):
        return max(s.shape[0] for s in self.series)

    @property
    def is_variable_length(self):
        return self.length_policy in ("variable", "as_is")

    def as_matrix(self):
        """Stack into (n, L); only meaningful when every series has length L."""
        lengths = {s.shape[0] for s in self.series}
        if len(lengths) != 1:
            raise DataError(
                "cannot stack variable-length series into a matrix; "
                "apply a length policy first"
            )
        return np.vstack(self.series)

    def label_values(self):
        """Original label tokens aligned with the series."""
        return [self.label_vocabulary[i] for i in self.labels]


def znormalize(series):
    """Scale to mean 0, population standard deviation 1.

    Constant series (zero variance) map to all zeros rather than dividing by
    zero. Idempotent within floating-point tolerance.
    """
    s = np.asarray(series, dtype=np.float64)
    if s.size == 0:
        raise DataError("cannot normalize an empty series")
    sd = s.std()
    if sd == 0.0 or not np.isfinite(sd):
        return np.zeros_like(s)
    return (s - s.mean()) / sd


def interpolate_missing(series):
    """Fill NaN gaps by linear interpolation between observed neighbors.

    Leading and trailing gaps take the nearest observed value. Observed
    entries pass through untouched.
    """
    s = np.asarray(series, dtype=np.float64)
    missing = np.isnan(s)
    if not missing.any():
        return s.copy()
    if missing.all():
        raise DataError("series has no observed values to interpolate from")
    idx = np.arange(s.shape[0])
    out = s.copy()
    out[missing] = np.interp(idx[missing], idx[~missing], s[~missing])
    return out


def rescale_series(series, length):
    """Linearly resample onto a uniform grid of the requested length."""
    s = np.asarray(series, dtype=np.float64)
    if length < 1:
        raise ConfigError(f"target length must be >= 1, got {length}")
    if s.shape[0] == length:
        return s.copy()
    if s.shape[0] == 1:
        return np.full(length, s[0])
    return np.interp(
        np.linspace(0.0, s.shape[0] - 1.0, length), np.arange(s.shape[0]), s
    )


def _parse_row(tokens, path, lineno):
    label = tokens[0].strip()
    if not label:
        raise DataError(f"{path}: line {lineno}: empty label field")
    values = np.empty(len(tokens) - 1, dtype=np.float64)
    for j, tok in enumerate(tokens[1:]):
        tok = tok.strip()
        if tok == "" or tok.lower() == "nan":
            values[j] = np.nan
        else:
            try:
                values[j] = float(tok)
            except ValueError:
                raise DataError(
                    f"{path}: line {lineno}: cannot parse value {tok!r}"
                ) from None
    # Trailing missing markers delimit a shorter series.
    observed = np.flatnonzero(~np.isnan(values))
    if observed.size == 0:
        raise DataError(f"{path}: line {lineno}: row has no observed values")
    values = values[: observed[-1] + 1]
    if values.size == 0:
        raise DataError(f"{path}: line {lineno}: row has a label but no values")
    return label, values


def _read_rows(path):
    rows = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read data file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip("\n\r")
            if not stripped.strip():
                continue
            if "\t" in stripped:
                tokens = stripped.split("\t")
            elif "," in stripped:
                tokens = stripped.split(",")
            else:
                tokens = stripped.split()
            if len(tokens) < 2:
                raise DataError(
                    f"{path}: line {lineno}: row has a label but no values"
                )
            rows.append(_parse_row(tokens, path, lineno))
    if not rows:
        raise DataError(f"{path}: no data rows found")
    return rows


def _vocabulary(labels):
    distinct = sorted(set(labels))
    try:
        distinct.sort(key=float)
    except ValueError:
        pass  # non-numeric labels stay lexicographic
    return distinct


def _build_dataset(rows, vocabulary, path):
    index = {label: i for i, label in enumerate(vocabulary)}
    labels = np.empty(len(rows), dtype=np.int64)
    series = []
    for i, (label, values) in enumerate(rows):
        if label not in index:
            raise DataError(
                f"{path}: label {label!r} does not appear in the training split"
            )
        labels[i] = index[label]
        series.append(values)
    lengths = {s.shape[0] for s in series}
    if len(lengths) == 1:
        return Dataset(series, labels, list(vocabulary), "fixed", lengths.pop())
    return Dataset(series, labels, list(vocabulary), "variable", None)


def load_split(path, vocabulary=None):
    """Load one label-first delimited file as a Dataset.

    With `vocabulary=None` the label vocabulary is built from the file
    itself; passing an explicit vocabulary (e.g. the one stored in a model
    file) maps labels against it instead, and an unlisted label is an error.
    """
    rows = _read_rows(path)
    if vocabulary is None:
        vocabulary = _vocabulary([label for label, _ in rows])
    return _build_dataset(rows, vocabulary, path)


def load_ucr(train_path, test_path):
    """Load a train/test pair of label-first delimited files.

    The label vocabulary is built from the training file and shared; a test
    label missing from it is an error. Equal-length collections come back
    with policy "fixed", mixed-length ones with "variable".
    """
    train = load_split(train_path)
    test = load_split(test_path, vocabulary=train.label_vocabulary)
    return train, test


def save_ucr(dataset, path, delimiter="\t"):
    """Write a dataset back out in the same label-first text format.

    Values are printed with 17 significant digits, so load -> save -> load
    reproduces every float exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for s, label_index in zip(dataset.series, dataset.labels):
            token = str(dataset.label_vocabulary[label_index])
            values = ("NaN" if np.isnan(v) else format(v, ".17g") for v in s)
            fh.write(delimiter.join([token, *values]) + "\n")


def clean_dataset(dataset, normalize=True):
    """Interpolate missing values and optionally z-normalize each series."""
    series = [interpolate_missing(s) if np.isnan(s).any() else s for s in dataset.series]
    if normalize:
        series = [znormalize(s) for s in series]
    return Dataset(
        series,
        dataset.labels.copy(),
        list(dataset.label_vocabulary),
        dataset.length_policy,
        dataset.length,
    )


def apply_length_policy(dataset, policy, length=None):
    """Return a copy of the dataset under the given resolved policy."""
    if policy == "rescaled":
        target = int(length if length is not None else dataset.max_length)
        series = [rescale_series(s, target) for s in dataset.series]
        return Dataset(series, dataset.labels.copy(), list(dataset.label_vocabulary),
                       "rescaled", target)
    if policy == "as_is":
        return Dataset([s.copy() for s in dataset.series], dataset.labels.copy(),
                       list(dataset.label_vocabulary), "as_is", None)
    if policy == "fixed":
        return Dataset([s.copy() for s in dataset.series], dataset.labels.copy(),
                       list(dataset.label_vocabulary), "fixed", length)
    raise ConfigError(f"cannot apply length policy {policy!r}")


def resolve_length_policy(train, config=None):
    """Pick "rescaled" or "as_is" for a variable-length training set.

    Runs 10-fold cross-validation under both treatments with a reduced
    kernel count and a fixed seed, and returns (policy, target_length) with
    the higher mean accuracy; exact ties and sets of fewer than 10 examples
    go to "rescaled". Equal-length sets short-circuit to ("fixed", L).
    """
    lengths = {s.shape[0] for s in train.series}
    if len(lengths) == 1:
        return "fixed", lengths.pop()
    max_length = train.max_length
    if train.n_examples < _POLICY_CV_FOLDS:
        return "rescaled", max_length

    base = config if config is not None else GeneratorConfig()
    cv_config = dataclasses.replace(
        base, num_kernels=_POLICY_CV_KERNELS, seed=_POLICY_CV_SEED
    )
    order = np.random.default_rng(_POLICY_CV_SEED).permutation(train.n_examples)
    folds = np.array_split(order, _POLICY_CV_FOLDS)

    from .ridge import fit_ridge, predict_ridge

    scores = {}
    for policy in ("rescaled", "as_is"):
        correct = total = 0
        for held_out in range(_POLICY_CV_FOLDS):
            test_idx = folds[held_out]
            train_idx = np.concatenate(
                [f for j, f in enumerate(folds) if j != held_out]
            )
            fold_train = [train.series[i] for i in train_idx]
            fold_test = [train.series[i] for i in test_idx]
            fold_max = max(s.shape[0] for s in fold_train)
            if policy == "rescaled":
                fold_train = [rescale_series(s, fold_max) for s in fold_train]
                fold_test = [rescale_series(s, fold_max) for s in fold_test]
            kernels = generate_kernels(cv_config, fold_max)
            features_train = apply_kernels(
                fold_train, kernels, cv_config.feature_mode,
                short_series_fallback=(policy == "as_is"),
            )
            features_test = apply_kernels(
                fold_test, kernels, cv_config.feature_mode,
                short_series_fallback=(policy == "as_is"),
            )
            try:
                model = fit_ridge(features_train, train.labels[train_idx])
            except DataError:
                # A fold left with one class scores zero under both policies.
                total += len(test_idx)
                continue
            preds = predict_ridge(model, features_test)
            correct += int(np.sum(preds == train.labels[test_idx]))
            total += len(test_idx)
        scores[policy] = correct / total

    if scores["as_is"] > scores["rescaled"]:
        return "as_is", None
    return "rescaled", max_length
