"""L1-regularized soft-margin linear classifier and its budget extraction.

The fit is a linear program: split the weight vector into nonnegative
parts so its L1 norm is linear, add one hinge constraint per sample, and
minimize ``sum(|w|) + C * sum(slack)``.  The optimum yields the two
budgets consumed downstream: ``mu`` (weight mass) and ``rho`` (total
slack), which delimit the class of models considered equally good.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, standardize, stratified_kfold
from .errors import DimensionError, MalformedProblem, OptimizationFailure, SpecError
from .lp import LpProblem, solve

DEFAULT_C_GRID = tuple(np.logspace(-3.0, 3.0, 10))


@dataclass(frozen=True)
class BaselineModel:
    """Fitted classifier plus the budgets used by the interval computation."""

    weights: np.ndarray
    bias: float
    slacks: np.ndarray
    C: float
    mu: float
    rho: float
    cv_score: float | None = None

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        slacks = np.asarray(self.slacks, dtype=float)
        weights.setflags(write=False)
        slacks.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "slacks", slacks)

    @property
    def n_features(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class CvReport:
    """Cross-validation trace: the grid, the mean score per candidate, the pick."""

    grid: tuple
    mean_scores: tuple
    chosen_C: float


def fit_l1_svm(dataset, C):
    """Fit the classifier at a fixed regularization weight.

    Variables are laid out as [w_plus (d), w_minus (d), b, slack (n)];
    each sample contributes y_i((w_plus - w_minus) @ x_i - b) >= 1 - slack_i.
    """
    if not dataset.standardized:
        raise MalformedProblem("fit requires a standardized dataset")
    if not C > 0:
        raise MalformedProblem("C must be positive")
    x = dataset.samples
    y = dataset.labels
    n, d = x.shape
    yx = y[:, None] * x
    rows = np.hstack([yx, -yx, -y[:, None], np.eye(n)])
    objective = np.concatenate([np.ones(2 * d), [0.0], np.full(n, C)])
    lower = np.concatenate([np.zeros(2 * d), [-np.inf], np.zeros(n)])
    upper = np.full(2 * d + 1 + n, np.inf)
    problem = LpProblem(
        objective=objective,
        constraint_matrix=rows,
        constraint_rhs=np.ones(n),
        constraint_sense=(">=",) * n,
        variable_lower_bounds=lower,
        variable_upper_bounds=upper,
    )
    result = solve(problem)
    if not result.is_optimal:
        raise OptimizationFailure(f"baseline fit ended {result.status}")
    z = result.variable_values
    weights = z[:d] - z[d : 2 * d]
    bias = float(z[2 * d])
    # slacks re-derived from the exact hinge so the margin constraints hold
    # by construction; at the optimum the LP slack equals the hinge anyway
    margins = y * (x @ weights - bias)
    slacks = np.maximum(0.0, 1.0 - margins)
    mu = float(np.abs(weights).sum())
    rho = float(slacks.sum())
    return BaselineModel(weights, bias, slacks, float(C), mu, rho)


def predict(model, samples):
    """Classify rows by the sign of the decision value; exact zero maps to +1."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[None, :]
    if samples.shape[1] != model.n_features:
        raise DimensionError(
            f"sample width {samples.shape[1]} does not match model width {model.n_features}"
        )
    decision = samples @ model.weights - model.bias
    return np.where(decision >= 0.0, 1.0, -1.0)


def weighted_f1(y_true, y_pred):
    """Per-class F1 averaged with class-support weights.

    A class with zero support contributes nothing; a class with support but
    an undefined F1 (no correct or predicted member) scores 0.
    """
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise DimensionError("label vectors must have matching length")
    total = y_true.shape[0]
    if total == 0:
        raise DimensionError("cannot score empty label vectors")
    score = 0.0
    for cls in (-1.0, 1.0):
        support = int(np.sum(y_true == cls))
        if support == 0:
            continue
        tp = int(np.sum((y_true == cls) & (y_pred == cls)))
        fp = int(np.sum((y_true != cls) & (y_pred == cls)))
        fn = support - tp
        denom = 2 * tp + fp + fn
        f1 = (2.0 * tp / denom) if denom else 0.0
        score += (support / total) * f1
    return float(score)


def select_c(dataset, grid=DEFAULT_C_GRID, k=3, seed=0):
    """Mean weighted F1 of each C over k stratified folds; ties pick the smallest C."""
    candidates = sorted(float(c) for c in grid)
    if not candidates:
        raise SpecError("C grid must be non-empty")
    if any(c <= 0 for c in candidates):
        raise SpecError("C grid values must be positive")
    folds = stratified_kfold(dataset, k, seed)
    split_data = []
    for train, test in folds:
        # a row subset of standardized data drifts off exact zero mean, so
        # each training fold is re-standardized and its moments applied to
        # the held-out rows
        raw_train = Dataset(
            dataset.samples[train], dataset.labels[train], dataset.feature_names
        )
        train_ds, params = standardize(raw_train)
        safe_sds = params.sds.copy()
        constant = list(params.constant_columns)
        if constant:
            safe_sds[constant] = 1.0
        test_x = (dataset.samples[test] - params.means) / safe_sds
        if constant:
            test_x[:, constant] = 0.0
        split_data.append((train_ds, test_x, dataset.labels[test]))
    means = []
    for c in candidates:
        scores = []
        for train_ds, test_x, test_y in split_data:
            model = fit_l1_svm(train_ds, c)
            scores.append(weighted_f1(test_y, predict(model, test_x)))
        means.append(float(np.mean(scores)))
    best = int(np.argmax(means))  # argmax takes the first max: smallest C wins ties
    return CvReport(tuple(candidates), tuple(means), candidates[best])


def fit_baseline(dataset, grid=DEFAULT_C_GRID, k=3, seed=0):
    """Select C by cross-validation, refit on the full data, attach the score."""
    report = select_c(dataset, grid, k, seed)
    model = fit_l1_svm(dataset, report.chosen_C)
    best_idx = report.grid.index(report.chosen_C)
    model = replace(model, cv_score=report.mean_scores[best_idx])
    return model, report


def model_to_dict(model):
    return {
        "weights": [float(w) for w in model.weights],
        "bias": model.bias,
        "C": model.C,
        "mu": model.mu,
        "rho": model.rho,
        "cv_score": model.cv_score,
    }


def model_to_json(model):
    return json.dumps(model_to_dict(model))


def model_from_json(text):
    doc = json.loads(text)
    weights = np.asarray(doc["weights"], dtype=float)
    return BaselineModel(
        weights=weights,
        bias=float(doc["bias"]),
        slacks=np.zeros(0),
        C=float(doc["C"]),
        mu=float(doc["mu"]),
        rho=float(doc["rho"]),
        cv_score=doc.get("cv_score"),
    )
