"""Per-feature relevance intervals over the class of equally good models.

A fitted baseline defines two budgets: weight mass ``mu`` and total slack
``rho``.  Any weight vector that separates the data within those budgets
(the L1 budget relaxed by a factor ``1 + delta``) counts as an equivalent
model.  For each feature j this module computes the smallest and largest
absolute weight feature j can carry across that whole class:

* ``min_rel`` minimizes |w_j|; a positive minimum means no equivalent
  model can do without the feature.
* ``max_rel`` maximizes |w_j| via two LPs (maximize w_j, maximize -w_j),
  since an absolute value cannot be maximized in one LP.

Users can pin other features to value ranges (ConstraintSet) to ask
what-if questions; pins are sign-fixed using the baseline weight's sign,
and both signs are explored when the baseline weight is exactly zero.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .errors import (
    InfeasibleConstraints,
    MalformedProblem,
    NumericalFailure,
    OptimizationFailure,
)
from .lp import LpProblem, solve

DEFAULT_DELTA = 1e-3
_SIGN_BRANCH_CAP = 256


@dataclass(frozen=True)
class ConstraintSet:
    """Pins on selected features: index -> [K_min, K_max] on |w| (sign-fixed)."""

    entries: tuple = ()

    def __post_init__(self):
        normalized = []
        seen = set()
        for entry in self.entries:
            index, k_min, k_max = entry
            index = int(index)
            k_min = float(k_min)
            k_max = float(k_max)
            if index < 0:
                raise MalformedProblem(f"constraint index {index} is negative")
            if index in seen:
                raise MalformedProblem(f"feature {index} constrained twice")
            seen.add(index)
            if not (np.isfinite(k_min) and np.isfinite(k_max)):
                raise MalformedProblem("constraint bounds must be finite")
            if not 0.0 <= k_min <= k_max:
                raise MalformedProblem(
                    f"constraint for feature {index} needs 0 <= K_min <= K_max, "
                    f"got [{k_min}, {k_max}]"
                )
            normalized.append((index, k_min, k_max))
        normalized.sort()
        object.__setattr__(self, "entries", tuple(normalized))

    @classmethod
    def from_mapping(cls, mapping):
        return cls(tuple((idx, lo, hi) for idx, (lo, hi) in mapping.items()))

    def as_dict(self):
        return {idx: (lo, hi) for idx, lo, hi in self.entries}

    @property
    def indices(self):
        return tuple(idx for idx, _, _ in self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class RelevanceIntervals:
    """Lower/upper relevance bound per feature, plus scaling metadata.

    ``normalization`` is the baseline weight mass used for display scaling;
    ``feature_errors`` lists (index, message) for features whose bound
    computation failed (their lower/upper are NaN).
    """

    lower: np.ndarray
    upper: np.ndarray
    delta: float
    normalization: float
    feature_errors: tuple = ()

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise MalformedProblem("lower and upper must be equal-length vectors")
        budget = (1.0 + self.delta) * self.normalization
        ok = ~(np.isnan(lower) | np.isnan(upper))
        if np.any(lower[ok] < -1e-12):
            raise MalformedProblem("relevance lower bounds must be nonnegative")
        if np.any(lower[ok] > upper[ok] + 1e-9):
            raise MalformedProblem("lower bound exceeds upper bound")
        if np.any(upper[ok] > budget + 1e-9):
            raise MalformedProblem("upper bound exceeds the weight budget")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "feature_errors", tuple(self.feature_errors))

    @property
    def n_features(self):
        return self.lower.shape[0]

    def to_payload(self, feature_names=None):
        scale = self.normalization if self.normalization > 0 else 1.0
        if feature_names is None:
            feature_names = [f"f{j}" for j in range(self.n_features)]
        errors = dict(self.feature_errors)
        features = []
        for j in range(self.n_features):
            lo = self.lower[j]
            hi = self.upper[j]
            entry = {
                "feature": str(feature_names[j]),
                "lower": None if np.isnan(lo) else float(lo),
                "upper": None if np.isnan(hi) else float(hi),
                "lower_norm": None if np.isnan(lo) else float(lo / scale),
                "upper_norm": None if np.isnan(hi) else float(hi / scale),
            }
            if j in errors:
                entry["error"] = errors[j]
            features.append(entry)
        return {"delta": self.delta, "mu": self.normalization, "features": features}


def _bound_problem(x, y, budget, rho, objective, constraint_rows):
    """Assemble one bound LP over variables [w_plus, w_minus, b, slack].

    Rows: per-sample hinge >= 1, total slack <= rho, total weight mass
    <= budget, then two rows per pin: K_min <= s*w_l <= K_max.
    """
    n, d = x.shape
    yx = y[:, None] * x
    hinge = np.hstack([yx, -yx, -y[:, None], np.eye(n)])
    slack_budget = np.concatenate([np.zeros(2 * d), [0.0], np.ones(n)])
    mass_budget = np.concatenate([np.ones(2 * d), [0.0], np.zeros(n)])
    rows = [hinge, slack_budget[None, :], mass_budget[None, :]]
    rhs = [np.ones(n), [rho], [budget]]
    senses = [">="] * n + ["<=", "<="]
    for l, sign, k_min, k_max in constraint_rows:
        row = np.zeros(2 * d + 1 + n)
        row[l] = sign
        row[d + l] = -sign
        rows.append(row[None, :])
        rows.append(row[None, :])
        rhs.append([k_min])
        rhs.append([k_max])
        senses.extend([">=", "<="])
    lower = np.concatenate([np.zeros(2 * d), [-np.inf], np.zeros(n)])
    upper = np.full(2 * d + 1 + n, np.inf)
    return LpProblem(
        objective=objective,
        constraint_matrix=np.vstack(rows),
        constraint_rhs=np.concatenate([np.asarray(r, dtype=float) for r in rhs]),
        constraint_sense=tuple(senses),
        variable_lower_bounds=lower,
        variable_upper_bounds=upper,
    )


def _objective(kind, j, d, n):
    c = np.zeros(2 * d + 1 + n)
    if kind == "min_abs":
        c[j] = 1.0
        c[d + j] = 1.0
    elif kind == "max_pos":  # minimize -w_j
        c[j] = -1.0
        c[d + j] = 1.0
    elif kind == "max_neg":  # minimize w_j, i.e. maximize -w_j
        c[j] = 1.0
        c[d + j] = -1.0
    else:
        raise MalformedProblem(f"unknown objective kind {kind!r}")
    return c


def _solve_bound_lp(x, y, budget, rho, j, kind, constraint_rows, solver=None):
    """One LP; returns (bound value, (weights, bias, slacks)) or None if infeasible."""
    n, d = x.shape
    problem = _bound_problem(x, y, budget, rho, _objective(kind, j, d, n), constraint_rows)
    try:
        result = solve(problem, solver=solver)
    except NumericalFailure as exc:
        raise OptimizationFailure(f"bound LP for feature {j} failed: {exc}") from exc
    if result.status == "infeasible":
        return None
    if not result.is_optimal:
        raise OptimizationFailure(f"bound LP for feature {j} ended {result.status}")
    z = result.variable_values
    weights = z[:d] - z[d : 2 * d]
    bias = float(z[2 * d])
    slacks = np.maximum(0.0, 1.0 - y * (x @ weights - bias))
    value = result.objective_value if kind == "min_abs" else -result.objective_value
    return max(0.0, float(value)), (weights, bias, slacks)


def _sign_branches(constraints, baseline_weights):
    """Expand pins into sign-resolved rows; zero-weight pins branch both ways."""
    fixed = []
    undetermined = []
    for l, k_min, k_max in constraints.entries:
        sign = float(np.sign(baseline_weights[l]))
        if sign == 0.0:
            undetermined.append((l, k_min, k_max))
        else:
            fixed.append((l, sign, k_min, k_max))
    if 2 ** len(undetermined) > _SIGN_BRANCH_CAP:
        raise OptimizationFailure(
            f"{len(undetermined)} zero-weight pinned features exceed the sign-branch cap"
        )
    branches = []
    for signs in itertools.product((1.0, -1.0), repeat=len(undetermined)):
        branch = list(fixed)
        branch.extend(
            (l, s, k_min, k_max) for (l, k_min, k_max), s in zip(undetermined, signs)
        )
        branches.append(tuple(branch))
    return tuple(branches)


def _min_over_branches(x, y, budget, rho, j, branches, solver=None):
    best = None
    for rows in branches:
        outcome = _solve_bound_lp(x, y, budget, rho, j, "min_abs", rows, solver)
        if outcome is None:
            continue
        if best is None or outcome[0] < best[0]:
            best = outcome
    return best


def _max_over_branches(x, y, budget, rho, j, branches, solver=None):
    best = None
    for rows in branches:
        for kind in ("max_pos", "max_neg"):
            outcome = _solve_bound_lp(x, y, budget, rho, j, kind, rows, solver)
            if outcome is None:
                continue
            if best is None or outcome[0] > best[0]:
                best = outcome
    return best


def _validate_inputs(dataset, baseline, j, delta, constraints):
    if not dataset.standardized:
        raise MalformedProblem("bound computation requires a standardized dataset")
    d = dataset.n_features
    if baseline.n_features != d:
        raise MalformedProblem("baseline width does not match dataset")
    if not 0 <= j < d:
        raise MalformedProblem(f"feature index {j} out of range for {d} features")
    if delta < 0:
        raise MalformedProblem("delta must be nonnegative")
    if j in constraints.indices:
        raise MalformedProblem(f"constraints must not pin the queried feature {j}")
    if any(idx >= d for idx in constraints.indices):
        raise MalformedProblem("constraint index out of range")


def min_rel(dataset, baseline, j, delta=DEFAULT_DELTA, constraints=None):
    """Smallest achievable |w_j| over the equivalent-model class.

    Returns (value, witness) where witness = (weights, bias, slacks) attains
    the bound.  Raises InfeasibleConstraints when the pins admit no model.
    """
    constraints = constraints or ConstraintSet()
    _validate_inputs(dataset, baseline, j, delta, constraints)
    budget = (1.0 + delta) * baseline.mu
    branches = _sign_branches(constraints, baseline.weights)
    best = _min_over_branches(
        dataset.samples, dataset.labels, budget, baseline.rho, j, branches
    )
    if best is None:
        raise InfeasibleConstraints("no model in the class satisfies the pins")
    return best


def max_rel(dataset, baseline, j, delta=DEFAULT_DELTA, constraints=None):
    """Largest achievable |w_j| over the equivalent-model class; see min_rel."""
    constraints = constraints or ConstraintSet()
    _validate_inputs(dataset, baseline, j, delta, constraints)
    budget = (1.0 + delta) * baseline.mu
    branches = _sign_branches(constraints, baseline.weights)
    best = _max_over_branches(
        dataset.samples, dataset.labels, budget, baseline.rho, j, branches
    )
    if best is None:
        raise InfeasibleConstraints("no model in the class satisfies the pins")
    return best


def _feature_task(x, y, budget, rho, j, branches):
    """Worker: both bounds for one feature; exceptions become error markers."""
    try:
        low = _min_over_branches(x, y, budget, rho, j, branches)
        high = _max_over_branches(x, y, budget, rho, j, branches)
        if low is None or high is None:
            return j, np.nan, np.nan, "pins leave no feasible model for this feature"
        return j, low[0], min(high[0], budget), None
    except (OptimizationFailure, NumericalFailure) as exc:
        return j, np.nan, np.nan, str(exc)


def compute_all(dataset, baseline, delta=DEFAULT_DELTA, constraints=None, workers=None):
    """Relevance intervals for every feature, solved as independent LPs.

    Pinned features are not re-solved: their interval echoes the pin
    (clipped to the weight budget), matching how a what-if is read.  The
    result is identical for any worker count; workers=None uses all cores.
    """
    constraints = constraints or ConstraintSet()
    if not dataset.standardized:
        raise MalformedProblem("bound computation requires a standardized dataset")
    d = dataset.n_features
    if baseline.n_features != d:
        raise MalformedProblem("baseline width does not match dataset")
    if delta < 0:
        raise MalformedProblem("delta must be nonnegative")
    if any(idx >= d for idx in constraints.indices):
        raise MalformedProblem("constraint index out of range")
    if len(constraints) >= d:
        raise MalformedProblem("cannot pin every feature; leave at least one free")

    budget = (1.0 + delta) * baseline.mu
    rho = baseline.rho
    x = dataset.samples
    y = dataset.labels
    branches = _sign_branches(constraints, baseline.weights)

    if len(constraints):
        feasible = False
        for rows in branches:
            n = x.shape[0]
            probe = _bound_problem(
                x, y, budget, rho, np.zeros(2 * d + 1 + n), rows
            )
            result = solve(probe)
            if result.is_optimal:
                feasible = True
                break
        if not feasible:
            raise InfeasibleConstraints(
                "the pinned ranges admit no model within the budgets"
            )

    pinned = constraints.as_dict()
    free = [j for j in range(d) if j not in pinned]
    n_jobs = -1 if workers is None else int(workers)
    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(_feature_task)(x, y, budget, rho, j, branches) for j in free
    )
    lower = np.full(d, np.nan)
    upper = np.full(d, np.nan)
    errors = []
    for j, lo, hi, err in outcomes:
        lower[j] = lo
        upper[j] = hi
        if err is not None:
            errors.append((j, err))
    for l, (k_min, k_max) in pinned.items():
        lower[l] = k_min
        upper[l] = min(k_max, budget)
    return RelevanceIntervals(
        lower, upper, float(delta), baseline.mu, tuple(errors)
    )
