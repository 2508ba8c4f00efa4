"""Noise calibration and feature classification.

How much weight can a feature carry just by chance?  To find out, take a
real column, destroy its label relationship by permuting its rows, append
it to the data, and compute its maximum relevance under the original
budgets.  Repeating this builds an empirical noise distribution of
``max_rel`` values; a Student-t prediction interval over it yields a
data-dependent threshold.  Features whose upper bound does not clear the
threshold are irrelevant; of the rest, a positive lower bound means
strongly relevant (no equivalent model drops the feature) and a zero
lower bound means weakly relevant (useful but substitutable).
"""

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import t as student_t

from .bounds import DEFAULT_DELTA, _max_over_branches
from .errors import (
    DegenerateDistribution,
    MalformedProblem,
    NumericalFailure,
    OptimizationFailure,
)

DEFAULT_N_PROBES = 50
DEFAULT_COVERAGE = 0.999
DEFAULT_STRONG_TOLERANCE = 1e-4
_MAX_SKIP_FRACTION = 0.10

IRRELEVANT = 0
WEAK = 1
STRONG = 2


@dataclass(frozen=True)
class ProbeResult:
    """maxRel values of permuted probe columns plus bookkeeping."""

    probe_values: np.ndarray
    n_probes: int
    seed: int
    n_skipped: int = 0

    def __post_init__(self):
        values = np.asarray(self.probe_values, dtype=float)
        if values.ndim != 1:
            raise MalformedProblem("probe values must form a vector")
        if np.any(values < 0):
            raise MalformedProblem("probe maxRel values cannot be negative")
        values.setflags(write=False)
        object.__setattr__(self, "probe_values", values)


@dataclass(frozen=True)
class PredictionInterval:
    """Student-t prediction interval over the probe distribution."""

    mean: float
    sd: float
    p: float
    lower: float
    upper: float

    def __post_init__(self):
        if not (self.lower <= self.mean <= self.upper):
            raise MalformedProblem("prediction interval must contain its mean")


@dataclass(frozen=True)
class RelevanceClasses:
    """Per-feature class in {0 irrelevant, 1 weak, 2 strong} and the rule inputs."""

    classes: np.ndarray
    threshold: float
    strong_tolerance: float

    def __post_init__(self):
        classes = np.asarray(self.classes, dtype=int)
        if not set(np.unique(classes).tolist()) <= {IRRELEVANT, WEAK, STRONG}:
            raise MalformedProblem("classes must be 0, 1, or 2")
        classes.setflags(write=False)
        object.__setattr__(self, "classes", classes)

    def counts(self):
        return {
            STRONG: int(np.sum(self.classes == STRONG)),
            WEAK: int(np.sum(self.classes == WEAK)),
            IRRELEVANT: int(np.sum(self.classes == IRRELEVANT)),
        }


def _probe_task(x, y, permuted_column, budget, rho):
    """maxRel of the appended permuted column; None signals a skipped probe."""
    extended = np.hstack([x, permuted_column[:, None]])
    j = extended.shape[1] - 1
    try:
        outcome = _max_over_branches(extended, y, budget, rho, j, ((),))
    except (OptimizationFailure, NumericalFailure):
        return None
    if outcome is None:
        return None
    return outcome[0]


def generate_probes(
    dataset,
    baseline,
    n_probes=DEFAULT_N_PROBES,
    delta=DEFAULT_DELTA,
    seed=0,
    workers=None,
):
    """Noise maxRel distribution from permuted copies of real columns.

    Each probe picks a column uniformly at random (with replacement),
    permutes its rows, appends it, and maximizes its weight under the
    baseline's budgets.  Probes whose LP fails are skipped; more than 10%
    skipped is an error.  Fixed seed gives identical values at any worker
    count: permutations are drawn sequentially before any solve runs.
    """
    if not dataset.standardized:
        raise MalformedProblem("probes require a standardized dataset")
    if baseline.n_features != dataset.n_features:
        raise MalformedProblem("baseline width does not match dataset")
    if n_probes < 2:
        raise MalformedProblem("need at least 2 probes")
    if delta < 0:
        raise MalformedProblem("delta must be nonnegative")
    x = dataset.samples
    y = dataset.labels
    n, d = x.shape
    budget = (1.0 + delta) * baseline.mu
    rng = np.random.default_rng(seed)
    columns = []
    for _ in range(n_probes):
        source = int(rng.integers(d))
        order = rng.permutation(n)
        columns.append(x[order, source])
    n_jobs = -1 if workers is None else int(workers)
    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(_probe_task)(x, y, column, budget, baseline.rho) for column in columns
    )
    values = [v for v in outcomes if v is not None]
    skipped = n_probes - len(values)
    if skipped > _MAX_SKIP_FRACTION * n_probes:
        raise OptimizationFailure(
            f"{skipped} of {n_probes} probes failed; noise estimate unreliable"
        )
    return ProbeResult(np.asarray(values), len(values), seed, skipped)


def prediction_interval(probe_result, p=DEFAULT_COVERAGE):
    """Student-t prediction interval for one future probe draw.

    Half-width is T(p, n-1) * s_n * sqrt(1 + 1/n) with the one-sided
    p-quantile T and the n-1-denominator sample standard deviation.
    """
    values = probe_result.probe_values
    n = values.shape[0]
    if n < 2:
        raise DegenerateDistribution("prediction interval needs at least 2 probes")
    if not 0.5 < p < 1.0:
        raise MalformedProblem("coverage p must lie in (0.5, 1)")
    mean = float(values.mean())
    sd = float(values.std(ddof=1))
    quantile = float(student_t.ppf(p, n - 1))
    half_width = quantile * sd * float(np.sqrt(1.0 + 1.0 / n))
    return PredictionInterval(mean, sd, float(p), mean - half_width, mean + half_width)


def classify_features(intervals, pi, strong_tolerance=DEFAULT_STRONG_TOLERANCE):
    """Apply the classification rule per feature.

    Irrelevant if the upper bound does not exceed the noise threshold;
    otherwise strong if the lower bound (normalized by the weight mass)
    clears ``strong_tolerance``, else weak.  Features whose bounds failed
    (NaN) are conservatively marked irrelevant.
    """
    if strong_tolerance < 0:
        raise MalformedProblem("strong_tolerance must be nonnegative")
    scale = intervals.normalization if intervals.normalization > 0 else 1.0
    classes = np.zeros(intervals.n_features, dtype=int)
    for j in range(intervals.n_features):
        upper = intervals.upper[j]
        lower = intervals.lower[j]
        if np.isnan(upper) or np.isnan(lower):
            classes[j] = IRRELEVANT
        elif upper <= pi.upper:
            classes[j] = IRRELEVANT
        elif lower / scale > strong_tolerance:
            classes[j] = STRONG
        else:
            classes[j] = WEAK
    return RelevanceClasses(classes, float(pi.upper), float(strong_tolerance))
