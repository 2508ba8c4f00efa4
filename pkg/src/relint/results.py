"""End-to-end analysis pipeline and its JSON document form.

One function, `analyze`, takes a raw dataset through standardization,
regularization-path model selection, relevance-interval computation,
permutation probing, and feature classification.  The batch CLI, the
benchmark harness, and the HTTP service all call it, which is what makes
their outputs comparable feature for feature.
"""

from dataclasses import dataclass

import numpy as np

from .baseline import DEFAULT_C_GRID, fit_baseline, predict
from .bounds import DEFAULT_DELTA, ConstraintSet, RelevanceIntervals, compute_all
from .classify import (
    DEFAULT_COVERAGE,
    DEFAULT_N_PROBES,
    DEFAULT_STRONG_TOLERANCE,
    classify_features,
    generate_probes,
    prediction_interval,
)
from .data import standardize
from .errors import MalformedProblem

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AnalysisParams:
    """Everything that shapes an analysis besides the data itself."""

    delta: float = DEFAULT_DELTA
    pi_coverage: float = DEFAULT_COVERAGE
    n_probes: int = DEFAULT_N_PROBES
    seed: int = 0
    workers: int = None
    c_grid: tuple = DEFAULT_C_GRID
    cv_folds: int = 3
    strong_tolerance: float = DEFAULT_STRONG_TOLERANCE

    def __post_init__(self):
        if self.delta < 0:
            raise MalformedProblem("delta must be nonnegative")
        if not 0.5 < self.pi_coverage < 1.0:
            raise MalformedProblem("coverage must lie in (0.5, 1)")
        if self.n_probes < 2:
            raise MalformedProblem("need at least 2 probes")
        if self.cv_folds < 2:
            raise MalformedProblem("cross-validation needs at least 2 folds")
        object.__setattr__(self, "c_grid", tuple(float(c) for c in self.c_grid))


@dataclass(frozen=True)
class AnalysisResult:
    """Everything `analyze` produces, with the JSON document builder."""

    dataset: object
    standardization: object
    baseline: object
    intervals: RelevanceIntervals
    probes: object
    interval: object
    classes: object
    params: AnalysisParams
    training_accuracy: float

    def to_document(self):
        scale = self.baseline.mu if self.baseline.mu > 0 else 1.0
        features = []
        for j, name in enumerate(self.dataset.feature_names):
            lower = self.intervals.lower[j]
            upper = self.intervals.upper[j]
            features.append(
                {
                    "name": str(name),
                    "lower": None if np.isnan(lower) else float(lower),
                    "upper": None if np.isnan(upper) else float(upper),
                    "lower_norm": None if np.isnan(lower) else float(lower / scale),
                    "upper_norm": None if np.isnan(upper) else float(upper / scale),
                    "class": int(self.classes.classes[j]),
                }
            )
        return {
            "schema": SCHEMA_VERSION,
            "baseline": {
                "C": float(self.baseline.C),
                "mu": float(self.baseline.mu),
                "rho": float(self.baseline.rho),
                "cv_score": float(self.baseline.cv_score),
            },
            "threshold": float(self.classes.threshold),
            "features": features,
        }


def analyze(dataset, params=None):
    """Run the full pipeline on a raw (unstandardized) dataset."""
    params = params or AnalysisParams()
    standardized, moments = standardize(dataset)
    baseline, _ = fit_baseline(
        standardized, grid=params.c_grid, k=params.cv_folds, seed=params.seed
    )
    intervals = compute_all(
        standardized, baseline, delta=params.delta, workers=params.workers
    )
    probes = generate_probes(
        standardized,
        baseline,
        n_probes=params.n_probes,
        delta=params.delta,
        seed=params.seed,
        workers=params.workers,
    )
    interval = prediction_interval(probes, p=params.pi_coverage)
    classes = classify_features(
        intervals, interval, strong_tolerance=params.strong_tolerance
    )
    predictions = predict(baseline, standardized.samples)
    accuracy = float(np.mean(predictions == standardized.labels))
    return AnalysisResult(
        dataset=standardized,
        standardization=moments,
        baseline=baseline,
        intervals=intervals,
        probes=probes,
        interval=interval,
        classes=classes,
        params=params,
        training_accuracy=accuracy,
    )


def constrained_intervals(result, constraints):
    """Recompute bounds under user pins, reusing a finished analysis."""
    if not isinstance(constraints, ConstraintSet):
        constraints = ConstraintSet.from_mapping(constraints)
    return compute_all(
        result.dataset,
        result.baseline,
        delta=result.params.delta,
        constraints=constraints,
        workers=result.params.workers,
    )
