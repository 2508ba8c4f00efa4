"""Relevance intervals for linear classification.

Given a binary dataset, the package fits an L1-regularized soft-margin
linear classifier, then computes, for every feature, the smallest and
largest absolute weight that feature can carry across all classifiers
that match the baseline's fit quality.  The resulting intervals separate
strongly relevant features (positive lower bound) from weakly relevant
ones (zero lower bound, positive upper bound) and irrelevant ones (upper
bound below a permutation-derived noise threshold).
"""

__version__ = "0.1.0"

from .data import Dataset, SimulationSpec, load_csv, simulate
from .evalharness import run_benchmark
from .results import AnalysisParams, AnalysisResult, analyze, constrained_intervals
from .errors import (
    RelintError,
    MalformedProblem,
    NumericalFailure,
    ParseError,
    LabelError,
    SpecError,
    FoldError,
    OptimizationFailure,
    InfeasibleConstraints,
    DimensionError,
    DegenerateDistribution,
    BudgetExceeded,
)

__all__ = [
    "AnalysisParams",
    "AnalysisResult",
    "Dataset",
    "SimulationSpec",
    "analyze",
    "constrained_intervals",
    "load_csv",
    "run_benchmark",
    "simulate",
    "RelintError",
    "MalformedProblem",
    "NumericalFailure",
    "ParseError",
    "LabelError",
    "SpecError",
    "FoldError",
    "OptimizationFailure",
    "InfeasibleConstraints",
    "DimensionError",
    "DegenerateDistribution",
    "BudgetExceeded",
    "__version__",
]
