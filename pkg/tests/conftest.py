"""Shared helpers: random LP-vs-oracle instances and LP witness points."""

import numpy as np

from relint.baseline import fit_l1_svm
from relint.bounds import max_rel, min_rel
from relint.data import Dataset, standardize


def random_instance(seed):
    """Standardized 30x3 instance with a fitted baseline, or None.

    The weight mass is kept in [0.1, 1/1.3] so the model is informative and
    the grid oracle's L1 ball (budget up to 1.3 * mu) stays small.
    """
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(30, 3))
    w = rng.uniform(-1, 1, size=3)
    y = np.where(x @ w + 0.4 * rng.normal(size=30) > 0, 1.0, -1.0)
    if len(set(y.tolist())) < 2:
        return None
    z, _ = standardize(Dataset(x, y, ("a", "b", "c")))
    for C in (0.12, 0.2, 0.35):
        model = fit_l1_svm(z, C)
        if 0.1 <= model.mu and model.mu * 1.3 <= 1.0:
            return z, model
    return None


def random_instances(count, start=0):
    """The first ``count`` usable instances from seeds ``start`` upward."""
    found = []
    seed = start
    while len(found) < count and seed < start + 500:
        instance = random_instance(seed)
        if instance is not None:
            found.append((seed, instance))
        seed += 1
    assert len(found) == count, f"only {len(found)} usable instances"
    return found


def witness_points(dataset, model, delta):
    """Optimal weight vectors from every bound LP, for oracle refinement."""
    points = []
    for j in range(dataset.n_features):
        _, witness = min_rel(dataset, model, j, delta=delta)
        points.append(witness[0])
        _, witness = max_rel(dataset, model, j, delta=delta)
        points.append(witness[0])
    return points
