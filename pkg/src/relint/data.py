"""Dataset ingestion, standardization, stratified splits, and simulation.

The simulation generator produces binary classification problems with a
known per-feature ground truth: strongly relevant columns each carry
independent label signal, weakly relevant columns come in groups that
jointly reconstruct a deleted signal column (so each member is useful but
replaceable), and irrelevant columns are pure noise.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, FoldError, LabelError, ParseError, SpecError

IRRELEVANT = 0
WEAK = 1
STRONG = 2

_MEAN_TOL = 1e-9
_SD_TOL = 1e-6


@dataclass(frozen=True)
class Dataset:
    """Immutable n-samples by d-features matrix with binary labels in {-1, +1}."""

    samples: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    standardized: bool = False
    constant_columns: tuple = ()

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        labels = np.asarray(self.labels, dtype=float)
        if samples.ndim != 2:
            raise DimensionError(f"samples must be 2-dimensional, got shape {samples.shape}")
        n, d = samples.shape
        if n < 2:
            raise DimensionError("need at least 2 samples")
        if labels.shape != (n,):
            raise DimensionError(f"labels shape {labels.shape} does not match {n} samples")
        names = tuple(str(name) for name in self.feature_names)
        if len(names) != d:
            raise DimensionError(f"{len(names)} feature names for {d} columns")
        if len(set(names)) != d:
            raise ParseError("feature names must be unique")
        if not np.all(np.isfinite(samples)):
            raise ParseError("sample values must be finite")
        values = set(np.unique(labels).tolist())
        if not values <= {-1.0, 1.0}:
            raise LabelError(f"labels must be -1 or +1, got {sorted(values)}")
        if len(values) != 2:
            raise LabelError("both label classes must be present")
        constant = tuple(int(j) for j in self.constant_columns)
        if any(j < 0 or j >= d for j in constant):
            raise DimensionError("constant column index out of range")
        if self.standardized:
            active = [j for j in range(d) if j not in set(constant)]
            if active:
                means = samples[:, active].mean(axis=0)
                sds = samples[:, active].std(axis=0)
                if np.max(np.abs(means), initial=0.0) > _MEAN_TOL:
                    raise DimensionError("standardized data must have column means near 0")
                if np.max(np.abs(sds - 1.0), initial=0.0) > _SD_TOL:
                    raise DimensionError("standardized data must have column sds near 1")
        samples.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "constant_columns", constant)

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def n_features(self):
        return self.samples.shape[1]


@dataclass(frozen=True)
class StandardizationParams:
    """Column moments captured by standardize, enough to invert it."""

    means: np.ndarray
    sds: np.ndarray
    constant_columns: tuple

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        sds = np.asarray(self.sds, dtype=float)
        means.setflags(write=False)
        sds.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)
        object.__setattr__(self, "constant_columns", tuple(self.constant_columns))


@dataclass(frozen=True)
class SimulationSpec:
    """Feature counts and sample size for a generated problem."""

    n_strong: int
    n_weak: int
    n_irrelevant: int
    n_samples: int
    random_seed: int = 0
    label_flip_rate: float = 0.0

    def __post_init__(self):
        for name in ("n_strong", "n_weak", "n_irrelevant", "n_samples", "random_seed"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)):
                raise SpecError(f"{name} must be an integer, got {value!r}")
        if self.n_strong < 0 or self.n_weak < 0 or self.n_irrelevant < 0:
            raise SpecError("feature counts must be nonnegative")
        if self.n_strong + self.n_weak == 0:
            raise SpecError("need at least one relevant feature to generate labels")
        if self.n_weak == 1:
            raise SpecError("a weak group needs at least 2 members; n_weak of 1 is impossible")
        if self.n_samples < 2:
            raise SpecError("need at least 2 samples")
        if not 0.0 <= self.label_flip_rate < 1.0:
            raise SpecError("label_flip_rate must be in [0, 1)")

    @property
    def n_features(self):
        return self.n_strong + self.n_weak + self.n_irrelevant


@dataclass(frozen=True)
class GroundTruth:
    """Per-feature class {0 irrelevant, 1 weak, 2 strong} plus group structure."""

    true_class: np.ndarray
    weak_groups: tuple = ()

    def __post_init__(self):
        arr = np.asarray(self.true_class, dtype=int)
        if arr.ndim != 1:
            raise SpecError("true_class must be one-dimensional")
        if not set(np.unique(arr).tolist()) <= {IRRELEVANT, WEAK, STRONG}:
            raise SpecError("true_class values must be 0, 1, or 2")
        arr.setflags(write=False)
        object.__setattr__(self, "true_class", arr)
        object.__setattr__(self, "weak_groups", tuple(tuple(g) for g in self.weak_groups))

    def counts(self):
        arr = self.true_class
        return {
            STRONG: int(np.sum(arr == STRONG)),
            WEAK: int(np.sum(arr == WEAK)),
            IRRELEVANT: int(np.sum(arr == IRRELEVANT)),
        }


def load_csv(path, label_column="label"):
    """Read a comma-separated, headed, UTF-8 file into a Dataset.

    Label symbols may be any two distinct strings; the lexicographically
    smaller one maps to -1, the larger to +1.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ParseError(f"{path}: no {label_column!r} column in header {header}")
        label_idx = header.index(label_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)
        rows = []
        symbols = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}"
                )
            values = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    symbols.append(cell.strip())
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}:{line_no}: non-numeric value {cell!r} in column "
                        f"{header[i]!r}"
                    ) from None
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    distinct = sorted(set(symbols))
    if len(distinct) != 2:
        raise LabelError(
            f"{path}: label column must contain exactly 2 distinct values, got {distinct}"
        )
    mapping = {distinct[0]: -1.0, distinct[1]: 1.0}
    labels = np.array([mapping[s] for s in symbols])
    return Dataset(np.asarray(rows, dtype=float), labels, feature_names)


def write_csv(path, dataset, label_column="label"):
    """Write a Dataset so that load_csv recovers it bit-for-bit."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(dataset.feature_names) + [label_column])
        for row, label in zip(dataset.samples, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def write_ground_truth(path, dataset, truth):
    """Sidecar file: one `name,class` line per feature."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        for name, cls in zip(dataset.feature_names, truth.true_class):
            writer.writerow([name, int(cls)])


def read_ground_truth(path):
    classes = []
    with open(path, newline="", encoding="utf-8") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"{path}:{line_no}: expected `name,class`")
            try:
                cls = int(row[1])
            except ValueError:
                raise ParseError(f"{path}:{line_no}: class must be an integer") from None
            classes.append(cls)
    return GroundTruth(np.asarray(classes, dtype=int))


def standardize(dataset):
    """Z-score each column with population moments; constant columns become zeros.

    Returns (new Dataset, StandardizationParams); the input is untouched.
    """
    if dataset.standardized:
        raise DimensionError("dataset is already standardized")
    x = dataset.samples
    means = x.mean(axis=0)
    sds = x.std(axis=0)
    constant = tuple(int(j) for j in np.flatnonzero(sds < 1e-12))
    safe = sds.copy()
    safe[list(constant)] = 1.0
    z = (x - means) / safe
    if constant:
        z[:, list(constant)] = 0.0
    out = Dataset(
        z, dataset.labels, dataset.feature_names, standardized=True, constant_columns=constant
    )
    return out, StandardizationParams(means, sds, constant)


def destandardize(dataset, params):
    """Invert standardize using the retained moments."""
    if not dataset.standardized:
        raise DimensionError("dataset is not standardized")
    if params.means.shape[0] != dataset.n_features:
        raise DimensionError("params do not match dataset width")
    safe = params.sds.copy()
    constant = list(params.constant_columns)
    if constant:
        safe[constant] = 1.0
    x = dataset.samples * safe + params.means
    if constant:
        x[:, constant] = np.broadcast_to(params.means[constant], (dataset.n_samples, len(constant))).copy()
    return Dataset(x, dataset.labels, dataset.feature_names, standardized=False)


def _weak_group_sizes(n_weak):
    """Partition a weak-feature total into groups of >= 2, preferring 4."""
    sizes = []
    remaining = n_weak
    while remaining > 0:
        if remaining in (2, 3, 4, 5):
            if remaining == 5:
                sizes.extend([3, 2])
            else:
                sizes.append(remaining)
            remaining = 0
        else:
            sizes.append(4)
            remaining -= 4
    return sizes


def _draw_prototype(rng, size):
    """Uniform on [-1,1] excluding the dead zone |w| < 0.3, by rejection.

    The floor keeps every signal feature's contribution material: with many
    signal features sharing the weight budget, a near-zero prototype weight
    would make its feature statistically indistinguishable from noise.
    """
    out = np.empty(size)
    filled = 0
    while filled < size:
        draw = rng.uniform(-1.0, 1.0, size=size - filled)
        keep = draw[np.abs(draw) >= 0.3]
        out[filled : filled + keep.size] = keep
        filled += keep.size
    return out


def simulate(spec):
    """Generate (Dataset, GroundTruth) deterministically from the spec seed.

    Labels come from a random hyperplane over the hidden signal space (the
    strong columns plus one deleted column per weak group).  Weak-group
    members replicate their deleted column exactly, so the emitted feature
    space is exactly as expressive and the members are interchangeable.
    """
    rng = np.random.default_rng(spec.random_seed)
    group_sizes = _weak_group_sizes(spec.n_weak)
    n_signal = spec.n_strong + len(group_sizes)
    n = spec.n_samples

    signal = rng.standard_normal((n, n_signal))
    prototype = _draw_prototype(rng, n_signal)
    scores = signal @ prototype
    bias = rng.uniform(-0.2, 0.2)
    if not (np.any(scores > bias) and np.any(scores <= bias)):
        bias = float(np.median(scores))
    labels = np.where(scores > bias, 1.0, -1.0)

    columns = []
    classes = []
    weak_groups = []
    for j in range(spec.n_strong):
        columns.append(signal[:, j])
        classes.append(STRONG)
    for g, size in enumerate(group_sizes):
        source = signal[:, spec.n_strong + g]
        # members are exact copies of the deleted source column: any convex
        # mix of the group reconstructs it, so every member is individually
        # droppable (weak) yet can carry the whole group's weight alone
        start = len(columns)
        for i in range(size):
            columns.append(source.copy())
            classes.append(WEAK)
        weak_groups.append(tuple(range(start, start + size)))
    for _ in range(spec.n_irrelevant):
        columns.append(rng.standard_normal(n))
        classes.append(IRRELEVANT)

    samples = np.column_stack(columns)
    names = tuple(f"f{j}" for j in range(samples.shape[1]))
    if spec.label_flip_rate > 0.0:
        # drawn last so the feature matrix does not depend on the flip rate
        flips = rng.random(n) < spec.label_flip_rate
        labels = np.where(flips, -labels, labels)
    if len(set(labels.tolist())) < 2:
        raise SpecError("generated labels collapsed to one class; use more samples")
    dataset = Dataset(samples, labels, names)
    truth = GroundTruth(np.asarray(classes, dtype=int), tuple(weak_groups))
    return dataset, truth


def stratified_kfold(dataset, k, seed=0):
    """Split into k folds preserving class balance; returns (train, test) index pairs.

    Every training complement keeps both classes, so each class needs at
    least 2 members; test folds may miss a class when k is large (the
    leave-one-out shape is allowed).
    """
    if k < 2:
        raise FoldError("need at least 2 folds")
    n = dataset.n_samples
    if k > n:
        raise FoldError(f"cannot make {k} folds from {n} samples")
    rng = np.random.default_rng(seed)
    fold_members = [[] for _ in range(k)]
    cursor = 0
    for cls in (-1.0, 1.0):
        members = np.flatnonzero(dataset.labels == cls)
        if members.size < 2:
            raise FoldError(f"class {int(cls)} has {members.size} members; need at least 2")
        rng.shuffle(members)
        for idx in members:
            fold_members[cursor % k].append(int(idx))
            cursor += 1
    folds = []
    all_indices = np.arange(n)
    for f in range(k):
        test = np.sort(np.asarray(fold_members[f], dtype=int))
        if test.size == 0:
            raise FoldError(f"fold {f} would be empty")
        train = np.setdiff1d(all_indices, test)
        folds.append((train, test))
    return folds
