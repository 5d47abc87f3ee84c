"""Two-group tabular datasets: loading, normalization, folds, and cross pairs.

Everything here is immutable after construction, so datasets, fold plans,
and pair sets can be shared freely across parallel workers.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ValidationError
from .weights import GAUSSIAN, DistanceWeight

__all__ = [
    "TaskKind",
    "Dataset",
    "NormalizationStats",
    "FoldPlan",
    "CrossPairSet",
    "ColumnSchema",
    "load_schema",
    "load_csv",
    "fit_normalization",
    "apply_normalization",
    "make_folds",
    "make_stratified_folds",
    "sample_cross_pairs",
]

MISSING_TOKENS = ("", "NA")


class TaskKind(enum.Enum):
    LINEAR = "linear"
    LOGISTIC = "logistic"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """An n-row sample with real features, targets, and a binary group id.

    ``group`` holds 1 or 2 for every row and both groups must be present.
    Logistic targets are exactly -1/+1; linear targets are arbitrary reals
    until normalization maps them into [-1, 1].
    """

    features: np.ndarray
    labels: np.ndarray
    group: np.ndarray
    task: TaskKind
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim != 2:
            raise ValidationError("features must be a 2-d array")
        y = np.asarray(self.labels, dtype=float)
        g = np.asarray(self.group, dtype=int)
        n = X.shape[0]
        if y.shape != (n,) or g.shape != (n,):
            raise ValidationError("features, labels, and group must agree on row count")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValidationError("features and labels must be finite")
        if not np.all((g == 1) | (g == 2)):
            raise ValidationError("group values must be 1 or 2")
        if not (np.any(g == 1) and np.any(g == 2)):
            raise ValidationError("both groups must be nonempty")
        if self.task is TaskKind.LOGISTIC and not np.all(np.abs(y) == 1.0):
            raise ValidationError("logistic labels must be exactly -1 or +1")
        names = tuple(self.feature_names)
        if names and len(names) != X.shape[1]:
            raise ValidationError("feature_names length must match feature count")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "group", _frozen(g))
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def group_indices(self, g: int, within=None) -> np.ndarray:
        """Row indices belonging to group ``g``, optionally restricted to ``within``."""
        idx = np.arange(self.n) if within is None else np.asarray(within, dtype=int)
        return idx[self.group[idx] == g]

    def replace(self, **kw) -> "Dataset":
        args = dict(
            features=self.features,
            labels=self.labels,
            group=self.group,
            task=self.task,
            feature_names=self.feature_names,
        )
        args.update(kw)
        return Dataset(**args)


@dataclass(frozen=True)
class NormalizationStats:
    """Per-feature (and, for linear tasks, target) centering and scale.

    Zero standard deviations are kept as recorded; applying them maps the
    column to constant 0 instead of dividing by zero.
    """

    feature_mean: np.ndarray
    feature_std: np.ndarray
    label_mean: float | None = None
    label_std: float | None = None

    def __post_init__(self):
        mu = np.asarray(self.feature_mean, dtype=float)
        sd = np.asarray(self.feature_std, dtype=float)
        if mu.shape != sd.shape or mu.ndim != 1:
            raise ValidationError("feature mean/std must be 1-d arrays of equal length")
        if np.any(sd < 0) or not np.all(np.isfinite(sd)) or not np.all(np.isfinite(mu)):
            raise ValidationError("normalization stats must be finite with std >= 0")
        if (self.label_mean is None) != (self.label_std is None):
            raise ValidationError("label mean and std must be given together")
        object.__setattr__(self, "feature_mean", _frozen(mu))
        object.__setattr__(self, "feature_std", _frozen(sd))


def fit_normalization(data: Dataset, train_indices) -> NormalizationStats:
    """Compute z-scoring statistics from the given rows only.

    Uses the population standard deviation. Target statistics are produced
    only for linear tasks; logistic labels are left untouched downstream.
    """
    idx = np.asarray(train_indices, dtype=int)
    if idx.size == 0:
        raise ValidationError("cannot fit normalization on an empty index set")
    X = data.features[idx]
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    if data.task is TaskKind.LINEAR:
        y = data.labels[idx]
        return NormalizationStats(mu, sd, float(y.mean()), float(y.std()))
    return NormalizationStats(mu, sd)


def apply_normalization(data: Dataset, stats: NormalizationStats) -> Dataset:
    """Z-score features (zero-std columns become 0) and, for linear tasks,
    z-score the targets and clamp them into [-1, 1]."""
    if stats.feature_mean.shape[0] != data.n_features:
        raise ValidationError(
            f"stats cover {stats.feature_mean.shape[0]} features, dataset has {data.n_features}"
        )
    sd = stats.feature_std
    scale = np.where(sd > 0, sd, 1.0)
    X = (data.features - stats.feature_mean) / scale
    X[:, sd == 0] = 0.0
    y = data.labels
    if data.task is TaskKind.LINEAR:
        if stats.label_mean is None:
            raise ValidationError("linear task requires label stats")
        ls = stats.label_std if stats.label_std > 0 else 1.0
        y = (data.labels - stats.label_mean) / ls
        if stats.label_std == 0:
            y = np.zeros_like(y)
        y = np.clip(y, -1.0, 1.0)
    return data.replace(features=X, labels=y)


@dataclass(frozen=True)
class FoldPlan:
    """A k-way partition of row indices with sizes balanced within one."""

    k: int
    assignment: np.ndarray
    seed: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=int)
        if self.k < 2:
            raise ValidationError("fold count must be at least 2")
        if a.ndim != 1 or np.any(a < 0) or np.any(a >= self.k):
            raise ValidationError("fold assignment entries must lie in 0..k-1")
        sizes = np.bincount(a, minlength=self.k)
        if sizes.max() - sizes.min() > 1:
            raise ValidationError("fold sizes must differ by at most 1")
        object.__setattr__(self, "assignment", _frozen(a))

    @property
    def n(self) -> int:
        return self.assignment.shape[0]

    def test_indices(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == i)

    def train_indices(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != i)


def make_folds(n: int, k: int, seed: int) -> FoldPlan:
    """Uniform random balanced folds, deterministic for a given seed."""
    if k > n:
        raise ValidationError(f"cannot split {n} rows into {k} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assignment = np.empty(n, dtype=int)
    assignment[perm] = np.arange(n) % k
    return FoldPlan(k=k, assignment=assignment, seed=seed)


def make_stratified_folds(data: Dataset, k: int, seed: int) -> FoldPlan:
    """Balanced folds that spread each group (and, for logistic tasks, each
    group-by-label cell) as evenly as possible, so every fold sees both
    groups whenever the strata are large enough."""
    if k > data.n:
        raise ValidationError(f"cannot split {data.n} rows into {k} folds")
    rng = np.random.default_rng(seed)
    if data.task is TaskKind.LOGISTIC:
        keys = [(int(g), float(y)) for g, y in zip(data.group, data.labels)]
    else:
        keys = [(int(g),) for g in data.group]
    order = []
    for key in sorted(set(keys)):
        members = np.array([i for i, v in enumerate(keys) if v == key], dtype=int)
        order.extend(members[rng.permutation(members.size)])
    assignment = np.empty(data.n, dtype=int)
    assignment[np.array(order)] = np.arange(data.n) % k
    return FoldPlan(k=k, assignment=assignment, seed=seed)


@dataclass(frozen=True)
class CrossPairSet:
    """Sampled cross-group index pairs with their similarity weights.

    Every pair (i, j) has group(i) == 1 and group(j) == 2; pairs are
    distinct and weights are finite and nonnegative (bounded by 1 for the
    gaussian and indicator weightings).
    """

    pairs: np.ndarray
    weights: np.ndarray
    seed: int
    kind: DistanceWeight = GAUSSIAN

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=int).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if p.shape[0] != w.shape[0]:
            raise ValidationError("pairs and weights must have equal length")
        if not np.all(np.isfinite(w)) or np.any(w < 0) or np.any(w > self.kind.max_value):
            raise ValidationError("pair weights must be finite and within the kind's range")
        if p.shape[0] and len({(int(a), int(b)) for a, b in p}) != p.shape[0]:
            raise ValidationError("duplicate cross pair")
        object.__setattr__(self, "pairs", _frozen(p))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def n_pairs(self) -> int:
        return self.pairs.shape[0]


def sample_cross_pairs(
    data: Dataset,
    indices=None,
    count: int | None = None,
    weight: DistanceWeight = GAUSSIAN,
    seed: int = 0,
) -> CrossPairSet:
    """Sample distinct cross-group pairs uniformly without replacement.

    ``count`` defaults to twice the minority-group size within ``indices``;
    it is capped at the number of available cross pairs, and asking for at
    least that many enumerates every cross pair exactly once.
    """
    idx = np.arange(data.n) if indices is None else np.asarray(indices, dtype=int)
    g1 = data.group_indices(1, idx)
    g2 = data.group_indices(2, idx)
    if g1.size == 0 or g2.size == 0:
        raise ValidationError("both groups must be represented in the sampled indices")
    total = g1.size * g2.size
    if count is None:
        count = 2 * min(g1.size, g2.size)
    if count < 0:
        raise ValidationError("pair count must be nonnegative")
    m = min(int(count), total)
    rng = np.random.default_rng(seed)
    if m == total:
        codes = np.arange(total)
    elif total <= 4_000_000 or m > total // 2:
        codes = rng.choice(total, size=m, replace=False)
    else:
        # sparse regime: rejection sampling avoids materialising the grid
        chosen: dict[int, None] = {}
        while len(chosen) < m:
            for c in rng.integers(0, total, size=2 * (m - len(chosen))):
                if c not in chosen:
                    chosen[c] = None
                    if len(chosen) == m:
                        break
        codes = np.fromiter(chosen.keys(), dtype=np.int64, count=m)
    a, b = np.divmod(codes, g2.size)
    pairs = np.column_stack([g1[a], g2[b]])
    w = weight(data.labels[pairs[:, 0]], data.labels[pairs[:, 1]])
    return CrossPairSet(pairs=pairs, weights=np.atleast_1d(w), seed=seed, kind=weight)


# ---------------------------------------------------------------------------
# CSV ingestion

SCHEMA_KEYS = {"target", "protected", "task", "positive_label"}


@dataclass(frozen=True)
class ColumnSchema:
    """Column roles for a CSV file: which column is the target, which is the
    protected attribute, and what kind of task this is."""

    target: str
    protected: str
    task: TaskKind
    positive_label: str | None = None

    def __post_init__(self):
        if self.task is TaskKind.LOGISTIC and self.positive_label is None:
            raise ValidationError("logistic schema requires positive_label")


def load_schema(path) -> ColumnSchema:
    """Read a ColumnSchema from a YAML key-value file."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"schema file not found: {path}")
    raw = yaml.safe_load(path.read_text())
    if not isinstance(raw, dict):
        raise ValidationError(f"schema file {path} must hold a key-value mapping")
    unknown = set(raw) - SCHEMA_KEYS
    if unknown:
        raise ValidationError(f"unknown schema keys: {sorted(unknown)}")
    for key in ("target", "protected", "task"):
        if key not in raw:
            raise ValidationError(f"schema is missing required key {key!r}")
    try:
        task = TaskKind(str(raw["task"]).lower())
    except ValueError:
        raise ValidationError(f"task must be 'linear' or 'logistic', got {raw['task']!r}") from None
    pos = raw.get("positive_label")
    return ColumnSchema(
        target=str(raw["target"]),
        protected=str(raw["protected"]),
        task=task,
        positive_label=None if pos is None else str(pos),
    )


def _is_missing(cell: str) -> bool:
    return cell.strip() in MISSING_TOKENS


def _try_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(path, schema: ColumnSchema) -> Dataset:
    """Load a comma-separated file with a header row into a Dataset.

    Non-numeric feature columns are expanded into one indicator column per
    level; any column containing missing cells (empty or "NA") gets an
    extra missing-value indicator appended, with missing numeric entries
    set to 0.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"dataset file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        rows = [[c.strip() for c in row] for row in reader if row]
    if not rows:
        raise ValidationError(f"{path} has a header but no data rows")
    for col in (schema.target, schema.protected):
        if col not in header:
            raise ValidationError(f"column {col!r} not found in {path}")
    if any(len(r) != len(header) for r in rows):
        raise ValidationError(f"{path} has rows with the wrong number of cells")

    columns = {name: [r[i] for r in rows] for i, name in enumerate(header)}

    protected = columns[schema.protected]
    if any(_is_missing(c) for c in protected):
        raise ValidationError("protected column has missing values")
    levels = sorted(set(protected))
    if len(levels) != 2:
        raise ValidationError(
            f"protected column not binary: found {len(levels)} distinct values"
        )
    group = np.array([1 if c == levels[0] else 2 for c in protected], dtype=int)

    target = columns[schema.target]
    if any(_is_missing(c) for c in target):
        raise ValidationError("target column has missing values")
    if schema.task is TaskKind.LINEAR:
        parsed = [_try_float(c) for c in target]
        if any(v is None for v in parsed):
            raise ValidationError("unparseable numeric cell in target column")
        labels = np.array(parsed, dtype=float)
    else:
        values = sorted(set(target))
        if len(values) > 2:
            raise ValidationError(f"logistic target not binary: {len(values)} distinct values")
        if schema.positive_label not in values:
            raise ValidationError(
                f"positive_label {schema.positive_label!r} never occurs in the target column"
            )
        labels = np.array([1.0 if c == schema.positive_label else -1.0 for c in target])

    feature_cols: list[np.ndarray] = []
    names: list[str] = []
    missing_cols: list[np.ndarray] = []
    missing_names: list[str] = []
    for name in header:
        if name in (schema.target, schema.protected):
            continue
        cells = columns[name]
        missing = np.array([_is_missing(c) for c in cells])
        present = [c for c, miss in zip(cells, missing) if not miss]
        numeric = [_try_float(c) for c in present]
        if present and all(v is not None for v in numeric):
            col = np.zeros(len(cells))
            col[~missing] = numeric
            feature_cols.append(col)
            names.append(name)
        else:
            for level in sorted({c for c, miss in zip(cells, missing) if not miss}):
                feature_cols.append(
                    np.array([float(not miss and c == level) for c, miss in zip(cells, missing)])
                )
                names.append(f"{name}={level}")
        if missing.any():
            missing_cols.append(missing.astype(float))
            missing_names.append(f"{name}__missing")
    feature_cols.extend(missing_cols)
    names.extend(missing_names)
    if not feature_cols:
        raise ValidationError("no feature columns left after removing target and protected")
    X = np.column_stack(feature_cols)
    return Dataset(
        features=X, labels=labels, group=group, task=schema.task, feature_names=tuple(names)
    )
