"""Datasets: synthetic regression generators, CSV ingestion, WISDM windowing, splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

SYNTHETIC_FUNCTIONS = ("sinc", "cosc", "sqrt_ratio")


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    source: str = ""
    seed: Optional[int] = None
    task: str = "regression"
    n_classes: Optional[int] = None
    clean_targets: Optional[np.ndarray] = None
    feature_names: Optional[list[str]] = None
    label_names: Optional[list[str]] = None
    groups: Optional[np.ndarray] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] == 0:
            raise DataError(f"features must be a non-empty 2-D array, got shape {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise DataError("features contain non-finite entries")
        if self.task == "classification":
            self.targets = np.asarray(self.targets, dtype=np.int64)
            if self.n_classes is None:
                self.n_classes = int(self.targets.max()) + 1
            if self.targets.min() < 0 or self.targets.max() >= self.n_classes:
                raise DataError(f"labels outside 0..{self.n_classes - 1}")
        elif self.task == "regression":
            self.targets = np.asarray(self.targets, dtype=np.float64)
            if not np.all(np.isfinite(self.targets)):
                raise DataError("targets contain non-finite entries")
        else:
            raise DataError(f"unknown task {self.task!r}")
        if self.targets.shape != (self.features.shape[0],):
            raise DataError("targets must be a vector with one entry per feature row")

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return replace(
            self,
            features=self.features[idx],
            targets=self.targets[idx],
            clean_targets=None if self.clean_targets is None else self.clean_targets[idx],
            groups=None if self.groups is None else self.groups[idx],
        )

    def eval_targets(self) -> np.ndarray:
        """Noise-free targets when known, else the stored targets."""
        return self.targets if self.clean_targets is None else self.clean_targets


# -- synthetic regression ----------------------------------------------------

def target_function(fn_id: str):
    def sinc(r):
        return np.where(r == 0, 1.0, np.sin(r) / np.where(r == 0, 1.0, r))

    def cosc(r):
        return np.cos(r) / r

    def sqrt_ratio(r):
        return np.sqrt(r) / (1.0 + np.sqrt(r))

    table = {"sinc": sinc, "cosc": cosc, "sqrt_ratio": sqrt_ratio}
    if fn_id not in table:
        raise DataError(f"unknown synthetic function {fn_id!r}; choose from {', '.join(SYNTHETIC_FUNCTIONS)}")
    return table[fn_id]


def evaluate_function(fn_id: str, x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    return target_function(fn_id)(np.linalg.norm(x, axis=1))


def gen_synthetic(fn_id: str, m: int, dim: int, noise_var: float = 0.01, seed: int = 0) -> Dataset:
    """``y = h(||x||) + eps`` with ``x ~ U[-1, 1]^dim`` and ``eps ~ N(0, noise_var)``.

    ``noise_var`` is a variance.  The noise-free values are kept in ``clean_targets``.
    """
    fn = target_function(fn_id)
    if m <= 0 or dim < 1:
        raise DataError("need m > 0 and dim >= 1")
    if noise_var < 0:
        raise DataError("noise variance must be >= 0")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(m, dim))
    clean = fn(np.linalg.norm(x, axis=1))
    noisy = clean + rng.normal(0.0, math.sqrt(noise_var), size=m)
    return Dataset(x, noisy, source=f"synthetic:{fn_id}", seed=seed, clean_targets=clean)


def synthetic_task(fn_id: str, m: int = 1000, dim: int = 10, noise_var: float = 0.01,
                   seed: int = 0, train_fraction: float = 0.8):
    """Noisy training split and noise-free test split of a synthetic regression task."""
    ds = gen_synthetic(fn_id, m, dim, noise_var, seed)
    train, test = split(ds, SplitSpec(train_fraction, seed))
    test = replace(test, targets=test.clean_targets.copy())
    return train, test


# -- splitting and scaling ---------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratify: bool = False

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise DataError("train_fraction must lie in (0, 1)")


def split(ds: Dataset, spec: SplitSpec):
    """Deterministic shuffled partition into ``(train, test)``."""
    rng = np.random.default_rng(spec.seed)
    if spec.stratify:
        if ds.task != "classification":
            raise DataError("stratified split needs a classification dataset")
        train_idx = []
        for label in np.unique(ds.targets):
            members = rng.permutation(np.flatnonzero(ds.targets == label))
            train_idx.extend(members[: int(round(len(members) * spec.train_fraction))])
        train_idx = np.sort(np.asarray(train_idx, dtype=np.int64))
        test_idx = np.setdiff1d(np.arange(ds.m), train_idx)
    else:
        order = rng.permutation(ds.m)
        k = int(round(ds.m * spec.train_fraction))
        train_idx, test_idx = order[:k], order[k:]
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise DataError(f"split leaves an empty side (m={ds.m}, fraction={spec.train_fraction})")
    return ds.subset(train_idx), ds.subset(test_idx)


def split_by_group(ds: Dataset, train_groups: Sequence[int]):
    """Partition by ``ds.groups`` membership (e.g. user ids)."""
    if ds.groups is None:
        raise DataError("dataset carries no group ids")
    mask = np.isin(ds.groups, np.asarray(list(train_groups)))
    if mask.all() or not mask.any():
        raise DataError("group split leaves an empty side")
    return ds.subset(np.flatnonzero(mask)), ds.subset(np.flatnonzero(~mask))


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray
    target_mean: float = 0.0
    target_scale: float = 1.0

    @classmethod
    def fit(cls, ds: Dataset, targets: bool = True) -> "Standardizer":
        mean = ds.features.mean(axis=0)
        std = ds.features.std(axis=0)
        # constant columns are centred but not scaled
        scale = np.where(std > 0, std, 1.0)
        if targets and ds.task == "regression":
            t_std = float(ds.targets.std())
            return cls(mean, scale, float(ds.targets.mean()), t_std if t_std > 0 else 1.0)
        return cls(mean, scale)

    def transform(self, ds: Dataset) -> Dataset:
        feats = (ds.features - self.mean) / self.scale
        if ds.task != "regression":
            return replace(ds, features=feats)

        def tt(t):
            return None if t is None else (t - self.target_mean) / self.target_scale

        return replace(ds, features=feats, targets=tt(ds.targets), clean_targets=tt(ds.clean_targets))


def standardize(train: Dataset, test: Dataset, targets: bool = True):
    """Scale both splits with statistics of ``train`` only."""
    st = Standardizer.fit(train, targets)
    return st.transform(train), st.transform(test)


# -- CSV ---------------------------------------------------------------------

def load_csv(path, target_column, categorical_policy: str = "encode", standardize: bool = False,
             task: str = "regression", train_indices=None) -> Dataset:
    """Read a headed, comma-separated file.

    Non-numeric columns are integer-encoded in order of first appearance
    (``categorical_policy="encode"``) or dropped (``"drop"``).  With
    ``standardize`` each feature column is scaled to zero mean and unit
    variance using the rows in ``train_indices`` (all rows by default).
    """
    if categorical_policy not in ("encode", "drop"):
        raise DataError(f"unknown categorical policy {categorical_policy!r}")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
            if any(not cell.strip() for cell in row):
                raise DataError(f"{path}: row {lineno} has a missing value")
            rows.append([cell.strip() for cell in row])
    if not rows:
        raise DataError(f"{path}: no data rows")
    if isinstance(target_column, int):
        t_idx = target_column if target_column >= 0 else len(header) + target_column
    elif target_column in header:
        t_idx = header.index(target_column)
    else:
        raise DataError(f"{path}: target column {target_column!r} not in header")

    columns = list(zip(*rows))
    encoded, names = [], []
    target = None
    label_names = None
    for j, col in enumerate(columns):
        values, codes = _parse_column(col)
        if j == t_idx:
            if task == "classification":
                label_names = codes if codes is not None else sorted(set(col))
                if codes is None:
                    values = np.array([label_names.index(v) for v in col], dtype=np.float64)
            elif codes is not None:
                raise DataError(f"{path}: regression target column {header[j]!r} is not numeric")
            target = values
            continue
        if codes is not None and categorical_policy == "drop":
            continue
        encoded.append(values)
        names.append(header[j])
    if not encoded:
        raise DataError(f"{path}: no feature columns")
    feats = np.column_stack(encoded)
    if standardize:
        ref = feats if train_indices is None else feats[np.asarray(train_indices)]
        std = ref.std(axis=0)
        feats = (feats - ref.mean(axis=0)) / np.where(std > 0, std, 1.0)
    n_classes = len(label_names) if label_names is not None else None
    return Dataset(feats, target, source=f"csv:{path.name}", task=task, n_classes=n_classes,
                   feature_names=names, label_names=label_names)


def _parse_column(col):
    try:
        return np.array([float(v) for v in col], dtype=np.float64), None
    except ValueError:
        codes: dict[str, int] = {}
        values = np.array([codes.setdefault(v, len(codes)) for v in col], dtype=np.float64)
        return values, list(codes)


def save_csv(ds: Dataset, path, target_name: str = "y") -> None:
    names = ds.feature_names or [f"x{i + 1}" for i in range(ds.n)]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, target_name])
        for row, y in zip(ds.features, ds.targets):
            w.writerow([repr(float(v)) for v in row] + [repr(float(y)) if ds.task == "regression" else int(y)])


# -- WISDM human activity recognition ---------------------------------------

@dataclass
class AccelStream:
    users: np.ndarray
    activities: list[str]
    timestamps: np.ndarray
    xyz: np.ndarray
    skipped: int = 0
    labels: np.ndarray = field(init=False)
    label_names: list[str] = field(init=False)

    def __post_init__(self):
        self.label_names = sorted(set(self.activities))
        lookup = {a: i for i, a in enumerate(self.label_names)}
        self.labels = np.array([lookup[a] for a in self.activities], dtype=np.int64)
        self.users = np.asarray(self.users, dtype=np.int64)
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        self.xyz = np.asarray(self.xyz, dtype=np.float64).reshape(-1, 3)


def read_wisdm(path) -> AccelStream:
    """Parse raw ``user,activity,timestamp,x,y,z;`` records, skipping malformed ones."""
    text = Path(path).read_text(encoding="utf-8", errors="replace")
    users, acts, times, xyz = [], [], [], []
    skipped = 0
    for rec in text.replace("\n", ";").split(";"):
        rec = rec.strip().strip(",")
        if not rec:
            continue
        parts = [p.strip() for p in rec.split(",")]
        try:
            if len(parts) != 6:
                raise ValueError
            vals = [float(p) for p in parts[3:]]
            if not all(math.isfinite(v) for v in vals):
                raise ValueError
            user, ts = int(parts[0]), float(parts[2])
        except ValueError:
            skipped += 1
            continue
        users.append(user)
        acts.append(parts[1])
        times.append(ts)
        xyz.append(vals)
    if not users:
        raise DataError(f"{path}: no valid accelerometer records")
    return AccelStream(np.array(users), acts, np.array(times), np.array(xyz), skipped)


def har_windows(stream: AccelStream, window_len: int = 80):
    """Non-overlapping windows of ``window_len`` records from one user and one activity.

    Returns ``(rows, labels, users)``; each row holds ``3 * window_len`` values
    ``(x1, y1, z1, x2, ...)``.  Trailing records of a run too short for a full
    window are discarded.
    """
    if window_len < 1:
        raise DataError("window length must be positive")
    users, labels, xyz = stream.users, stream.labels, stream.xyz
    m = len(users)
    # run boundaries: positions where user or label changes
    change = np.flatnonzero((users[1:] != users[:-1]) | (labels[1:] != labels[:-1])) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [m]])
    rows, ys, gs = [], [], []
    for a, b in zip(starts, ends):
        for w0 in range(a, b - window_len + 1, window_len):
            rows.append(xyz[w0:w0 + window_len].ravel())
            ys.append(labels[a])
            gs.append(users[a])
    rows = np.array(rows).reshape(-1, 3 * window_len)
    return rows, np.array(ys, dtype=np.int64), np.array(gs, dtype=np.int64)


def window_har(stream: AccelStream, window_len: int = 80) -> Dataset:
    """Windowed classification dataset; the user id of each row is kept in ``groups``."""
    rows, ys, gs = har_windows(stream, window_len)
    if len(rows) == 0:
        raise DataError(f"no complete {window_len}-record windows in the stream")
    return Dataset(rows, ys, source="wisdm", task="classification",
                   n_classes=len(stream.label_names), label_names=stream.label_names, groups=gs)
