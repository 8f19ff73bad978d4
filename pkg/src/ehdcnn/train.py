"""Loss, SGD, the training loop and curvature sweeps."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import autodiff as ad
from . import diffgeo
from .autodiff import NonFiniteError, Tape
from .data import Dataset
from .geometry import BALL_MARGIN, check_curvature, tangent_bound
from .metrics import accuracy, rmse
from .nn import EMBEDDINGS, MODES, ModelParams, forward, init_params, tape_forward, truncate

log = logging.getLogger(__name__)

DEFAULT_CURVATURES = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
HISTORY_COLUMNS = ("epoch", "curvature", "train_loss", "test_metric")
# minibatch size for the synthetic regression protocols, which fix no batch size
SYNTHETIC_BATCH_SIZE = 32


@dataclass
class TrainConfig:
    curvature: float = 1.0
    layers: int = 4
    filter_span: int = 8
    lr: float = 0.01
    weight_decay: float = 0.0005
    batch_size: Optional[int] = 128  # None means full batch
    epochs: int = 100
    seed: int = 0
    truncate: bool = True
    truncate_train: bool = False
    task: str = "regression"
    n_classes: Optional[int] = None
    momentum: float = 0.0
    embed: str = "exp0"
    margin: float = BALL_MARGIN
    mode: str = "expansive"
    allow_wide_filter: bool = False

    def __post_init__(self):
        self.curvature = check_curvature(self.curvature)
        if not self.lr >= 0 or not math.isfinite(self.lr):
            raise ValueError("learning rate must be finite and >= 0")
        if self.weight_decay < 0:
            raise ValueError("weight decay must be >= 0")
        if self.epochs < 1 or self.layers < 1:
            raise ValueError("need epochs >= 1 and layers >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch size must be positive or None (full batch)")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.task not in ("regression", "classification"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.task == "classification" and (self.n_classes is None or self.n_classes < 2):
            raise ValueError("classification needs n_classes >= 2")
        if self.embed not in EMBEDDINGS or self.mode not in MODES:
            raise ValueError(f"bad embed/mode: {self.embed!r}/{self.mode!r}")

    @property
    def heads(self) -> int:
        return self.n_classes if self.task == "classification" else 1

    @property
    def truncation_limit(self) -> float:
        """Tangent-space bound ``atanh(1 - margin)/sqrt(c)``; infinite at ``c = 0``."""
        return tangent_bound(self.curvature, self.margin)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    test_metric: float


@dataclass
class RunHistory:
    config: TrainConfig
    records: list[EpochRecord] = field(default_factory=list)
    initial_train_loss: float = math.nan
    initial_test_metric: float = math.nan
    diverged: bool = False
    message: str = ""
    params: Optional[ModelParams] = None

    @property
    def curvature(self) -> float:
        return self.config.curvature

    @property
    def train_losses(self) -> np.ndarray:
        return np.array([r.train_loss for r in self.records])

    @property
    def test_metrics(self) -> np.ndarray:
        return np.array([r.test_metric for r in self.records])

    @property
    def final_metric(self) -> float:
        return self.records[-1].test_metric if self.records else math.nan

    def rows(self):
        for r in self.records:
            yield (r.epoch, self.curvature, r.train_loss, r.test_metric)


# -- loss and optimiser ------------------------------------------------------

def empirical_risk(preds_tangent, targets_tangent) -> float:
    """Mean squared tangent-space error."""
    p = np.asarray(preds_tangent, dtype=np.float64).ravel()
    t = np.asarray(targets_tangent, dtype=np.float64).ravel()
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    return float(np.mean((p - t) ** 2))


def sgd_step(params, grads, lr: float, weight_decay: float = 0.0,
             velocity: Optional[list] = None, momentum: float = 0.0):
    """``theta <- theta - lr * (g + weight_decay * theta)`` for every parameter array.

    ``params`` may be a :class:`ModelParams` or a list of arrays; the same kind
    is returned.  With ``momentum > 0`` the step direction is accumulated in
    ``velocity`` (updated in place).
    """
    arrays = params.arrays() if isinstance(params, ModelParams) else list(params)
    if len(grads) != len(arrays):
        raise ValueError("gradients are not aligned with parameters")
    new = []
    for i, (theta, g) in enumerate(zip(arrays, grads)):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != theta.shape:
            raise ValueError(f"gradient {i} has shape {g.shape}, parameter has {theta.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for parameter {i}")
        step = g + weight_decay * theta
        if momentum:
            velocity[i] = momentum * velocity[i] + step
            step = velocity[i]
        updated = theta - lr * step
        if not np.all(np.isfinite(updated)):
            raise NonFiniteError(f"parameter {i} became non-finite")
        new.append(updated)
    return params.with_arrays(new) if isinstance(params, ModelParams) else new


def loss_and_grads(params: ModelParams, x: np.ndarray, y: np.ndarray, config: TrainConfig):
    """Minibatch loss and its gradient for every array of :meth:`ModelParams.arrays`."""
    tape = Tape()
    pvars = [tape.const(a) for a in params.arrays()]
    out = tape_forward(params, pvars, x, config.embed, config.margin)
    if config.task == "classification":
        loss = ad.softmax_xent(out, y)
    else:
        if config.truncate_train:
            out = diffgeo.truncate(out, config.truncation_limit)
        diff = out - y.reshape(-1, 1)
        loss = ad.scale(ad.sum(diff * diff), 1.0 / len(y))
    tape.backward(loss)
    return float(loss.value), [v.grad for v in pvars]


def predict(params: ModelParams, x: np.ndarray, config: TrainConfig, truncated: bool = False) -> np.ndarray:
    out = forward(params, x, config.embed, config.margin).tangent
    if truncated and config.task == "regression" and not math.isinf(config.truncation_limit):
        out = truncate(out, config.truncation_limit)
    return np.asarray(out)


def _xent(logits: np.ndarray, labels: np.ndarray) -> float:
    zmax = logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(logits - zmax).sum(axis=1)) + zmax[:, 0]
    return float(np.mean(lse - logits[np.arange(len(labels)), labels]))


def evaluate(params: ModelParams, ds: Dataset, config: TrainConfig, loss: bool = False) -> float:
    """Test metric (RMSE or accuracy), or the training objective when ``loss`` is set."""
    if config.task == "classification":
        logits = predict(params, ds.features, config)
        return _xent(logits, ds.targets) if loss else accuracy(logits.argmax(axis=1), ds.targets)
    if loss:
        return empirical_risk(predict(params, ds.features, config, config.truncate_train), ds.targets)
    return rmse(predict(params, ds.features, config, config.truncate), ds.eval_targets())


def shuffle_rng(seed: int) -> np.random.Generator:
    """Generator driving the per-epoch sample order (separate from initialisation)."""
    return np.random.default_rng([seed, 1])


def minibatches(m: int, batch_size: Optional[int], rng: np.random.Generator):
    order = rng.permutation(m)
    size = m if batch_size is None else batch_size
    return [order[i:i + size] for i in range(0, m, size)]


def fit(config: TrainConfig, train: Dataset, test: Dataset,
        params: Optional[ModelParams] = None) -> RunHistory:
    """Train from ``config.seed`` and record train loss and test metric after each epoch.

    A non-finite loss or gradient halts the run; the history is returned with
    ``diverged`` set.
    """
    if test.m == 0:
        raise ValueError("test set is empty")
    if (config.task == "classification") != (train.task == "classification"):
        raise ValueError(f"config task {config.task!r} does not match dataset task {train.task!r}")
    if params is None:
        params = init_params(train.n, config.filter_span, config.layers, config.curvature,
                             heads=config.heads, seed=config.seed, mode=config.mode,
                             allow_wide_filter=config.allow_wide_filter)
    hist = RunHistory(config)
    rng = shuffle_rng(config.seed)
    velocity = [np.zeros_like(a) for a in params.arrays()] if config.momentum else None
    x, y = train.features, train.targets
    try:
        with np.errstate(all="ignore"):
            hist.initial_train_loss = evaluate(params, train, config, loss=True)
            hist.initial_test_metric = evaluate(params, test, config)
            for epoch in range(1, config.epochs + 1):
                for idx in minibatches(train.m, config.batch_size, rng):
                    _, grads = loss_and_grads(params, x[idx], y[idx], config)
                    params = sgd_step(params, grads, config.lr, config.weight_decay,
                                      velocity, config.momentum)
                train_loss = evaluate(params, train, config, loss=True)
                metric = evaluate(params, test, config)
                if not (math.isfinite(train_loss) and math.isfinite(metric)):
                    raise NonFiniteError(f"non-finite loss at epoch {epoch}")
                hist.records.append(EpochRecord(epoch, train_loss, metric))
    except FloatingPointError as exc:
        hist.diverged = True
        hist.message = f"diverged after {len(hist.records)} epochs: {exc}"
        log.warning("c=%g: %s", config.curvature, hist.message)
    hist.params = params
    return hist


# -- sweeps ------------------------------------------------------------------

def _fit_safe(args):
    config, train, test = args
    try:
        return fit(config, train, test)
    except Exception as exc:  # a failing run must not take its siblings down
        return RunHistory(config, diverged=True, message=f"failed: {exc}")


def curvature_sweep(base: TrainConfig, curvatures, train: Dataset, test: Dataset,
                    workers: int = 1) -> list[RunHistory]:
    """One independent run per curvature, sharing seed and data."""
    curvatures = [check_curvature(c) for c in curvatures]
    if len(set(curvatures)) != len(curvatures):
        raise ValueError("curvatures must be distinct")
    jobs = [(replace(base, curvature=c), train, test) for c in curvatures]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_fit_safe, jobs))
    return [_fit_safe(job) for job in jobs]


def ablation_grid(base: TrainConfig, spans, depths, curvatures, train: Dataset, test: Dataset,
                  workers: int = 1) -> dict:
    """Curvature sweeps over every ``(filter_span, layers)`` pair."""
    return {
        (s, L): curvature_sweep(replace(base, filter_span=s, layers=L), curvatures, train, test, workers)
        for s in spans for L in depths
    }


def epochs_to_reach(metrics, fraction: float = 0.05) -> int:
    """First epoch (1-based) whose metric is within ``fraction`` of the final value."""
    metrics = np.asarray(metrics, dtype=np.float64)
    final = metrics[-1]
    hit = np.flatnonzero(np.abs(metrics - final) <= fraction * abs(final))
    return int(hit[0]) + 1


# -- CSV output ----------------------------------------------------------------

def write_history_csv(hist: RunHistory, path) -> Path:
    return write_sweep_csv([hist], path)


def write_sweep_csv(histories, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_COLUMNS)
        for hist in histories:
            for epoch, c, loss, metric in hist.rows():
                w.writerow([epoch, repr(c), repr(loss), repr(metric)])
    return path


def read_history_csv(path) -> list[tuple]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != HISTORY_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        return [(int(e), float(c), float(l), float(m)) for e, c, l, m in reader]


def config_dict(config: TrainConfig) -> dict:
    return asdict(config)
