"""Evaluation metrics and Gromov four-point hyperbolicity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np

from . import geometry as geo


def rmse(preds, targets) -> float:
    preds = np.asarray(preds, dtype=np.float64).ravel()
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if preds.shape != targets.shape or preds.size == 0:
        raise ValueError(f"length mismatch or empty: {preds.size} vs {targets.size}")
    return float(np.sqrt(np.mean((preds - targets) ** 2)))


def accuracy(pred_labels, true_labels) -> float:
    pred_labels = np.asarray(pred_labels).ravel()
    true_labels = np.asarray(true_labels).ravel()
    if pred_labels.shape != true_labels.shape or pred_labels.size == 0:
        raise ValueError(f"length mismatch or empty: {pred_labels.size} vs {true_labels.size}")
    return float(np.mean(pred_labels == true_labels))


@dataclass(frozen=True)
class DeltaEstimate:
    delta: float
    quadruples_evaluated: int
    exhaustive: bool


def distance_matrix(points, metric: str = "euclidean", c: float = 1.0) -> np.ndarray:
    """Pairwise distances; ``metric="poincare"`` uses the gyrodistance at curvature ``c``."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array (one point per row)")
    if metric == "euclidean":
        diff = pts[:, None, :] - pts[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if metric == "poincare":
        n = len(pts)
        p = np.repeat(pts, n, axis=0)
        q = np.tile(pts, (n, 1))
        d = geo.geodesic_distance(p, q, c).reshape(n, n)
        np.fill_diagonal(d, 0.0)
        return d
    raise ValueError(f"unknown metric {metric!r}")


def four_point_scores(dist: np.ndarray, quads: np.ndarray) -> np.ndarray:
    """Half the gap between the largest and second-largest pair sums of each quadruple."""
    p, q, r, s = quads.T
    sums = np.stack([
        dist[p, q] + dist[r, s],
        dist[p, r] + dist[q, s],
        dist[p, s] + dist[q, r],
    ], axis=1)
    sums.sort(axis=1)
    return (sums[:, 2] - sums[:, 1]) / 2.0


def gromov_delta(points=None, metric: str = "euclidean", c: float = 1.0,
                 max_quadruples: int = 1_000_000, seed: int = 0, *,
                 dist=None, chunk: int = 200_000) -> DeltaEstimate:
    """Four-point Gromov delta of a finite point set.

    All ``C(N, 4)`` quadruples are scored when that count is at most
    ``max_quadruples``; otherwise ``max_quadruples`` quadruples of distinct
    points are drawn uniformly with ``seed``.  A precomputed distance matrix
    may be passed as ``dist`` instead of ``points``.
    """
    if dist is None:
        dist = distance_matrix(points, metric, c)
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[0]
    if n < 4:
        raise ValueError(f"need at least 4 points, got {n}")
    total = math.comb(n, 4)
    delta = 0.0
    if total <= max_quadruples:
        it = combinations(range(n), 4)
        while True:
            block = np.fromiter((i for quad in islice(it, chunk) for i in quad), dtype=np.int64)
            if block.size == 0:
                break
            delta = max(delta, float(four_point_scores(dist, block.reshape(-1, 4)).max()))
        return DeltaEstimate(delta, total, True)
    rng = np.random.default_rng(seed)
    remaining = max_quadruples
    while remaining > 0:
        k = min(chunk, remaining)
        # argsort of uniform keys gives 4 distinct indices per row
        quads = np.argsort(rng.random((k, n)), axis=1)[:, :4] if n <= 64 else _distinct_quads(rng, n, k)
        delta = max(delta, float(four_point_scores(dist, quads).max()))
        remaining -= k
    return DeltaEstimate(delta, max_quadruples, False)


def _distinct_quads(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    quads = rng.integers(0, n, size=(k, 4))
    while True:
        s = np.sort(quads, axis=1)
        bad = np.any(s[:, 1:] == s[:, :-1], axis=1)
        if not bad.any():
            return quads
        quads[bad] = rng.integers(0, n, size=(int(bad.sum()), 4))
