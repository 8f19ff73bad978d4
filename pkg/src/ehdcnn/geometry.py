"""Closed-form operations on the Poincaré ball of curvature ``-c``.

Points are numpy arrays whose last axis holds the coordinates, so every
function accepts a single vector or a batch of row vectors.  ``c = 0`` is the
Euclidean degeneration: the ball becomes all of R^n and each operation
reduces to its flat counterpart.
"""

from __future__ import annotations

import math

import numpy as np

MIN_NORM = 1e-15
BALL_MARGIN = 1e-5

__all__ = [
    "BALL_MARGIN",
    "MIN_NORM",
    "check_curvature",
    "in_ball",
    "mobius_add",
    "mobius_scalar_mul",
    "exp0",
    "log0",
    "conformal_factor",
    "geodesic_distance",
    "project_to_ball",
    "tangent_bound",
]


def check_curvature(c: float) -> float:
    c = float(c)
    if not math.isfinite(c) or c < 0:
        raise ValueError(f"curvature must be finite and >= 0, got {c}")
    return c


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def _norm(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(x, axis=-1, keepdims=True)


def in_ball(x, c: float) -> bool:
    """True if every row of ``x`` lies strictly inside the radius ``1/sqrt(c)`` ball."""
    c = check_curvature(c)
    x = _as_array(x)
    if c == 0:
        return bool(np.all(np.isfinite(x)))
    return bool(np.all(np.sqrt(c) * _norm(x) < 1.0))


def _require_ball(x: np.ndarray, c: float, name: str) -> None:
    if c > 0 and not np.all(np.sqrt(c) * _norm(x) < 1.0):
        raise ValueError(
            f"{name} is not a point of the Poincaré ball (norm >= 1/sqrt(c) for c={c}); "
            "apply project_to_ball first"
        )


def _same_shape(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")


def mobius_add(u, v, c: float) -> np.ndarray:
    """Möbius sum ``u (+)_c v``."""
    c = check_curvature(c)
    u, v = _as_array(u), _as_array(v)
    _same_shape(u, v)
    if c == 0:
        return u + v
    _require_ball(u, c, "u")
    _require_ball(v, c, "v")
    uv = np.sum(u * v, axis=-1, keepdims=True)
    uu = np.sum(u * u, axis=-1, keepdims=True)
    vv = np.sum(v * v, axis=-1, keepdims=True)
    num = (1 + 2 * c * uv + c * vv) * u + (1 - c * uu) * v
    den = 1 + 2 * c * uv + c * c * uu * vv
    return num / den


def mobius_scalar_mul(r: float, u, c: float) -> np.ndarray:
    """Möbius scalar multiple ``r (x)_c u``; the zero vector maps to zero."""
    c = check_curvature(c)
    u = _as_array(u)
    r = float(r)
    if not math.isfinite(r):
        raise ValueError("scalar must be finite")
    if c == 0:
        return r * u
    _require_ball(u, c, "u")
    sc = math.sqrt(c)
    norm = np.maximum(_norm(u), MIN_NORM)
    return np.tanh(r * np.arctanh(sc * norm)) * u / (sc * norm)


def exp0(v, c: float) -> np.ndarray:
    """Exponential map at the origin, tangent space -> ball."""
    c = check_curvature(c)
    v = _as_array(v)
    if c == 0:
        return v.copy()
    sc = math.sqrt(c)
    norm = np.maximum(_norm(v), MIN_NORM)
    return np.tanh(sc * norm) * v / (sc * norm)


def log0(y, c: float) -> np.ndarray:
    """Logarithmic map at the origin, ball -> tangent space."""
    c = check_curvature(c)
    y = _as_array(y)
    if c == 0:
        return y.copy()
    _require_ball(y, c, "y")
    sc = math.sqrt(c)
    norm = np.maximum(_norm(y), MIN_NORM)
    return np.arctanh(sc * norm) * y / (sc * norm)


def conformal_factor(x, c: float) -> np.ndarray:
    """``2 / (1 - c ||x||^2)``."""
    c = check_curvature(c)
    x = _as_array(x)
    return 2.0 / (1.0 - c * np.sum(x * x, axis=-1))


def geodesic_distance(p, q, c: float, formula: str = "gyro") -> np.ndarray:
    """Hyperbolic distance between ``p`` and ``q``.

    ``formula="gyro"`` (default) is ``(2/sqrt(c)) atanh(sqrt(c) ||(-p) (+)_c q||)``,
    the metric consistent with :func:`exp0` / :func:`log0`.

    ``formula="asinh"`` evaluates the alternative expression
    ``2 asinh(sqrt(2 ||p-q||^2 / (c (1/c - ||p||^2)(1/c - ||q||^2))))``.  It differs
    from the standard metric by a factor of 2 under the radical and is kept
    only for comparison.

    At ``c = 0`` both return the Euclidean distance ``||p - q||``.  Note the
    ball metric tends to ``2 ||p - q||`` as ``c -> 0``, so distance is the one
    operation here that is not continuous at zero curvature.
    """
    c = check_curvature(c)
    p, q = _as_array(p), _as_array(q)
    _same_shape(p, q)
    if c == 0:
        return np.linalg.norm(p - q, axis=-1)
    _require_ball(p, c, "p")
    _require_ball(q, c, "q")
    if formula == "gyro":
        sc = math.sqrt(c)
        diff = mobius_add(-p, q, c)
        return 2.0 / sc * np.arctanh(np.minimum(sc * np.linalg.norm(diff, axis=-1), 1.0))
    if formula == "asinh":
        pp = np.sum(p * p, axis=-1)
        qq = np.sum(q * q, axis=-1)
        dd = np.sum((p - q) ** 2, axis=-1)
        return 2.0 * np.arcsinh(np.sqrt(2.0 * dd / (c * (1.0 / c - pp) * (1.0 / c - qq))))
    raise ValueError(f"unknown distance formula {formula!r}")


def project_to_ball(u, c: float, margin: float = BALL_MARGIN) -> np.ndarray:
    """Rescale rows with norm >= ``(1 - margin)/sqrt(c)`` onto that radius."""
    c = check_curvature(c)
    if not 0 < margin < 1:
        raise ValueError("margin must lie in (0, 1)")
    u = _as_array(u)
    if c == 0:
        return u.copy()
    max_norm = (1.0 - margin) / math.sqrt(c)
    norm = _norm(u)
    scale = np.where(norm >= max_norm, max_norm / np.maximum(norm, MIN_NORM), 1.0)
    return u * scale


def tangent_bound(c: float, margin: float = BALL_MARGIN) -> float:
    """Largest tangent-space norm reachable from the projected ball, ``atanh(1 - margin)/sqrt(c)``.

    Infinite at ``c = 0``.
    """
    c = check_curvature(c)
    if c == 0:
        return math.inf
    return math.atanh(1.0 - margin) / math.sqrt(c)
