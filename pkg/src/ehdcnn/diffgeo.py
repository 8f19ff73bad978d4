"""Poincaré-ball maps composed from tape primitives, so they can be differentiated.

These mirror :mod:`ehdcnn.geometry` value-for-value; the numpy versions there
serve as the reference in tests.
"""

from __future__ import annotations

import math

from . import autodiff as ad
from .autodiff import Var
from .geometry import BALL_MARGIN, check_curvature


def exp0(v: Var, c: float) -> Var:
    c = check_curvature(c)
    if c == 0:
        return v
    sc = math.sqrt(c)
    r = ad.scale(ad.l2norm(v), sc)
    return v * (ad.tanh(r) / r)


def log0(y: Var, c: float) -> Var:
    c = check_curvature(c)
    if c == 0:
        return y
    sc = math.sqrt(c)
    r = ad.scale(ad.l2norm(y), sc)
    return y * (ad.atanh(r) / r)


def project_to_ball(u: Var, c: float, margin: float = BALL_MARGIN) -> Var:
    # u * max_norm / max(||u||, max_norm), with max written through relu
    c = check_curvature(c)
    if c == 0:
        return u
    max_norm = (1.0 - margin) / math.sqrt(c)
    excess = ad.relu(ad.l2norm(u) - max_norm)
    return u * (max_norm / (excess + max_norm))


def mobius_add(x, y, c: float) -> Var:
    c = check_curvature(c)
    tape = ad.tape_of(x, y)
    x, y = ad.lift(tape, x), ad.lift(tape, y)
    if c == 0:
        return x + y
    xy = ad.dot(x, y)
    xx = ad.dot(x, x)
    yy = ad.dot(y, y)
    num = (1.0 + ad.scale(xy, 2 * c) + ad.scale(yy, c)) * x + (1.0 - ad.scale(xx, c)) * y
    den = 1.0 + ad.scale(xy, 2 * c) + ad.scale(xx * yy, c * c)
    return num / den


def mobius_scalar_mul(r, u: Var, c: float) -> Var:
    c = check_curvature(c)
    if c == 0:
        return r * u
    sc = math.sqrt(c)
    n = ad.scale(ad.l2norm(u), sc)
    return u * (ad.tanh(r * ad.atanh(n)) / n)


def truncate(x: Var, bound: float) -> Var:
    """Clip to ``[-bound, bound]``: ``x - relu(x - M) + relu(-x - M)``."""
    if math.isinf(bound):
        return x
    return x - ad.relu(x - bound) + ad.relu(-x - bound)
