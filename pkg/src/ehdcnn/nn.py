"""Expansive / contractive hyperbolic convolutional networks on the Poincaré ball.

A layer maps a ball point ``h`` to::

    relu( exp0(w * log0(h)) (+)_c exp0(b) )

where ``*`` is a 1-D convolution and relu acts on the disc coordinates.  The
head returns the tangent-space scalar ``a . log0(h_L)`` (one per output
vector for classification).  All parameters are Euclidean vectors.

Two forward paths exist: :func:`forward` in plain numpy (evaluation) and
:func:`tape_forward` on an autodiff tape (training).  They compute the same
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import diffgeo
from . import geometry as geo
from .autodiff import Var, toeplitz
from .geometry import BALL_MARGIN

MODES = ("expansive", "contractive")
EMBEDDINGS = ("exp0", "rescale")


# -- plain convolutions --------------------------------------------------------

def expansive_conv(w, v) -> np.ndarray:
    """Full convolution: ``out_j = sum_l w_{j-l} v_l``, length ``n + s``."""
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return v @ toeplitz(w, v.shape[-1], "expansive").T


def contractive_conv(w, v) -> np.ndarray:
    """Valid convolution over ``j = s+1..n``, length ``n - s``."""
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return v @ toeplitz(w, v.shape[-1], "contractive").T


def conv(w, v, mode: str = "expansive") -> np.ndarray:
    if mode == "expansive":
        return expansive_conv(w, v)
    if mode == "contractive":
        return contractive_conv(w, v)
    raise ValueError(f"unknown convolution mode {mode!r}")


def hyperbolic_conv(w, v, c: float, mode: str = "expansive") -> np.ndarray:
    """``exp0(w * log0(v))``; reduces to the Toeplitz product at ``c = 0``."""
    return geo.exp0(conv(w, geo.log0(v, c), mode), c)


def truncate(l, M: float):
    """``min(M, |l|) * sign(l)``."""
    if not M > 0:
        raise ValueError("truncation limit must be positive")
    l = np.asarray(l, dtype=np.float64)
    out = np.sign(l) * np.minimum(M, np.abs(l))
    return float(out) if out.ndim == 0 else out


# -- parameters ----------------------------------------------------------------

@dataclass
class LayerParams:
    filter: np.ndarray
    bias: np.ndarray

    @property
    def span(self) -> int:
        return len(self.filter) - 1


@dataclass
class ModelParams:
    layers: list[LayerParams]
    output_vec: np.ndarray
    curvature: float
    n_in: int
    mode: str = "expansive"

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def heads(self) -> int:
        return 1 if self.output_vec.ndim == 1 else self.output_vec.shape[1]

    @property
    def dims(self) -> list[int]:
        return layer_dims(self.n_in, [lp.span for lp in self.layers], self.mode)

    def arrays(self) -> list[np.ndarray]:
        """Flat parameter list ``[w_1, b_1, ..., w_L, b_L, a_L]``."""
        out = []
        for lp in self.layers:
            out += [lp.filter, lp.bias]
        out.append(self.output_vec)
        return out

    def with_arrays(self, arrays) -> "ModelParams":
        arrays = list(arrays)
        if len(arrays) != 2 * self.depth + 1:
            raise ValueError("parameter list length does not match the model")
        layers = [LayerParams(arrays[2 * k], arrays[2 * k + 1]) for k in range(self.depth)]
        return ModelParams(layers, arrays[-1], self.curvature, self.n_in, self.mode)

    def copy(self) -> "ModelParams":
        return self.with_arrays([a.copy() for a in self.arrays()])


def layer_dims(n: int, spans, mode: str = "expansive") -> list[int]:
    """Dimensions ``[n_0, n_1, ..., n_L]`` of the input and each hidden layer."""
    dims = [n]
    for s in spans:
        dims.append(dims[-1] + s if mode == "expansive" else dims[-1] - s)
    return dims


def init_params(n: int, s: int, L: int, c: float, heads: int = 1, seed: int = 0,
                mode: str = "expansive", allow_wide_filter: bool = False) -> ModelParams:
    """Random filters and output vector (Glorot-style uniform), zero biases.

    ``2 <= s <= n`` is enforced unless ``allow_wide_filter`` is set, which
    permits ``s > n`` for expansive networks.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if n < 1 or L < 1 or heads < 1:
        raise ValueError("need n >= 1, L >= 1, heads >= 1")
    if s < 2:
        raise ValueError(f"filter span must be >= 2, got {s}")
    if s > n and not (allow_wide_filter and mode == "expansive"):
        raise ValueError(f"filter span s={s} exceeds input dimension n={n} (need 2 <= s <= n)")
    c = geo.check_curvature(c)
    dims = layer_dims(n, [s] * L, mode)
    if dims[-1] < 1:
        raise ValueError(f"contractive network collapses: dims {dims}")
    rng = np.random.default_rng(seed)
    tap_bound = math.sqrt(6.0 / (s + 1))
    layers = [
        LayerParams(rng.uniform(-tap_bound, tap_bound, size=s + 1), np.zeros(dims[k + 1]))
        for k in range(L)
    ]
    out_bound = math.sqrt(6.0 / dims[-1])
    shape = (dims[-1],) if heads == 1 else (dims[-1], heads)
    return ModelParams(layers, rng.uniform(-out_bound, out_bound, size=shape), c, n, mode)


# -- numpy forward -----------------------------------------------------------

def embed(x, c: float, how: str = "exp0", margin: float = BALL_MARGIN) -> np.ndarray:
    """Map raw features into the ball: as tangent vectors (``exp0``) or by norm clipping (``rescale``)."""
    x = np.asarray(x, dtype=np.float64)
    if how == "exp0":
        return geo.project_to_ball(geo.exp0(x, c), c, margin)
    if how == "rescale":
        return geo.project_to_ball(x, c, margin)
    raise ValueError(f"unknown embedding {how!r}")


def layer_forward(h_prev, layer: LayerParams, c: float, mode: str = "expansive",
                  margin: float = BALL_MARGIN) -> np.ndarray:
    h_prev = np.asarray(h_prev, dtype=np.float64)
    expected = h_prev.shape[-1] + (layer.span if mode == "expansive" else -layer.span)
    if layer.bias.shape[-1] != expected:
        raise ValueError(f"bias length {layer.bias.shape[-1]} != layer output dimension {expected}")
    tangent = geo.log0(geo.project_to_ball(h_prev, c, margin), c)
    moved = geo.project_to_ball(geo.exp0(conv(layer.filter, tangent, mode), c), c, margin)
    shift = geo.project_to_ball(geo.exp0(layer.bias, c), c, margin)
    return np.maximum(geo.mobius_add(moved, np.broadcast_to(shift, moved.shape), c), 0.0)


def output_head(h_L, a_L, c: float, margin: float = BALL_MARGIN):
    """Return ``(tangent_pred, disc_pred)`` with ``tangent_pred = a_L . log0(h_L)``."""
    h_L = np.asarray(h_L, dtype=np.float64)
    a_L = np.asarray(a_L, dtype=np.float64)
    if a_L.shape[0] != h_L.shape[-1]:
        raise ValueError(f"output vector length {a_L.shape[0]} != hidden dimension {h_L.shape[-1]}")
    tangent = geo.log0(geo.project_to_ball(h_L, c, margin), c) @ a_L
    disc = geo.exp0(np.asarray(tangent)[..., None], c)[..., 0] if a_L.ndim == 1 else geo.exp0(tangent, c)
    return tangent, disc


@dataclass
class Prediction:
    tangent: np.ndarray
    disc: np.ndarray
    hidden: list[np.ndarray] = field(default_factory=list)

    @property
    def dims(self) -> list[int]:
        return [h.shape[-1] for h in self.hidden]


def forward(params: ModelParams, x, embedding: str = "exp0",
            margin: float = BALL_MARGIN) -> Prediction:
    """Numpy forward pass for a feature vector or a batch of rows."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("input features must be finite")
    if x.shape[-1] != params.n_in:
        raise ValueError(f"expected {params.n_in} features, got {x.shape[-1]}")
    c = params.curvature
    h = embed(x, c, embedding, margin)
    hidden = [h]
    for layer in params.layers:
        h = layer_forward(h, layer, c, params.mode, margin)
        hidden.append(h)
    tangent, disc = output_head(h, params.output_vec, c, margin)
    return Prediction(tangent, disc, hidden)


# -- tape forward --------------------------------------------------------------

def tape_forward(params: ModelParams, pvars: list[Var], x: np.ndarray,
                 embedding: str = "exp0", margin: float = BALL_MARGIN) -> Var:
    """Forward pass on the tape of ``pvars`` (laid out as :meth:`ModelParams.arrays`).

    Returns the tangent predictions, shape ``(batch, 1)`` for one head and ``(batch, K)`` otherwise.
    """
    c = params.curvature
    tape = pvars[0].tape
    if embedding == "exp0":
        h = diffgeo.project_to_ball(diffgeo.exp0(tape.const(x, requires_grad=False), c), c, margin)
    elif embedding == "rescale":
        h = diffgeo.project_to_ball(tape.const(x, requires_grad=False), c, margin)
    else:
        raise ValueError(f"unknown embedding {embedding!r}")
    for k in range(params.depth):
        w, b = pvars[2 * k], pvars[2 * k + 1]
        tangent = diffgeo.log0(diffgeo.project_to_ball(h, c, margin), c)
        moved = diffgeo.project_to_ball(diffgeo.exp0(ad.conv(w, tangent, params.mode), c), c, margin)
        shift = diffgeo.project_to_ball(diffgeo.exp0(b, c), c, margin)
        h = ad.relu(diffgeo.mobius_add(moved, shift, c))
    feats = diffgeo.log0(diffgeo.project_to_ball(h, c, margin), c)
    a = pvars[-1]
    if params.heads == 1:
        return ad.dot(feats, a)
    return ad.matmul(feats, a)
