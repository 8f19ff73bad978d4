"""Reverse-mode differentiation on an append-only tape.

Values are float64 numpy arrays: scalars, vectors, or batches of row vectors
of shape ``(batch, n)``.  Binary arithmetic follows numpy broadcasting, and
gradients are summed back to each operand's shape.

Example::

    tape = Tape()
    x = tape.const([0.3, 0.4])
    y = ad.sum(ad.atanh(x) * x)
    tape.backward(y)
    x.grad
"""

from __future__ import annotations

from typing import Callable

import numpy as np

ATANH_CLAMP = 1.0 - 1e-12
MIN_NORM = 1e-15

OPS = (
    "const", "add", "sub", "mul", "div", "neg", "tanh", "atanh", "sqrt", "relu",
    "dot", "scale", "sum", "l2norm", "conv", "matmul", "softmax_xent",
)


class NonFiniteError(FloatingPointError):
    """A recorded value contained NaN or inf."""


class Node:
    """``live`` is False for constants and for nodes computed only from constants;
    backward skips them since no gradient can reach a parameter through them."""

    __slots__ = ("op", "parents", "value", "adjoint", "aux", "live")

    def __init__(self, op, parents, value, aux=None, live=True):
        self.op = op
        self.parents = parents
        self.value = value
        self.adjoint = None
        self.aux = aux
        self.live = live

    def __repr__(self):
        return f"Node({self.op}, parents={self.parents}, shape={self.value.shape})"


class Var:
    """Handle to a node on a tape; supports ``+ - * /`` and unary minus."""

    __slots__ = ("tape", "index")
    __array_ufunc__ = None  # make numpy defer to our reflected operators

    def __init__(self, tape: "Tape", index: int):
        self.tape = tape
        self.index = index

    @property
    def node(self) -> Node:
        return self.tape.nodes[self.index]

    @property
    def value(self) -> np.ndarray:
        return self.node.value

    @property
    def shape(self):
        return self.node.value.shape

    @property
    def grad(self) -> np.ndarray:
        adj = self.node.adjoint
        return np.zeros_like(self.node.value) if adj is None else adj

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __repr__(self):
        return f"Var(#{self.index} {self.node.op}, value={self.value!r})"


class Tape:
    """Append-only record of a computation, topologically ordered by construction."""

    def __init__(self):
        self.nodes: list[Node] = []
        self.last_backward_visits = 0

    def __len__(self):
        return len(self.nodes)

    def record(self, op: str, operands, value, aux=None) -> Var:
        if op not in OPS:
            raise ValueError(f"unknown operation kind {op!r}")
        nodes = self.nodes
        parents = []
        live = False
        for o in operands:
            if o.tape is not self:
                raise ValueError("operand belongs to a different tape")
            parents.append(o.index)
            live = live or nodes[o.index].live
        if type(value) is not np.ndarray or value.dtype != np.float64:
            value = np.asarray(value, dtype=np.float64)
        if not np.isfinite(value).all():
            raise NonFiniteError(f"{op} produced a non-finite value at node {len(nodes)}")
        nodes.append(Node(op, tuple(parents), value, aux, live))
        return Var(self, len(nodes) - 1)

    def const(self, value, requires_grad: bool = True) -> Var:
        """Leaf node.  Pass ``requires_grad=False`` for data that is never differentiated."""
        value = np.array(value, dtype=np.float64)
        if not np.isfinite(value).all():
            raise NonFiniteError(f"const produced a non-finite value at node {len(self.nodes)}")
        self.nodes.append(Node("const", (), value, None, requires_grad))
        return Var(self, len(self.nodes) - 1)

    def backward(self, root: Var) -> list:
        """Propagate adjoints from a scalar ``root``; returns the adjoint list indexed by node."""
        if root.tape is not self:
            raise ValueError("root belongs to a different tape")
        if root.value.size != 1:
            raise ValueError(f"backward needs a scalar root, got shape {root.value.shape}")
        for node in self.nodes:
            node.adjoint = None
        self.nodes[root.index].adjoint = np.ones_like(self.nodes[root.index].value)
        visits = 0
        nodes = self.nodes
        for i in range(root.index, -1, -1):
            node = nodes[i]
            visits += 1
            if node.adjoint is None or not node.parents or not node.live:
                continue
            inputs = [nodes[p].value for p in node.parents]
            grads = _VJP[node.op](node.adjoint, node, *inputs)
            for p, g in zip(node.parents, grads):
                parent = nodes[p]
                if g is None or not parent.live:
                    continue
                g = _unbroadcast(g, parent.value.shape)
                parent.adjoint = g if parent.adjoint is None else parent.adjoint + g
        self.last_backward_visits = visits
        return [node.adjoint for node in self.nodes]


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def tape_of(*xs) -> Tape:
    for x in xs:
        if isinstance(x, Var):
            return x.tape
    raise TypeError("at least one operand must be a Var")


def lift(tape: Tape, x) -> Var:
    """Wrap a literal as a constant that needs no gradient."""
    return x if isinstance(x, Var) else tape.const(x, requires_grad=False)


# -- primitives ---------------------------------------------------------------

def add(x, y) -> Var:
    t = tape_of(x, y)
    x, y = lift(t, x), lift(t, y)
    return t.record("add", (x, y), x.value + y.value)


def sub(x, y) -> Var:
    t = tape_of(x, y)
    x, y = lift(t, x), lift(t, y)
    return t.record("sub", (x, y), x.value - y.value)


def mul(x, y) -> Var:
    t = tape_of(x, y)
    x, y = lift(t, x), lift(t, y)
    return t.record("mul", (x, y), x.value * y.value)


def div(x, y) -> Var:
    t = tape_of(x, y)
    x, y = lift(t, x), lift(t, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = x.value / y.value
    return t.record("div", (x, y), value)


def neg(x: Var) -> Var:
    return x.tape.record("neg", (x,), -x.value)


def tanh(x: Var) -> Var:
    return x.tape.record("tanh", (x,), np.tanh(x.value))


def atanh(x: Var) -> Var:
    """``atanh`` with its input clamped to ``|x| <= 1 - 1e-12``."""
    clamped = np.clip(x.value, -ATANH_CLAMP, ATANH_CLAMP)
    return x.tape.record("atanh", (x,), np.arctanh(clamped), aux=clamped)


def sqrt(x: Var) -> Var:
    return x.tape.record("sqrt", (x,), np.sqrt(x.value))


def relu(x: Var) -> Var:
    return x.tape.record("relu", (x,), np.maximum(x.value, 0.0))


def dot(x, y) -> Var:
    """Inner product along the last axis, keeping it as a length-1 axis."""
    t = tape_of(x, y)
    x, y = lift(t, x), lift(t, y)
    return t.record("dot", (x, y), np.sum(x.value * y.value, axis=-1, keepdims=True))


def scale(x: Var, k: float) -> Var:
    """Multiply by a constant that is not itself differentiated."""
    k = float(k)
    return x.tape.record("scale", (x,), k * x.value, aux=k)


def sum(x: Var) -> Var:  # noqa: A001 - mirrors the op name
    return x.tape.record("sum", (x,), np.sum(x.value))


def l2norm(x: Var) -> Var:
    """Euclidean norm along the last axis, floored at ``MIN_NORM``; zero subgradient at 0."""
    raw = np.linalg.norm(x.value, axis=-1, keepdims=True)
    return x.tape.record("l2norm", (x,), np.maximum(raw, MIN_NORM), aux=raw)


def conv(w, v, mode: str = "expansive") -> Var:
    """1-D convolution of row vectors ``v`` (length n) with taps ``w`` (length s+1).

    ``expansive`` gives length n+s (full), ``contractive`` length n-s (valid).
    """
    t = tape_of(w, v)
    w, v = lift(t, w), lift(t, v)
    taps = w.value
    if taps.ndim != 1:
        raise ValueError("filter must be a 1-D vector")
    s = taps.shape[0] - 1
    n = v.value.shape[-1]
    if mode == "contractive" and n <= s:
        raise ValueError(f"contractive convolution needs n > s (n={n}, s={s})")
    mat = toeplitz(taps, n, mode)
    return t.record("conv", (w, v), v.value @ mat.T, aux=(mode, mat))


def matmul(x, a) -> Var:
    """``x @ a`` with ``a`` a matrix of shape ``(n, k)``."""
    t = tape_of(x, a)
    x, a = lift(t, x), lift(t, a)
    return t.record("matmul", (x, a), x.value @ a.value)


def softmax_xent(logits: Var, labels) -> Var:
    """Mean softmax cross-entropy of ``(batch, K)`` logits against integer labels."""
    labels = np.asarray(labels, dtype=np.int64)
    z = logits.value
    zmax = z.max(axis=-1, keepdims=True)
    ez = np.exp(z - zmax)
    probs = ez / ez.sum(axis=-1, keepdims=True)
    lse = np.log(ez.sum(axis=-1)) + zmax[:, 0]
    loss = np.mean(lse - z[np.arange(len(labels)), labels])
    return logits.tape.record("softmax_xent", (logits,), loss, aux=(probs, labels))


def toeplitz(taps: np.ndarray, n: int, mode: str = "expansive") -> np.ndarray:
    """Dense convolution matrix: ``(n+s, n)`` for expansive, ``(n-s, n)`` for contractive."""
    s = len(taps) - 1
    if mode == "expansive":
        mat = np.zeros((n + s, n))
        for k, tap in enumerate(taps):
            idx = np.arange(n)
            mat[idx + k, idx] = tap
        return mat
    if mode == "contractive":
        if n <= s:
            raise ValueError(f"contractive convolution needs n > s (n={n}, s={s})")
        mat = np.zeros((n - s, n))
        rows = np.arange(n - s)
        for k, tap in enumerate(taps):
            mat[rows, rows + s - k] = tap
        return mat
    raise ValueError(f"unknown convolution mode {mode!r}")


# -- vector-Jacobian products ------------------------------------------------

def _vjp_conv(g, node, w, v):
    mode, mat = node.aux
    s = w.shape[0] - 1
    n = v.shape[-1]
    gv = g @ mat
    gw = np.empty_like(w)
    # sum over batch rows, then over output positions of the filter diagonal
    g2 = g.reshape(-1, g.shape[-1])
    v2 = v.reshape(-1, n)
    for k in range(s + 1):
        if mode == "expansive":
            gw[k] = np.sum(g2[:, k:k + n] * v2)
        else:
            gw[k] = np.sum(g2 * v2[:, s - k:n - k])
    return gw, gv


def _vjp_l2norm(g, node, x):
    raw = node.aux
    safe = np.where(raw > MIN_NORM, raw, 1.0)
    return (np.where(raw > MIN_NORM, g / safe, 0.0) * x,)


def _vjp_softmax_xent(g, node, z):
    probs, labels = node.aux
    grad = probs.copy()
    grad[np.arange(len(labels)), labels] -= 1.0
    return (g * grad / len(labels),)


_VJP: dict[str, Callable] = {
    "add": lambda g, node, x, y: (g, g),
    "sub": lambda g, node, x, y: (g, -g),
    "mul": lambda g, node, x, y: (g * y, g * x),
    "div": lambda g, node, x, y: (g / y, -g * x / (y * y)),
    "neg": lambda g, node, x: (-g,),
    "tanh": lambda g, node, x: (g * (1.0 - node.value ** 2),),
    "atanh": lambda g, node, x: (g / (1.0 - node.aux ** 2),),
    "sqrt": lambda g, node, x: (g * 0.5 / node.value,),
    "relu": lambda g, node, x: (g * (x > 0),),
    "dot": lambda g, node, x, y: (g * y, g * x),
    "scale": lambda g, node, x: (g * node.aux,),
    "sum": lambda g, node, x: (np.broadcast_to(g, x.shape).copy(),),
    "l2norm": _vjp_l2norm,
    "conv": _vjp_conv,
    "matmul": lambda g, node, x, a: (g @ a.T, x.reshape(-1, x.shape[-1]).T @ g.reshape(-1, g.shape[-1])),
    "softmax_xent": _vjp_softmax_xent,
}


# -- helpers ------------------------------------------------------------------

def value_and_grad(f: Callable[..., Var], *args):
    """Evaluate ``f`` on fresh tape constants and return ``(value, [grads])``."""
    tape = Tape()
    xs = [tape.const(a) for a in args]
    out = f(*xs)
    tape.backward(out)
    return float(out.value), [x.grad for x in xs]


def finite_difference_check(f: Callable[[Var], Var], point, step: float = 1e-6) -> float:
    """Max over coordinates of ``|analytic - central difference| / max(1, |analytic|)``.

    ``f`` maps a tape vector to a scalar Var; it is re-evaluated on a fresh
    tape at each perturbed point.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    point = np.array(point, dtype=np.float64)
    _, (analytic,) = value_and_grad(f, point)

    def at(p):
        tape = Tape()
        return float(f(tape.const(p)).value)

    flat = point.ravel()
    numeric = np.empty(flat.size)
    for i in range(flat.size):
        hi, lo = flat.copy(), flat.copy()
        hi[i] += step
        lo[i] -= step
        numeric[i] = (at(hi.reshape(point.shape)) - at(lo.reshape(point.shape))) / (2 * step)
    analytic = analytic.ravel()
    return float(np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))))
