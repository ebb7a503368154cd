"""
Dense 2-D reverse-mode autodiff on top of numpy.

Every value is a float64 matrix. Operations executed while a ``GradTape`` is
active, and touching at least one tensor that requires gradients, are
recorded on that tape in execution order; ``GradTape.backward`` walks the
record in reverse, which is a reverse topological order, and visits each node
exactly once. Gradients of leaf tensors (parameters) accumulate into
``Tensor.grad``.

The active tape lives in a context variable, so independent tapes can run on
different threads. Outside a tape (or inside ``no_grad``) nothing is recorded.
"""
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.errors import EmptyBatch, ShapeMismatch

ArrayLike = Union[np.ndarray, Sequence, float, int]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_ACTIVE_TAPE: ContextVar[Optional["GradTape"]] = ContextVar("active_tape", default=None)


class Tensor:
    """A float64 matrix that may take part in a gradient tape."""

    __slots__ = ("data", "requires_grad", "grad", "tape_id", "_tape", "name")

    def __init__(self, data: ArrayLike, requires_grad: bool = False, name: Optional[str] = None):
        array = np.array(data, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1, 1)
        elif array.ndim == 1:
            array = array.reshape(1, -1)
        elif array.ndim != 2:
            raise ShapeMismatch(f"tensors are 2-D, got an array of shape {array.shape}")
        self.data = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.tape_id: Optional[int] = None
        self._tape: Optional[GradTape] = None
        self.name = name

    @classmethod
    def _wrap(cls, array: np.ndarray) -> "Tensor":
        out = cls.__new__(cls)
        out.data = array
        out.requires_grad = False
        out.grad = None
        out.tape_id = None
        out._tape = None
        out.name = None
        return out

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeMismatch(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def detach(self) -> "Tensor":
        return Tensor._wrap(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return mul(self, other)

    def __neg__(self) -> "Tensor":
        return scale(self, -1.0)


class _Node:
    __slots__ = ("out", "parents", "backward")

    def __init__(self, out: Tensor, parents: Tuple[Tensor, ...], backward: BackwardFn):
        self.out = out
        self.parents = parents
        self.backward = backward


class GradTape:
    """Ordered record of differentiable operations.

    Usage::

        with GradTape() as tape:
            loss = model(...)
        tape.backward(loss)
    """

    def __init__(self):
        self._nodes: List[_Node] = []
        self._token = None

    def __enter__(self) -> "GradTape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE_TAPE.reset(self._token)
        self._token = None

    def __len__(self) -> int:
        return len(self._nodes)

    def tracks(self, tensor: Tensor) -> bool:
        return tensor.requires_grad or tensor._tape is self

    def record(self, out: Tensor, parents: Tuple[Tensor, ...], backward: BackwardFn) -> None:
        out.tape_id = len(self._nodes)
        out._tape = self
        self._nodes.append(_Node(out, parents, backward))

    def backward(self, root: Tensor, grad: Optional[np.ndarray] = None) -> None:
        if root._tape is not self:
            raise ValueError("root tensor was not produced on this tape")
        if grad is None:
            if root.data.size != 1:
                raise ShapeMismatch(f"backward from a non-scalar {root.shape} needs an explicit gradient")
            grad = np.ones_like(root.data)

        pending: List[Optional[np.ndarray]] = [None] * len(self._nodes)
        pending[root.tape_id] = np.asarray(grad, dtype=np.float64)

        for index in range(root.tape_id, -1, -1):
            g = pending[index]
            if g is None:
                continue
            pending[index] = None
            node = self._nodes[index]
            for parent, parent_grad in zip(node.parents, node.backward(g)):
                if parent_grad is None:
                    continue
                if parent._tape is self:
                    slot = parent.tape_id
                    pending[slot] = parent_grad if pending[slot] is None else pending[slot] + parent_grad
                elif parent.requires_grad:
                    parent.grad = parent_grad.copy() if parent.grad is None else parent.grad + parent_grad


@contextmanager
def no_grad() -> Iterator[None]:
    """Run a block without recording on any tape."""
    token = _ACTIVE_TAPE.set(None)
    try:
        yield
    finally:
        _ACTIVE_TAPE.reset(token)


def is_recording() -> bool:
    return _ACTIVE_TAPE.get() is not None


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _result(data: np.ndarray, parents: Tuple[Tensor, ...], backward: BackwardFn) -> Tensor:
    out = Tensor._wrap(data)
    tape = _ACTIVE_TAPE.get()
    if tape is not None and any(tape.tracks(p) for p in parents):
        tape.record(out, parents, backward)
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    if shape[0] == 1:
        grad = grad.sum(axis=0, keepdims=True)
    if shape[1] == 1:
        grad = grad.sum(axis=1, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> Tuple[int, int]:
    # Supported: identical shapes, a 1×n row against m×n, or a 1×1 scalar.
    if a.shape == b.shape:
        return a.shape
    for big, small in ((a, b), (b, a)):
        if small.shape == (1, 1) or (small.rows == 1 and small.cols == big.cols):
            return big.shape
    raise ShapeMismatch(f"{op}: cannot broadcast {a.shape} with {b.shape}")


# --- linear algebra ------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.cols != b.rows:
        raise ShapeMismatch(f"matmul: inner dimensions differ, {a.shape} @ {b.shape}")

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return _result(a.data @ b.data, (a, b), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("add", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(a.data + b.data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("sub", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)

    return _result(a.data - b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("mul", a, b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result(a.data * b.data, (a, b), backward)


def scale(x: Tensor, factor: float) -> Tensor:
    def backward(g):
        return (g * factor,)

    return _result(x.data * factor, (x,), backward)


def transpose(x: Tensor) -> Tensor:
    def backward(g):
        return (g.T,)

    return _result(x.data.T.copy(), (x,), backward)


def reshape(x: Tensor, rows: int, cols: int) -> Tensor:
    if rows * cols != x.data.size:
        raise ShapeMismatch(f"reshape: cannot view {x.shape} as ({rows}, {cols})")

    def backward(g):
        return (g.reshape(x.shape),)

    return _result(x.data.reshape(rows, cols), (x,), backward)


def flatten(x: Tensor) -> Tensor:
    """Row-major flatten into a 1×(rows·cols) row."""
    return reshape(x, 1, x.data.size)


def concat_cols(xs: Sequence[Tensor]) -> Tensor:
    if not xs:
        raise ShapeMismatch("concat_cols: nothing to concatenate")
    rows = xs[0].rows
    if any(x.rows != rows for x in xs):
        raise ShapeMismatch(f"concat_cols: row counts differ {[x.rows for x in xs]}")
    bounds = np.cumsum([0] + [x.cols for x in xs])

    def backward(g):
        return tuple(g[:, bounds[i]:bounds[i + 1]] for i in range(len(xs)))

    return _result(np.concatenate([x.data for x in xs], axis=1), tuple(xs), backward)


def concat_rows(xs: Sequence[Tensor]) -> Tensor:
    if not xs:
        raise ShapeMismatch("concat_rows: nothing to concatenate")
    cols = xs[0].cols
    if any(x.cols != cols for x in xs):
        raise ShapeMismatch(f"concat_rows: column counts differ {[x.cols for x in xs]}")
    bounds = np.cumsum([0] + [x.rows for x in xs])

    def backward(g):
        return tuple(g[bounds[i]:bounds[i + 1], :] for i in range(len(xs)))

    return _result(np.concatenate([x.data for x in xs], axis=0), tuple(xs), backward)


def sum_rows(x: Tensor) -> Tensor:
    """Column-wise sum: N×d -> 1×d."""
    def backward(g):
        return (np.broadcast_to(g, x.shape).copy(),)

    return _result(x.data.sum(axis=0, keepdims=True), (x,), backward)


def sum_all(x: Tensor) -> Tensor:
    def backward(g):
        return (np.full(x.shape, g[0, 0]),)

    return _result(x.data.sum().reshape(1, 1), (x,), backward)


def outer_add(col: Tensor, row: Tensor) -> Tensor:
    """out[i][j] = col[i] + row[j] for an N×1 column and a 1×M row."""
    if col.cols != 1 or row.rows != 1:
        raise ShapeMismatch(f"outer_add: expected N×1 and 1×M, got {col.shape} and {row.shape}")

    def backward(g):
        return g.sum(axis=1, keepdims=True), g.sum(axis=0, keepdims=True)

    return _result(col.data + row.data, (col, row), backward)


def pairwise_dot(a: Tensor, b: Tensor) -> Tensor:
    """out[i][j] = <a_i, b_j>.

    Products are formed elementwise and reduced along the same axis, so
    pairwise_dot(b, a) is bit-for-bit the transpose of pairwise_dot(a, b).
    """
    if a.cols != b.cols:
        raise ShapeMismatch(f"pairwise_dot: widths differ, {a.shape} vs {b.shape}")

    def backward(g):
        return g @ b.data, g.T @ a.data

    data = (a.data[:, None, :] * b.data[None, :, :]).sum(axis=-1)
    return _result(data, (a, b), backward)


# --- elementwise nonlinearities -----------------------------------------

def relu(x: Tensor) -> Tensor:
    mask = x.data > 0  # relu'(0) = 0

    def backward(g):
        return (g * mask,)

    return _result(np.maximum(x.data, 0.0), (x,), backward)


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    factor = np.where(x.data > 0, 1.0, slope)

    def backward(g):
        return (g * factor,)

    return _result(x.data * factor, (x,), backward)


def elu(x: Tensor, alpha: float = 1.0) -> Tensor:
    positive = x.data > 0
    out = np.where(positive, x.data, alpha * np.expm1(np.minimum(x.data, 0.0)))

    def backward(g):
        return (g * np.where(positive, 1.0, out + alpha),)

    return _result(out, (x,), backward)


def _stable_sigmoid(values: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(values))
    return np.where(values >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(x: Tensor) -> Tensor:
    out = _stable_sigmoid(x.data)

    def backward(g):
        return (g * out * (1.0 - out),)

    return _result(out, (x,), backward)


def row_softmax(x: Tensor, mask: Optional[np.ndarray] = None) -> Tensor:
    """Softmax over each row, optionally restricted to ``mask`` (True = keep).

    Masked-out entries get probability 0. Every row must keep at least one entry.
    """
    logits = x.data
    if mask is not None:
        if mask.shape != x.shape:
            raise ShapeMismatch(f"row_softmax: mask {mask.shape} does not match {x.shape}")
        logits = np.where(mask, logits, -np.inf)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    out = exps / exps.sum(axis=1, keepdims=True)

    def backward(g):
        return (out * (g - (g * out).sum(axis=1, keepdims=True)),)

    return _result(out, (x,), backward)


def l2_normalize_rows(x: Tensor) -> Tensor:
    """Divide each row by its Euclidean norm; all-zero rows stay zero."""
    norms = np.sqrt((x.data * x.data).sum(axis=1, keepdims=True))
    nonzero = norms > 0
    safe = np.where(nonzero, norms, 1.0)
    out = np.where(nonzero, x.data / safe, 0.0)

    def backward(g):
        radial = (g * out).sum(axis=1, keepdims=True)
        return (np.where(nonzero, (g - out * radial) / safe, 0.0),)

    return _result(out, (x,), backward)


def clamp(x: Tensor, low: float, high: float) -> Tensor:
    inside = (x.data >= low) & (x.data <= high)

    def backward(g):
        return (g * inside,)

    return _result(np.clip(x.data, low, high), (x,), backward)


# --- loss ----------------------------------------------------------------

def bce_with_logits(logits: Tensor, labels: ArrayLike) -> Tensor:
    """Mean binary cross-entropy of sigmoid(logits) against 0/1 labels.

    Uses max(y, 0) - y*t + log(1 + exp(-|y|)), which never overflows.
    """
    targets = np.asarray(labels, dtype=np.float64).reshape(-1, 1)
    if targets.size == 0 or logits.data.size == 0:
        raise EmptyBatch("bce_with_logits on an empty batch")
    if logits.shape != targets.shape:
        raise ShapeMismatch(f"bce_with_logits: logits {logits.shape} vs labels {targets.shape}")
    y = logits.data
    n = y.shape[0]
    losses = np.maximum(y, 0.0) - y * targets + np.log1p(np.exp(-np.abs(y)))

    def backward(g):
        return (g[0, 0] * (_stable_sigmoid(y) - targets) / n,)

    return _result(np.array([[losses.mean()]]), (logits,), backward)
