"""
Central finite-difference checks for the tape.

``fn`` takes no arguments and returns a Tensor built from the tensors under
test; non-scalar outputs are projected onto a fixed random direction so a
single backward pass covers every output entry.
"""
from typing import Callable, List, Optional, Sequence

import numpy as np

from app.core.tensor import GradTape, Tensor, mul, no_grad, sum_all


def _scalarize(out: Tensor, weights: Optional[np.ndarray]) -> Tensor:
    if out.data.size == 1:
        return out
    return sum_all(mul(out, Tensor(weights)))


def analytic_gradients(fn: Callable[[], Tensor], tensors: Sequence[Tensor], weights: Optional[np.ndarray] = None) -> List[np.ndarray]:
    for tensor in tensors:
        tensor.requires_grad = True
        tensor.zero_grad()
    with GradTape() as tape:
        loss = _scalarize(fn(), weights)
    tape.backward(loss)
    return [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in tensors]


def numerical_gradient(
    fn: Callable[[], Tensor],
    tensor: Tensor,
    eps: float = 1e-4,
    weights: Optional[np.ndarray] = None,
    indices: Optional[Sequence[tuple]] = None,
) -> np.ndarray:
    """Five-point central differences of the (projected) output with respect to ``tensor``.

    Samples at x ± eps and x ± 2·eps; the truncation error is O(eps⁴).
    Only ``indices`` are perturbed when given; other entries are left at 0.
    """
    grad = np.zeros_like(tensor.data)
    positions = indices if indices is not None else list(np.ndindex(*tensor.shape))
    with no_grad():
        for position in positions:
            original = tensor.data[position]
            values = []
            for offset in (2.0, 1.0, -1.0, -2.0):
                tensor.data[position] = original + offset * eps
                values.append(_scalarize(fn(), weights).item())
            tensor.data[position] = original
            far_plus, plus, minus, far_minus = values
            grad[position] = (8.0 * (plus - minus) - (far_plus - far_minus)) / (12.0 * eps)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-4) -> float:
    """max |a - n| / max(|a|, |n|, floor); the floor keeps near-zero gradients from dominating."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale)) if analytic.size else 0.0


def gradcheck(
    fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    eps: float = 1e-4,
    rng: Optional[np.random.Generator] = None,
    max_entries: Optional[int] = None,
) -> float:
    """Largest relative error between tape gradients and central differences.

    With ``max_entries`` only that many randomly chosen coordinates per tensor
    are compared.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    with no_grad():
        sample = fn()
    weights = None if sample.data.size == 1 else rng.normal(size=sample.shape)

    analytic = analytic_gradients(fn, tensors, weights)
    worst = 0.0
    for tensor, a_grad in zip(tensors, analytic):
        positions = list(np.ndindex(*tensor.shape))
        if max_entries is not None and len(positions) > max_entries:
            chosen = rng.choice(len(positions), size=max_entries, replace=False)
            positions = [positions[i] for i in sorted(chosen)]
        n_grad = numerical_gradient(fn, tensor, eps, weights, positions)
        rows, cols = zip(*positions)
        worst = max(worst, relative_error(a_grad[rows, cols], n_grad[rows, cols]))
    return worst
