"""
Named parameter store for the whole model.

Names are dotted paths (``gnn.0.W``, ``se.Q0``, ``mlp.W1``) and are the keys
used in checkpoints. Creation order is deterministic for a given config.
"""
from collections import OrderedDict
from typing import Dict, ItemsView, Iterator, Mapping, Optional

import numpy as np

from app.core.errors import IncompatibleCheckpoint
from app.core.tensor import Tensor
from app.schemas.model import Backbone, ModelConfig


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class ModelParams:
    """Ordered name -> Tensor mapping with gradient helpers."""

    def __init__(self, config: ModelConfig, tensors: Optional[Mapping[str, Tensor]] = None):
        self.config = config
        self._tensors: "OrderedDict[str, Tensor]" = OrderedDict(tensors or {})

    def add(self, name: str, data: np.ndarray, trainable: bool = True) -> Tensor:
        tensor = Tensor(data, requires_grad=trainable, name=name)
        self._tensors[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self) -> ItemsView[str, Tensor]:
        return self._tensors.items()

    def trainable(self) -> Dict[str, Tensor]:
        return {name: t for name, t in self._tensors.items() if t.requires_grad}

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def count(self) -> int:
        return int(sum(t.data.size for t in self._tensors.values()))

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self._tensors.items()}

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        missing = set(self._tensors) - set(state)
        unexpected = set(state) - set(self._tensors)
        if missing or unexpected:
            raise IncompatibleCheckpoint(
                f"parameter names differ (missing={sorted(missing)}, unexpected={sorted(unexpected)})"
            )
        for name, tensor in self._tensors.items():
            array = np.asarray(state[name], dtype=np.float64)
            if array.shape != tensor.shape:
                raise IncompatibleCheckpoint(f"{name}: checkpoint shape {array.shape} != model shape {tensor.shape}")
            tensor.data = array.copy()


def init_params(config: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """Glorot-uniform weights, zero biases, GIN epsilon at 0."""
    params = ModelParams(config)
    gnn = config.gnn
    d = gnn.dim

    params.add("input.W", glorot(rng, config.feature_dim, d))
    params.add("input.b", np.zeros((1, d)))

    for layer in range(gnn.layers):
        prefix = f"gnn.{layer}"
        if gnn.backbone == Backbone.GCN:
            params.add(f"{prefix}.W", glorot(rng, d, d))
        elif gnn.backbone == Backbone.GAT:
            head_dim = d // gnn.heads
            for head in range(gnn.heads):
                params.add(f"{prefix}.head{head}.W", glorot(rng, d, head_dim))
                params.add(f"{prefix}.head{head}.a_src", glorot(rng, head_dim, 1))
                params.add(f"{prefix}.head{head}.a_dst", glorot(rng, head_dim, 1))
        else:
            params.add(f"{prefix}.eps", np.zeros((1, 1)), trainable=gnn.gin_eps_learnable)
            params.add(f"{prefix}.mlp1.W", glorot(rng, d, d))
            params.add(f"{prefix}.mlp1.b", np.zeros((1, d)))
            params.add(f"{prefix}.mlp2.W", glorot(rng, d, d))
            params.add(f"{prefix}.mlp2.b", np.zeros((1, d)))

    if config.uses_substructures:
        params.add("se.Q0", glorot(rng, config.patterns, d))
        for name in ("W_Q", "W_K", "W_V", "W_O"):
            params.add(f"se.{name}", glorot(rng, d, d))

    hidden = 2 * d
    params.add("mlp.W1", glorot(rng, config.predictor_input_dim, hidden))
    params.add("mlp.b1", np.zeros((1, hidden)))
    params.add("mlp.W2", glorot(rng, hidden, 1))
    params.add("mlp.b2", np.zeros((1, 1)))
    return params
