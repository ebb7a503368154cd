"""
Message-passing encoders over dense adjacency.

All three layers are permutation-equivariant: reindexing the atoms permutes
the output rows the same way.
"""
from typing import Optional, Sequence, Tuple

import numpy as np

from app.chem.graph import MolecularGraph
from app.core.errors import ShapeMismatch
from app.core.tensor import (
    Tensor,
    add,
    concat_cols,
    elu,
    leaky_relu,
    matmul,
    mul,
    outer_add,
    relu,
    row_softmax,
    transpose,
)
from app.models.params import ModelParams
from app.schemas.model import Backbone, GnnConfig

GatHead = Tuple[Tensor, Tensor, Tensor]  # W (d_in×d_head), a_src (d_head×1), a_dst (d_head×1)

_ONE = Tensor([[1.0]])


def _check_rows(h: Tensor, graph: MolecularGraph) -> None:
    if h.rows != graph.num_atoms:
        raise ShapeMismatch(f"{h.rows} node rows for a graph with {graph.num_atoms} atoms")


def gcn_layer(h: Tensor, graph: MolecularGraph, weight: Tensor) -> Tensor:
    """ReLU(D̃^(-1/2) (A+I) D̃^(-1/2) H W)."""
    _check_rows(h, graph)
    return relu(matmul(Tensor(graph.gcn_adjacency), matmul(h, weight)))


def _head_attention(projected: Tensor, graph: MolecularGraph, a_src: Tensor, a_dst: Tensor) -> Tensor:
    scores = leaky_relu(outer_add(matmul(projected, a_src), transpose(matmul(projected, a_dst))), 0.2)
    return row_softmax(scores, graph.neighbor_mask)


def gat_attention(h: Tensor, graph: MolecularGraph, head: GatHead) -> np.ndarray:
    """Attention coefficients of a single head (rows sum to 1 over the neighbourhood)."""
    weight, a_src, a_dst = head
    return _head_attention(matmul(h, weight), graph, a_src, a_dst).data


def gat_layer(h: Tensor, graph: MolecularGraph, heads: Sequence[GatHead], activate: bool = True) -> Tensor:
    """Multi-head graph attention over each node's neighbourhood and itself.

    e_ij = LeakyReLU_0.2(a_src·W h_i + a_dst·W h_j), normalized with a softmax
    over j ∈ N(i) ∪ {i}; head outputs are concatenated, ELU when ``activate``.
    """
    _check_rows(h, graph)
    outputs = []
    for weight, a_src, a_dst in heads:
        projected = matmul(h, weight)
        outputs.append(matmul(_head_attention(projected, graph, a_src, a_dst), projected))
    out = outputs[0] if len(outputs) == 1 else concat_cols(outputs)
    return elu(out) if activate else out


def gin_layer(
    h: Tensor,
    graph: MolecularGraph,
    eps: Tensor,
    mlp: Tuple[Tensor, Tensor, Tensor, Tensor],
    activate: bool = True,
) -> Tensor:
    """MLP((1 + eps) h_v + Σ_{u ∈ N(v)} h_u) with a two-layer ReLU MLP."""
    _check_rows(h, graph)
    w1, b1, w2, b2 = mlp
    aggregated = add(mul(add(_ONE, eps), h), matmul(Tensor(graph.adjacency), h))
    hidden = relu(add(matmul(aggregated, w1), b1))
    out = add(matmul(hidden, w2), b2)
    return relu(out) if activate else out


def input_projection(features: np.ndarray, params: ModelParams) -> Tensor:
    """Linear map from the F-wide one-hot features to width d."""
    return add(matmul(Tensor(features), params["input.W"]), params["input.b"])


def apply_layer(h: Tensor, graph: MolecularGraph, config: GnnConfig, params: ModelParams, layer: int) -> Tensor:
    prefix = f"gnn.{layer}"
    hidden = layer < config.layers - 1
    if config.backbone == Backbone.GCN:
        return gcn_layer(h, graph, params[f"{prefix}.W"])
    if config.backbone == Backbone.GAT:
        heads = [
            (params[f"{prefix}.head{k}.W"], params[f"{prefix}.head{k}.a_src"], params[f"{prefix}.head{k}.a_dst"])
            for k in range(config.heads)
        ]
        return gat_layer(h, graph, heads, activate=hidden)
    mlp = (
        params[f"{prefix}.mlp1.W"], params[f"{prefix}.mlp1.b"],
        params[f"{prefix}.mlp2.W"], params[f"{prefix}.mlp2.b"],
    )
    return gin_layer(h, graph, params[f"{prefix}.eps"], mlp, activate=hidden)


def encode(
    graph: MolecularGraph,
    config: GnnConfig,
    params: ModelParams,
    features: Optional[np.ndarray] = None,
) -> Tensor:
    """Node representations [h_1^(L) … h_N^(L)] after L layers.

    ``features`` overrides the graph's own feature matrix (used by augmentation).
    """
    x = graph.node_features if features is None else features
    h = input_projection(x, params)
    for layer in range(config.layers):
        h = apply_layer(h, graph, config, params, layer)
    return h
