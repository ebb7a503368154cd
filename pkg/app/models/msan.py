"""
Substructure extraction (SE), interaction (SI), dropping (SD) and the
pairwise prediction head.

A drug goes through ``encode`` (GNN) and then ``se_extract``: M learnable
pattern queries attend over the atoms and return M representative vectors.
Two drugs interact through the M×M cosine-similarity matrix of those vectors,
which is flattened and concatenated with both readouts and the DDI-type
one-hot before the MLP head.
"""
import enum
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from app.chem.graph import MolecularGraph
from app.core.errors import ShapeMismatch
from app.core.tensor import (
    Tensor,
    add,
    clamp,
    concat_cols,
    flatten,
    l2_normalize_rows,
    matmul,
    no_grad,
    pairwise_dot,
    relu,
    row_softmax,
    scale,
    sum_rows,
    transpose,
)
from app.models.gnn import encode
from app.models.params import ModelParams
from app.schemas.model import ModelConfig, ModelVariant


class Mode(str, enum.Enum):
    TRAIN = "train"
    EVAL = "eval"


@dataclass(frozen=True)
class PatternBank:
    q0: Tensor

    @property
    def size(self) -> int:
        return self.q0.rows

    @classmethod
    def from_params(cls, params: ModelParams) -> "PatternBank":
        return cls(params["se.Q0"])


@dataclass(frozen=True)
class SeWeights:
    w_q: Tensor
    w_k: Tensor
    w_v: Tensor
    w_o: Tensor

    @classmethod
    def from_params(cls, params: ModelParams) -> "SeWeights":
        return cls(params["se.W_Q"], params["se.W_K"], params["se.W_V"], params["se.W_O"])


@dataclass(frozen=True)
class SeOutput:
    reps: Tensor  # M×d
    attn: Tensor  # M×N, rows sum to 1


@dataclass(frozen=True)
class AtomAssignment:
    pattern_of_atom: np.ndarray

    def __len__(self) -> int:
        return len(self.pattern_of_atom)

    def owners(self) -> List[int]:
        """Patterns owning at least one atom, ascending."""
        return sorted(int(p) for p in np.unique(self.pattern_of_atom))

    def substructures(self) -> Dict[int, List[int]]:
        groups: Dict[int, List[int]] = {}
        for atom, pattern in enumerate(self.pattern_of_atom):
            groups.setdefault(int(pattern), []).append(atom)
        return groups


@dataclass(frozen=True)
class SimilarityMatrix:
    s: Tensor

    @property
    def values(self) -> np.ndarray:
        return self.s.data


@dataclass(frozen=True)
class DrugEncoding:
    """Everything the head needs from one drug."""

    nodes: Tensor
    readout: Tensor
    se: Optional[SeOutput]


def se_extract(h: Tensor, bank: PatternBank, weights: SeWeights) -> SeOutput:
    """O = ReLU((Q + A V) W_O) with A = softmax_atoms(Q Kᵀ / √d)."""
    d = h.cols
    if bank.q0.cols != d or weights.w_k.rows != d:
        raise ShapeMismatch(f"se_extract: node width {d} vs pattern width {bank.q0.cols}")
    q = matmul(bank.q0, weights.w_q)
    k = matmul(h, weights.w_k)
    v = matmul(h, weights.w_v)
    attn = row_softmax(scale(matmul(q, transpose(k)), 1.0 / math.sqrt(d)))
    reps = relu(matmul(add(q, matmul(attn, v)), weights.w_o))
    return SeOutput(reps=reps, attn=attn)


def assign_atoms(attn) -> AtomAssignment:
    """Per-atom argmax over patterns; np.argmax keeps the lowest index on ties."""
    values = attn.data if isinstance(attn, Tensor) else np.asarray(attn, dtype=np.float64)
    return AtomAssignment(np.argmax(values, axis=0).astype(np.int64))


def sd_augment(graph: MolecularGraph, assignment: AtomAssignment, rng: np.random.Generator) -> MolecularGraph:
    """Zero the feature rows of one substructure chosen uniformly among the non-empty ones."""
    if len(assignment) != graph.num_atoms:
        raise ShapeMismatch(f"assignment covers {len(assignment)} atoms, graph has {graph.num_atoms}")
    owners = assignment.owners()
    chosen = owners[int(rng.integers(len(owners)))]
    features = graph.node_features.copy()
    features[assignment.pattern_of_atom == chosen] = 0.0
    return graph.with_features(features)


def si_similarity(o1: Tensor, o2: Tensor) -> SimilarityMatrix:
    """Cosine similarity between every pair of representative vectors; zero rows give 0."""
    if o1.shape != o2.shape:
        raise ShapeMismatch(f"si_similarity: {o1.shape} vs {o2.shape}")
    s = pairwise_dot(l2_normalize_rows(o1), l2_normalize_rows(o2))
    return SimilarityMatrix(clamp(s, -1.0, 1.0))


def readout(h: Tensor) -> Tensor:
    if h.rows == 0:
        raise ShapeMismatch("readout of an empty node matrix")
    return sum_rows(h)


def type_one_hot(ddi_type: int, num_types: int) -> Tensor:
    if not 0 <= ddi_type < num_types:
        raise ShapeMismatch(f"DDI type {ddi_type} outside [0, {num_types})")
    row = np.zeros((1, num_types))
    row[0, ddi_type] = 1.0
    return Tensor(row)


def predict_logit(
    g1: Tensor,
    g2: Tensor,
    similarity: Optional[SimilarityMatrix],
    t: Tensor,
    params: ModelParams,
) -> Tensor:
    """MLP([g1 ∥ g2 ∥ flatten(S) ∥ t]) -> 1×1 logit; S is skipped for the no_se_si variant."""
    parts = [g1, g2]
    if similarity is not None:
        parts.append(flatten(similarity.s))
    parts.append(t)
    x = concat_cols(parts)
    expected = params["mlp.W1"].rows
    if x.cols != expected:
        raise ShapeMismatch(f"predictor expects width {expected}, got {x.cols}")
    hidden = relu(add(matmul(x, params["mlp.W1"]), params["mlp.b1"]))
    return add(matmul(hidden, params["mlp.W2"]), params["mlp.b2"])


def _encode(graph: MolecularGraph, params: ModelParams, config: ModelConfig) -> DrugEncoding:
    nodes = encode(graph, config.gnn, params)
    se = None
    if config.uses_substructures:
        se = se_extract(nodes, PatternBank.from_params(params), SeWeights.from_params(params))
    return DrugEncoding(nodes=nodes, readout=readout(nodes), se=se)


def encode_drug(graph: MolecularGraph, params: ModelParams, config: ModelConfig) -> DrugEncoding:
    """Gradient-free encoding, safe to cache and share between threads."""
    with no_grad():
        return _encode(graph, params, config)


def predict_from_encodings(
    enc1: DrugEncoding,
    enc2: DrugEncoding,
    ddi_type: int,
    params: ModelParams,
    config: ModelConfig,
) -> Tensor:
    similarity = si_similarity(enc1.se.reps, enc2.se.reps) if config.uses_substructures else None
    return predict_logit(enc1.readout, enc2.readout, similarity, type_one_hot(ddi_type, config.num_types), params)


def maybe_augment(
    graph: MolecularGraph,
    params: ModelParams,
    config: ModelConfig,
    rng: np.random.Generator,
    prob: float = 0.5,
) -> MolecularGraph:
    """With probability ``prob``, drop one substructure found by a no-gradient SE pass."""
    if rng.random() >= prob:
        return graph
    assignment = assign_atoms(encode_drug(graph, params, config).se.attn)
    return sd_augment(graph, assignment, rng)


def forward_pair(
    drug1: MolecularGraph,
    drug2: MolecularGraph,
    ddi_type: int,
    params: ModelParams,
    config: ModelConfig,
    mode: Mode = Mode.EVAL,
    rng: Optional[np.random.Generator] = None,
    augment: bool = True,
    augment_prob: float = 0.5,
) -> Tensor:
    """Logit for one (drug1, drug2, type) tuple.

    In train mode with augmentation enabled (and the full variant) each graph
    independently gets an SD-augmented replacement before the gradient pass.
    """
    if mode == Mode.TRAIN and augment and config.variant == ModelVariant.FULL:
        if rng is None:
            raise ValueError("train-mode augmentation needs a random generator")
        drug1 = maybe_augment(drug1, params, config, rng, augment_prob)
        drug2 = maybe_augment(drug2, params, config, rng, augment_prob)
    enc1 = _encode(drug1, params, config)
    enc2 = _encode(drug2, params, config)
    return predict_from_encodings(enc1, enc2, ddi_type, params, config)
