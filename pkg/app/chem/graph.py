from dataclasses import dataclass, replace
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.chem.vocab import Chirality, Hybridization
from app.core.errors import ShapeMismatch

Edge = Tuple[int, int]


class AtomMeta(BaseModel):
    """The eight categorical attributes of one heavy atom."""
    model_config = ConfigDict(frozen=True)

    element: str = Field(..., description="Element symbol, capitalized (aromatic 'c' -> 'C')")
    degree: int = Field(..., ge=0, description="Number of heavy-atom neighbours")
    formal_charge: int = 0
    num_hs: int = Field(0, ge=0, description="Attached hydrogens, implicit + explicit")
    hybridization: Hybridization = Hybridization.UNSPECIFIED
    aromatic: bool = False
    in_ring: bool = False
    chirality: Chirality = Chirality.UNSPECIFIED


@dataclass(frozen=True, eq=False)
class MolecularGraph:
    """Heavy-atom graph of one molecule: features X, undirected edges, atom records.

    ``bond_orders`` runs parallel to ``edges`` (1, 2, 3, 4 or 1.5 for
    aromatic). Bond orders feed the fingerprint only; the model sees X and A.
    """
    node_features: np.ndarray
    edges: Tuple[Edge, ...]
    atom_meta: Tuple[AtomMeta, ...]
    bond_orders: Tuple[float, ...] = ()
    smiles: Optional[str] = None

    def __post_init__(self):
        n = len(self.atom_meta)
        if n < 1:
            raise ShapeMismatch("a molecular graph needs at least one atom")
        if self.node_features.ndim != 2 or self.node_features.shape[0] != n:
            raise ShapeMismatch(f"feature matrix {self.node_features.shape} does not match {n} atoms")
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ShapeMismatch(f"edge ({i}, {j}) points outside {n} atoms")
            if i == j:
                raise ShapeMismatch(f"self-loop on atom {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ShapeMismatch(f"duplicate edge {key}")
            seen.add(key)
        if self.bond_orders and len(self.bond_orders) != len(self.edges):
            raise ShapeMismatch("bond_orders must run parallel to edges")

    @property
    def num_atoms(self) -> int:
        return len(self.atom_meta)

    @property
    def feature_dim(self) -> int:
        return self.node_features.shape[1]

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.num_atoms, self.num_atoms))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    @cached_property
    def gcn_adjacency(self) -> np.ndarray:
        """D̃^(-1/2) (A + I) D̃^(-1/2)."""
        a_hat = self.adjacency + np.eye(self.num_atoms)
        inv_sqrt = 1.0 / np.sqrt(a_hat.sum(axis=1))
        return a_hat * inv_sqrt[:, None] * inv_sqrt[None, :]

    @cached_property
    def neighbor_mask(self) -> np.ndarray:
        """Neighbourhood plus self, as a boolean N×N mask."""
        return (self.adjacency + np.eye(self.num_atoms)) > 0

    def with_features(self, features: np.ndarray) -> "MolecularGraph":
        """Same atoms and edges, new feature matrix."""
        if features.shape != self.node_features.shape:
            raise ShapeMismatch(f"replacement features {features.shape} != {self.node_features.shape}")
        return replace(self, node_features=features)

    def permute(self, order: Sequence[int]) -> "MolecularGraph":
        """Reindex atoms so that new atom k is old atom ``order[k]``."""
        order = list(order)
        if sorted(order) != list(range(self.num_atoms)):
            raise ShapeMismatch("permutation must be a reordering of all atoms")
        new_index = {old: new for new, old in enumerate(order)}
        edges = tuple((new_index[i], new_index[j]) for i, j in self.edges)
        return MolecularGraph(
            node_features=self.node_features[order].copy(),
            edges=edges,
            atom_meta=tuple(self.atom_meta[i] for i in order),
            bond_orders=self.bond_orders,
            smiles=self.smiles,
        )
