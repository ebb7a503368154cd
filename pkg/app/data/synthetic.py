"""
Procedurally generated molecules with rule-based typed interactions.

Every drug belongs to a hidden group fixed by a functional motif appended to
a random carbon skeleton. The interaction rule depends only on the two
groups, so a model that recognizes the motifs can learn it:

    type (g1 + g2) mod T        for every pair
    type (g1 + 1) mod T         additionally when g1 == g2
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Set, Tuple, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

MOTIFS = ("c1ccccc1", "C(=O)O", "N", "Cl", "C#N", "S", "F", "Br")


@dataclass(frozen=True)
class SyntheticDataset:
    drugs: Dict[str, str]
    groups: Dict[str, int]
    pairs: List[Tuple[str, str, str]]  # (drug1_id, drug2_id, ddi_type label)

    def write(self, directory: Union[str, Path]) -> Tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        drugs_path = directory / "drugs.csv"
        pairs_path = directory / "pairs.csv"
        pd.DataFrame(
            {"drug_id": list(self.drugs), "smiles": list(self.drugs.values())}
        ).to_csv(drugs_path, index=False, lineterminator="\n")
        pd.DataFrame(self.pairs, columns=["drug1_id", "drug2_id", "ddi_type"]).to_csv(
            pairs_path, index=False, lineterminator="\n"
        )
        return drugs_path, pairs_path


def _skeleton(rng: np.random.Generator) -> str:
    atoms = []
    for _ in range(int(rng.integers(1, 5))):
        atoms.append("C(C)" if rng.random() < 0.3 else "C")
    return "".join(atoms)


def _molecule(group: int, rng: np.random.Generator) -> str:
    motif = MOTIFS[group % len(MOTIFS)]
    rings = "C1CC1" * (group // len(MOTIFS))
    return f"{_skeleton(rng)}{rings}{motif}"


def interaction_types(g1: int, g2: int, n_types: int) -> Set[int]:
    types = {(g1 + g2) % n_types}
    if g1 == g2:
        types.add((g1 + 1) % n_types)
    return types


def generate_synthetic(
    n_drugs: int = 20,
    n_pairs: int = 200,
    n_types: int = 4,
    seed: int = 0,
) -> SyntheticDataset:
    """``n_drugs`` molecules spread evenly over ``n_types`` groups and up to ``n_pairs`` positives.

    When the rule yields more positive tuples than ``n_pairs`` a seeded subset
    is kept; when it yields fewer, all of them are returned.
    """
    rng = np.random.default_rng(seed)
    drugs: Dict[str, str] = {}
    groups: Dict[str, int] = {}
    for i in range(n_drugs):
        drug_id = f"SYN{i:03d}"
        groups[drug_id] = i % n_types
        drugs[drug_id] = _molecule(groups[drug_id], rng)

    ids = list(drugs)
    candidates: List[Tuple[str, str, str]] = []
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            for t in sorted(interaction_types(groups[ids[a]], groups[ids[b]], n_types)):
                candidates.append((ids[a], ids[b], str(t)))

    if len(candidates) > n_pairs:
        keep = np.sort(rng.choice(len(candidates), size=n_pairs, replace=False))
        pairs = [candidates[i] for i in keep]
    else:
        if len(candidates) < n_pairs:
            logger.warning("rule yields only %d positive pairs (asked for %d)", len(candidates), n_pairs)
        pairs = candidates
    # random slot order per pair
    pairs = [(d2, d1, t) if rng.random() < 0.5 else (d1, d2, t) for d1, d2, t in pairs]
    return SyntheticDataset(drugs=drugs, groups=groups, pairs=pairs)
