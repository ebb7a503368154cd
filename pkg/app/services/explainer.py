"""
Per-pair explanation: atom-to-pattern assignments of both drugs, the full
similarity matrix and the strongest pattern interactions.
"""
from typing import List

import numpy as np

from app.core.errors import ConfigError, UnknownDrugId
from app.models.msan import assign_atoms, si_similarity
from app.schemas.report import AtomPattern, DrugExplanation, Explanation, InteractionRow
from app.services.evaluator import LoadedRun


def top_interactions(similarity: np.ndarray, k: int = 10) -> List[InteractionRow]:
    """The ``k`` largest entries, score descending, ties by (i, j) ascending."""
    rows, cols = similarity.shape
    ranked = sorted((-float(similarity[i, j]), i, j) for i in range(rows) for j in range(cols))
    return [
        InteractionRow(rank=rank, pattern_drug1=i, pattern_drug2=j, score=-negative)
        for rank, (negative, i, j) in enumerate(ranked[:k], start=1)
    ]


def _describe(run: LoadedRun, drug_id: str, attn) -> DrugExplanation:
    graph = run.dataset.graphs[drug_id]
    assignment = assign_atoms(attn)
    return DrugExplanation(
        drug_id=drug_id,
        smiles=run.dataset.drugs[drug_id],
        atoms=[
            AtomPattern(atom=atom, element=meta.element, pattern=int(pattern))
            for atom, (meta, pattern) in enumerate(zip(graph.atom_meta, assignment.pattern_of_atom))
        ],
    )


def explain_pair(run: LoadedRun, drug1: str, drug2: str, ddi_type: str, top_k: int = 10) -> Explanation:
    if not run.params.config.uses_substructures:
        raise ConfigError("explanations need a model with substructure extraction (variant full or no_sd)")
    for drug_id in (drug1, drug2):
        if drug_id not in run.dataset.graphs:
            raise UnknownDrugId(drug_id)
    if ddi_type not in run.dataset.vocab:
        raise ConfigError(f"unknown DDI type {ddi_type!r}")

    predictor = run.predictor()
    enc1, enc2 = predictor.encoding(drug1), predictor.encoding(drug2)
    similarity = si_similarity(enc1.se.reps, enc2.se.reps).values
    return Explanation(
        ddi_type=ddi_type,
        probability=predictor.probability(drug1, drug2, run.dataset.vocab.index(ddi_type)),
        drug1=_describe(run, drug1, enc1.se.attn),
        drug2=_describe(run, drug2, enc2.se.attn),
        similarity=similarity.tolist(),
        top_interactions=top_interactions(similarity, top_k),
    )
