import logging
from typing import Any, Sequence

import numpy as np

from app.chem.graph import AtomMeta, MolecularGraph
from app.chem.vocab import ATTRIBUTE_BLOCKS, FEATURE_DIM

logger = logging.getLogger(__name__)


def _slot(value: Any, vocabulary: Sequence, has_other: bool, attribute: str) -> int:
    try:
        return list(vocabulary).index(value)
    except ValueError:
        if not has_other:
            raise
        logger.debug("%s=%r outside vocabulary, using the 'other' slot", attribute, value)
        return len(vocabulary)


def featurize_atom(meta: AtomMeta) -> np.ndarray:
    """Concatenation of the eight one-hot blocks for one atom."""
    row = np.zeros(FEATURE_DIM)
    offset = 0
    for name, vocabulary, has_other in ATTRIBUTE_BLOCKS:
        row[offset + _slot(getattr(meta, name), vocabulary, has_other, name)] = 1.0
        offset += len(vocabulary) + (1 if has_other else 0)
    return row


def featurize_atoms(metas: Sequence[AtomMeta]) -> np.ndarray:
    return np.stack([featurize_atom(meta) for meta in metas]) if metas else np.zeros((0, FEATURE_DIM))


def featurize(graph: MolecularGraph) -> np.ndarray:
    """N×F one-hot feature matrix, one row per atom, computed row by row."""
    return featurize_atoms(graph.atom_meta)
