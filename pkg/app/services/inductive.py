"""
Scoring pairs that involve drugs unseen in training.

Each unseen drug is replaced by its most Tanimoto-similar training drug; the
probability of the original pair and of the replaced pair are averaged.
Drugs already in the training pool are their own replacement.
"""
import logging
from typing import Dict, Mapping, Sequence

import numpy as np

from app.chem.fingerprint import Fingerprint, FingerprintIndex, mean_neighbor_similarity
from app.core.errors import UnknownDrugId
from app.schemas.sample import DdiSample
from app.services.predictor import Predictor

logger = logging.getLogger(__name__)


class InductiveScorer:
    def __init__(self, predictor: Predictor, pool: FingerprintIndex, fingerprints: Mapping[str, Fingerprint]):
        self.predictor = predictor
        self.pool = pool
        self.fingerprints = fingerprints
        self._neighbors: Dict[str, str] = {}

    def neighbor(self, drug_id: str) -> str:
        if drug_id in self.pool:
            return drug_id
        if drug_id not in self._neighbors:
            if drug_id not in self.fingerprints:
                raise UnknownDrugId(drug_id)
            nearest, similarity = self.pool.nearest(self.fingerprints[drug_id])
            logger.debug("replacing %s by %s (tanimoto %.3f)", drug_id, nearest, similarity)
            self._neighbors[drug_id] = nearest
        return self._neighbors[drug_id]

    def score(self, drug1: str, drug2: str, ddi_type: int) -> float:
        original = self.predictor.probability(drug1, drug2, ddi_type)
        replaced = self.predictor.probability(self.neighbor(drug1), self.neighbor(drug2), ddi_type)
        return 0.5 * (original + replaced)

    def score_samples(self, samples: Sequence[DdiSample]) -> np.ndarray:
        return np.array([self.score(s.drug1_id, s.drug2_id, s.ddi_type) for s in samples])

    def mean_neighbor_similarity(self, new_drugs: Sequence[str]) -> float:
        return mean_neighbor_similarity({d: self.fingerprints[d] for d in new_drugs}, self.pool)


def inductive_score(
    sample: DdiSample,
    predictor: Predictor,
    pool: FingerprintIndex,
    fingerprints: Mapping[str, Fingerprint],
) -> float:
    return InductiveScorer(predictor, pool, fingerprints).score(sample.drug1_id, sample.drug2_id, sample.ddi_type)
