"""
Inference over cached per-drug encodings.

Encodings are computed once per drug without a gradient tape and shared
read-only, so scoring may fan out over worker threads.
"""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Mapping, Sequence

import numpy as np

from app.chem.graph import MolecularGraph
from app.core.errors import UnknownDrugId
from app.core.tensor import no_grad, sigmoid
from app.models.msan import DrugEncoding, encode_drug, predict_from_encodings
from app.models.params import ModelParams
from app.schemas.sample import DdiSample

logger = logging.getLogger(__name__)


class Predictor:
    def __init__(self, params: ModelParams, graphs: Mapping[str, MolecularGraph], workers: int = 1):
        self.params = params
        self.config = params.config
        self.graphs = graphs
        self.workers = max(1, workers)
        self._cache: Dict[str, DrugEncoding] = {}
        self._lock = threading.Lock()

    def encoding(self, drug_id: str) -> DrugEncoding:
        cached = self._cache.get(drug_id)
        if cached is not None:
            return cached
        if drug_id not in self.graphs:
            raise UnknownDrugId(drug_id)
        encoded = encode_drug(self.graphs[drug_id], self.params, self.config)
        with self._lock:
            return self._cache.setdefault(drug_id, encoded)

    def logit(self, drug1: str, drug2: str, ddi_type: int) -> float:
        with no_grad():
            return predict_from_encodings(
                self.encoding(drug1), self.encoding(drug2), ddi_type, self.params, self.config
            ).item()

    def probability(self, drug1: str, drug2: str, ddi_type: int) -> float:
        with no_grad():
            logit = predict_from_encodings(
                self.encoding(drug1), self.encoding(drug2), ddi_type, self.params, self.config
            )
            return sigmoid(logit).item()

    def _score_chunk(self, samples: Sequence[DdiSample]) -> np.ndarray:
        return np.array([self.probability(s.drug1_id, s.drug2_id, s.ddi_type) for s in samples])

    def score_samples(self, samples: Sequence[DdiSample]) -> np.ndarray:
        """Probabilities in sample order."""
        if self.workers == 1 or len(samples) < 2 * self.workers:
            return self._score_chunk(samples)
        chunks = np.array_split(np.arange(len(samples)), self.workers)
        logger.debug("scoring %d samples on %d threads", len(samples), self.workers)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            parts = pool.map(lambda idx: self._score_chunk([samples[i] for i in idx]), chunks)
            return np.concatenate(list(parts))
