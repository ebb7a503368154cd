"""
Negative sampling by corrupting one endpoint of each positive.

For a positive (d1, d2, t) a coin flip picks the endpoint to replace with a
uniformly drawn drug. A candidate is rejected when the corrupted unordered
pair already interacts under type t, repeats an earlier negative, or pairs a
drug with itself. After 100 rejected draws the remaining valid replacements
for that endpoint are enumerated and one is drawn from them; only when both
endpoints have none left is sampling exhausted.
"""
import logging
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from app.core.errors import DataError, SamplingExhausted
from app.schemas.sample import DdiSample

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 100

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence]


def _corrupted(sample: DdiSample, replace_first: bool, candidate: str) -> DdiSample:
    d1, d2 = (candidate, sample.drug2_id) if replace_first else (sample.drug1_id, candidate)
    return DdiSample(drug1_id=d1, drug2_id=d2, ddi_type=sample.ddi_type, label=0)


def _corrupt(
    sample: DdiSample,
    replace_first: bool,
    pool: Sequence[str],
    taken: set,
    rng: np.random.Generator,
) -> Optional[DdiSample]:
    kept = sample.drug2_id if replace_first else sample.drug1_id
    for _ in range(MAX_ATTEMPTS):
        candidate = pool[int(rng.integers(len(pool)))]
        if candidate == kept:
            continue
        negative = _corrupted(sample, replace_first, candidate)
        if negative.unordered_key not in taken:
            return negative

    remaining = [
        negative
        for negative in (_corrupted(sample, replace_first, c) for c in pool if c != kept)
        if negative.unordered_key not in taken
    ]
    if not remaining:
        return None
    return remaining[int(rng.integers(len(remaining)))]


def sample_negatives(
    positives: Sequence[DdiSample],
    drug_pool: Iterable[str],
    seed: SeedLike = 0,
) -> List[DdiSample]:
    """Exactly one distinct negative per positive, deterministic for a given seed."""
    if not positives:
        raise DataError("cannot sample negatives without positives")
    pool = sorted(set(drug_pool))
    if len(pool) < 2:
        raise SamplingExhausted(f"drug pool of size {len(pool)} cannot produce negative pairs")
    rng = np.random.default_rng(seed)
    # positives and every negative drawn so far
    taken = {p.unordered_key for p in positives}

    negatives: List[DdiSample] = []
    for sample in positives:
        replace_first = bool(rng.random() < 0.5)
        negative = _corrupt(sample, replace_first, pool, taken, rng)
        if negative is None:
            negative = _corrupt(sample, not replace_first, pool, taken, rng)
        if negative is None:
            raise SamplingExhausted(
                f"no unused negative for ({sample.drug1_id}, {sample.drug2_id}, type {sample.ddi_type}) "
                f"in a pool of {len(pool)} drugs"
            )
        taken.add(negative.unordered_key)
        negatives.append(negative)
    logger.debug("sampled %d negatives from a pool of %d drugs", len(negatives), len(pool))
    return negatives
