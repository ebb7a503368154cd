"""
Transductive (stratified 6:2:2 over pairs) and inductive (1:4 over drugs)
dataset splits. Everything is deterministic under the generator passed in.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from app.schemas.sample import DdiSample

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence]


def _allocate(n: int, ratios: Sequence[float]) -> List[int]:
    """Largest-remainder sizes: each part is within one sample of ``n * ratio``."""
    quotas = np.array([n * r for r in ratios], dtype=np.float64)
    sizes = np.floor(quotas + 1e-9).astype(np.int64)
    remainders = np.clip(quotas - sizes, 0.0, None)
    # Ties go to the earlier part.
    for part in np.argsort(-remainders, kind="stable")[: max(0, n - int(sizes.sum()))]:
        sizes[part] += 1
    return sizes.tolist()


def stratified_split(
    samples: Sequence[DdiSample],
    seed: SeedLike,
    ratios: Sequence[float],
) -> Tuple[List[DdiSample], ...]:
    """Split every (ddi_type, label) stratum by ``ratios``.

    Sizes per stratum come from largest-remainder allocation. Each part keeps
    the input order.
    """
    rng = np.random.default_rng(seed)
    strata: Dict[Tuple[int, int], List[int]] = {}
    for index, sample in enumerate(samples):
        strata.setdefault((sample.ddi_type, sample.label), []).append(index)

    assignment = np.zeros(len(samples), dtype=np.int64)
    for key in sorted(strata):
        indices = np.array(strata[key], dtype=np.int64)
        rng.shuffle(indices)
        start = 0
        for part, size in enumerate(_allocate(len(indices), ratios)):
            assignment[indices[start:start + size]] = part
            start += size

    parts: Tuple[List[DdiSample], ...] = tuple([] for _ in ratios)
    for index, sample in enumerate(samples):
        parts[assignment[index]].append(sample)
    return parts


def split_transductive(
    samples: Sequence[DdiSample],
    seed: SeedLike,
    ratios: Sequence[float] = (0.6, 0.2, 0.2),
) -> Tuple[List[DdiSample], List[DdiSample], List[DdiSample]]:
    train, valid, test = stratified_split(samples, seed, ratios)
    logger.info("transductive split: train=%d valid=%d test=%d", len(train), len(valid), len(test))
    return train, valid, test


@dataclass(frozen=True)
class InductiveSplit:
    new_drugs: List[str]
    old_drugs: List[str]
    train: List[DdiSample]  # both drugs old
    s1: List[DdiSample]  # both drugs new
    s2: List[DdiSample]  # exactly one drug new

    def as_dict(self) -> Dict[str, List[DdiSample]]:
        return {"train": self.train, "s1": self.s1, "s2": self.s2}


def split_inductive(
    drugs: Iterable[str],
    samples: Sequence[DdiSample],
    seed: SeedLike,
    new_fraction: float = 0.2,
) -> InductiveSplit:
    """Shuffle the drugs, take the first ``new_fraction`` as unseen, bucket the pairs."""
    rng = np.random.default_rng(seed)
    order = list(drugs)
    permutation = rng.permutation(len(order))
    shuffled = [order[i] for i in permutation]
    n_new = int(round(len(shuffled) * new_fraction))
    new_drugs, old_drugs = shuffled[:n_new], shuffled[n_new:]
    new_set = set(new_drugs)

    buckets: Dict[int, List[DdiSample]] = {0: [], 1: [], 2: []}
    for sample in samples:
        unseen = (sample.drug1_id in new_set) + (sample.drug2_id in new_set)
        buckets[unseen].append(sample)
    logger.info(
        "inductive split: %d new / %d old drugs; train=%d s1=%d s2=%d",
        len(new_drugs), len(old_drugs), len(buckets[0]), len(buckets[2]), len(buckets[1]),
    )
    return InductiveSplit(
        new_drugs=new_drugs, old_drugs=old_drugs,
        train=buckets[0], s1=buckets[2], s2=buckets[1],
    )


def holdout_split(
    samples: Sequence[DdiSample],
    seed: SeedLike,
    fraction: float = 0.2,
) -> Tuple[List[DdiSample], List[DdiSample]]:
    """Stratified train/validation hold-out used for model selection in the inductive setting."""
    train, valid = stratified_split(samples, seed, (1.0 - fraction, fraction))
    return train, valid
