from typing import Iterator, List, Optional, Sequence

import numpy as np

from app.core.errors import EmptyBatch
from app.schemas.sample import DdiSample


def expand_orderings(samples: Sequence[DdiSample]) -> List[DdiSample]:
    """Each sample followed by its (drug2, drug1) mirror."""
    out: List[DdiSample] = []
    for sample in samples:
        out.append(sample)
        if sample.drug1_id != sample.drug2_id:
            out.append(sample.swapped())
    return out


def iterate_batches(
    samples: Sequence[DdiSample],
    batch_size: int,
    rng: Optional[np.random.Generator] = None,
) -> Iterator[List[DdiSample]]:
    """Consecutive batches; shuffled first when ``rng`` is given. The last batch may be short."""
    if batch_size <= 0:
        raise EmptyBatch(f"batch size must be positive, got {batch_size}")
    order = np.arange(len(samples)) if rng is None else rng.permutation(len(samples))
    for start in range(0, len(order), batch_size):
        yield [samples[i] for i in order[start:start + batch_size]]
