"""Scoring requested tuples and ranking unlabeled candidate pairs."""
import logging
from typing import List, Optional, Sequence, Tuple

from app.core.config import RunConfig
from app.core.errors import ConfigError
from app.data.loaders import TypeVocabulary
from app.schemas.report import PredictionRow
from app.schemas.sample import DdiSample
from app.services.evaluator import LoadedRun, build_scorer

logger = logging.getLogger(__name__)

Request = Tuple[str, str, str]  # (drug1_id, drug2_id, ddi_type label)


def _to_sample(request: Request, vocab: TypeVocabulary) -> DdiSample:
    drug1, drug2, label = request
    if label not in vocab:
        raise ConfigError(f"unknown DDI type {label!r}")
    return DdiSample(drug1_id=drug1, drug2_id=drug2, ddi_type=vocab.index(label), label=0)


def predict_rows(
    run: LoadedRun,
    config: RunConfig,
    requests: Sequence[Request],
    labels: Optional[Sequence[Optional[int]]] = None,
) -> List[PredictionRow]:
    vocab = run.dataset.vocab
    samples = [_to_sample(r, vocab) for r in requests]
    scores = build_scorer(run, config).score_samples(samples)
    labels = labels if labels is not None else [None] * len(samples)
    return [
        PredictionRow(
            drug1_id=s.drug1_id, drug2_id=s.drug2_id, ddi_type=vocab.label(s.ddi_type),
            probability=float(p), label=label,
        )
        for s, p, label in zip(samples, scores, labels)
    ]


def discover(run: LoadedRun, config: RunConfig, top_n: int, split_name: str = "test") -> List[PredictionRow]:
    """Rank the sampled negatives of a split by predicted probability; the top ones are candidate DDIs."""
    parts = run.splits.parts
    if split_name not in parts:
        raise ConfigError(f"no split named {split_name!r} in {config.mode.value} mode")
    candidates = [s for s in parts[split_name] if s.label == 0]
    scores = build_scorer(run, config).score_samples(candidates)
    order = sorted(range(len(candidates)), key=lambda i: (-scores[i], i))[:top_n]
    vocab = run.dataset.vocab
    logger.info("ranked %d unlabeled %s pairs", len(candidates), split_name)
    return [
        PredictionRow(
            drug1_id=candidates[i].drug1_id, drug2_id=candidates[i].drug2_id,
            ddi_type=vocab.label(candidates[i].ddi_type), probability=float(scores[i]), label=0,
        )
        for i in order
    ]
