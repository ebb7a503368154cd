"""
Mini-batch Adam on binary cross-entropy with a staged learning rate.

After every epoch the validation split is scored; the checkpoint with the
best validation AUC (accuracy when AUC is undefined) is kept next to the
final one. Epoch summaries go to the logger and, one JSON object per line,
to ``train_log.jsonl``.
"""
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from app.chem.graph import MolecularGraph
from app.core.checkpoint import best_path, save_checkpoint
from app.core.config import RunConfig
from app.core.errors import EmptyBatch
from app.core.optim import Adam
from app.core.tensor import GradTape, bce_with_logits, concat_rows
from app.data.batching import expand_orderings, iterate_batches
from app.data.metrics import compute_metrics
from app.models.msan import Mode, forward_pair
from app.models.params import ModelParams, init_params
from app.schemas.report import EpochRecord, MetricsReport
from app.schemas.sample import DdiSample
from app.services.dataset import DrugDataset, PreparedSplits, RunStreams
from app.services.predictor import Predictor

logger = logging.getLogger(__name__)

TRAIN_LOG = "train_log.jsonl"


@dataclass
class TrainResult:
    params: ModelParams
    history: List[EpochRecord] = field(default_factory=list)
    best_epoch: Optional[int] = None
    best_score: Optional[float] = None
    checkpoint: Optional[Path] = None
    best_checkpoint: Optional[Path] = None


def _selection_score(report: Optional[MetricsReport]) -> Optional[float]:
    if report is None:
        return None
    return report.auc if report.auc is not None else report.acc


def train_epoch(
    samples: Sequence[DdiSample],
    graphs: Dict[str, MolecularGraph],
    params: ModelParams,
    optimizer: Adam,
    config: RunConfig,
    lr: float,
    rng: np.random.Generator,
) -> tuple:
    """One pass over ``samples``; returns (mean loss, accuracy of the training logits)."""
    model_config = params.config
    total_loss = 0.0
    correct = 0
    for batch in iterate_batches(samples, config.train.batch_size, rng):
        labels = np.array([s.label for s in batch], dtype=np.float64)
        optimizer.zero_grad()
        with GradTape() as tape:
            logits = concat_rows([
                forward_pair(
                    graphs[s.drug1_id], graphs[s.drug2_id], s.ddi_type, params, model_config,
                    mode=Mode.TRAIN, rng=rng,
                    augment=config.augment_enabled, augment_prob=config.train.augment_prob,
                )
                for s in batch
            ])
            loss = bce_with_logits(logits, labels)
        tape.backward(loss)
        optimizer.step(lr)
        total_loss += loss.item() * len(batch)
        correct += int(np.sum((logits.data[:, 0] >= 0.0) == (labels == 1.0)))
    return total_loss / len(samples), correct / len(samples)


def train_model(
    config: RunConfig,
    dataset: DrugDataset,
    splits: PreparedSplits,
    streams: RunStreams,
    output_dir: Optional[Path] = None,
    checkpoint_path: Optional[Path] = None,
    progress: bool = True,
) -> TrainResult:
    model_config = config.build_model_config(dataset.feature_dim, len(dataset.vocab))
    params = init_params(model_config, streams.init)
    optimizer = Adam(params.trainable())
    logger.info(
        "training %s/%s with %d parameters on %d samples (%d validation)",
        model_config.gnn.backbone.value, model_config.variant.value, params.count(),
        len(splits.train), len(splits.valid),
    )

    if not splits.train:
        raise EmptyBatch("the training split is empty")
    train_samples = expand_orderings(splits.train) if config.train.both_orderings else list(splits.train)
    log_handle = None
    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)
        log_handle = (output_dir / TRAIN_LOG).open("w", encoding="utf-8")

    result = TrainResult(params=params)
    best_target = best_path(checkpoint_path) if checkpoint_path is not None else None
    save_kwargs = dict(type_labels=dataset.vocab.labels, mode=splits.mode, seed=config.seed, fold=config.fold)
    try:
        bar = tqdm(range(config.train.epochs), desc="train", unit="epoch", file=sys.stderr, disable=not progress)
        for epoch in bar:
            lr = config.train.lr_at(epoch)
            loss, train_acc = train_epoch(train_samples, dataset.graphs, params, optimizer, config, lr, streams.train)

            valid = None
            if splits.valid:
                scores = Predictor(params, dataset.graphs, config.workers).score_samples(splits.valid)
                valid = compute_metrics(scores, [s.label for s in splits.valid])
            score = _selection_score(valid)
            improved = score is not None and (result.best_score is None or score > result.best_score)
            if improved:
                result.best_epoch, result.best_score = epoch, score
                if best_target is not None:
                    result.best_checkpoint = save_checkpoint(
                        best_target, params, epoch=epoch + 1, valid_auc=valid.auc, **save_kwargs
                    )

            record = EpochRecord(epoch=epoch, lr=lr, loss=loss, train_acc=train_acc, valid=valid, best=improved)
            result.history.append(record)
            if log_handle is not None:
                log_handle.write(record.model_dump_json() + "\n")
                log_handle.flush()
            bar.set_postfix(loss=f"{loss:.4f}", acc=f"{train_acc:.3f}")
            logger.debug(
                "epoch %d lr=%g loss=%.5f train_acc=%.4f valid_auc=%s",
                epoch, lr, loss, train_acc, None if valid is None else valid.auc,
            )
    finally:
        if log_handle is not None:
            log_handle.close()

    if checkpoint_path is not None:
        last_auc = result.history[-1].valid.auc if result.history and result.history[-1].valid else None
        result.checkpoint = save_checkpoint(
            checkpoint_path, params, epoch=config.train.epochs, valid_auc=last_auc, **save_kwargs
        )
    logger.info("finished training; best epoch %s (score %s)", result.best_epoch, result.best_score)
    return result
