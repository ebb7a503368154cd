"""
Checkpoint loading and split evaluation.

Splits are rebuilt from the seed and fold recorded in the checkpoint, so an
evaluation always sees the partition the model was trained on.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

from app.chem.fingerprint import FingerprintIndex
from app.core.checkpoint import load_checkpoint
from app.core.config import RunConfig
from app.core.errors import DataError, IncompatibleCheckpoint
from app.data.loaders import TypeVocabulary
from app.data.metrics import aggregate_folds, compute_metrics
from app.models.params import ModelParams
from app.schemas.checkpoint import CheckpointHeader
from app.schemas.report import EvaluationReport, FoldSummary, MetricsReport
from app.schemas.sample import DdiSample, SplitMode, SplitSpec
from app.services.dataset import DrugDataset, PreparedSplits, load_dataset, prepare_splits
from app.services.inductive import InductiveScorer
from app.services.predictor import Predictor

logger = logging.getLogger(__name__)


@dataclass
class LoadedRun:
    header: CheckpointHeader
    params: ModelParams
    dataset: DrugDataset
    splits: Optional[PreparedSplits] = None

    def predictor(self, workers: int = 1) -> Predictor:
        return Predictor(self.params, self.dataset.graphs, workers)


def load_run(config: RunConfig, checkpoint: Union[str, Path], with_splits: bool = True) -> LoadedRun:
    """Load a checkpoint together with the dataset it was trained on."""
    header, params = load_checkpoint(checkpoint)
    dataset = load_dataset(config, TypeVocabulary(header.type_labels))
    expected = config.build_model_config(dataset.feature_dim, len(dataset.vocab))
    if header.model != expected:
        raise IncompatibleCheckpoint(
            f"{checkpoint}: stored model ({header.model.gnn.backbone.value}, M={header.model.patterns}, "
            f"d={header.model.gnn.dim}, variant={header.model.variant.value}) does not match the configuration"
        )
    if header.mode != config.mode:
        raise IncompatibleCheckpoint(
            f"{checkpoint}: trained in {header.mode.value} mode but {config.mode.value} mode is configured"
        )
    if (header.seed, header.fold) != (config.seed, config.fold):
        logger.warning(
            "checkpoint was trained with seed=%d fold=%d; rebuilding splits with those",
            header.seed, header.fold,
        )
    splits = None
    if with_splits:
        splits = prepare_splits(dataset, SplitSpec(mode=header.mode, seed=header.seed, fold=header.fold))
    return LoadedRun(header=header, params=params, dataset=dataset, splits=splits)


def build_scorer(run: LoadedRun, config: RunConfig):
    """Plain predictor in the transductive setting, nearest-neighbour fusion in the inductive one."""
    predictor = run.predictor(config.workers)
    if config.mode != SplitMode.INDUCTIVE:
        return predictor
    if run.splits is None or run.splits.inductive is None:
        raise IncompatibleCheckpoint("inductive scoring needs the inductive drug split")
    index = FingerprintIndex.build(run.dataset.graphs, config.fingerprint.radius, config.fingerprint.width)
    pool = index.subset(run.splits.inductive.old_drugs)
    return InductiveScorer(predictor, pool, index.fingerprints)


def evaluate_samples(scorer, samples: Sequence[DdiSample]) -> MetricsReport:
    scores = scorer.score_samples(samples)
    return compute_metrics(scores, [s.label for s in samples])


def evaluate_run(
    config: RunConfig,
    checkpoint: Union[str, Path],
    split_names: Optional[Sequence[str]] = None,
) -> EvaluationReport:
    run = load_run(config, checkpoint)
    scorer = build_scorer(run, config)
    names = list(split_names) if split_names else run.splits.evaluation_splits()
    reports: Dict[str, MetricsReport] = {}
    for name in names:
        if name not in run.splits.parts:
            raise IncompatibleCheckpoint(f"no split named {name!r} in {config.mode.value} mode")
        if not run.splits.parts[name]:
            logger.warning("split %s is empty; skipped", name)
            continue
        reports[name] = evaluate_samples(scorer, run.splits.parts[name])
        logger.info("%s: %s", name, reports[name].model_dump(exclude={"notes"}))

    similarity = None
    if isinstance(scorer, InductiveScorer):
        similarity = scorer.mean_neighbor_similarity(run.splits.inductive.new_drugs)
    return EvaluationReport(
        mode=config.mode.value,
        fold=run.header.fold,
        splits=reports,
        mean_neighbor_similarity=similarity,
    )


def evaluate_folds(
    config: RunConfig,
    checkpoint_template: str,
    folds: Sequence[int],
    split_name: str,
) -> FoldSummary:
    """Evaluate one checkpoint per fold (``{fold}`` in the path) and aggregate mean±std."""
    reports = []
    for fold in folds:
        fold_config = config.model_copy(update={"fold": fold})
        report = evaluate_run(fold_config, checkpoint_template.format(fold=fold), [split_name])
        if split_name not in report.splits:
            raise DataError(f"fold {fold}: split {split_name!r} is empty")
        reports.append(report.splits[split_name])
    return aggregate_folds(reports, folds)
