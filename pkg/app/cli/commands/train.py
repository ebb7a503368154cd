import argparse
import logging

from app.cli.output import emit
from app.core.config import RunConfig
from app.schemas.report import TrainSummary
from app.services.dataset import RunStreams, load_dataset, prepare_splits
from app.services.trainer import train_model

logger = logging.getLogger(__name__)


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("train", help="train a model and write checkpoints")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--lr-schedule", help='stages as "start_epoch:lr,...", e.g. "0:0.001,200:0.0001"')
    parser.add_argument("--both-orderings", action="store_true", help="also train on (drug2, drug1, type)")
    parser.add_argument("--no-progress", action="store_true")
    parser.set_defaults(func=run, extra_overrides=_overrides)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "train.epochs": args.epochs,
        "train.batch_size": args.batch_size,
        "train.lr_schedule": args.lr_schedule,
        "train.both_orderings": True if args.both_orderings else None,
    }


def run(args: argparse.Namespace, config: RunConfig) -> int:
    dataset = load_dataset(config)
    streams = RunStreams.from_seed(config.seed, config.fold)
    splits = prepare_splits(dataset, config.split_spec, streams)
    logger.info("%s split: %s", config.mode.value, {name: len(part) for name, part in splits.parts.items()})
    config.output_dir.mkdir(parents=True, exist_ok=True)
    dataset.vocab.save(config.output_dir / "types.json")

    result = train_model(
        config, dataset, splits, streams,
        output_dir=config.output_dir,
        checkpoint_path=config.resolved_checkpoint,
        progress=not args.no_progress,
    )
    summary = TrainSummary(
        checkpoint=str(result.checkpoint),
        best_checkpoint=str(result.best_checkpoint) if result.best_checkpoint else None,
        best_epoch=result.best_epoch,
        best_score=result.best_score,
        epochs=config.train.epochs,
        final_loss=result.history[-1].loss,
    )
    emit(summary.model_dump_json())
    return 0
