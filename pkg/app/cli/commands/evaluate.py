import argparse
import json
import logging

from app.cli.output import emit
from app.core.config import RunConfig
from app.core.errors import ConfigError
from app.schemas.sample import SplitMode
from app.services.evaluator import evaluate_folds, evaluate_run

logger = logging.getLogger(__name__)


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("eval", help="metrics of a checkpoint on its splits")
    parser.add_argument("--split", action="append", help="split to score (repeatable); default: all but train")
    parser.add_argument(
        "--folds",
        help="comma-separated folds; the checkpoint path must contain {fold} and mean±std is reported",
    )
    parser.set_defaults(func=run)
    return parser


def _parse_folds(text: str):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"--folds expects comma-separated integers, got {text!r}") from exc


def run(args: argparse.Namespace, config: RunConfig) -> int:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    if args.folds:
        template = str(config.checkpoint_path)
        if "{fold}" not in template:
            raise ConfigError("multi-fold evaluation needs '{fold}' in the checkpoint path")
        default_split = "s1" if config.mode == SplitMode.INDUCTIVE else "test"
        split_names = args.split or [default_split]
        summaries = {
            name: evaluate_folds(config, template, _parse_folds(args.folds), name) for name in split_names
        }
        text = json.dumps({name: s.model_dump(mode="json") for name, s in summaries.items()})
        (config.output_dir / "metrics_folds.json").write_text(text + "\n", encoding="utf-8")
        logger.info("wrote %s", config.output_dir / "metrics_folds.json")
        emit(text)
        return 0

    report = evaluate_run(config, config.resolved_checkpoint, args.split)
    text = report.model_dump_json()
    (config.output_dir / f"metrics_fold{report.fold}.json").write_text(text + "\n", encoding="utf-8")
    logger.info("wrote %s", config.output_dir / f"metrics_fold{report.fold}.json")
    emit(text)
    return 0
