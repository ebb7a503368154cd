import argparse

from app.cli.output import emit
from app.core.config import RunConfig
from app.data.loaders import write_manifest
from app.schemas.report import SplitSummary
from app.services.dataset import load_dataset, prepare_splits


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("split", help="write the split manifest for a seed and fold")
    parser.set_defaults(func=run)
    return parser


def run(args: argparse.Namespace, config: RunConfig) -> int:
    dataset = load_dataset(config)
    splits = prepare_splits(dataset, config.split_spec)
    manifest = config.output_dir / f"split_{config.mode.value}_seed{config.seed}_fold{config.fold}.csv"
    write_manifest(splits.parts, dataset.vocab, manifest)
    dataset.vocab.save(config.output_dir / "types.json")

    summary = SplitSummary(
        mode=config.mode.value,
        seed=config.seed,
        fold=config.fold,
        manifest=str(manifest),
        counts={name: len(part) for name, part in splits.parts.items()},
        new_drugs=len(splits.inductive.new_drugs) if splits.inductive else None,
        old_drugs=len(splits.inductive.old_drugs) if splits.inductive else None,
    )
    emit(summary.model_dump_json())
    return 0
