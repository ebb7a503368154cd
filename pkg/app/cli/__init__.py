"""
Command-line driver: ``train``, ``eval``, ``predict``, ``explain``, ``split``.

Machine-readable results go to standard output (and files under the output
directory); logs and the progress bar go to standard error. Any expected
failure is reported as a single JSON line on standard error with a nonzero
exit status.
"""
import argparse
from typing import Any, Dict, List, Optional

from app.cli.commands import evaluate, explain, predict, split, train
from app.cli.output import report_error
from app.core.config import RunConfig, load_run_config
from app.core.errors import DataError, MsanError
from app.core.logging import configure_logging


COMMANDS = (train, evaluate, predict, explain, split)


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file (dotted keys for nested sections)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--fold", type=int)
    parser.add_argument("--backbone", choices=["gcn", "gat", "gin"])
    parser.add_argument("--variant", choices=["full", "no_se_si", "no_sd"])
    parser.add_argument("--inductive", action="store_true", help="inductive (unseen drug) setting")
    parser.add_argument("--no-augment", action="store_true", help="disable substructure dropping")
    parser.add_argument("--top-k", type=int)
    parser.add_argument("--drugs", help="drugs CSV (drug_id,smiles)")
    parser.add_argument("--pairs", help="pairs CSV (drug1_id,drug2_id,ddi_type)")
    parser.add_argument("--checkpoint", help="checkpoint path")
    parser.add_argument("--output-dir")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--log-level")


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Flag values as dotted config keys; flags left unset are None and ignored."""
    return {
        "seed": args.seed,
        "fold": args.fold,
        "gnn.backbone": args.backbone,
        "variant": args.variant,
        "mode": "inductive" if args.inductive else None,
        "train.augment": False if args.no_augment else None,
        "top_k": args.top_k,
        "drugs_path": args.drugs,
        "pairs_path": args.pairs,
        "checkpoint_path": args.checkpoint,
        "output_dir": args.output_dir,
        "workers": args.workers,
        "log_level": args.log_level,
        **getattr(args, "extra_overrides", lambda a: {})(args),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msan", description="Substructure-attention drug-drug interaction model")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        add_common_arguments(command.register(subparsers))
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config: RunConfig = load_run_config(args.config, overrides_from_args(args))
        configure_logging(config.log_level)
        return args.func(args, config) or 0
    except MsanError as exc:
        return report_error(exc)
    except OSError as exc:
        return report_error(DataError(str(exc)))
