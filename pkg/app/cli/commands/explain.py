import argparse

from app.cli.output import emit
from app.core.config import RunConfig
from app.services.evaluator import load_run
from app.services.explainer import explain_pair


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("explain", help="substructure assignments and top interactions for one pair")
    parser.add_argument("--drug1", required=True)
    parser.add_argument("--drug2", required=True)
    parser.add_argument("--type", dest="ddi_type", required=True)
    parser.set_defaults(func=run)
    return parser


def run(args: argparse.Namespace, config: RunConfig) -> int:
    run_ = load_run(config, config.resolved_checkpoint, with_splits=False)
    explanation = explain_pair(run_, args.drug1, args.drug2, args.ddi_type, config.top_k)
    emit(explanation.model_dump_json())
    return 0
