import argparse

from app.cli.output import emit
from app.core.config import RunConfig
from app.core.errors import ConfigError
from app.data.loaders import load_requests
from app.schemas.sample import SplitMode
from app.services.evaluator import load_run
from app.services.prediction import discover, predict_rows


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("predict", help="interaction probabilities for drug pairs")
    parser.add_argument("--input", help="CSV of drug1_id,drug2_id,ddi_type[,label] to score")
    parser.add_argument("--drug1")
    parser.add_argument("--drug2")
    parser.add_argument("--type", dest="ddi_type")
    parser.add_argument("--discover", type=int, metavar="N", help="rank the test split's sampled negatives, report the top N")
    parser.set_defaults(func=run)
    return parser


def run(args: argparse.Namespace, config: RunConfig) -> int:
    single = (args.drug1, args.drug2, args.ddi_type)
    if args.discover is None and args.input is None and not all(single):
        raise ConfigError("predict needs --input, --drug1/--drug2/--type or --discover N")

    needs_splits = args.discover is not None or config.mode == SplitMode.INDUCTIVE
    run_ = load_run(config, config.resolved_checkpoint, with_splits=needs_splits)
    if args.discover is not None:
        split_name = "s1" if config.mode == SplitMode.INDUCTIVE else "test"
        rows = discover(run_, config, args.discover, split_name)
    elif args.input is not None:
        requests, labels = load_requests(args.input)
        rows = predict_rows(run_, config, requests, labels)
    else:
        rows = predict_rows(run_, config, [single])
    for row in rows:
        emit(row.model_dump_json())
    return 0
