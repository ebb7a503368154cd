"""
Compare the full model with its ablations on a synthetic dataset.

Trains every variant for each seed and prints one JSON object with the
validation accuracy per seed and the mean per variant.

Usage:
    python scripts/run_ablation.py
    python scripts/run_ablation.py --seeds 0 1 2 --epochs 100 --variants full no_se_si
"""
import argparse
import json
import os
import sys
import tempfile

# Add parent directory to path so we can import app modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from app.core.config import load_run_config
from app.core.logging import configure_logging
from app.data.metrics import compute_metrics
from app.data.synthetic import generate_synthetic
from app.services.dataset import RunStreams, load_dataset, prepare_splits
from app.services.predictor import Predictor
from app.services.trainer import train_model


def main():
    parser = argparse.ArgumentParser(description="Ablation run on a synthetic drug-drug interaction dataset")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--variants", nargs="+", default=["full", "no_se_si"], choices=["full", "no_se_si", "no_sd"])
    parser.add_argument("--epochs", type=int, default=100)
    parser.add_argument("--drugs", type=int, default=20)
    parser.add_argument("--pairs", type=int, default=200)
    parser.add_argument("--types", type=int, default=4)
    args = parser.parse_args()

    configure_logging("WARNING")
    with tempfile.TemporaryDirectory() as tmp:
        drugs_path, pairs_path = generate_synthetic(args.drugs, args.pairs, args.types, seed=0).write(tmp)
        results = {variant: {} for variant in args.variants}
        for seed in args.seeds:
            for variant in args.variants:
                config = load_run_config(overrides={
                    "drugs_path": str(drugs_path),
                    "pairs_path": str(pairs_path),
                    "seed": seed,
                    "variant": variant,
                    "patterns": 10,
                    "gnn.dim": 32,
                    "train.epochs": args.epochs,
                    "train.batch_size": 32,
                })
                dataset = load_dataset(config)
                streams = RunStreams.from_seed(config.seed, config.fold)
                splits = prepare_splits(dataset, config.split_spec, streams)
                result = train_model(config, dataset, splits, streams, progress=False)
                scores = Predictor(result.params, dataset.graphs).score_samples(splits.valid)
                report = compute_metrics(scores, [s.label for s in splits.valid])
                results[variant][str(seed)] = report.acc
                print(f"seed {seed} {variant}: valid acc {report.acc:.4f}", file=sys.stderr)

    summary = {
        variant: {"per_seed": accs, "mean": float(np.mean(list(accs.values())))}
        for variant, accs in results.items()
    }
    print(json.dumps(summary))


if __name__ == "__main__":
    main()
