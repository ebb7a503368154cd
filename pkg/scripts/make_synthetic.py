"""
Write a procedurally generated toy dataset (drugs.csv + pairs.csv).

Usage:
    python scripts/make_synthetic.py data/synthetic
    python scripts/make_synthetic.py data/synthetic --drugs 20 --pairs 200 --types 4 --seed 0
"""
import argparse
import os
import sys

# Add parent directory to path so we can import app modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.data.synthetic import generate_synthetic


def main():
    parser = argparse.ArgumentParser(description="Generate a synthetic drug-drug interaction dataset")
    parser.add_argument("output_dir", help="Directory that receives drugs.csv and pairs.csv")
    parser.add_argument("--drugs", type=int, default=20, help="Number of molecules (default: 20)")
    parser.add_argument("--pairs", type=int, default=200, help="Number of positive pairs (default: 200)")
    parser.add_argument("--types", type=int, default=4, help="Number of DDI types (default: 4)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    dataset = generate_synthetic(args.drugs, args.pairs, args.types, args.seed)
    drugs_path, pairs_path = dataset.write(args.output_dir)
    print(f"Wrote {len(dataset.drugs)} drugs to {drugs_path}")
    print(f"Wrote {len(dataset.pairs)} positive pairs to {pairs_path}")


if __name__ == "__main__":
    main()
