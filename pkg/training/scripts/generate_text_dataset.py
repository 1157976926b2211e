#!/usr/bin/env python3
"""
Synthetic Dataset Script
Writes a text-like image class (train/ and test/ PGM pages) for training and evaluation
"""

import argparse
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent  # noqa: E402
sys.path.insert(0, str(project_root))  # noqa: E402

from loguru import logger  # noqa: E402
from src.data.synthetic import generate_text_dataset  # noqa: E402


def main():
    """Generate the synthetic text dataset"""
    parser = argparse.ArgumentParser(description="Generate a synthetic text-like image dataset")
    parser.add_argument("--output-dir", default="data/text", help="Dataset directory (default: data/text)")
    parser.add_argument("--n-train", type=int, default=20, help="Training pages (default: 20)")
    parser.add_argument("--n-test", type=int, default=5, help="Test pages (default: 5)")
    parser.add_argument("--size", type=int, default=128, help="Page side in pixels (default: 128)")
    parser.add_argument("--seed", type=int, default=0, help="Page seed (default: 0)")
    args = parser.parse_args()

    try:
        generate_text_dataset(args.output_dir, args.n_train, args.n_test, args.size, args.seed)
        return 0
    except Exception as e:
        logger.error(f"Dataset generation failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
