#!/usr/bin/env python3
"""
Prior Training Script
Learns the class-adapted GG mixture prior from a clean image dataset
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent  # noqa: E402
sys.path.insert(0, str(project_root))  # noqa: E402

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main(["train", *sys.argv[1:]]))
