#!/usr/bin/env python3
"""
Denoising Script
Denoises one image with a learned class prior
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent  # noqa: E402
sys.path.insert(0, str(project_root))  # noqa: E402

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main(["denoise", *sys.argv[1:]]))
