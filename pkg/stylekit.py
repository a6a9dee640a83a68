#!/usr/bin/env python3
"""
Runner script for the stylekit command line.

    python stylekit.py pool --features f.sscf --alignment a.txt -o pooled.sscf
    python stylekit.py pipeline --manifest song.manifest
"""

import os
import sys

# Add the repository root to the Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.app import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
