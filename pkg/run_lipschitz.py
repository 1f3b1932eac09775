#!/usr/bin/env python3
"""
LIPSCHITZ BOUNDARY TOOLKIT - LAUNCHER
=====================================
Run any toolkit command with logging configured from settings
"""

import sys
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.cli.main import main


if __name__ == "__main__":
    main()
