#!/usr/bin/env python3
"""Run the baseline damped-sine benchmark and write its CSV artifacts.

Equivalent to:  shearbeam simulate --config configs/baseline.cfg
"""

import sys
from pathlib import Path

from shearbeam.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(main(["simulate", "--config", str(ROOT / "configs" / "baseline.cfg"),
                   *sys.argv[1:]]))
