#!/usr/bin/env python3
"""
Launcher for the Quasigroup Prolongation command line tool
"""

import os
import sys
import importlib.util

# Set the directory to the root of the project
project_root = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, project_root)

REQUIRED_PACKAGES = ("numpy", "appdirs", "tqdm")

missing = [name for name in REQUIRED_PACKAGES if importlib.util.find_spec(name) is None]
if missing:
    print(f"Missing packages: {', '.join(missing)}", file=sys.stderr)
    print("Install them with: pip install -r requirements.txt", file=sys.stderr)
    sys.exit(2)

from quasigroup_prolong.main import main

if __name__ == "__main__":
    sys.exit(main())
