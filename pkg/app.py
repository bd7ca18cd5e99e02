#!/usr/bin/env python3
"""
Subordination Lab Entry Point

Runs one experiment command, e.g. `python3 app.py retrieve-demo --seed 7`.
"""

import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from subordination_lab.core.cli import main as cli_main


def main():
    """Main application entry point"""
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == '__main__':
    main()
