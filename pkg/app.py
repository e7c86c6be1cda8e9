"""
app.py

Command-line entry point for the exact Kepler integrator.
Entry point: python app.py {propagate,compare,selfcheck} ...
"""

import sys

from ui.cli import main
from src.utils import setup_logger

logger = setup_logger(__name__)


if __name__ == "__main__":
    sys.exit(main())
