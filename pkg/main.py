"""
Main entry point for the psfft-bench command-line tool.
This module hands the command line to the CLI view and exits with its code.
"""

import sys

from src.views.cli_view import main as cli_main

__version__ = "0.3.0"


def main() -> int:
    """Main entry point for the application."""
    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
