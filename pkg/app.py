"""Qubit Zeno dynamics - command-line entry point."""

import sys

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

from src.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())
