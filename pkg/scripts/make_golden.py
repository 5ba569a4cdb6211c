"""Regenerate tests/golden from the CLI. Review the diff before committing."""

import os
import sys
from pathlib import Path

TESTS = Path(__file__).resolve().parent.parent / "tests"
sys.path.insert(0, str(TESTS))

from cli_cases import CASES  # noqa: E402
from tropica.cli import main  # noqa: E402


def run():
    os.chdir(TESTS)
    for name, argv in CASES:
        code = main(argv + ["--out", f"golden/{name}"])
        print(f"{name}: exit {code}")


if __name__ == "__main__":
    run()
