#!/usr/bin/env python3
"""Run the acceptance suite with live per-criterion PASS/FAIL lines."""
import pathlib
import subprocess
import sys


def main() -> int:
    root = pathlib.Path(__file__).resolve().parents[1]
    return subprocess.call(
        [sys.executable, "-m", "pytest",
         str(root / "tests" / "test_acceptance.py"), "-v", "-s"],
        cwd=str(root),
    )


if __name__ == "__main__":
    sys.exit(main())
