"""Run the acceptance suite and print its PASS/FAIL summary."""
import sys
from pathlib import Path

import pytest

if __name__ == "__main__":
    suite = Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    sys.exit(pytest.main(["-q", str(suite), *sys.argv[1:]]))
