"""Run the acceptance suite and print one verdict line per criterion."""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    cmd = [sys.executable, "-m", "pytest", str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]
    sys.exit(subprocess.call(cmd + sys.argv[1:], cwd=ROOT))
