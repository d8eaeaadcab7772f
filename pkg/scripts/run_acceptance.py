"""Run the acceptance criteria outside pytest and print one line per criterion.

    python scripts/run_acceptance.py            # all eight
    python scripts/run_acceptance.py 2 5        # a subset
"""

from __future__ import annotations

import argparse
import importlib.util
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent / "tests"))


def load_suite():
    path = HERE.parent / "tests" / "test_acceptance.py"
    spec = importlib.util.spec_from_file_location("acceptance", path)
    mod = importlib.util.module_from_spec(spec)
    sys.modules[spec.name] = mod
    spec.loader.exec_module(mod)
    return mod


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("numbers", nargs="*", type=int, help="criteria to run (default: all)")
    args = ap.parse_args()
    suite = load_suite()
    numbers = args.numbers or [c[0] for c in suite.CRITERIA]
    ok = True
    for n in numbers:
        out = suite.evaluate(n)
        print(out.line(), flush=True)
        ok &= out.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
