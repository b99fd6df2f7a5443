"""Run every config in configs/ (or the ones named) and print a status table.

    python3 scripts/run_all.py [--workers N] [--out DIR] [name ...]
"""

import argparse
import sys
import time
from pathlib import Path

from ladderlab.cli import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
STATUS = {0: "pass", 1: "config error", 2: "fail", 3: "nonconverged"}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="config stems; default all")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="out")
    args = ap.parse_args(argv)
    paths = [CONFIGS / f"{n}.ini" for n in args.names] or sorted(CONFIGS.glob("*.ini"))
    rows = []
    for p in paths:
        t0 = time.perf_counter()
        code = run(p, workers=args.workers, out_dir=args.out)
        rows.append((p.stem, code, time.perf_counter() - t0))
    print()
    for name, code, sec in rows:
        print(f"{name:<22} {STATUS.get(code, code):<13} {sec:7.1f} s")
    return max((code for _, code, _ in rows), default=0)


if __name__ == "__main__":
    sys.exit(main())
