"""Run configs with two worker counts and compare the report bytes.

    python3 scripts/determinism.py [--workers A B] [name ...]
"""

import argparse
import sys
import tempfile
from pathlib import Path

from ladderlab.cli import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", default=["sinai_stable", "arcsine_cauchy", "exponents_poisson"])
    ap.add_argument("--workers", type=int, nargs=2, default=(1, 2))
    args = ap.parse_args(argv)
    bad = 0
    with tempfile.TemporaryDirectory() as tmp:
        for name in args.names:
            dirs = [Path(tmp) / f"{name}-{w}" for w in args.workers]
            for w, d in zip(args.workers, dirs):
                run(CONFIGS / f"{name}.ini", workers=w, out_dir=d)
            files = sorted(p.name for p in dirs[0].iterdir())
            same = all((dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes() for f in files)
            bad += not same
            print(f"{'identical' if same else 'DIFFER':<10} {name}: {', '.join(files)}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
