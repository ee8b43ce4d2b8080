"""Write every figure table as <id>.csv into an output directory.

    python3 scripts/reproduce_figures.py [out_dir] [--threads N]
"""
import argparse
import sys
import time

from nearfield_crb.cli import cmd_figure
from nearfield_crb.experiments import FIGURES


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir", nargs="?", default="figures")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--only", choices=FIGURES, action="append", help="restrict to these ids")
    args = parser.parse_args()
    for fig_id in args.only or FIGURES:
        start = time.perf_counter()
        (path,) = cmd_figure(fig_id, args.out_dir, args.threads)
        print(f"{path}  ({time.perf_counter() - start:.1f} s)", file=sys.stderr)


if __name__ == "__main__":
    main()
