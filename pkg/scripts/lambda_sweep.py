"""Energy and sup norm of the certified minimizer across lambda in (0, Lambda0].

Usage: python3 scripts/lambda_sweep.py configs/sweep_1d.ini
Thin wrapper over the CLI ``sweep`` subcommand; the CSV lands in the config's output_dir.
"""
import sys

from concave_convex.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep", *sys.argv[1:]]))
