#!/usr/bin/env python3
"""Correlator throughput for the reference configuration (n=4003, x4)."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ppadas import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4003)
    ap.add_argument("--oversampling", type=int, default=4)
    ap.add_argument("--periods", type=int, default=187)
    args = ap.parse_args()
    return cli.main(
        [
            "bench",
            "--n", str(args.n),
            "--oversampling", str(args.oversampling),
            "--periods", str(args.periods),
        ]
    )


if __name__ == "__main__":
    raise SystemExit(main())
