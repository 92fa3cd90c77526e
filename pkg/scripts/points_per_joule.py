#!/usr/bin/env python3
"""Compute mapping efficiency from user-supplied measurements.

Usage: python scripts/points_per_joule.py --points 500000000 --joules 0.44
"""

import argparse
import sys

from mapforge.blocksim import EnergySample, efficiency_points_per_joule


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, required=True,
                        help="correctly mapped points")
    parser.add_argument("--joules", type=float, required=True,
                        help="measured energy in joules")
    args = parser.parse_args()
    value = efficiency_points_per_joule(EnergySample(args.points, args.joules))
    print(f"{value:.6g} points/joule")
    return 0


if __name__ == "__main__":
    sys.exit(main())
