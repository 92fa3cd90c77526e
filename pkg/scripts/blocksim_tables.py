#!/usr/bin/env python3
"""Emit the block-level accounting table: bounding-box vs analytical launches
for the four published launch geometries at N = 5x10^8 (or a chosen N).

Usage: python scripts/blocksim_tables.py [--elements N]
"""

import argparse
import sys

from mapforge.blocksim import (
    BlockShape,
    block_stats_csv,
    simulate_analytical,
    simulate_bb,
)
from mapforge.geometry import Domain

GEOMETRIES = [
    (Domain.TRIANGULAR_2D, BlockShape((16, 16))),
    (Domain.PYRAMID_3D, BlockShape((8, 8, 4))),
    (Domain.GASKET_2D, BlockShape((16, 16))),
    (Domain.SIERPINSKI_3D, BlockShape((8, 8, 4))),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--elements", type=int, default=500_000_000)
    args = parser.parse_args()

    rows = []
    for domain, shape in GEOMETRIES:
        rows.append((domain.value, "bounding_box", simulate_bb(domain, args.elements, shape)))
        rows.append((domain.value, "analytical", simulate_analytical(args.elements, shape.threads)))
    sys.stdout.write(block_stats_csv(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
