#!/usr/bin/env python3
"""Lozenge density map of the size-3N hexagon (solid/rough/smooth phases).

Usage: python3 scripts/phase_map.py [alpha1 alpha2] [N] [out.csv]
"""
import sys
from pathlib import Path

from hexmvop import factorize, from_alphas, mvop, tiling

a1 = float(sys.argv[1]) if len(sys.argv) > 2 else 0.3
a2 = float(sys.argv[2]) if len(sys.argv) > 2 else 0.3
N = int(sys.argv[3]) if len(sys.argv) > 3 else 8
out = Path(sys.argv[4]) if len(sys.argv) > 4 else Path(f"out/phase_map_N{N}.csv")
out.parent.mkdir(parents=True, exist_ok=True)

fact = factorize(from_alphas(a1, a2))
kern = tiling.TilingKernel.build(fact, mvop.solve_mvop(fact, N))
rows = kern.density_map()
with open(out, "w") as fh:
    fh.write("col,row,lozenge_type,probability\n")
    for (m, n, occ, blue, red, yellow) in rows:
        for t, v in ((0, occ), (1, blue), (2, red), (3, yellow)):
            fh.write(f"{m},{n},{t},{v:.17g}\n")
print(f"wrote {4 * len(rows)} rows to {out}")
