#!/usr/bin/env python3
"""Sweep det-P_N zeros over N and write one CSV per degree.

Usage: python3 scripts/zero_sweep.py [alpha1 alpha2] [outdir]
"""
import sys
from pathlib import Path

import numpy as np

from hexmvop import from_alphas, factorize, mvop

a1, a2 = (float(sys.argv[1]), float(sys.argv[2])) if len(sys.argv) > 2 else (0.2, 2.0)
out = Path(sys.argv[3]) if len(sys.argv) > 3 else Path("out/zeros")
out.mkdir(parents=True, exist_ok=True)

fact = factorize(from_alphas(a1, a2))
for N in (5, 10, 15, 20):
    sol = mvop.solve_mvop(fact, N)
    zs = mvop.det_and_zeros(sol.P)
    order = np.lexsort((zs.roots.imag, zs.roots.real))
    path = out / f"zeros_N{N}.csv"
    with open(path, "w") as fh:
        fh.write("re,im\n")
        for i in order:
            fh.write(f"{zs.roots[i].real:.17g},{zs.roots[i].imag:.17g}\n")
    r = np.abs(zs.roots)
    print(f"N={N:3d}: {len(zs.roots)} zeros, |z| in [{r.min():.3f}, {r.max():.3f}] -> {path}")
