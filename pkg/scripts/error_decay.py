#!/usr/bin/env python3
"""Strong-asymptotics error decay over N at a few sample points.

Usage: python3 scripts/error_decay.py [alpha1 alpha2]
"""
import sys

import numpy as np

from hexmvop import (compute_beta, equilibrium, eigensystem, factorize,
                     from_alphas, gfun, mvop, parametrix, surface)

a1, a2 = (float(sys.argv[1]), float(sys.argv[2])) if len(sys.argv) > 2 else (0.2, 2.0)

model = from_alphas(a1, a2)
fact = factorize(model)
curve = compute_beta(model)
chart = surface.compute_periods(curve, fact)
eq = equilibrium.build_context(chart)
gf = gfun.build_context(chart, eq, fact)
special = eigensystem.locate_oval_zeros(fact, curve)
pps = {p: parametrix.build_M(chart, fact, curve, special, p)
       for p in ("even", "odd")}

print(f"alphas=({a1}, {a2})  beta={curve.beta:.6f}  tau={chart.tau.imag:.6f}i")
print(f"{'N':>4} {'z=2':>12} {'z=0.3':>12} {'z=3i':>12}")
for N in (4, 6, 8, 10, 12, 14, 16):
    sol = mvop.solve_mvop(fact, N)
    errs = [mvop.asymptotic_error(sol, gf, pps, z) for z in (2.0, 0.3, 3j)]
    print(f"{N:>4} " + " ".join(f"{e:12.3e}" for e in errs))
