"""Quadrature helpers: cached Gauss-Legendre rules and panel schemes.

All integrands in this package are analytic except for isolated logarithmic
or inverse-square-root endpoint singularities, so composite Gauss-Legendre
with dyadic refinement toward the singular points gives near machine
accuracy at modest cost.
"""
from __future__ import annotations

import functools

import numpy as np


@functools.lru_cache(maxsize=32)
def gauss_legendre(n: int):
    """Nodes and weights on [-1, 1], cached."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gl_nodes(a: float, b: float, n: int):
    """Gauss-Legendre nodes/weights mapped to [a, b]."""
    x, w = gauss_legendre(n)
    half = (b - a) / 2.0
    return a + half * (x + 1.0), w * half


def panels_toward(a: float, b: float, sticky, depth: int = 44, nper: int = 16):
    """Composite GL nodes on [a, b], dyadically refined toward sticky points.

    ``sticky`` is an iterable of points (inside or at the ends of [a, b])
    where the integrand has an integrable singularity or a near-singularity;
    an entry may also be a (point, depth) pair for a per-point depth.
    Panels halve geometrically toward each sticky point down to ``depth``
    levels, which resolves log-type singularities to ~1e-14.

    Returns (nodes, weights) as float arrays.
    """
    pairs = []
    for s in sticky:
        if isinstance(s, tuple):
            pairs.append(s)
        else:
            pairs.append((float(s), depth))
    pairs = sorted((s, d) for s, d in pairs if a - 1e-12 <= s <= b + 1e-12)
    cuts = {a, b}
    for s, dep in pairs:
        for side in (-1.0, 1.0):
            h = (b - a) / 2.0
            for _ in range(dep):
                p = s + side * h
                if a < p < b:
                    cuts.add(p)
                h /= 2.0
        if a < s < b:
            cuts.add(s)
    edges = np.array(sorted(cuts))
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo < 1e-300:
            continue
        x, w = gl_nodes(lo, hi, nper)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def integrate_gl(f, a: float, b: float, n: int = 256):
    """Plain Gauss-Legendre integral of a callable on [a, b]."""
    x, w = gl_nodes(a, b, n)
    return np.sum(w * f(x))
