"""Eigenvector matrix E(z), its inverse, det E, and the oval special points.

Columns of E are the adjugate vectors

    e(z; lam) = ( w13 (lam-z-1) + w12 w23,
                  w23 (lam-z-1) + w13 w21 z,
                  (lam-z-1)^2  - w12 w21 z )

evaluated at the ordered branches.  det E factors through the curve
discriminant and vanishes at 0, z_min, z_max and the interior point
z* = w12 w23^2 / (w13^2 w21), where all three components share a common
zero Q* = (z*, lambda*) on the bounded oval.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RootNotBracketed, SingularFrame
from .model import WeightFactorization
from .spectral import (EigenTriple, SpectralCurve, boundary_eigenvalues,
                       eigenvalues_ordered)


@dataclass(frozen=True)
class EigenvectorFrame:
    z: complex
    E: np.ndarray
    Einv: np.ndarray
    detE: complex
    triple: EigenTriple


@dataclass(frozen=True)
class SpecialPoints:
    z_star: float
    lambda_star: float
    q_star: tuple
    q_j_star: list  # three (z, lambda, sheet) triples


def evec(fact: WeightFactorization, z, lam):
    """The column vector e(z; lam); broadcasts over arrays."""
    m = lam - z - 1.0
    return np.stack([
        fact.w13 * m + fact.w12 * fact.w23,
        fact.w23 * m + fact.w13 * fact.w21 * z,
        m * m - fact.w12 * fact.w21 * z,
    ], axis=-1)


def z_star(fact: WeightFactorization) -> float:
    return fact.w12 * fact.w23 ** 2 / (fact.w13 ** 2 * fact.w21)


def lambda_star(fact: WeightFactorization) -> float:
    return z_star(fact) + 1.0 - fact.w12 * fact.w23 / fact.w13


def det_E_closed(fact: WeightFactorization, trip: EigenTriple) -> complex:
    """Closed form (w12 w23^2 - w13^2 w21 z) * prod of eigenvalue differences."""
    l1, l2, l3 = trip.lam1, trip.lam2, trip.lam3
    pref = fact.w12 * fact.w23 ** 2 - fact.w13 ** 2 * fact.w21 * trip.z
    return pref * (l2 - l1) * (l3 - l1) * (l3 - l2)


def frame_from_triple(fact: WeightFactorization, trip: EigenTriple,
                      singular_tol: float = 1e-13) -> EigenvectorFrame:
    z = trip.z
    E = np.stack([evec(fact, z, lam) for lam in trip.as_array], axis=-1)
    detE = np.linalg.det(E)
    scale = np.max(np.abs(E)) ** 3 + 1e-300
    if abs(detE) < singular_tol * scale:
        raise SingularFrame(f"E(z) singular at z = {z}")
    Einv = np.linalg.inv(E)
    return EigenvectorFrame(z=z, E=E, Einv=Einv, detE=detE, triple=trip)


def eigenvector_matrix(fact: WeightFactorization, curve: SpectralCurve, z,
                       side: str | None = None) -> EigenvectorFrame:
    """E(z), E(z)^{-1} and det E at z; real z requires a declared side."""
    z = complex(z)
    if z.imag == 0.0 and side is not None:
        trip = boundary_eigenvalues(curve, z.real, side)
    elif z.imag == 0.0:
        trip = eigenvalues_ordered(curve, z)  # raises on the cuts
    else:
        trip = eigenvalues_ordered(curve, z)
    return frame_from_triple(fact, trip)


def dual_row_functions(frame: EigenvectorFrame, j: int, k: int) -> complex:
    """The dual value at (sheet j, column k): entry (j, k) of E^{-1}."""
    return frame.Einv[j - 1, k - 1]


def _real_curve_roots(curve: SpectralCurve, poly_coeffs):
    """Real roots of a small polynomial inside (z_min, z_max)."""
    roots = np.roots(poly_coeffs)
    out = []
    for r in roots:
        if abs(r.imag) < 1e-8 * (1 + abs(r)) and curve.z_min - 1e-12 <= r.real <= curve.z_max + 1e-12:
            out.append(float(r.real))
    return out


def locate_oval_zeros(fact: WeightFactorization,
                      curve: SpectralCurve) -> SpecialPoints:
    """Q* from the closed forms and the second zeros Q_j* of e_1, e_2, e_3.

    Each Q_j* is found by eliminating lambda between e_j = 0 and the curve
    equation, keeping the real root in [z_min, z_max] distinct from z*.
    The sheet (2 or 3) is decided by matching lambda against the ordered
    boundary triple at the root.
    """
    zs = z_star(fact)
    ls = lambda_star(fact)
    if not (curve.z_min - 1e-9 <= zs <= curve.z_max + 1e-9):
        raise RootNotBracketed(f"z* = {zs} outside [z_min, z_max]")
    c = 27.0 * (1.0 + curve.beta)
    out = []

    # e_1 = 0: lam = z + 1 - c1, c1 = w12 w23 / w13; substitution gives
    # c z^2 + c(1 - c1) z + c1^3 = 0 with roots z*, z_1*
    c1 = fact.w12 * fact.w23 / fact.w13
    roots = _real_curve_roots(curve, [c, c * (1.0 - c1), c1 ** 3])
    z1 = _other_root(roots, zs)
    out.append((z1, z1 + 1.0 - c1))

    # e_2 = 0: lam = z + 1 - c2 z, c2 = w13 w21 / w23; substitution gives
    # c2^3 z^2 + c(1 - c2) z + c = 0
    c2 = fact.w13 * fact.w21 / fact.w23
    roots = _real_curve_roots(curve, [c2 ** 3, c * (1.0 - c2), c])
    z2 = _other_root(roots, zs)
    out.append((z2, z2 + 1.0 - c2 * z2))

    # e_3 = 0: (lam-z-1)^2 = w12 w21 z, lam = z + 1 - s*sqrt(w12 w21 z);
    # in t = sqrt(z): -s^3 w^{3/2} t^3 = c (t^2 + 1 - s w^{1/2} t) t^0 ...
    # eliminate directly: (lam-z-1)^3 = -s^3 (w12 w21)^{3/2} z^{3/2} = c lam z
    w = fact.w12 * fact.w21
    cands = []
    for s in (+1.0, -1.0):
        # -s^3 w^{3/2} t = c (t^2 + 1 - s w^{1/2} t) / t * t ... with z = t^2:
        # c t^2 - s (w^{3/2} - c w^{1/2}) t + c = 0
        coeffs = [c, s * (w ** 1.5 - c * np.sqrt(w)), c]
        for t in np.roots(coeffs):
            if abs(t.imag) < 1e-8 * (1 + abs(t)) and t.real > 0:
                zc = float(t.real ** 2)
                lamc = zc + 1.0 - s * np.sqrt(w * zc)
                if (curve.z_min - 1e-9 <= zc <= curve.z_max + 1e-9
                        and abs(curve.P(zc, lamc)) < 1e-7 * (1 + zc) ** 3):
                    cands.append(zc)
    z3 = _other_root(sorted(set(np.round(cands, 12))), zs)
    lam3 = _match_sign_branch(curve, fact, z3)
    out.append((z3, lam3))

    q_j = []
    for (zj, lamj) in out:
        # a Q_j* may coincide with B_min/B_max (branch point, sheets 2-3
        # meet); classify at a point nudged into the open interval
        margin = 1e-7 * (curve.z_max - curve.z_min)
        xc = float(np.clip(zj, curve.z_min + margin, curve.z_max - margin))
        trip = boundary_eigenvalues(curve, xc, "plus")
        d2, d3 = abs(lamj - trip.lam2), abs(lamj - trip.lam3)
        sheet = 2 if d2 <= d3 else 3
        at_branch = min(abs(zj - curve.z_min), abs(zj - curve.z_max)) < 10 * margin
        if min(d2, d3) > 1e-5 * (1 + abs(lamj)) and not at_branch:
            raise RootNotBracketed(
                f"candidate ({zj}, {lamj}) does not match a negative branch")
        q_j.append((zj, lamj, 2 if at_branch else sheet))
    return SpecialPoints(z_star=zs, lambda_star=ls, q_star=(zs, ls), q_j_star=q_j)


def _other_root(roots, zs):
    roots = [r for r in roots if abs(r - zs) > 1e-7 * (1 + abs(zs))]
    if not roots:
        raise RootNotBracketed("no second real root in [z_min, z_max]")
    return roots[0]


def _match_sign_branch(curve, fact, zc):
    w = fact.w12 * fact.w21
    for s in (+1.0, -1.0):
        lam = zc + 1.0 - s * np.sqrt(w * zc)
        if abs(curve.P(zc, lam)) < 1e-7 * (1 + zc) ** 3 and lam < 0:
            return lam
    raise RootNotBracketed(f"no on-curve branch of e_3 = 0 at z = {zc}")
