"""The cubic spectral curve P(z, lambda) = (lambda-z-1)^3 - 27(1+beta) lambda z.

Branches are ordered by decreasing |lambda| (strict off the real axis, a
Harnack-curve property), with boundary-value variants on the cuts and a
path continuation used by the surface module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchPointProximity, DegenerateModel, StepTooLarge
from .model import PeriodicWeightModel, validate

OMEGA = np.exp(2j * np.pi / 3)

SIGMA_12 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
SIGMA_23 = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=float)


@dataclass(frozen=True)
class SpectralCurve:
    beta: float
    z_min: float
    z_max: float
    c_lambda: float
    omega: complex = OMEGA

    def P(self, z, lam):
        """Curve polynomial P(z, lambda)."""
        return (lam - z - 1.0) ** 3 - 27.0 * (1.0 + self.beta) * lam * z

    def P_lam(self, z, lam):
        """dP/dlambda, the denominator of the holomorphic differential."""
        return 3.0 * (lam - z - 1.0) ** 2 - 27.0 * (1.0 + self.beta) * z

    @property
    def lam_at_bmin(self) -> float:
        b = self.beta
        return -1.0 - b + np.sqrt(b * (1.0 + b))

    @property
    def lam_at_bmax(self) -> float:
        b = self.beta
        return -1.0 - b - np.sqrt(b * (1.0 + b))


@dataclass(frozen=True)
class EigenTriple:
    z: complex
    lam1: complex
    lam2: complex
    lam3: complex

    @property
    def as_array(self):
        return np.array([self.lam1, self.lam2, self.lam3])


def compute_beta(model: PeriodicWeightModel, margin: float = 1e-8) -> SpectralCurve:
    """Curve parameters from the weight grids.

    beta = (A+B+C)^3 / (27 ABC) - 1 with
    A = a11 a12 b21 b22, B = a11 a23 b12 b21, C = a22 a23 b11 b12.
    """
    rep = validate(model)
    if not rep.passed:
        raise ValueError(f"model fails constraints: {rep.failed_constraints()}")
    a, b = model.a, model.b
    A = a[0, 0] * a[0, 1] * b[1, 0] * b[1, 1]
    B = a[0, 0] * a[1, 2] * b[0, 1] * b[1, 0]
    C = a[1, 1] * a[1, 2] * b[0, 0] * b[0, 1]
    beta = (A + B + C) ** 3 / (27.0 * A * B * C) - 1.0
    if beta <= margin:
        raise DegenerateModel(f"beta = {beta:.3e} <= margin; genus drops to zero")
    s = np.sqrt(beta * (1.0 + beta))
    z_max = 1.0 + 2.0 * beta + 2.0 * s
    # z_min = 1 + 2 beta - 2 s cancels catastrophically at large beta;
    # the product relation z_min z_max = 1 is exact and stable
    return SpectralCurve(
        beta=beta,
        z_min=1.0 / z_max,
        z_max=z_max,
        c_lambda=3.0 * (1.0 + beta) ** (1.0 / 3.0),
    )


def _cubic_roots(beta: float, z):
    """All three lambda-roots at each z (vectorized Cardano + Newton polish).

    Solved in the shifted variable m = lambda - z - 1, which avoids the
    catastrophic cancellation near the triple points 0 and infinity:
    m^3 + p m + q = 0 with p = -27(1+beta) z, q = -27(1+beta) z (z+1).
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    c = 27.0 * (1.0 + beta)
    p = -c * z
    q = -c * z * (z + 1.0)
    half_q = q / 2.0
    disc = half_q ** 2 + (p / 3.0) ** 3
    s = np.sqrt(disc)
    t1 = -half_q + s
    t2 = -half_q - s
    u3 = np.where(np.abs(t1) >= np.abs(t2), t1, t2)
    u = u3 ** (1.0 / 3.0)
    roots = np.empty(z.shape + (3,), dtype=complex)
    for k in range(3):
        uk = u * OMEGA ** k
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.where(np.abs(uk) > 1e-300, uk - p / (3.0 * uk), 0.0)
        roots[..., k] = m
    # Newton polish in m (three steps reach machine accuracy)
    for _ in range(3):
        m = roots
        f = m ** 3 + p[..., None] * m + q[..., None]
        df = 3.0 * m ** 2 + p[..., None]
        step = np.where(np.abs(df) > 1e-300, f / df, 0.0)
        roots = m - step
    lam = roots + (z + 1.0)[..., None]
    return lam[0] if scalar else lam


_OMK = (1.0 + 0j, OMEGA, OMEGA ** 2)


def _roots3_scalar(beta: float, z: complex):
    """All three roots at a scalar z, pure-python Cardano (fast path)."""
    import cmath
    c = 27.0 * (1.0 + beta)
    p = -c * z
    q = -c * z * (z + 1.0)
    hq = q / 2.0
    s = cmath.sqrt(hq * hq + (p / 3.0) ** 3)
    t1, t2 = -hq + s, -hq - s
    u3 = t1 if abs(t1) >= abs(t2) else t2
    u = u3 ** (1.0 / 3.0)
    roots = []
    for k in range(3):
        uk = u * _OMK[k]
        m = uk - p / (3.0 * uk) if abs(uk) > 1e-300 else 0j
        for _ in range(3):
            f = m * m * m + p * m + q
            df = 3.0 * m * m + p
            if abs(df) < 1e-300:
                break
            m -= f / df
        roots.append(m + z + 1.0)
    return roots


def eigenvalues_ordered(curve: SpectralCurve, z: complex,
                        on_cut: bool = False) -> EigenTriple:
    """Roots of P(z, .) sorted by decreasing |lambda|.

    For real z inside [z_min, z_max] the three roots are real and the sort
    uses decreasing real part to break |.|-collisions.  On the cuts the
    moduli tie exactly (conjugate pairs) and BranchPointProximity is raised
    unless on_cut=True; use boundary_eigenvalues for one-sided values.
    """
    lam = _cubic_roots(curve.beta, complex(z))
    order = np.lexsort((-lam.real, -np.abs(lam)))
    lam = lam[order]
    if not on_cut:
        mags = np.abs(lam)
        for i in range(2):
            gap = abs(mags[i] - mags[i + 1])
            if gap <= 1e-10 * max(mags[i], 1e-300) and abs(lam[i] - lam[i + 1]) > 1e3 * gap:
                raise BranchPointProximity(
                    f"|lambda_{i + 1}| = |lambda_{i + 2}| at z = {z}; "
                    "use boundary_eigenvalues with a side")
    return EigenTriple(z=complex(z), lam1=lam[0], lam2=lam[1], lam3=lam[2])


def _polish(curve: SpectralCurve, z: complex, lam: complex) -> complex:
    for _ in range(50):
        m = lam - z - 1.0
        f = m ** 3 - 27.0 * (1.0 + curve.beta) * lam * z
        df = 3.0 * m ** 2 - 27.0 * (1.0 + curve.beta) * z
        if abs(df) < 1e-300:
            break
        d = f / df
        lam = lam - d
        if abs(d) <= 1e-15 * (1.0 + abs(lam)):
            break
    return lam


def boundary_eigenvalues(curve: SpectralCurve, x: float, side: str) -> EigenTriple:
    """One-sided limits of the ordered branches on the real line.

    side='plus' takes the limit from Im z > 0, side='minus' from below.
    The triple satisfies the sheet-swap relations: sigma_12 across
    (-inf, 0], sigma_23 across [0, z_min] and [z_max, inf), identity on
    [z_min, z_max].
    """
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    x = float(x)
    if x in (0.0, curve.z_min, curve.z_max):
        raise BranchPointProximity(f"x = {x} is a branch point")
    eps = 1e-9 * (1.0 + abs(x))
    zoff = x + (1j * eps if side == "plus" else -1j * eps)
    trip = eigenvalues_ordered(curve, zoff, on_cut=True)
    lam = [_polish(curve, x, t) for t in trip.as_array]
    return EigenTriple(z=x, lam1=lam[0], lam2=lam[1], lam3=lam[2])


def continue_branch(curve: SpectralCurve, path, lam_start: complex,
                    max_refine: int = 16):
    """Continue a root of P(z, .) along a path of z values.

    Each step Newton-tracks the root from the previous value, bisecting the
    step whenever another root competes.  Returns the list of root values at
    the path points.  Raises StepTooLarge if refinement hits its depth limit.
    """
    path = [complex(p) for p in path]
    lam = _polish(curve, path[0], complex(lam_start))
    if abs(curve.P(path[0], lam)) > 1e-8 * (1.0 + abs(path[0])) ** 3:
        raise ValueError("lam_start is not a root at path[0]")
    out = [lam]
    for z0, z1 in zip(path[:-1], path[1:]):
        lam = _track_step(curve, z0, z1, lam, max_refine)
        out.append(lam)
    return out


def _track_step(curve: SpectralCurve, z0: complex, z1: complex,
                lam: complex, max_refine: int) -> complex:
    stack = [(z0, z1)]
    depth = 0
    while stack:
        a, b = stack.pop()
        cand = _polish(curve, b, lam)
        others = _cubic_roots(curve.beta, b)
        others = others[np.argsort(np.abs(others - cand))]
        sep = abs(others[1] - cand)
        moved = abs(cand - lam)
        if moved <= 0.45 * sep + 1e-14 * (1.0 + abs(cand)):
            lam = cand
            continue
        depth += 1
        if depth > max_refine * 64:
            raise StepTooLarge(f"continuation ambiguous near z = {b}")
        mid = (a + b) / 2.0
        stack.append((mid, b))
        stack.append((a, mid))
    return lam


def eigentriple_grid(curve: SpectralCurve, zs):
    """Ordered triples on an array of z values (no tie checks); shape (n, 3)."""
    lam = _cubic_roots(curve.beta, np.asarray(zs, dtype=complex))
    order = np.lexsort((-lam.real, -np.abs(lam)), axis=-1)
    return np.take_along_axis(lam, order, axis=-1)
