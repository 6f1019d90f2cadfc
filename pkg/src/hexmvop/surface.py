"""Numerical genus-1 surface: periods, tau, and the Abel map.

Homology conventions follow the curve's real structure: the a-cycle is the
unbounded oval (positive real axis on sheet 1, negative real axis on sheet
3, through the triple points), the b-cycle is the union of the unit circles
on sheets 1 and 2 traversed counterclockwise.  The holomorphic differential
is c_omega * dz / P_lam(z, lambda); its normalization constant is fixed by
a unit period over the bounded oval (homologous to a), with the sign pinned
so that the segment of the a-cycle from P1 = (-1, 0) to P0 = (0, 1) along
sheet 3 carries Abel increment +1/3.  That convention reproduces

    A(P_inf) = 1/6,  A(P1) = 1/2,  A(P0) = 5/6,  A(B0) = 0   (mod L)

and makes tau purely imaginary with Im tau > 0.

The Abel map integrates the differential along piecewise-straight z-plane
paths with the eigenvalue branch continued numerically; every sheet has an
anchor reachable without cut crossings (z = 1 for sheets 1 and 2 through
the gap (z_min, z_max); z = -1 for sheet 3 through (-inf, 0)), so no
half-period bookkeeping is needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ._quad import gl_nodes, panels_toward
from .elliptic import ThetaParams
from .errors import DomainViolation, PathCrossesBranchPoint, PeriodInconsistency
from .model import WeightFactorization
from .spectral import (SpectralCurve, _polish, _roots3_scalar,
                       boundary_eigenvalues, eigenvalues_ordered)

_WAYPOINT_H = 0.65
_OMK3 = (1.0 + 0j, np.exp(2j * np.pi / 3), np.exp(-2j * np.pi / 3))


@dataclass
class _ArcTable:
    """Cumulative Abel integral along one arc of a cycle (Hermite splines)."""

    sheet: int
    th0: float
    th1: float
    re: CubicHermiteSpline
    im: CubicHermiteSpline
    total: complex

    def cum(self, th):
        return self.re(th) + 1j * self.im(th)


@dataclass
class SurfaceChart:
    curve: SpectralCurve
    fact: WeightFactorization
    tau: complex
    c_omega: complex
    theta: ThetaParams
    b_arcs: list            # four arcs in b-cycle traversal order
    b_offsets: np.ndarray   # cumulative offsets (complex) at arc starts
    g3_arcs: list           # two arcs of Gamma_3 starting at P1 (theta = pi)
    anchors: dict           # sheet -> (z, lam, abel value)
    abel_special: dict      # P0, P1, Pinf, B0 -> computed values (mod L)
    b_re_residual: float
    g3_re_residual: float

    @property
    def t0(self) -> float:
        return self.tau.imag

    # -- lattice reduction -------------------------------------------------
    def reduce_mod(self, u: complex) -> complex:
        x = u.real % 1.0
        y = u.imag % self.t0
        if x > 1.0 - 1e-14:
            x = 0.0
        if y > self.t0 * (1.0 - 1e-14):
            y = 0.0
        return complex(x, y)

    # -- b-cycle tables ----------------------------------------------------
    def _arc_for(self, sheet: int, theta: float):
        theta = float(theta) % (2 * np.pi)
        upper = theta < np.pi
        for k, arc in enumerate(self.b_arcs):
            if arc.sheet == sheet and (arc.th0 < np.pi) == upper:
                return k, arc
        raise ValueError(f"no b-cycle arc for sheet {sheet}")

    def abel_on_b(self, sheet: int, theta: float) -> complex:
        """Abel value of the point of Gamma_sheet (sheet 1 or 2) over e^{i theta}."""
        if sheet not in (1, 2):
            raise ValueError("b-cycle carries sheets 1 and 2 only")
        k, arc = self._arc_for(sheet, theta)
        th = float(theta) % (2 * np.pi)
        base = self.anchors[1][2]
        return self.reduce_mod(base + self.c_omega * (self.b_offsets[k] + arc.cum(th)))

    def torus_coordinate_on_b(self, theta: float, sheet: int) -> float:
        """Vertical torus coordinate y in [0, t0) over e^{i theta} on sheet 1|2."""
        k, arc = self._arc_for(sheet, theta)
        th = float(theta) % (2 * np.pi)
        y = (self.c_omega * (self.b_offsets[k] + arc.cum(th))).imag
        return float(y % self.t0)

    def dy_dtheta_on_b(self, theta, sheet: int):
        """d/dtheta of the vertical coordinate, exact from the integrand."""
        theta = np.asarray(theta, dtype=float)
        z = np.exp(1j * theta)
        zoff = np.where(np.abs(np.sin(theta)) < 1e-12, z + 1e-12j, z)
        from .spectral import eigentriple_grid
        lam = eigentriple_grid(self.curve, zoff)[..., sheet - 1]
        val = self.c_omega * 1j * z / self.curve.P_lam(z, lam)
        return val.imag

    def abel_on_gamma3(self, theta: float) -> complex:
        """Abel value of the point of Gamma_3 over e^{i theta}."""
        th = (float(theta) - np.pi) % (2 * np.pi) + np.pi   # in [pi, 3pi)
        if th < 2 * np.pi:
            arc = self.g3_arcs[0]
            val = arc.cum(th)
        else:
            arc = self.g3_arcs[1]
            val = self.g3_arcs[0].total + arc.cum(th - 2 * np.pi)
        return self.reduce_mod(0.5 + self.c_omega * val)

    # -- general Abel map ----------------------------------------------------
    def abel_map(self, point, side: str | None = None) -> complex:
        """Abel map of a surface point, reduced to [0,1) x [0, t0).

        ``point`` is (z, sheet) with sheet in 1..3, or (z, lam) with lam a
        root of P(z, .).  Real z on a cut of the target sheet needs ``side``
        ('plus'/'minus'); oval points (real z in (z_min, z_max) with negative
        real lam) are routed along the bounded oval.
        """
        z, lam, sheet = self._resolve_point(point, side)
        curve = self.curve
        tol_oval = 1e-9 * (1.0 + curve.z_max)
        if z.imag == 0.0 and (curve.z_min - tol_oval < z.real
                              < curve.z_max + tol_oval) and (
                isinstance(lam, float) or lam.imag == 0.0) and np.real(lam) < 0:
            x = float(np.clip(z.real, curve.z_min, curve.z_max))
            return self.reduce_mod(self._abel_oval(x, np.real(lam)))
        if z.imag == 0.0 and side is not None:
            # boundary value: nudge off the axis on the declared side
            eps = 1e-9 * (1.0 + abs(z))
            z = complex(z.real, eps if side == "plus" else -eps)
            lam = _polish(curve, z, lam)
        if abs(z) > 40.0:
            return self.reduce_mod(self._abel_far(z, lam))
        if abs(z) < min(0.02, curve.z_min / 4.0):
            return self.reduce_mod(self._abel_near_zero(z, lam))
        path = self._route(z, sheet)
        anchor_z, anchor_lam, anchor_val = self.anchors[sheet]
        total = 0j
        lam_run = anchor_lam
        for z0, z1 in zip(path[:-1], path[1:]):
            seg, lam_run = _integrate_segment(curve, z0, z1, lam_run)
            total += seg
        if abs(curve.P(z, lam_run)) > 1e-6 * (1 + abs(z)) ** 3 or (
                abs(lam_run - lam) > 1e-5 * (1 + abs(lam))):
            raise PathCrossesBranchPoint(
                f"branch tracking to z = {z} ended on the wrong sheet")
        return self.reduce_mod(anchor_val + self.c_omega * total)

    def _resolve_point(self, point, side):
        z, second = complex(point[0]), point[1]
        curve = self.curve
        if isinstance(second, (int, np.integer)) and second in (1, 2, 3):
            sheet = int(second)
            if z.imag == 0.0:
                x = z.real
                on_cut_12 = x <= 0.0
                on_cut_23 = 0.0 <= x <= curve.z_min or x >= curve.z_max
                needs_side = ((sheet in (1, 2) and on_cut_12)
                              or (sheet in (2, 3) and on_cut_23))
                if needs_side:
                    if side is None:
                        raise DomainViolation(
                            f"z = {x} lies on a cut of sheet {sheet}; pass side=")
                    trip = boundary_eigenvalues(curve, x, side)
                else:
                    trip = eigenvalues_ordered(curve, z, on_cut=True)
            else:
                trip = eigenvalues_ordered(curve, z, on_cut=True)
            lam = trip.as_array[sheet - 1]
        else:
            lam = complex(second)
            if abs(curve.P(z, lam)) > 1e-8 * (1 + abs(z)) ** 3 * (1 + abs(lam)):
                raise ValueError("(z, lam) is not on the curve")
            if z.imag != 0.0:
                trip = eigenvalues_ordered(curve, z, on_cut=True)
                sheet = 1 + int(np.argmin(np.abs(trip.as_array - lam)))
            else:
                trip = eigenvalues_ordered(curve, z + 1e-9j * (1 + abs(z)), on_cut=True)
                sheet = 1 + int(np.argmin(np.abs(trip.as_array - lam)))
        return z, lam, sheet

    def _route(self, z: complex, sheet: int):
        curve = self.curve
        anchor_z = self.anchors[sheet][0]
        obstacles = (0.0, curve.z_min, curve.z_max)
        if z.imag == 0.0:
            # on-axis target reachable without crossing a cut of its sheet
            x = z.real
            if sheet == 1 and x > 0:
                return [anchor_z, complex(x)]
            if sheet == 3 and x < 0:
                return [anchor_z, complex(x)]
            raise DomainViolation(f"on-axis z = {x} needs a side for sheet {sheet}")
        s = 1.0 if z.imag > 0 else -1.0
        h = _WAYPOINT_H * s
        rex = z.real
        for ob in obstacles:
            if abs(rex - ob) < 0.04:
                rex = ob + (0.1 if rex >= ob else -0.1)
        path = [anchor_z, anchor_z + 1j * h, complex(rex, _WAYPOINT_H * s), z]
        for z0, z1 in zip(path[:-1], path[1:]):
            for ob in obstacles:
                if _seg_distance(z0, z1, ob) < 1e-7:
                    raise PathCrossesBranchPoint(
                        f"route to {z} passes within 1e-7 of branch point {ob}")
        return path

    def _abel_far(self, z: complex, lam: complex) -> complex:
        """A(Pinf) minus the tail integral along the outward ray z/sigma^3.

        Branch selection along the ray is by the cube-root phase
        (lam - z - 1)/z^{2/3} -> c_lambda omega^k, which is unambiguous
        for |z| >= 40 and avoids step-size issues of sequential tracking.
        """
        curve = self.curve
        c = curve.c_lambda
        k = int(np.argmin([abs((lam - z - 1.0) / z ** (2.0 / 3.0)
                               - c * _OMK3[m]) for m in range(3)]))
        nodes, wts = gl_nodes(0.0, 1.0, 160)
        total = 0j
        for sig, w in zip(nodes, wts):
            zs = z / sig ** 3
            roots = _roots3_scalar(curve.beta, zs)
            lam_s = min(roots, key=lambda r: abs((r - zs - 1.0)
                                                 / zs ** (2.0 / 3.0) - c * _OMK3[k]))
            total += w * 3.0 * z / sig ** 4 / curve.P_lam(zs, lam_s)
        return 1.0 / 6.0 - self.c_omega * total

    def _abel_near_zero(self, z: complex, lam: complex) -> complex:
        """A(P0) plus the ray integral from the triple point, z*sigma^3.

        Branch selection by (lam - 1)/z^{1/3} -> c_lambda omega^k.
        """
        curve = self.curve
        c = curve.c_lambda
        k = int(np.argmin([abs((lam - 1.0) / z ** (1.0 / 3.0)
                               - c * _OMK3[m]) for m in range(3)]))
        nodes, wts = gl_nodes(0.0, 1.0, 160)
        total = 0j
        for sig, w in zip(nodes, wts):
            zs = z * sig ** 3
            roots = _roots3_scalar(curve.beta, zs)
            lam_s = min(roots, key=lambda r: abs((r - 1.0)
                                                 / zs ** (1.0 / 3.0) - c * _OMK3[k]))
            total += w * 3.0 * z * sig ** 2 / curve.P_lam(zs, lam_s)
        return 5.0 / 6.0 + self.c_omega * total

    def _abel_oval(self, x: float, lam: float) -> complex:
        """Route along the bounded oval from the sheet-2 anchor (1, lam2(1))."""
        curve = self.curve
        # at B_min/B_max the branches coincide and either route works
        margin = 1e-7 * (curve.z_max - curve.z_min)
        xc = float(np.clip(x, curve.z_min + margin, curve.z_max - margin))
        trip = boundary_eigenvalues(curve, xc, "plus")
        at_branch = min(x - curve.z_min, curve.z_max - x) < 10 * margin
        on_sheet2 = at_branch or abs(lam - trip.lam2) <= abs(lam - trip.lam3)
        anchor_z, anchor_lam, anchor_val = self.anchors[2]
        if on_sheet2:
            total = _oval_leg(curve, 1.0, x, branch="lam2")
            return anchor_val + self.c_omega * total
        # through B_min: z = z_min + w^2, w from +sqrt(1-z_min) to -sqrt(x-z_min).
        # On the oval lam(w) = lam_m - c w is smooth through w = 0 with the
        # label convention w > 0 <-> more negative branch, so the branch is
        # selected per node and the integrand 2w/P_lam is analytic.
        w1 = np.sqrt(1.0 - curve.z_min)
        w2 = -np.sqrt(max(x - curve.z_min, 0.0))
        nodes, wts = gl_nodes(w2, w1, 256)
        total = 0j
        for w, wt in zip(nodes, wts):
            zw = curve.z_min + w * w
            roots = sorted(_roots3_scalar(curve.beta, complex(zw)),
                           key=lambda r: r.real)
            lam_w = roots[0] if w > 0 else roots[1]
            total += wt * 2.0 * w / curve.P_lam(zw, lam_w)
        total = -total  # nodes run w2 -> w1; the oval is traversed w1 -> w2
        return anchor_val + self.c_omega * total


def _seg_distance(z0: complex, z1: complex, p: float) -> float:
    d = z1 - z0
    L2 = abs(d) ** 2
    if L2 == 0:
        return abs(p - z0)
    t = np.clip(((p - z0) * np.conj(d)).real / L2, 0.0, 1.0)
    return abs(z0 + t * d - p)


def _track_to(curve: SpectralCurve, z0: complex, z1: complex, lam: complex,
              real_branch: bool = False, guard_limit: int = 20000) -> complex:
    """Continue the root lam from z0 to z1, bisecting ambiguous steps."""
    stack = [(complex(z0), complex(z1))]
    guard = 0
    beta = curve.beta
    while stack:
        a, b = stack.pop()
        roots = _roots3_scalar(beta, b)
        cand = min(roots, key=lambda r: abs(r - lam))
        if real_branch and abs(cand.imag) < 1e-8 * (1 + abs(cand)):
            cand = complex(cand.real, 0.0)
        sep = min(abs(r - cand) for r in roots if r is not cand)
        if abs(cand - lam) <= 0.45 * sep + 1e-13 * (1 + abs(cand)):
            lam = cand
            continue
        guard += 1
        if guard > guard_limit:
            raise PathCrossesBranchPoint(f"branch tracking stalled near z = {b}")
        mid = (a + b) / 2.0
        stack.append((mid, b))
        stack.append((a, mid))
    return lam


def _depth_for(seg_len: float, clearance: float) -> int:
    if clearance <= 0:
        return 40
    return int(np.clip(np.ceil(np.log2(max(seg_len, 1e-30) / clearance)) + 7, 6, 44))


def _integrate_segment(curve: SpectralCurve, z0: complex, z1: complex,
                       lam0: complex):
    """GL-panel integral of dz/P_lam along [z0, z1] with branch tracking.

    Panels refine dyadically toward the endpoints and toward interior
    points where the segment comes near a branch point, with depths set
    by the local clearance so that inverse-square-root spikes resolve.
    """
    obstacles = (0.0, curve.z_min, curve.z_max)
    L = abs(z1 - z0)
    sticky = []
    for edge_t, edge_z in ((0.0, z0), (1.0, z1)):
        clr = min(abs(edge_z - ob) for ob in obstacles)
        sticky.append((edge_t, _depth_for(L, clr)))
    d = z1 - z0
    L2 = abs(d) ** 2
    for ob in obstacles:
        if L2 == 0:
            continue
        t = ((ob - z0) * np.conj(d)).real / L2
        if 0.02 < t < 0.98:
            clr = abs(z0 + t * d - ob)
            if clr < 0.25 * L:
                sticky.append((float(t), _depth_for(L, clr)))
    nodes, wts = panels_toward(0.0, 1.0, sticky, nper=12)
    lam = lam0
    z_prev = z0
    total = 0j
    for t, w in zip(nodes, wts):
        z = z0 + (z1 - z0) * t
        lam = _track_to(curve, z_prev, z, lam)
        z_prev = z
        total += w / curve.P_lam(z, lam)
    lam_end = _track_to(curve, z_prev, z1, lam)
    return total * (z1 - z0), lam_end


def _oval_leg(curve: SpectralCurve, x0: float, x1: float, branch: str) -> complex:
    """Integral along the oval on one real branch, cosine-substituted."""
    if x0 == x1:
        return 0j
    nodes, wts = gl_nodes(0.0, np.pi, 160)
    mid, half = (x0 + x1) / 2.0, (x0 - x1) / 2.0
    xs = mid + half * np.cos(nodes)          # from x0 to x1
    dxs = -half * np.sin(nodes)
    total = 0j
    for x, dx, w in zip(xs, dxs, wts):
        trip = eigenvalues_ordered(curve, complex(x), on_cut=True)
        lam = trip.lam2 if branch == "lam2" else trip.lam3
        total += w * dx / curve.P_lam(x, lam)
    return total


def _bounded_oval_period(curve: SpectralCurve, n: int = 256) -> complex:
    """Once around the bounded oval: out on lam2, back on lam3."""
    nodes, wts = gl_nodes(0.0, np.pi, n)
    mid = (curve.z_min + curve.z_max) / 2.0
    half = (curve.z_max - curve.z_min) / 2.0
    xs = mid + half * np.cos(nodes)          # z_max -> z_min
    dxs = -half * np.sin(nodes)
    total = 0j
    for x, dx, w in zip(xs, dxs, wts):
        trip = eigenvalues_ordered(curve, complex(x), on_cut=True)
        total += w * dx * (1.0 / curve.P_lam(x, trip.lam2)
                           - 1.0 / curve.P_lam(x, trip.lam3))
    return total


def _axis_ray_integral(curve: SpectralCurve, target: str, n: int = 224) -> complex:
    """Sheet-3 negative-axis integrals from P1: to P0 (z=-w^3) or Pinf (z=-1/s^3)."""
    nodes, wts = gl_nodes(0.0, 1.0, n)
    total = 0j
    for t, w in zip(nodes, wts):
        if target == "P0":
            z = -t ** 3
            jac = 3.0 * t ** 2            # path w: 1 -> 0, dz = -3w^2 dw
        else:
            z = -1.0 / t ** 3
            jac = -3.0 / t ** 4           # path s: 1 -> 0, dz = 3 s^-4 ds
        trip = eigenvalues_ordered(curve, complex(z), on_cut=True)
        total += w * jac / curve.P_lam(z, trip.lam3)
    return total


def _build_arc(curve: SpectralCurve, sheet_label: int, th0: float, th1: float,
               lam_start: complex, n_sub: int = 640) -> _ArcTable:
    """Cumulative integral of dz/P_lam along z = e^{i theta} on one branch."""
    th = np.linspace(th0, th1, n_sub + 1)
    z = np.exp(1j * th)
    lam = np.empty(n_sub + 1, dtype=complex)
    lam[0] = _polish(curve, z[0], lam_start)
    for k in range(1, n_sub + 1):
        lam[k] = _track_to(curve, z[k - 1], z[k], lam[k - 1])
    deriv = 1j * z / curve.P_lam(z, lam)
    cum = np.empty(n_sub + 1, dtype=complex)
    cum[0] = 0.0
    gx, gw = gl_nodes(0.0, 1.0, 8)
    for k in range(n_sub):
        a, b = th[k], th[k + 1]
        lam_run = lam[k]
        seg = 0j
        z_prev = z[k]
        for t, w in zip(gx, gw):
            tt = a + (b - a) * t
            zz = np.exp(1j * tt)
            lam_run = _track_to(curve, z_prev, zz, lam_run)
            z_prev = zz
            seg += w * 1j * zz / curve.P_lam(zz, lam_run)
        cum[k + 1] = cum[k] + seg * (b - a)
    re = CubicHermiteSpline(th, cum.real, deriv.real)
    im = CubicHermiteSpline(th, cum.imag, deriv.imag)
    return _ArcTable(sheet=sheet_label, th0=th0, th1=th1, re=re, im=im,
                     total=complex(cum[-1])), lam[-1]


def compute_periods(curve: SpectralCurve, fact: WeightFactorization,
                    n_table: int = 640) -> SurfaceChart:
    """Build the chart: periods, tau, cycle tables, anchors, special values."""
    period_c = _bounded_oval_period(curve)
    c_om = 1.0 / period_c
    ip0 = _axis_ray_integral(curve, "P0")
    if (c_om * ip0).real < 0:
        c_om = -c_om
    if abs((c_om * ip0).real - 1.0 / 3.0) > 1e-6:
        raise PeriodInconsistency(
            f"P1->P0 increment {(c_om * ip0).real} is not 1/3")

    # b-cycle: (sheet1 upper, sheet2 lower, sheet2 upper, sheet1 lower)
    trip1 = eigenvalues_ordered(curve, 1.0 + 0j, on_cut=True)
    lamB0 = trip1.lam1
    arcs = []
    lam_run = lamB0
    specs = [(1, 0.0, np.pi), (2, np.pi, 2 * np.pi),
             (2, 0.0, np.pi), (1, np.pi, 2 * np.pi)]
    for sheet_label, a, b in specs:
        arc, lam_run = _build_arc(curve, sheet_label, a, b, lam_run, n_table)
        arcs.append(arc)
        lam_run = _polish(curve, np.exp(1j * b), lam_run)
    if abs(lam_run - lamB0) > 1e-8 * (1 + abs(lamB0)):
        raise PeriodInconsistency("b-cycle did not close")
    offsets = np.concatenate([[0j], np.cumsum([a.total for a in arcs])])
    period_b = offsets[-1]
    tau = c_om * period_b
    if tau.imag < 0 or abs(tau.real) > 1e-6:
        raise PeriodInconsistency(f"tau = {tau} not in i R^+")
    b_re_res = float(np.max(np.abs([(c_om * (offsets[k] + arcs[k].cum(
        np.linspace(arcs[k].th0, arcs[k].th1, 64)))).real for k in range(4)])))

    # Gamma_3 table from P1 (theta = pi), two half-turns
    trip_m1 = boundary_eigenvalues(curve, -1.0, "plus")
    g3a, lam_g3 = _build_arc(curve, 3, np.pi, 2 * np.pi, trip_m1.lam3, n_table)
    g3b, lam_g3 = _build_arc(curve, 3, 0.0, np.pi, lam_g3, n_table)
    g3_total = c_om * (g3a.total + g3b.total)
    if abs(abs(g3_total.imag) - tau.imag) > 1e-6 or abs(g3_total.real) > 1e-6:
        raise PeriodInconsistency(f"Gamma_3 loop gave {g3_total}, expected +-tau")
    th_chk = np.linspace(np.pi, 2 * np.pi, 64)
    g3_re_res = float(np.max(np.abs((0.5 + c_om * g3a.cum(th_chk)).real % 1.0
                                     - 0.5)))

    # anchors: P1 -> (1, lam2(1)) multi-sheet path; B0 via the cycle offset
    xc = curve.z_min / 2.0
    H = _WAYPOINT_H
    pathA = [-1 + 0j, -1 + H * 1j, xc + H * 1j, xc - H * 1j, 1 - H * 1j, 1 + 0j]
    lam_run = 0j
    ipath = 0j
    for z0, z1 in zip(pathA[:-1], pathA[1:]):
        seg, lam_run = _integrate_segment(curve, z0, z1, lam_run)
        ipath += seg
    if abs(lam_run - trip1.lam2) > 1e-7 * (1 + abs(trip1.lam2)):
        raise PeriodInconsistency("anchor path did not land on (1, lam2(1))")
    A_anchor2 = 0.5 + c_om * ipath
    y_mid = (c_om * (offsets[0] + arcs[0].total + arcs[1].total)).imag
    A_B0 = A_anchor2 - 1j * y_mid

    ipinf = _axis_ray_integral(curve, "Pinf")
    abel_special = {
        "P1": 0.5 + 0j,
        "P0": 0.5 + c_om * ip0,
        "Pinf": 0.5 + c_om * ipinf,
        "B0": A_B0,
    }
    # the computed anchors must land on their theoretical lattice values
    # (Prop-type identities); once verified, the evaluation anchors snap to
    # the exact values so that downstream series (g-functions at infinity)
    # are not polluted by the 1e-12 quadrature offsets amplified near P_inf
    for name, target in (("P0", 5.0 / 6.0), ("Pinf", 1.0 / 6.0), ("B0", 1.0)):
        err = abel_special[name] - target
        if abs(err.real % 1.0 if abs(err.real % 1.0) < 0.5
               else err.real % 1.0 - 1.0) + abs(err.imag) > 1e-8:
            raise PeriodInconsistency(
                f"A({name}) = {abel_special[name]} != {target} beyond 1e-8")
    anchors = {
        1: (1.0 + 0j, trip1.lam1, 1.0 + 0j),
        2: (1.0 + 0j, trip1.lam2, 1.0 + 1j * y_mid),
        3: (-1.0 + 0j, 0.0 + 0j, 0.5 + 0j),
    }
    return SurfaceChart(
        curve=curve, fact=fact, tau=tau, c_omega=c_om,
        theta=ThetaParams.for_tau(tau),
        b_arcs=arcs, b_offsets=offsets[:4], g3_arcs=[g3a, g3b],
        anchors=anchors, abel_special=abel_special,
        b_re_residual=b_re_res, g3_re_residual=g3_re_res,
    )


def closed_lift_loop_integral(chart: SurfaceChart, center: complex,
                              radius: float, n: int = 96) -> complex:
    """Integral of the differential around the closed lift of a small z-loop.

    The branch is continued until it returns to its start (1 turn at a
    regular point, 2 at z_min/z_max, 3 at 0/infinity); the result must
    vanish since the differential is holomorphic.
    """
    curve = chart.curve
    z0 = center + 1j * radius          # start off the real axis
    trip = eigenvalues_ordered(curve, complex(z0))
    lam0 = trip.lam2                   # participates in every permutation
    lam = lam0
    total = 0j
    gx, gw = gl_nodes(np.pi / 2, 2 * np.pi + np.pi / 2, n)
    for turn in range(3):
        z_prev = z0
        seg = 0j
        for t, w in zip(gx, gw):
            z = center + radius * np.exp(1j * t)
            lam = _track_to(curve, z_prev, z, lam)
            z_prev = z
            seg += w * 1j * radius * np.exp(1j * t) / curve.P_lam(z, lam)
        lam = _track_to(curve, z_prev, z0, lam)
        total += seg
        if abs(lam - lam0) < 1e-9 * (1 + abs(lam0)):
            break
    else:
        raise PathCrossesBranchPoint("loop lift did not close after 3 turns")
    return chart.c_omega * total
