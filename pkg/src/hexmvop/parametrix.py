"""Theta-function global parametrix M and the asymptotic prefactor A_N.

For each parity the scalar building blocks are elliptic quotients at the
doubled modulus tau' = -2/tau,

    f_j(u) = (normalization) *
        th1(t(u - z1)) th1(t(u - z2)) / (th1(t(u - p1)) th1(t(u - p2))),
    t = tau'/2,

with poles at p1 = x_j + tau/2, p2 = x_j + 1 + tau/2 (the Abel images of
the oval points where row j of E vanishes, and their +1 shifts) and zeros
placed so that f_j is quasi-periodic for the doubled lattice 2Z + tau Z.
Even parity: zeros 7/6 and 2 x_j - 1/6 + tau/2, normalized f_j(1/6) = 1;
odd parity: zeros 1/6 and 2 x_j - 1/6 + tau/2, normalized f_j(7/6) = 1,
with the Abel representative moved to the strip Im u in (-tau/2, tau/2).

The matrix M = K [[E o Psi, -E o Phi], [E o Phi, E o Psi]] (Hadamard
products) solves the model jump problem; A_N(z) is its upper-left block
times E(z)^{-1}.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elliptic import ThetaParams, theta1_ratio
from .eigensystem import SpecialPoints, eigenvector_matrix
from .errors import ExtrapolationUnstable, PoleProximity
from .model import WeightFactorization
from .spectral import SpectralCurve
from .surface import SurfaceChart

_C_RADII = (1e5, 1e6, 1e7)
_C_ANGLE = np.pi / 4


@dataclass
class ParityParametrix:
    parity: str
    chart: SurfaceChart
    fact: WeightFactorization
    curve: SpectralCurve
    x_j: np.ndarray            # Re A(Q_j*), three values in [0, 1)
    theta2: ThetaParams        # modulus tau' = -2/tau
    C1: np.ndarray
    C2: np.ndarray
    K: np.ndarray
    pole_z: np.ndarray = None  # z-coordinates of Q_j* (Psi pole projections)

    _norm: np.ndarray = field(default=None)

    def _raw_f(self, j: int, u):
        """Unnormalized quotient with the doubled-lattice quasi-periodicity.

        Even parity: zeros 7/6 and 2 x_j - 1/6 + tau/2, so f(u+2) = -f,
        f(u+tau) = +f.  Odd parity: zeros 1/6 and 2 x_j - 1/6 + tau/2
        together with the multiplier exp(-i pi u / tau), which the
        quasi-periodicity f(u+2) = f(u+tau) = -f forces (a balanced theta_1
        quotient alone is always tau-periodic in u).
        """
        xj = self.x_j[j - 1]
        tau = self.chart.tau
        t = -1.0 / tau                      # tau'/2
        u = complex(u)
        if self.parity == "even":
            num = [t * (u - 7.0 / 6.0), t * (u - 2.0 * xj + 1.0 / 6.0 - tau / 2.0)]
            extra = 1.0
        else:
            num = [t * (u - 1.0 / 6.0), t * (u - 2.0 * xj + 1.0 / 6.0 - tau / 2.0)]
            extra = np.exp(-1j * np.pi * u / tau)
        den = [t * (u - xj - tau / 2.0), t * (u - xj - 1.0 - tau / 2.0)]
        return extra * theta1_ratio(num, den, self.theta2)

    def f_function(self, j: int, u, check_poles: bool = True):
        """The scalar elliptic quotient f_j(u) for this parity (j = 1..3)."""
        xj = self.x_j[j - 1]
        tau = self.chart.tau
        u = np.asarray(u, dtype=complex)
        if check_poles:
            for pole in (xj + tau / 2.0, xj + 1.0 + tau / 2.0):
                d = u - pole
                # distance mod 2Z + tau Z
                dre = (d.real + 1.0) % 2.0 - 1.0
                dim = (d.imag + tau.imag / 2) % tau.imag - tau.imag / 2
                if np.any(np.hypot(dre, dim) < 1e-10):
                    raise PoleProximity(f"f_{j} evaluated at its pole lattice")
        if self._norm is None:
            base = 1.0 / 6.0 if self.parity == "even" else 7.0 / 6.0
            object.__setattr__(self, "_norm", np.array(
                [self._raw_f(k, base) for k in (1, 2, 3)]))
        if u.ndim == 0:
            return self._raw_f(j, u) / self._norm[j - 1]
        out = np.empty(u.shape, dtype=complex)
        for idx in np.ndindex(u.shape):
            out[idx] = self._raw_f(j, u[idx])
        return out / self._norm[j - 1]

    def _abel_rep(self, z: complex, sheet: int, side):
        u = self.chart.abel_map((z, sheet), side=side)
        if self.parity == "odd" and u.imag >= self.chart.t0 / 2.0:
            u = u - self.chart.tau
        return u

    def psi_phi_matrices(self, z: complex, side: str | None = None):
        """(Psi, Phi) at z: entry (j, k) is f_j at the sheet-k Abel value."""
        us = [self._abel_rep(complex(z), k, side) for k in (1, 2, 3)]
        Psi = np.empty((3, 3), dtype=complex)
        Phi = np.empty((3, 3), dtype=complex)
        for j in (1, 2, 3):
            for k in (1, 2, 3):
                if self.parity == "even":
                    Psi[j - 1, k - 1] = self.f_function(j, us[k - 1],
                                                        check_poles=False)
                    Phi[j - 1, k - 1] = self.f_function(j, us[k - 1] + 1.0,
                                                        check_poles=False)
                else:
                    Phi[j - 1, k - 1] = self.f_function(j, us[k - 1],
                                                        check_poles=False)
                    Psi[j - 1, k - 1] = self.f_function(j, us[k - 1] + 1.0,
                                                        check_poles=False)
        return Psi, Phi

    def M(self, z: complex, side: str | None = None) -> np.ndarray:
        fr = eigenvector_matrix(self.fact, self.curve, z, side=side)
        Psi, Phi = self.psi_phi_matrices(z, side=side)
        EP = fr.E * Psi
        EF = fr.E * Phi
        top = np.hstack([EP, -EF])
        bot = np.hstack([EF, EP])
        return self.K @ np.vstack([top, bot])

    def A_N(self, z: complex, side: str | None = None) -> np.ndarray:
        """Asymptotic prefactor: upper-left block of M times E^{-1}."""
        fr = eigenvector_matrix(self.fact, self.curve, z, side=side)
        Psi, Phi = self.psi_phi_matrices(z, side=side)
        EP = fr.E * Psi
        EF = fr.E * Phi
        return (self.K[:3, :3] @ EP + self.K[:3, 3:] @ EF) @ fr.Einv


def build_M(chart: SurfaceChart, fact: WeightFactorization,
            curve: SpectralCurve, special: SpecialPoints,
            parity: str) -> ParityParametrix:
    """Construct the parametrix of the given parity ('even' | 'odd')."""
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    xs = []
    for (zj, lamj, _sheet) in special.q_j_star:
        u = chart.abel_map((zj, lamj))
        if abs(u.imag - chart.t0 / 2.0) > 1e-6:
            raise ExtrapolationUnstable(
                f"A(Q_j*) = {u} is not on the half-height line")
        xs.append(u.real % 1.0)
    theta2 = ThetaParams.for_tau(-2.0 / chart.tau)
    ctx = ParityParametrix(parity=parity, chart=chart, fact=fact, curve=curve,
                           x_j=np.array(xs), theta2=theta2,
                           C1=np.zeros((3, 3)), C2=np.zeros((3, 3)),
                           K=np.eye(6),
                           pole_z=np.array([q[0] for q in special.q_j_star]))
    # C1, C2 from (E o Psi) E^{-1} -> I + C1, (E o Phi) E^{-1} -> C2;
    # the errors are O(z^{-1}) (all fractional powers cancel), so the
    # Richardson extrapolation runs in 1/z
    sc1, sc2, ts = [], [], []
    for R in _C_RADII:
        z = R * np.exp(1j * _C_ANGLE)
        fr = eigenvector_matrix(fact, curve, z)
        Psi, Phi = ctx.psi_phi_matrices(z)
        sc1.append((fr.E * Psi) @ fr.Einv - np.eye(3))
        sc2.append((fr.E * Phi) @ fr.Einv)
        ts.append(1.0 / z)
    V = np.vander(np.array(ts), N=3, increasing=True)
    C1 = np.tensordot(np.linalg.inv(V)[0], np.array(sc1), axes=(0, 0))
    C2 = np.tensordot(np.linalg.inv(V)[0], np.array(sc2), axes=(0, 0))
    V2 = np.vander(np.array(ts[1:]), N=2, increasing=True)
    C1b = np.tensordot(np.linalg.inv(V2)[0], np.array(sc1[1:]), axes=(0, 0))
    C2b = np.tensordot(np.linalg.inv(V2)[0], np.array(sc2[1:]), axes=(0, 0))
    for name, C, Cb in (("C1", C1, C1b), ("C2", C2, C2b)):
        # two- vs three-point Richardson agreement in the 1/z tail
        if np.max(np.abs(C - Cb)) > 1e-4 * (1 + np.max(np.abs(C))):
            raise ExtrapolationUnstable(f"{name} extraction unstable")
        if np.max(np.abs(np.triu(C))) > 1e-5 * (1 + np.max(np.abs(C))):
            raise ExtrapolationUnstable(f"{name} is not strictly lower triangular")
    C1 = np.tril(C1, -1)
    C2 = np.tril(C2, -1)
    ctx.C1, ctx.C2 = C1, C2
    B = np.block([[C1, -C2], [C2, C1]])
    B2 = B @ B
    if np.max(np.abs(B @ B2)) > 1e-10 * (1 + np.max(np.abs(B)) ** 3):
        K = np.linalg.inv(np.eye(6) + B)
    else:
        K = np.eye(6) - B + B2          # exact Neumann series, B^3 = 0
    ctx.K = K
    return ctx
