"""Equilibrium measure on the two unit circles and its circle pushforward.

In the vertical torus coordinate the measure is the wrap of the half-plane
balayage of the three unimodular point charges: the line density

    rho(x) = 1/(2 pi (1+x^2-sqrt(3)x)) - 1/(pi (1+x^2)) + 1/(2 pi (1+x^2+sqrt(3)x))

pulled back through x = +-e^{-pi y} from both strip edges and summed over
the period lattice.  The wrapped sum telescopes to sum_n 3/cosh(3 pi y_n),
which is used as an independent cross-check, not as the implementation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._quad import gl_nodes
from .surface import SurfaceChart


def line_density(x):
    """Balayage density on the real line (signed combination of Cauchy laws)."""
    x = np.asarray(x, dtype=float)
    s3 = np.sqrt(3.0)
    return (1.0 / (2 * np.pi * (1 + x * x - s3 * x))
            - 1.0 / (np.pi * (1 + x * x))
            + 1.0 / (2 * np.pi * (1 + x * x + s3 * x)))


def wrap_count(t0: float) -> int:
    """Terms in the bi-infinite wrap sum; tail below 1e-12 absolute."""
    return int(np.ceil(30.0 / (np.pi * t0))) + 2


def torus_density(y, t0: float):
    """Density of the Abel pushforward of mu in the vertical coordinate."""
    y = np.asarray(y, dtype=float)
    n = np.arange(-wrap_count(t0), wrap_count(t0) + 1)
    yn = y[..., None] + n * t0
    x = np.exp(-np.pi * np.abs(yn))   # |x| < 1 representative of each edge copy
    # pi e^{-pi y} [rho(e^{-pi y}) + rho(-e^{-pi y})] is even in y
    vals = np.pi * x * (line_density(x) + line_density(-x))
    return vals.sum(axis=-1)


def torus_density_sech(y, t0: float):
    """Closed sech form of the same wrap; independent test oracle."""
    y = np.asarray(y, dtype=float)
    n = np.arange(-wrap_count(t0), wrap_count(t0) + 1)
    yn = y[..., None] + n * t0
    return (3.0 / np.cosh(3.0 * np.pi * yn)).sum(axis=-1)


@dataclass
class EquilibriumContext:
    chart: SurfaceChart
    quad_y: np.ndarray        # Gauss-Legendre nodes in y on [0, t0]
    quad_w: np.ndarray        # GL weights times torus density
    mass: float

    @property
    def t0(self) -> float:
        return self.chart.t0

    def torus_density(self, y):
        return torus_density(y, self.t0)

    def mu_star_density(self, theta):
        """Pushforward density on the unit circle against d theta."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for sheet in (1, 2):
            ys = np.array([self.chart.torus_coordinate_on_b(t, sheet)
                           for t in np.atleast_1d(theta)])
            dy = np.abs(self.chart.dy_dtheta_on_b(np.atleast_1d(theta), sheet))
            out = out + (torus_density(ys, self.t0) * dy).reshape(theta.shape)
        return out

    def integrate(self, f):
        """Integral of f against mu in the vertical coordinate (f maps y-array)."""
        return np.sum(self.quad_w * f(self.quad_y))


def build_context(chart: SurfaceChart, n_nodes: int = 512) -> EquilibriumContext:
    y, w = gl_nodes(0.0, chart.t0, n_nodes)
    rho = torus_density(y, chart.t0)
    ctx = EquilibriumContext(chart=chart, quad_y=y, quad_w=w * rho,
                             mass=float(np.sum(w * rho)))
    return ctx


def variational_check(eq: EquilibriumContext, gf, n_support: int = 40,
                      n_gamma3: int = 20, n_sweep: int = 30,
                      fd_step: float = 1e-4) -> dict:
    """Euler-Lagrange, positivity-on-Gamma3, sign pattern and S-property report.

    ``gf`` is the g-function context (supplies the real Green potential and
    the constant ell).  h = 2 U^mu + Re V - ell must vanish on the support,
    be positive on Gamma_3, follow the 1/3-2/3 sign pattern in the torus
    real part, and have matching one-sided normal derivatives.
    """
    chart = eq.chart
    report = {}

    thetas = np.linspace(0.15, 2 * np.pi - 0.15, n_support)
    h_support = []
    for sheet in (1, 2):
        for th in thetas[::2]:
            h_support.append(gf.h_value(np.exp(1j * th), sheet))
    report["h_max_on_support"] = float(np.max(np.abs(h_support)))

    h_g3 = [gf.h_value(np.exp(1j * th), 3)
            for th in np.linspace(0.1, 2 * np.pi - 0.1, n_gamma3)]
    report["h_min_on_gamma3"] = float(np.min(h_g3))

    # Lemma-type sign pattern in Re u
    signs_ok = True
    samples = []
    for r in np.linspace(0.55, 1.8, 6):
        if abs(r - 1.0) < 0.05:
            continue
        for th in np.linspace(0.3, 2 * np.pi - 0.3, 10):
            z = r * np.exp(1j * th)
            for sheet in (1, 2, 3):
                u = chart.abel_map((z, sheet))
                hv = gf.h_value(z, sheet)
                samples.append((u.real, hv))
    for x, hv in samples:
        d = min(abs(x - 0.0), abs(x - 1 / 3), abs(x - 2 / 3), abs(x - 1.0))
        if d < 0.02:
            continue
        inside = 1 / 3 < x < 2 / 3
        if inside and hv < 0:
            signs_ok = False
        if not inside and hv > 0:
            signs_ok = False
    report["sign_pattern_ok"] = signs_ok
    report["n_sign_samples"] = len(samples)

    # S-property: symmetric radial difference vanishes on the support
    # (angles keep clear of the real axis where sheet labels swap)
    sprop = []
    for sheet in (1, 2):
        for th in (0.5, 1.4, 2.4, 4.0, 5.3):
            hp = gf.h_value((1 + fd_step) * np.exp(1j * th), sheet)
            hm = gf.h_value((1 - fd_step) * np.exp(1j * th), sheet)
            sprop.append((hp - hm) / (2 * fd_step))
    report["s_property_residual"] = float(np.max(np.abs(sprop)))
    report["mass_mu"] = eq.mass
    report["ell"] = gf.ell
    return report
