import numpy as np
import pytest

from hexmvop import equilibrium as eqm


def test_line_density_closed_form():
    # the signed Cauchy combination collapses to 3 x^2 / (pi (1 + x^6)):
    # nonnegative with a double zero at x = 0 only
    x = np.linspace(-50, 50, 2001)
    vals = eqm.line_density(x)
    closed = 3 * x ** 2 / (np.pi * (1 + x ** 6))
    assert np.max(np.abs(vals - closed)) < 1e-13
    assert np.all(vals[x != 0] > 0)


def test_torus_density_positive(eq_ctx):
    y = np.linspace(0, eq_ctx.t0, 1000, endpoint=False)
    assert np.all(eq_ctx.torus_density(y) > 0)


def test_torus_density_mass(eq_ctx):
    assert abs(eq_ctx.mass - 1.0) < 1e-8


def test_torus_density_symmetry(eq_ctx):
    t0 = eq_ctx.t0
    y = np.linspace(0.01, t0 - 0.01, 113)
    d1 = eq_ctx.torus_density(y)
    d2 = eq_ctx.torus_density(t0 - y)
    assert np.max(np.abs(d1 - d2)) < 1e-10 * np.max(d1)


def test_torus_density_matches_sech_oracle(eq_ctx):
    # wrap of pi e^{-pi y}(rho(x) + rho(-x)) telescopes to sum 3 sech(3 pi y_n)
    t0 = eq_ctx.t0
    y = np.linspace(0.0, t0, 97, endpoint=False)
    d1 = eqm.torus_density(y, t0)
    d2 = eqm.torus_density_sech(y, t0)
    assert np.max(np.abs(d1 - d2)) < 1e-11 * np.max(d2)


def test_wrap_truncation_error(eq_ctx):
    # doubling the wrap count changes nothing at 1e-12
    t0 = eq_ctx.t0
    n = eqm.wrap_count(t0)
    y = np.linspace(0, t0, 50, endpoint=False)
    base = eqm.torus_density(y, t0)
    nn = np.arange(-2 * n, 2 * n + 1)
    yn = y[..., None] + nn * t0
    x = np.exp(-np.pi * np.abs(yn))
    full = (np.pi * x * (eqm.line_density(x) + eqm.line_density(-x))).sum(axis=-1)
    assert np.max(np.abs(base - full)) < 1e-12


def test_mu_star_mass(eq_ctx):
    th = np.linspace(0, 2 * np.pi, 4097)[:-1]
    dens = eq_ctx.mu_star_density(th)
    mass = np.trapezoid(np.concatenate([dens, dens[:1]]),
                        np.linspace(0, 2 * np.pi, 4097))
    assert abs(mass - 1.0) < 1e-7


def test_mu_star_symmetry(eq_ctx):
    th = np.linspace(0.1, np.pi - 0.1, 40)
    d1 = eq_ctx.mu_star_density(th)
    d2 = eq_ctx.mu_star_density(-th)
    assert np.max(np.abs(d1 - d2)) < 1e-7 * np.max(d1)


def test_mu_star_positive(eq_ctx):
    th = np.linspace(0, 2 * np.pi, 500, endpoint=False)
    assert np.all(eq_ctx.mu_star_density(th) > 0)


def test_potential_identity_at_3(eq_ctx, gf_ctx):
    # 3 int log|3 - e^{i theta}| dmu*(theta) = Re(g1+g2+g3)(3)
    th = np.linspace(0, 2 * np.pi, 8193)[:-1]
    dens = eq_ctx.mu_star_density(th)
    lhs = 3 * np.trapezoid(
        np.concatenate([dens * np.log(np.abs(3.0 - np.exp(1j * th))),
                        [dens[0] * np.log(2.0)]]),
        np.linspace(0, 2 * np.pi, 8193))
    rhs = sum(gf_ctx.g(3.0 + 1e-9j, j).real for j in (1, 2, 3))
    assert abs(lhs - rhs) < 1e-6 * (1 + abs(rhs))
