"""Jacobi theta function theta_1(u | tau) for Im tau > 0.

The series  theta_1(u) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) pi u)
with nome q = exp(i pi tau) is summed with the dominant term factored out,
so arguments with large |Im u| (needed at the doubled modulus tau' = -2/tau
of the parametrix) neither overflow nor lose precision.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ThetaParams:
    tau: complex
    q: complex
    trunc: int

    @staticmethod
    def for_tau(tau: complex) -> "ThetaParams":
        tau = complex(tau)
        if tau.imag <= 0:
            raise ValueError("Im tau must be positive")
        q = np.exp(1j * np.pi * tau)
        # |q|^((trunc+1/2)^2) < 1e-17
        n = int(np.ceil(np.sqrt(17.0 * np.log(10.0) / (np.pi * tau.imag)))) + 2
        return ThetaParams(tau=tau, q=q, trunc=max(n, 4))


def theta1_scaled(u, params: ThetaParams):
    """(mantissa, log_scale) with theta_1(u) = mantissa * exp(log_scale).

    Broadcasts over arrays of u.  The scale is real; the mantissa is O(1)
    whenever u is O(1) away from the zero lattice.
    """
    u = np.asarray(u, dtype=complex)
    t0 = params.tau.imag
    y = u.imag
    # term n: log|.| ~ -pi t0 (n+1/2)^2 + (2n+1) pi |y|; peak near n* + 1/2 = |y|/t0
    nmax = params.trunc + int(np.ceil(np.max(np.abs(y), initial=0.0) / t0)) + 2
    scale = np.pi * np.abs(y) ** 2 / t0  # peak magnitude exponent
    n = np.arange(nmax + 1)
    # sin((2n+1) pi u) = (e^{i(2n+1)pi u} - e^{-i(2n+1)pi u}) / 2i, scaled by e^{-scale}
    ex = np.multiply.outer(1j * np.pi * u, 2 * n + 1)
    logq = 1j * np.pi * params.tau
    lg = np.multiply.outer(np.ones_like(u), (n + 0.5) ** 2) * logq
    sgn = (-1.0) ** n
    sc = scale[..., None] if scale.ndim else scale
    terms = sgn * (np.exp(lg + ex - sc) - np.exp(lg - ex - sc)) / 2j
    mant = 2.0 * terms.sum(axis=-1)
    return mant, np.broadcast_to(np.asarray(scale), mant.shape).copy()


def theta1(u, params: ThetaParams):
    """theta_1(u | tau); plain value (may overflow for extreme Im u)."""
    mant, scale = theta1_scaled(u, params)
    return mant * np.exp(scale)


def log_theta1(u, params: ThetaParams):
    """Principal-branch log of theta_1(u); log of the scaled mantissa plus scale."""
    mant, scale = theta1_scaled(u, params)
    return np.log(mant) + scale


def theta1_ratio(u_num, u_den, params: ThetaParams):
    """prod theta_1(u_num) / prod theta_1(u_den), numerically scale-balanced."""
    mant = 1.0 + 0j
    logsc = 0.0
    for u in np.atleast_1d(u_num):
        m, s = theta1_scaled(u, params)
        mant *= m
        logsc += s
    for u in np.atleast_1d(u_den):
        m, s = theta1_scaled(u, params)
        mant /= m
        logsc -= s
    return mant * np.exp(logsc)
