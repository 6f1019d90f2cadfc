import numpy as np
import pytest

from hexmvop import model as mdl
from hexmvop import spectral


@pytest.fixture(scope="session")
def model02():
    return mdl.from_alphas(0.2, 2.0)


@pytest.fixture(scope="session")
def fact(model02):
    return mdl.factorize(model02)


@pytest.fixture(scope="session")
def curve(model02):
    return spectral.compute_beta(model02)


@pytest.fixture(scope="session")
def chart(curve, fact):
    from hexmvop import surface
    return surface.compute_periods(curve, fact)


@pytest.fixture(scope="session")
def special(fact, curve):
    from hexmvop import eigensystem
    return eigensystem.locate_oval_zeros(fact, curve)


@pytest.fixture(scope="session")
def eq_ctx(chart):
    from hexmvop import equilibrium
    return equilibrium.build_context(chart)


@pytest.fixture(scope="session")
def gf_ctx(chart, eq_ctx, fact):
    from hexmvop import gfun
    return gfun.build_context(chart, eq_ctx, fact)


@pytest.fixture(scope="session")
def parametrices(chart, fact, curve, gf_ctx, special):
    from hexmvop import parametrix
    even = parametrix.build_M(chart, fact, curve, special, parity="even")
    odd = parametrix.build_M(chart, fact, curve, special, parity="odd")
    return {"even": even, "odd": odd}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
