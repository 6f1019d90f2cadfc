"""Matrix-valued orthogonal polynomials for 3x3-periodic hexagon tilings.

Numerical laboratory for the genus-1 spectral curve, its equilibrium
measure, theta-function parametrices, strong MVOP asymptotics, and the
determinantal correlation kernel of the associated lozenge tilings.
"""

__version__ = "0.1.0"

from .model import (PeriodicWeightModel, ValidationReport,   # noqa: F401
                    WeightFactorization, factorize, from_alphas,
                    from_json_file, validate)
from .spectral import SpectralCurve, compute_beta            # noqa: F401
