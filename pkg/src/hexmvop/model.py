"""Periodic weight parameters and the transition/weight matrices.

A model is an 18-parameter grid (a_jk, b_jk) of positive reals subject to
the product constraints that make 0 and infinity triple branch points of
the spectral curve and put the only zero eigenvalue at z = -1.  The three
transition matrices

    T_j(z) = [[a_j1, b_j1, 0], [0, a_j2, b_j2], [b_j3 z, 0, a_j3]]

multiply to the weight matrix W(z) = T_1 T_2 T_3 = z*Lmat + Umat whose
diagonal is forced to (z+1, z+1, z+1).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModel, ShapeViolation

#: margin for the strict inequality a11*b21 != a22*b11 or a12*b22 != a23*b12
STRICTNESS_MARGIN = 1e-6


@dataclass(frozen=True)
class PeriodicWeightModel:
    """3x3 grids of positive weights; row index = period row j, column = k."""

    a: np.ndarray
    b: np.ndarray
    tolerance: float = 1e-10

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != (3, 3) or b.shape != (3, 3):
            raise ValueError("a and b must be 3x3 grids")
        if not (np.all(a > 0) and np.all(b > 0)):
            raise ValueError("all 18 weights must be strictly positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        a.setflags(write=False)
        b.setflags(write=False)

    def to_json(self) -> str:
        return json.dumps({"a": self.a.tolist(), "b": self.b.tolist()})


@dataclass(frozen=True)
class ValidationReport:
    """Residuals of the nine equality constraints plus the two strict witnesses."""

    residuals: dict
    witnesses: tuple
    passed: bool

    def failed_constraints(self):
        return [k for k, v in self.residuals.items() if not v[1]]


@dataclass(frozen=True)
class WeightFactorization:
    """W(z) = z*Lmat + Umat together with the degree-1 factors T_j."""

    t_const: np.ndarray  # (3,3,3): T_j(0)
    t_lin: np.ndarray    # (3,3,3): d/dz T_j
    Lmat: np.ndarray
    Umat: np.ndarray
    w12: float
    w13: float
    w21: float
    w23: float
    w31: float
    w32: float

    def T(self, j: int, z):
        """T_j(z) for j in 1..3; z scalar or array (appended axes)."""
        return self.t_const[j - 1] + np.multiply.outer(np.asarray(z), self.t_lin[j - 1])

    def W(self, z):
        """W(z) = z*Lmat + Umat; z scalar or array."""
        return self.Umat + np.multiply.outer(np.asarray(z), self.Lmat)


def from_alphas(alpha1: float, alpha2: float, tolerance: float = 1e-10) -> PeriodicWeightModel:
    """Two-parameter family with b_jk = 1 and explicit a-grid.

    Raises DegenerateModel at (1, 1), where the curve degenerates to genus zero.
    """
    if alpha1 <= 0 or alpha2 <= 0:
        raise ValueError("alphas must be positive")
    if abs(alpha1 - 1) < 1e-14 and abs(alpha2 - 1) < 1e-14:
        raise DegenerateModel("(alpha1, alpha2) = (1, 1) forces beta = 0")
    a = np.array([
        [alpha1, 1.0 / alpha2, alpha2 / alpha1],
        [1.0 / alpha1, alpha2, alpha1 / alpha2],
        [1.0, 1.0, 1.0],
    ])
    b = np.ones((3, 3))
    return PeriodicWeightModel(a=a, b=b, tolerance=tolerance)


def from_json_file(path: str, tolerance: float = 1e-10) -> PeriodicWeightModel:
    """Load a model from JSON: either {"a": [[..]], "b": [[..]]} or {"alpha1":, "alpha2":}."""
    with open(path) as fh:
        data = json.load(fh)
    return from_dict(data, tolerance=tolerance)


def from_dict(data: dict, tolerance: float = 1e-10) -> PeriodicWeightModel:
    if "alpha1" in data:
        return from_alphas(float(data["alpha1"]), float(data["alpha2"]),
                           tolerance=float(data.get("tolerance", tolerance)))
    return PeriodicWeightModel(a=np.array(data["a"], dtype=float),
                               b=np.array(data["b"], dtype=float),
                               tolerance=float(data.get("tolerance", tolerance)))


def validate(model: PeriodicWeightModel) -> ValidationReport:
    """Check the nine product constraints and the two strict-inequality witnesses.

    Failures are reported, not raised.
    """
    a, b, tol = model.a, model.b, model.tolerance
    residuals = {}
    for k in range(3):
        r = a[0, k] * a[1, k] * a[2, k] - 1.0
        residuals[f"a_col_product_{k + 1}"] = (r, abs(r) <= tol)
    cyc = [((0, 0), (1, 1), (2, 2)), ((0, 1), (1, 2), (2, 0)), ((0, 2), (1, 0), (2, 1))]
    for i, idx in enumerate(cyc):
        r = b[idx[0]] * b[idx[1]] * b[idx[2]] - 1.0
        residuals[f"b_cycle_product_{i + 1}"] = (r, abs(r) <= tol)
    for j in range(3):
        r = a[j, 0] * a[j, 1] * a[j, 2] - b[j, 0] * b[j, 1] * b[j, 2]
        residuals[f"row_product_match_{j + 1}"] = (r, abs(r) <= tol)
    w1 = a[0, 0] * b[1, 0] - a[1, 1] * b[0, 0]
    w2 = a[0, 1] * b[1, 1] - a[1, 2] * b[0, 1]
    strict = abs(w1) + abs(w2) > STRICTNESS_MARGIN
    passed = strict and all(ok for _, ok in residuals.values())
    return ValidationReport(residuals=residuals, witnesses=(w1, w2), passed=passed)


def factorize(model: PeriodicWeightModel) -> WeightFactorization:
    """Build T_j, Lmat, Umat and read off the positive constants w_jk.

    Raises ShapeViolation if W's diagonal deviates from (z+1, z+1, z+1),
    which signals a constraint violation upstream.
    """
    a, b = model.a, model.b
    t_const = np.zeros((3, 3, 3))
    t_lin = np.zeros((3, 3, 3))
    for j in range(3):
        t_const[j] = np.diag(a[j])
        t_const[j][0, 1] = b[j, 0]
        t_const[j][1, 2] = b[j, 1]
        t_lin[j][2, 0] = b[j, 2]
    W0 = t_const[0] @ t_const[1] @ t_const[2]
    W1 = (t_const[0] + t_lin[0]) @ (t_const[1] + t_lin[1]) @ (t_const[2] + t_lin[2])
    Umat = W0
    Lmat = W1 - W0
    tol = max(model.tolerance, 1e-12)
    if (np.max(np.abs(np.diag(Umat) - 1.0)) > tol
            or np.max(np.abs(np.diag(Lmat) - 1.0)) > tol):
        raise ShapeViolation("W(z) diagonal is not (z+1, z+1, z+1); run validate()")
    # structural zeros of W(z) = z*L + U
    if max(abs(Umat[1, 0]), abs(Umat[2, 0]), abs(Umat[2, 1]),
           abs(Lmat[0, 1]), abs(Lmat[0, 2]), abs(Lmat[1, 2])) > tol:
        raise ShapeViolation("W(z) is not z*(lower) + (upper)")
    return WeightFactorization(
        t_const=t_const, t_lin=t_lin, Lmat=Lmat, Umat=Umat,
        w12=Umat[0, 1], w13=Umat[0, 2], w21=Lmat[1, 0],
        w23=Umat[1, 2], w31=Lmat[2, 0], w32=Lmat[2, 1],
    )
