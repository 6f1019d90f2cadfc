"""Determinantal correlation kernel for the 3x3-periodic hexagon.

Vertices live on the directed lattice with steps (1,0) (weight a) and
(1,1) (weight b); a vertex (m, n) decomposes as n = 3 M + k with residue
k in {0,1,2}, and the kernel value is the (k+1, k'+1) entry of

    - chi_{m > m'} [T_{m'->m}]_{M-M'}
    + sum_{i,j} [T_{m'->6N}]_{2N-M'-1-i}  R_ij  [T_{0->m}]_{M-j},

where [..]_d denotes the z^d coefficient and R_ij are the coefficient
matrices of the reproducing kernel R_N(z1, z2).  Both contour integrals of
the defining formula reduce to these coefficient extractions because every
integrand is Laurent-polynomial; an adaptive trapezoid evaluation is kept
as the independent quadrature route.

R_N comes from the entire bottom block [U(z) V(z)] of Y(z)^{-1}
(polynomials of degree <= N), interpolated by FFT from circle samples,
via R_N (z2 - z1) = U(z1) P_N(z2) + V(z1) Q_{N-1}(z2).

A brute-force Lindstrom-Gessel-Viennot oracle enumerates the N = 1 path
systems exhaustively for validation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureUnresolved
from .model import WeightFactorization
from .mvop import MatrixPolynomial, MVOPSolution, YEvaluator


# ---------------------------------------------------------------------------
# transition products


def transition_matrix(fact: WeightFactorization, level: int) -> MatrixPolynomial:
    """T at horizontal level ``level`` in 1..6N: factor T_{((level-1) mod 3)+1}."""
    j = (level - 1) % 3 + 1
    c = np.zeros((2, 3, 3), dtype=complex)
    c[0] = fact.t_const[j - 1]
    c[1] = fact.t_lin[j - 1]
    return MatrixPolynomial(c)


def transition_product_poly(fact: WeightFactorization, j: int,
                            jp: int) -> MatrixPolynomial:
    """T_{j -> j'}(z) = T_{j+1} ... T_{j'} as a matrix polynomial."""
    if jp < j:
        raise ValueError("need j <= j'")
    out = MatrixPolynomial(np.eye(3, dtype=complex)[None, :, :])
    for lev in range(j + 1, jp + 1):
        out = out.matmul(transition_matrix(fact, lev))
    return out


def transition_product(fact: WeightFactorization, j: int, jp: int, z) -> np.ndarray:
    """The product evaluated at z."""
    return transition_product_poly(fact, j, jp)(z)


# ---------------------------------------------------------------------------
# reproducing kernel as a bivariate polynomial


def uv_from_inverse(yev: YEvaluator, rho: float = 1.25):
    """Bottom block of Y^{-1} by FFT interpolation of inverted samples.

    Carries the Y-inversion roundoff (~kappa(Y) * eps); used as a
    cross-check of the dual-system route below.
    """
    N = yev.sol.N
    M = 1 << int(np.ceil(np.log2(3 * N + 8)))
    th = 2 * np.pi * np.arange(M) / M
    zs = rho * np.exp(1j * th)
    samples = np.empty((M, 3, 6), dtype=complex)
    for i, z in enumerate(zs):
        Yi = np.linalg.inv(yev.Y(z))
        samples[i] = Yi[3:, :]
    fft = np.fft.fft(samples, axis=0) / M
    coeffs = np.stack([fft[k] / rho ** k for k in range(N + 1)])
    U = MatrixPolynomial(np.ascontiguousarray(coeffs[:N, :, :3]))
    V = MatrixPolynomial(np.ascontiguousarray(coeffs[:, :, 3:]))
    return U, V


def uv_polynomials(yev: YEvaluator):
    """Entire bottom block [U(z) V(z)] of Y(z)^{-1} via the dual system.

    Conjugating the inverse-transpose RH problem by the block swap shows
    that V^T is the monic MVOP of the transposed moment table and U^T its
    degree-(N-1) partner with normalization +I, so both come from the same
    exact-precision Hankel solve; no numerically inverted Y is involved.
    """
    import mpmath as mp
    from .mvop import _lu_solve_object, _moments_exact, _dps_for
    sol = yev.sol
    N = sol.N
    with mp.workdps(_dps_for(N)):
        A = _moments_exact(yev.fact, N)
        At = np.empty_like(A)
        for m in range(A.shape[0]):
            At[m] = A[m].T
        H = np.full((3 * N, 3 * N), mp.mpf(0), dtype=object)
        for k in range(N):
            for j in range(N):
                H[3 * k:3 * k + 3, 3 * j:3 * j + 3] = At[2 * N - 1 - k - j]
        rhs = np.full((3 * N, 6), mp.mpf(0), dtype=object)
        for j in range(N):
            rhs[3 * j:3 * j + 3, :3] = -At[N - 1 - j].T
        rhs[3 * (N - 1):, 3:] = np.eye(3, dtype=int)   # dual sign: +I
        X = _lu_solve_object(H.T, rhs)
        # solve blocks are (tilde coeff)^T; V_k = (tilde P_k)^T and
        # U_k = (tilde Q_k)^T, so the two transposes cancel
        cV = np.full((N + 1, 3, 3), mp.mpf(0), dtype=object)
        cU = np.full((N, 3, 3), mp.mpf(0), dtype=object)
        for k in range(N):
            cV[k] = X[3 * k:3 * k + 3, :3]
            cU[k] = X[3 * k:3 * k + 3, 3:]
        cV[N] = np.eye(3, dtype=int)
        V = MatrixPolynomial(_obj_to_c(cV), exact=cV, exact_dps=_dps_for(N))
        U = MatrixPolynomial(_obj_to_c(cU), exact=cU, exact_dps=_dps_for(N))
    return U, V


def _obj_to_c(arr):
    out = np.empty(arr.shape, dtype=complex)
    for idx in np.ndindex(arr.shape):
        out[idx] = complex(arr[idx])
    return out


def r_kernel_coeffs(yev: YEvaluator, return_exact: bool = False):
    """Coefficient blocks R[i, j] of R_N(z1, z2), each 3x3, i, j = 0..N-1.

    B(z1, z2) = U(z1) P(z2) + V(z1) Q(z2) vanishes on z1 = z2, and the
    division by (z2 - z1) runs as the exact recurrence R_{b-1} = B_b + z1 R_b
    on the z2-coefficient stack, in the same working precision as the
    solves when exact coefficients are available.
    """
    import mpmath as mp
    N = yev.sol.N
    U, V = uv_polynomials(yev)
    P, Q = yev.sol.P, yev.sol.Q
    exact = P.exact is not None and U.exact is not None

    def blocks(poly):
        return poly.exact if exact else poly.coeffs

    zero = mp.mpf(0) if exact else 0.0
    dt = object if exact else complex
    Uc, Vc, Pc, Qc = blocks(U), blocks(V), blocks(P), blocks(Q)
    with mp.workdps(P.exact_dps if exact else 15):
        B = []
        for b in range(N + 1):
            term = np.full((N + 1, 3, 3), zero, dtype=dt)
            if b <= P.deg:
                for a in range(U.deg + 1):
                    term[a] = term[a] + Uc[a] @ Pc[b]
            if b <= Q.deg:
                for a in range(V.deg + 1):
                    term[a] = term[a] + Vc[a] @ Qc[b]
            B.append(term)
        R = [None] * (N + 1)
        R[N] = np.full((N + 2, 3, 3), zero, dtype=dt)
        for b in range(N, 0, -1):
            cur = np.full((N + 2, 3, 3), zero, dtype=dt)
            cur[1:] = R[b][:-1]
            cur[:N + 1] = cur[:N + 1] + B[b]
            R[b - 1] = cur
        rem = B[0].copy()
        rem[1:] = rem[1:] + R[0][:N]
        remmax = max(abs(complex(v)) for v in np.ravel(rem))
        scale = max(max(abs(complex(v)) for v in np.ravel(np.array(B[0]))),
                    1e-300)
    if remmax > 1e-8 * scale:
        raise QuadratureUnresolved(
            f"R_N division remainder {remmax:.2e} (rel {remmax / scale:.2e})")
    out = np.zeros((N, N, 3, 3), dtype=complex)
    for j in range(N):
        for i in range(N):
            out[i, j] = np.array([[complex(v) for v in row] for row in R[j][i]])
    if return_exact:
        out_e = np.empty((N, N, 3, 3), dtype=object)
        for j in range(N):
            for i in range(N):
                out_e[i, j] = R[j][i]
        return out, out_e
    return out


def reproducing_kernel(yev: YEvaluator, z1: complex, z2: complex,
                       coeffs: np.ndarray | None = None) -> np.ndarray:
    """R_N(z1, z2), from coefficients when given, else from Y directly."""
    if coeffs is not None:
        N = coeffs.shape[0]
        p1 = z1 ** np.arange(N)
        p2 = z2 ** np.arange(N)
        return np.einsum("i,ijab,j->ab", p1, coeffs, p2)
    return yev.reproducing_kernel(z1, z2)


# ---------------------------------------------------------------------------
# the correlation kernel


@dataclass
class TilingKernel:
    """Exact-coefficient Appendix-style kernel for hexagon size 3N."""

    fact: WeightFactorization
    sol: MVOPSolution
    yev: YEvaluator
    R: np.ndarray                  # (N, N, 3, 3)
    T_from0: list                  # T_{0->m} polynomials, m = 0..6N
    T_to_end: list                 # T_{m->6N} polynomials

    @property
    def N(self) -> int:
        return self.sol.N

    @staticmethod
    def build(fact: WeightFactorization, sol: MVOPSolution) -> "TilingKernel":
        yev = YEvaluator(sol, fact, mode="exact")
        R = r_kernel_coeffs(yev)
        N = sol.N
        ident = MatrixPolynomial(np.eye(3, dtype=complex)[None, :, :])
        T_from0 = [ident]
        for lev in range(1, 6 * N + 1):
            T_from0.append(T_from0[-1].matmul(transition_matrix(fact, lev)))
        T_to_end = [None] * (6 * N + 1)
        T_to_end[6 * N] = ident
        for lev in range(6 * N, 0, -1):
            T_to_end[lev - 1] = transition_matrix(fact, lev).matmul(T_to_end[lev])
        return TilingKernel(fact=fact, sol=sol, yev=yev, R=R,
                            T_from0=T_from0, T_to_end=T_to_end)

    def _coeff(self, poly: MatrixPolynomial, d: int) -> np.ndarray:
        if 0 <= d <= poly.deg:
            return poly.coeffs[d]
        return np.zeros((3, 3), dtype=complex)

    def kernel_matrix(self, v1, v2) -> np.ndarray:
        """Full 3x3 kernel block for vertices v1 = (m, n), v2 = (m', n')."""
        N = self.N
        m, n = v1
        mp_, np_ = v2
        if not (0 <= m <= 6 * N and 0 <= mp_ <= 6 * N):
            raise ValueError("levels must lie in 0..6N")
        M1, M2 = n // 3, np_ // 3
        single = np.zeros((3, 3), dtype=complex)
        if m > mp_:
            single = -self._coeff(
                transition_product_poly(self.fact, mp_, m), M1 - M2)
        A1 = self.T_to_end[mp_]
        A2 = self.T_from0[m]
        dbl = np.zeros((3, 3), dtype=complex)
        for i in range(N):
            c1 = self._coeff(A1, 2 * N - M2 - 1 - i)
            if not c1.any():
                continue
            for j in range(N):
                c2 = self._coeff(A2, M1 - j)
                if not c2.any():
                    continue
                dbl += c1 @ self.R[i, j] @ c2
        return single + dbl

    def kernel_entry(self, v1, v2) -> float:
        """K(v1, v2): the kernel-matrix entry at (k'+1, k+1).

        The transition matrices are source-row / target-column (the b_{j1}
        step from residue 0 to 1 sits at entry (1, 2)), so in the product
        T_{m'->6N} R T_{0->m} the rows carry v2's residue and the columns
        v1's; validated entry-by-entry against exhaustive path enumeration.
        """
        K = self.kernel_matrix(v1, v2)
        val = K[v2[1] % 3, v1[1] % 3]
        return float(val.real)

    def kernel_matrix_quad(self, v1, v2, n_nodes: int = 512,
                           tol: float = 1e-6) -> np.ndarray:
        """Adaptive double-contour trapezoid evaluation (independent route)."""
        prev = self._kernel_quad_once(v1, v2, n_nodes)
        cur = self._kernel_quad_once(v1, v2, 2 * n_nodes)
        if np.max(np.abs(cur - prev)) > tol:
            raise QuadratureUnresolved("kernel quadrature did not stabilize")
        return cur

    def _kernel_quad_once(self, v1, v2, n_nodes) -> np.ndarray:
        N = self.N
        m, n = v1
        mp_, np_ = v2
        M1, M2 = n // 3, np_ // 3
        th = 2 * np.pi * np.arange(n_nodes) / n_nodes
        zs = np.exp(1j * th)
        single = np.zeros((3, 3), dtype=complex)
        if m > mp_:
            Tpoly = transition_product_poly(self.fact, mp_, m)
            vals = np.stack([Tpoly(z) * z ** (-(M1 - M2)) for z in zs])
            single = -np.tensordot(np.ones(n_nodes) / n_nodes, vals, axes=(0, 0))
        A1 = self.T_to_end[mp_]
        A2 = self.T_from0[m]
        f1 = np.stack([A1(z) * z ** (-(2 * N - M2)) for z in zs])
        f2 = np.stack([A2(z) * z ** (-M1) for z in zs])
        p = zs[:, None] ** np.arange(N)[None, :]
        T1 = np.einsum("ai,acd->icd", p, f1 * (zs / n_nodes)[:, None, None])
        T2 = np.einsum("bj,bcd->jcd", p, f2 / n_nodes)   # dz2/z2 measure
        dbl = np.einsum("icd,ijde,jef->cf", T1, self.R, T2)
        return single + dbl

    # -- density maps ------------------------------------------------------

    def region_heights(self, m: int):
        """Inclusive height range of the path region at level m."""
        N = self.N
        lo = max(0, m - 3 * N)
        hi = 3 * N - 1 + min(m, 3 * N)
        return lo, hi

    def occupation_column(self, m: int) -> np.ndarray:
        """K((m,n),(m,n)) for all heights in the region at level m."""
        lo, hi = self.region_heights(m)
        return np.array([self.kernel_entry((m, n), (m, n))
                         for n in range(lo, hi + 1)])

    def density_map(self) -> list:
        """Per-site lozenge densities.

        For each vertex (m, n) with m < 6N the three local densities are
          blue  = P(horizontal step out of (m, n))   [a-weighted lozenge]
          red   = P(diagonal step out of (m, n))     [b-weighted lozenge]
          yellow = 1 - occupation                     [empty / horizontal tile]
        derived from occupation columns via the telescoping identity
        red(m, n) = sum_{n' > n} (occ_{m+1}(n'+1) - occ_m(n'+1)).
        """
        N = self.N
        occ = {m: self.occupation_column(m) for m in range(6 * N + 1)}
        out = []
        for m in range(6 * N):
            lo, hi = self.region_heights(m)
            lo1, hi1 = self.region_heights(m + 1)
            occ_m = occ[m]
            occ_m1 = occ[m + 1]

            def occv(col, c_lo, c_hi, n):
                return col[n - c_lo] if c_lo <= n <= c_hi else 0.0

            red_next = 0.0
            red = {}
            for n in range(hi + 1, lo - 1, -1):
                red[n] = red_next + occv(occ_m1, lo1, hi1, n + 1) \
                    - occv(occ_m, lo, hi, n + 1)
                red_next = red[n]
            for n in range(lo, hi + 1):
                o = occv(occ_m, lo, hi, n)
                r = min(max(red[n], 0.0), 1.0)
                b = min(max(o - r, 0.0), 1.0)
                out.append((m, n, o, b, r, 1.0 - o))
        return out


# ---------------------------------------------------------------------------
# brute-force oracle (exhaustive LGV enumeration at small N)


def _paths(start: int, end: int, length: int):
    """All up-right paths as height tuples h_0..h_length."""
    ups = end - start
    out = []
    for pos in itertools.combinations(range(length), ups):
        h = [start]
        for step in range(length):
            h.append(h[-1] + (1 if step in pos else 0))
        out.append(tuple(h))
    return out


class BruteForce:
    """Exhaustive path ensemble for the size-3 hexagon (N = 1)."""

    def __init__(self, model_a: np.ndarray, model_b: np.ndarray, N: int = 1):
        self.a = model_a
        self.b = model_b
        self.N = N
        n = 3 * N
        singles = [_paths(s, s + n, 2 * n) for s in range(n)]
        self.configs = []
        self.weights = []
        for combo in itertools.product(*singles):
            ok = True
            for lev in range(2 * n + 1):
                hs = [p[lev] for p in combo]
                if len(set(hs)) != len(hs):
                    ok = False
                    break
            if ok:
                self.configs.append(combo)
                self.weights.append(self._weight(combo))
        self.weights = np.array(self.weights)
        self.Z = self.weights.sum()

    def _edge_weight(self, x: int, y: int, diag: bool) -> float:
        j = x % 3
        k = y % 3
        return self.b[j, k] if diag else self.a[j, k]

    def _weight(self, combo) -> float:
        w = 1.0
        for p in combo:
            for x in range(len(p) - 1):
                w *= self._edge_weight(x, p[x], p[x + 1] > p[x])
        return w

    def occupation(self, v) -> float:
        m, n = v
        tot = 0.0
        for cfg, w in zip(self.configs, self.weights):
            if any(p[m] == n for p in cfg):
                tot += w
        return tot / self.Z

    def joint(self, v1, v2) -> float:
        tot = 0.0
        for cfg, w in zip(self.configs, self.weights):
            if (any(p[v1[0]] == v1[1] for p in cfg)
                    and any(p[v2[0]] == v2[1] for p in cfg)):
                tot += w
        return tot / self.Z

    def edge_densities(self, m: int, n: int):
        """(blue, red) usage probabilities of the two steps out of (m, n)."""
        blue = red = 0.0
        for cfg, w in zip(self.configs, self.weights):
            for p in cfg:
                if p[m] == n and m < len(p) - 1:
                    if p[m + 1] == n:
                        blue += w
                    else:
                        red += w
        return blue / self.Z, red / self.Z

    def count(self) -> int:
        return len(self.configs)
