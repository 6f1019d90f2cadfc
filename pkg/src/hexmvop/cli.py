"""Command-line interface: one tool, subcommands per module, CSV/JSON out.

Context construction (surface chart, equilibrium, g-functions) dominates
start-up, so built contexts are pickled into a cache keyed by the content
hash of the model parameters; MVOP_CACHE_DIR overrides the location.
All floats are serialized with 17 significant digits so CSV bodies
round-trip and re-runs are byte-identical.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import pickle
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import equilibrium as eqm
from . import eigensystem as es
from . import gfun as gfn
from . import model as mdl
from . import mvop, parametrix, spectral, surface, tiling
from .errors import HexmvopError

EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _fmt(x) -> str:
    return f"{x:.17g}"


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.complexfloating):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _write_csv(path: Path, header: list, rows):
    with open(path, "w") as fh:
        fh.write("# schema=hexmvop-1\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _load_model(args) -> mdl.PeriodicWeightModel:
    if args.alphas:
        a1, a2 = (float(v) for v in args.alphas.split(","))
        return mdl.from_alphas(a1, a2)
    if args.model:
        return mdl.from_json_file(args.model)
    raise SystemExit("need --model <json> or --alphas a1,a2")


def _cache_dir(args) -> Path:
    d = os.environ.get("MVOP_CACHE_DIR")
    if args.cache_dir:
        d = args.cache_dir
    if d is None:
        d = Path.home() / ".cache" / "hexmvop"
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


class Pipeline:
    """Lazily built, cached chain of contexts for one model."""

    def __init__(self, model, cache_dir: Path | None):
        self.model = model
        self._cache_dir = cache_dir
        self._loaded = {}

    @property
    def fact(self):
        return self._cached("fact", lambda: mdl.factorize(self.model))

    @property
    def curve(self):
        return self._cached("curve", lambda: spectral.compute_beta(self.model))

    def _key(self) -> str:
        h = hashlib.sha256()
        h.update(self.model.to_json().encode())
        h.update(__version__.encode())
        return h.hexdigest()[:24]

    def _cached(self, name, builder):
        if name in self._loaded:
            return self._loaded[name]
        if self._cache_dir is not None:
            f = self._cache_dir / f"{self._key()}-{name}.pkl"
            if f.exists():
                try:
                    with open(f, "rb") as fh:
                        obj = pickle.load(fh)
                    self._loaded[name] = obj
                    return obj
                except Exception:
                    f.unlink(missing_ok=True)
        obj = builder()
        self._loaded[name] = obj
        if self._cache_dir is not None:
            with open(self._cache_dir / f"{self._key()}-{name}.pkl", "wb") as fh:
                pickle.dump(obj, fh)
        return obj

    @property
    def chart(self):
        return self._cached("chart", lambda: surface.compute_periods(
            self.curve, self.fact))

    @property
    def eq(self):
        return self._cached("eq", lambda: eqm.build_context(self.chart))

    @property
    def gf(self):
        return self._cached("gf", lambda: gfn.build_context(
            self.chart, self.eq, self.fact))

    @property
    def special(self):
        return es.locate_oval_zeros(self.fact, self.curve)

    @property
    def parametrices(self):
        return self._cached("parametrices", lambda: {
            p: parametrix.build_M(self.chart, self.fact, self.curve,
                                  self.special, p) for p in ("even", "odd")})


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(pipe, args, out: Path):
    rep = mdl.validate(pipe.model)
    payload = {
        "passed": rep.passed,
        "residuals": {k: v[0] for k, v in rep.residuals.items()},
        "strict_witnesses": list(rep.witnesses),
    }
    print(json.dumps(_jsonable(payload), indent=2))
    return 0 if rep.passed else EXIT_VALIDATION


def cmd_spectral(pipe, args, out: Path):
    c = pipe.curve
    with open(out / "spectral.json", "w") as fh:
        json.dump(_jsonable({"beta": c.beta, "z_min": c.z_min,
                             "z_max": c.z_max, "c_lambda": c.c_lambda}), fh,
                  indent=2)
    radii, nth = (0.2, 2.5, 8), 48
    if args.grid:
        r0, r1, nr, nth = (float(v) for v in args.grid.split(","))
        radii = (r0, r1, int(nr))
        nth = int(nth)
    rows = []
    for r in np.linspace(*radii):
        for th in np.linspace(0, 2 * np.pi, nth, endpoint=False):
            z = r * np.exp(1j * th)
            if abs(z.imag) < 1e-12:
                z += 1e-9j
            t = spectral.eigenvalues_ordered(c, z, on_cut=True)
            rows.append([z.real, z.imag] + [x for lam in t.as_array
                                            for x in (lam.real, lam.imag)])
    _write_csv(out / "spectral.csv",
               ["z_re", "z_im", "lam1_re", "lam1_im", "lam2_re", "lam2_im",
                "lam3_re", "lam3_im"], rows)
    print(json.dumps(_jsonable({"beta": c.beta, "z_min": c.z_min,
                                "z_max": c.z_max, "rows": len(rows)})))
    return 0


def cmd_eigensystem(pipe, args, out: Path):
    sp = pipe.special
    payload = {"z_star": sp.z_star, "lambda_star": sp.lambda_star,
               "q_star": list(sp.q_star),
               "q_j_star": [{"z": q[0], "lambda": q[1], "sheet": q[2]}
                            for q in sp.q_j_star]}
    with open(out / "eigensystem.json", "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
    rows = []
    for r in np.linspace(0.3, 2.0, 18):
        for th in np.linspace(0.1, 2 * np.pi - 0.1, 36):
            z = r * np.exp(1j * th)
            try:
                fr = es.eigenvector_matrix(pipe.fact, pipe.curve, z)
            except HexmvopError:
                continue
            rows.append([z.real, z.imag, fr.detE.real, fr.detE.imag])
    _write_csv(out / "detE.csv", ["z_re", "z_im", "detE_re", "detE_im"], rows)
    print(json.dumps(_jsonable(payload)))
    return 0


def cmd_surface(pipe, args, out: Path):
    ch = pipe.chart
    payload = {"tau_im": ch.tau.imag,
               "abel_special": {k: v for k, v in ch.abel_special.items()}}
    with open(out / "surface.json", "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
    th = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    for sheet in (1, 2):
        rows = [[t, ch.torus_coordinate_on_b(t, sheet)] for t in th]
        _write_csv(out / f"gamma{sheet}.csv", ["theta", "y"], rows)
    rows = [[t, ch.abel_on_gamma3(t).imag] for t in th]
    _write_csv(out / "gamma3.csv", ["theta", "y"], rows)
    print(json.dumps(_jsonable({"tau_im": ch.tau.imag})))
    return 0


def _equilibrium_artifacts(pipe, out: Path) -> dict:
    eq = pipe.eq
    th = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    dens = eq.mu_star_density(th)
    _write_csv(out / "mu_star.csv", ["theta", "density"],
               np.column_stack([th, dens]))
    ys = np.linspace(0, eq.t0, 512, endpoint=False)
    _write_csv(out / "torus_density.csv", ["y", "density"],
               np.column_stack([ys, eq.torus_density(ys)]))
    rep = eqm.variational_check(eq, pipe.gf)
    mass_star = float(np.trapezoid(np.concatenate([dens, dens[:1]]),
                                   np.concatenate([th, [2 * np.pi]])))
    payload = {"mass_mu": eq.mass, "mass_mu_star": mass_star,
               "ell": pipe.gf.ell, "h_max_on_b": rep["h_max_on_support"],
               "h_min_on_gamma3": rep["h_min_on_gamma3"],
               "s_property_residual": rep["s_property_residual"],
               "sign_pattern_ok": rep["sign_pattern_ok"]}
    with open(out / "equilibrium.json", "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
    return payload


def cmd_equilibrium(pipe, args, out: Path):
    payload = _equilibrium_artifacts(pipe, out)
    print(json.dumps(_jsonable(payload)))
    ok = (abs(payload["mass_mu"] - 1) < 1e-7
          and payload["h_max_on_b"] < 1e-6
          and payload["h_min_on_gamma3"] > 0 and payload["sign_pattern_ok"])
    return 0 if ok else EXIT_NUMERICAL


def cmd_gfun(pipe, args, out: Path):
    gf = pipe.gf
    zs = [complex(v) for v in (args.at or "2+0j,0.3+0j,3j").split(",")]
    rows = []
    for z in zs:
        if z.imag == 0:
            z = z + 1e-9j * (1 + abs(z))
        row = {"z": z}
        for j in (1, 2, 3):
            row[f"g{j}"] = gf.g(z, j)
            row[f"phi{j}"] = gf.phi(z, j)
        rows.append(row)
    payload = {"rows": rows, "ell": gf.ell, "ell_hat": gf.ell_hat,
               "a1": gf.a1, "a2": gf.a2,
               "L": gf.Lmatrix.tolist()}
    with open(out / "gfun.json", "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
    print(json.dumps(_jsonable(payload)))
    return 0


def cmd_parametrix(pipe, args, out: Path):
    pp = pipe.parametrices[args.parity]
    zs = [complex(v) for v in (args.at or "2+1j,0.5+0.4j").split(",")]
    rows = []
    for z in zs:
        if z.imag == 0:
            z = z + 1e-9j * (1 + abs(z))
        M = pp.M(z)
        A = pp.A_N(z)
        rows.append({"z": z, "M": M.ravel().tolist(),
                     "A_N": A.ravel().tolist()})
    with open(out / f"parametrix_{args.parity}.json", "w") as fh:
        json.dump(_jsonable({"rows": rows}), fh, indent=2)
    print(json.dumps(_jsonable({"parity": args.parity, "n": len(rows)})))
    return 0


def _zero_rows(pipe, N):
    sol = mvop.solve_mvop(pipe.fact, N)
    zs = mvop.det_and_zeros(sol.P)
    order = np.lexsort((zs.roots.imag, zs.roots.real))
    return [[zs.roots[i].real, zs.roots[i].imag] for i in order]


def cmd_zeros(pipe, args, out: Path):
    rows = _zero_rows(pipe, args.N)
    _write_csv(out / "zeros.csv", ["re", "im"], rows)
    print(json.dumps({"N": args.N, "count": len(rows)}))
    return 0


def cmd_asymptotics(pipe, args, out: Path):
    zs = [complex(v) for v in (args.at or "2+0j,0.3+0j,3j").split(",")]
    Ns = [int(v) for v in (args.Ns or "4,8,12,16").split(",")]
    gf, pps = pipe.gf, pipe.parametrices
    rows = []
    def one(N):
        sol = mvop.solve_mvop(pipe.fact, N)
        return [(N, z, mvop.asymptotic_error(sol, gf, pps, z)) for z in zs]
    with ThreadPoolExecutor(max_workers=args.threads) as ex:
        for chunk in ex.map(one, Ns):
            rows.extend(chunk)
    rows.sort(key=lambda r: (r[0], r[1].real, r[1].imag))
    _write_csv(out / "decay.csv", ["N", "z_re", "z_im", "error"],
               [[N, z.real, z.imag, e] for (N, z, e) in rows])
    print(json.dumps(_jsonable({"rows": [[N, _jsonable(z), e]
                                         for (N, z, e) in rows]})))
    return 0


def cmd_mvop(pipe, args, out: Path):
    sol = mvop.solve_mvop(pipe.fact, args.N)
    payload = {"N": args.N, "ortho_residual": sol.ortho_residual,
               "norm_residual": sol.norm_residual}
    if args.zeros:
        rows = _zero_rows(pipe, args.N)
        _write_csv(out / args.zeros, ["re", "im"], rows)
        payload["zeros"] = len(rows)
    if args.at:
        payload["asymptotic_errors"] = {
            v: mvop.asymptotic_error(sol, pipe.gf, pipe.parametrices,
                                     complex(v))
            for v in args.at.split(",")}
    print(json.dumps(_jsonable(payload)))
    return 0


def cmd_kernel(pipe, args, out: Path):
    sol = mvop.solve_mvop(pipe.fact, args.N)
    kern = tiling.TilingKernel.build(pipe.fact, sol)
    payload = {"N": args.N}
    if args.at:
        x, y, xp, yp = (int(v) for v in args.at.split(","))
        K = kern.kernel_entry((x, y), (xp, yp))
        payload["K"] = K
    name = args.map or "kernel_map.csv"
    dm = kern.density_map()
    rows = []
    for (mm, n, occ, blue, red, yellow) in dm:
        rows.append([mm, n, 0, occ])
        rows.append([mm, n, 1, blue])
        rows.append([mm, n, 2, red])
        rows.append([mm, n, 3, yellow])
    _write_csv(out / name, ["col", "row", "lozenge_type", "probability"], rows)
    payload["sites"] = len(dm)
    print(json.dumps(_jsonable(payload)))
    return 0


def cmd_verify_all(pipe, args, out: Path):
    """Condensed invariant battery + artifact emission; nonzero on failure."""
    checks = {}
    rep = mdl.validate(pipe.model)
    checks["constraints"] = rep.passed
    c = pipe.curve
    checks["zmin_zmax_product"] = abs(c.z_min * c.z_max - 1) < 1e-12
    ch = pipe.chart
    checks["tau_imaginary"] = abs(ch.tau.real) < 1e-8
    t0 = ch.t0

    def md(u, v):
        dx = (u.real - v) % 1.0
        return min(dx, 1 - dx) + abs(u.imag)

    checks["abel_anchors"] = (
        md(ch.abel_special["P0"], 5 / 6) < 1e-6
        and md(ch.abel_special["Pinf"], 1 / 6) < 1e-6
        and md(ch.abel_special["B0"], 0.0) < 1e-6)
    eq = pipe.eq
    checks["mass_mu"] = abs(eq.mass - 1) < 1e-7
    vrep = eqm.variational_check(eq, pipe.gf)
    checks["variational"] = (vrep["h_max_on_support"] < 1e-6
                             and vrep["h_min_on_gamma3"] > 0
                             and vrep["sign_pattern_ok"]
                             and vrep["s_property_residual"] < 1e-4)
    gf = pipe.gf
    checks["ell_hat_constancy"] = gf.ell_hat_std < 1e-7
    checks["a_real"] = gf.a_coeff_imag < 1e-8

    _equilibrium_artifacts(pipe, out)
    N = args.N or 8
    rows = _zero_rows(pipe, N)
    _write_csv(out / "zeros.csv", ["re", "im"], rows)
    checks["zero_count"] = len(rows) == 3 * N

    zs = [2.0 + 0j, 0.3 + 0j, 3j]
    Ns = [4, 8, 12, 16]
    drows = []
    for NN in Ns:
        sol = mvop.solve_mvop(pipe.fact, NN)
        for z in zs:
            drows.append([NN, z.real, z.imag,
                          mvop.asymptotic_error(sol, gf, pipe.parametrices, z)])
    _write_csv(out / "decay.csv", ["N", "z_re", "z_im", "error"], drows)
    by_z = {}
    for (NN, zr, zi, e) in drows:
        by_z.setdefault((zr, zi), []).append(e)
    checks["asymptotic_decay"] = all(
        (v[-1] / v[0]) ** (1 / 3) < 0.8 for v in by_z.values())

    kn = min(N, 2)
    solk = mvop.solve_mvop(pipe.fact, kn)
    kern = tiling.TilingKernel.build(pipe.fact, solk)
    dm = kern.density_map()
    rows = []
    for (mm, n, occ, blue, red, yellow) in dm:
        rows.append([mm, n, 0, occ])
        rows.append([mm, n, 1, blue])
        rows.append([mm, n, 2, red])
        rows.append([mm, n, 3, yellow])
    _write_csv(out / "kernel_map.csv",
               ["col", "row", "lozenge_type", "probability"], rows)
    cons = [abs(kern.occupation_column(mlev).sum() - 3 * kn)
            for mlev in range(0, 6 * kn + 1)]
    checks["kernel_conservation"] = max(cons) < 1e-5

    payload = {"checks": checks, "all_passed": all(checks.values()),
               "N": N, "model": json.loads(pipe.model.to_json())}
    with open(out / "verify_all.json", "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
    if args.format == "csv":
        print("check,passed")
        for k, v in checks.items():
            print(f"{k},{int(v)}")
        print(f"all_passed,{int(all(checks.values()))}")
    else:
        print(json.dumps(_jsonable(payload), indent=2))
    return 0 if all(checks.values()) else EXIT_NUMERICAL


COMMANDS = {
    "validate": cmd_validate,
    "spectral": cmd_spectral,
    "eigensystem": cmd_eigensystem,
    "surface": cmd_surface,
    "equilibrium": cmd_equilibrium,
    "gfun": cmd_gfun,
    "parametrix": cmd_parametrix,
    "mvop": cmd_mvop,
    "zeros": cmd_zeros,
    "asymptotics": cmd_asymptotics,
    "kernel": cmd_kernel,
    "verify-all": cmd_verify_all,
}


def main(argv=None):
    ap = argparse.ArgumentParser(prog="hexmvop")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--model", help="JSON parameter file")
    ap.add_argument("--alphas", help="a1,a2 for the two-parameter family")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--N", type=int, default=None)
    ap.add_argument("--Ns", help="comma list of N values (asymptotics)")
    ap.add_argument("--at", help="comma list of evaluation points")
    ap.add_argument("--grid", help="r0,r1,nr,ntheta for spectral grids")
    ap.add_argument("--map", help="kernel density map CSV name")
    ap.add_argument("--zeros", help="zeros CSV name (mvop)")
    ap.add_argument("--parity", choices=("even", "odd"), default="even")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--cache-dir", default=None)
    ap.add_argument("--no-cache", action="store_true")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    args = ap.parse_args(argv)

    try:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        model = _load_model(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot load model: {exc}", file=sys.stderr)
        return EXIT_IO
    except HexmvopError as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.command != "validate":
        rep = mdl.validate(model)
        if not rep.passed:
            print(json.dumps({"error": "model fails constraints",
                              "failed": rep.failed_constraints()}))
            return EXIT_VALIDATION
    cache = None if args.no_cache else _cache_dir(args)
    pipe = Pipeline(model, cache)
    try:
        return COMMANDS[args.command](pipe, args, out)
    except HexmvopError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
