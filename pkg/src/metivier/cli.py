"""Command-line front end.

Subcommands: group, factorize-scan, kernel, riesz, bilinear, restriction,
invert, norms, gamma, bench.  Validation failures exit with code 2 and a
single machine-parsable line starting with "ERR:"; identical invocations
with identical seeds write byte-identical CSV.
"""

import argparse
import sys
import time

import numpy as np

from . import io
from .fields import GridFunction


def _add_common(p):
    p.add_argument("--group", default="heisenberg",
                   help="builtin name (heisenberg, quaternionic) or JSON path")
    p.add_argument("--n", type=int, default=1, help="half-dimension for heisenberg")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--sphere-order", type=int, default=16)
    p.add_argument("--radial-order", type=int, default=64)
    p.add_argument("--grid", default="32,32", help="nx,nu")
    p.add_argument("--extent", default="8.0,8.0", help="x,u half-widths")
    p.add_argument("--out", default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--emit-plotscript", action="store_true")


def _structure(args):
    from .groups import builtin_structure

    return builtin_structure(getattr(args, "builtin", None) or args.group, args.n)


def _profile(args):
    from .spectral import MultiplierProfile

    return MultiplierProfile(K_max=args.kmax, sphere_order=args.sphere_order,
                             radial_order=args.radial_order, tol=args.tol)


def _grid_params(args):
    nx, nu = (int(t) for t in args.grid.split(","))
    ex, eu = (float(t) for t in args.extent.split(","))
    return nx, ex, nu, eu


def _bump(s, args, width=1.0):
    nx, ex, nu, eu = _grid_params(args)

    def fn(*axes):
        xs, us = axes[: 2 * s.n], axes[2 * s.n:]
        return np.exp(-sum(x ** 2 for x in xs) / (2 * width ** 2)
                      - sum(u ** 2 for u in us) / (2 * width ** 2))

    return GridFunction.from_callable(fn, s.n, s.m, nx, ex, nu, eu)


def _finish(args, path, xcol):
    if args.emit_plotscript and path:
        io.write_plotscript(str(path) + ".plot.py", str(path), xcol)


# ---------------------------------------------------------------------------


def cmd_group(args):
    s = _structure(args)
    print(f"name: {s.name}")
    print(f"n: {s.n}  m: {s.m}  Q: {s.Q}")
    for k, Jk in enumerate(s.J):
        print(f"J[{k}]:")
        for row in Jk:
            print("  " + " ".join(io.format_value(v) for v in row))
    cert = s.certificate
    print("non-degeneracy certificate: "
          f"samples={cert['n_samples']} min|det|={cert['min_abs_det']!r} "
          f"max|det|={cert['max_abs_det']!r} floor={cert['eps_nd']!r}")
    return 0


def cmd_factorize_scan(args):
    from .symplectic import scan_factorizations

    s = _structure(args)
    rows = []
    for fac in scan_factorizations(s, args.samples):
        row = {f"eta{i}": v for i, v in enumerate(fac.eta)}
        row.update({f"sigma{i}": v for i, v in enumerate(fac.sigma)})
        row.update({"detA": fac.detA, "residual": fac.residual})
        rows.append(row)
    cols = list(rows[0].keys())
    out = args.out or "factorize_scan.csv"
    io.write_csv(out, cols, rows)
    print(f"wrote {out} ({len(rows)} rows)")
    _finish(args, out, "eta0")
    return 0


def cmd_kernel(args):
    from .groups import GroupPoint
    from .spectral import kernel_decay_fit, riesz_kernel

    s = _structure(args)
    prof = _profile(args)
    if args.mode == "eval":
        if args.points:
            pts = io.read_points_csv(args.points, s.n, s.m)
        else:
            rng = np.random.default_rng(args.seed)
            pts = [GroupPoint(rng.normal(size=2 * s.n), rng.normal(size=s.m))
                   for _ in range(args.count)]
        vals, errs = riesz_kernel(s, args.delta, pts, prof, R=args.R)
        rows = []
        for p, v, e in zip(pts, vals, errs):
            row = {f"x{i}": c for i, c in enumerate(p.x)}
            row.update({f"u{i}": c for i, c in enumerate(p.u)})
            row.update({"re": v.real, "im": v.imag, "err_est": e})
            rows.append(row)
        out = args.out or "kernel_eval.csv"
        io.write_csv(out, list(rows[0].keys()), rows)
        print(f"wrote {out} ({len(rows)} rows)")
        _finish(args, out, "x0")
        return 0
    # decay-fit
    radii = np.geomspace(args.r_lo, args.r_hi, args.count)
    rays = [(np.eye(2 * s.n)[0], np.zeros(s.m)),
            (np.zeros(2 * s.n), np.eye(s.m)[0])]
    recs = kernel_decay_fit(s, args.delta, args.N, rays, radii, prof)
    rows = [{"ray": i, "slope": (r["slope"] if r["slope"] is not None else "nan"),
             "status": r["status"],
             "window_lo": r.get("window", (0, 0))[0],
             "window_hi": r.get("window", (0, 0))[1]} for i, r in enumerate(recs)]
    out = args.out or "kernel_decay.csv"
    io.write_csv(out, ["ray", "slope", "status", "window_lo", "window_hi"], rows)
    print(f"wrote {out}")
    return 0


def cmd_riesz(args):
    from .spectral import riesz_apply

    s = _structure(args)
    prof = _profile(args)
    f = io.load_grid(args.input) if args.input else _bump(s, args)
    out_gf = riesz_apply(s, f, args.delta, args.R, prof)
    out = args.out or "riesz_apply.grid"
    io.save_grid(out, out_gf)
    summary = args.summary or "riesz_apply.csv"
    io.write_csv(summary, ["delta", "R", "l2_in", "l2_out"], [{
        "delta": args.delta, "R": args.R,
        "l2_in": f.lp_norm(2), "l2_out": out_gf.lp_norm(2)}])
    print(f"wrote {out} and {summary}")
    return 0


def cmd_bilinear(args):
    from .groups import GroupPoint

    s = _structure(args)
    prof = _profile(args)
    if args.mode == "kernel":
        from .bilinear import bilinear_kernel

        if args.points:
            pts = io.read_points_csv(args.points, s.n, s.m)
            pairs = list(zip(pts[0::2], pts[1::2]))
        else:
            rng = np.random.default_rng(args.seed)
            pairs = [(GroupPoint(rng.normal(size=2 * s.n), rng.normal(size=s.m)),
                      GroupPoint(rng.normal(size=2 * s.n), rng.normal(size=s.m)))
                     for _ in range(args.count)]
        vals, errs = bilinear_kernel(s, args.alpha, pairs, prof, j=args.j)
        rows = []
        for (p1, p2), v, e in zip(pairs, vals, errs):
            row = {}
            for tag, p in (("a", p1), ("b", p2)):
                row.update({f"{tag}_x{i}": c for i, c in enumerate(p.x)})
                row.update({f"{tag}_u{i}": c for i, c in enumerate(p.u)})
            row.update({"re": v.real, "im": v.imag, "err_est": e})
            rows.append(row)
        out = args.out or "bilinear_kernel.csv"
        io.write_csv(out, list(rows[0].keys()), rows)
        print(f"wrote {out} ({len(rows)} rows)")
        return 0
    if args.mode == "apply":
        from .bilinear import bilinear_riesz_apply

        f = _bump(s, args, width=1.0)
        g = _bump(s, args, width=1.2)
        out_gf = bilinear_riesz_apply(s, f, g, args.alpha, args.R, prof, n_nodes=12)
        out = args.out or "bilinear_apply.grid"
        io.save_grid(out, out_gf)
        print(f"wrote {out}")
        return 0
    # regions
    from .normlab import bilinear_region_table

    pairs = [(1.0, 1.0), (2.0, 2.0), (np.inf, np.inf), (1.0, np.inf), (2.0, np.inf)]
    rows = bilinear_region_table(s, pairs, margin=args.margin,
                                 n_trials=args.trials, seed=args.seed)
    for r in rows:
        r["p1"] = "inf" if r["p1"] == np.inf else r["p1"]
        r["p2"] = "inf" if r["p2"] == np.inf else r["p2"]
        r["p"] = "inf" if r["p"] == np.inf else r["p"]
    out = args.out or "bilinear_regions.csv"
    io.write_csv(out, ["p1", "p2", "p", "region", "paper_threshold",
                       "alpha_tested", "estimate", "trials", "seed"], rows)
    print(f"wrote {out}")
    return 0


def cmd_restriction(args):
    from .spectral import restriction_scaling_fit

    s = _structure(args)
    prof = _profile(args)
    nx, ex, nu, eu = _grid_params(args)
    f = GridFunction.from_callable(
        lambda *ax: np.exp(-sum(x ** 2 for x in ax[: 2 * s.n]) / (2 * 0.35 ** 2)
                           - sum(u ** 2 for u in ax[2 * s.n:]) / (2 * 0.2 ** 2)),
        s.n, s.m, nx, ex, nu, eu)
    lams = np.geomspace(args.lam_lo, args.lam_hi, args.count)
    fit = restriction_scaling_fit(s, f, args.p, lams, prof)
    rows = [{"lam": l, "norm": v} for l, v in zip(lams, fit["norms"])]
    out = args.out or "restriction_fit.csv"
    io.write_csv(out, ["lam", "norm"], rows)
    print(f"slope={fit['slope']!r} target={fit['target']!r}")
    print(f"wrote {out}")
    _finish(args, out, "lam")
    return 0


def cmd_invert(args):
    from .spectral import inversion_check, suggest_lambda_band

    s = _structure(args)
    prof = _profile(args)
    f = _bump(s, args)
    band = suggest_lambda_band(s, f)
    lams = np.linspace(band[0], band[1], args.count)
    err = inversion_check(s, f, lams, prof)
    out = args.out or "invert.csv"
    io.write_csv(out, ["n_nodes", "band_lo", "band_hi", "rel_l2_error"],
                 [{"n_nodes": len(lams), "band_lo": band[0], "band_hi": band[1],
                   "rel_l2_error": err}])
    print(f"inversion error {err!r}; wrote {out}")
    return 0


def cmd_norms(args):
    from .normlab import riesz_threshold_scan

    s = _structure(args)
    rows = riesz_threshold_scan(s, [float(p) for p in args.p_list.split(",")],
                                delta_margin=args.margin, n_trials=args.trials,
                                seed=args.seed)
    out = args.out or "norms_scan.csv"
    io.write_csv(out, ["p", "threshold", "delta", "estimate", "trials", "seed"], rows)
    print(f"wrote {out}")
    return 0


def cmd_gamma(args):
    from .bilinear import gamma_table

    svals = np.linspace(0.0, 1.0, args.n_s)
    gam = gamma_table(args.alpha, args.j, args.qmax, svals)
    rows = []
    for i, sv in enumerate(svals):
        for q in range(args.qmax + 1):
            rows.append({"j": args.j, "q": q, "s": sv, "gamma": gam[i, q]})
    out = args.out or "gamma_table.csv"
    io.write_csv(out, ["j", "q", "s", "gamma"], rows)
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


def cmd_bench(args):
    from . import _kernels
    from .twisted import phi_grid, twisted_convolution

    if not _kernels.HAVE_NUMBA and args.backends != "numpy":
        print("numba unavailable; benchmarking numpy only")
    rows = []
    N = args.size
    base = GridFunction("layer", 1, 0, np.zeros((N, N)), 8.0)
    g0 = phi_grid(0, 1, 1.0, base)
    g1 = phi_grid(1, 1, 1.0, base)
    T = np.outer(1.0 / (2.0 * np.arange(args.kmax_bench + 1) + 1.0),
                 np.linspace(0.01, 60.0, 256))
    backends = [b for b in ("numba", "numpy")
                if b in args.backends.split(",") and (b != "numba" or _kernels.HAVE_NUMBA)]
    for backend in backends:
        _kernels.set_backend(backend)
        twisted_convolution(1, 1.0, g0, g1)  # warm-up / jit
        t0 = time.perf_counter()
        for _ in range(args.reps):
            twisted_convolution(1, 1.0, g0, g1)
        t_conv = (time.perf_counter() - t0) / args.reps
        _kernels.laguerre_diag(0.0, T)
        t0 = time.perf_counter()
        for _ in range(args.reps):
            _kernels.laguerre_diag(0.0, T)
        t_lag = (time.perf_counter() - t0) / args.reps
        rows.append({"kernel": "twisted_conv_2d", "backend": backend,
                     "size": N, "reps": args.reps, "seconds": t_conv})
        rows.append({"kernel": "laguerre_diag", "backend": backend,
                     "size": T.shape[0], "reps": args.reps, "seconds": t_lag})
    _kernels.set_backend("auto")
    out = args.out or "bench.csv"
    io.write_csv(out, ["kernel", "backend", "size", "reps", "seconds"], rows)
    for r in rows:
        print(f"{r['kernel']:18s} {r['backend']:6s} size={r['size']:5d} "
              f"{r['seconds'] * 1e3:9.2f} ms")
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="metivier",
                                 description="Riesz-means spectral toolkit on Metivier groups")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", help="inspect a group structure")
    p.add_argument("mode", nargs="?", default="inspect", choices=["inspect"])
    p.add_argument("--builtin", default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_group)

    p = sub.add_parser("factorize-scan", help="CSV of symplectic factorizations over eta samples")
    p.add_argument("--samples", type=int, default=100)
    _add_common(p)
    p.set_defaults(fn=cmd_factorize_scan)

    p = sub.add_parser("kernel", help="Riesz kernel evaluation / decay fit")
    p.add_argument("mode", choices=["eval", "decay-fit"])
    p.add_argument("--delta", type=float, default=4.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--points", default=None, help="CSV of evaluation points")
    p.add_argument("--count", type=int, default=12)
    p.add_argument("--r-lo", type=float, default=1.5)
    p.add_argument("--r-hi", type=float, default=14.0)
    _add_common(p)
    p.set_defaults(fn=cmd_kernel)

    p = sub.add_parser("riesz", help="apply S_R^delta to a grid function")
    p.add_argument("mode", nargs="?", default="apply", choices=["apply"])
    p.add_argument("--delta", type=float, default=2.0)
    p.add_argument("--R", type=float, default=4.0)
    p.add_argument("--input", default=None, help="grid file (default: gaussian bump)")
    p.add_argument("--summary", default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_riesz)

    p = sub.add_parser("bilinear", help="bilinear kernels / apply / region table")
    p.add_argument("mode", choices=["kernel", "apply", "regions"])
    p.add_argument("--alpha", type=float, default=6.0)
    p.add_argument("--R", type=float, default=4.0)
    p.add_argument("--j", type=int, default=None)
    p.add_argument("--points", default=None)
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=2)
    _add_common(p)
    p.set_defaults(fn=cmd_bilinear)

    p = sub.add_parser("restriction", help="restriction exponent fit")
    p.add_argument("mode", nargs="?", default="fit", choices=["fit"])
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--lam-lo", type=float, default=0.25)
    p.add_argument("--lam-hi", type=float, default=4.0)
    p.add_argument("--count", type=int, default=7)
    _add_common(p)
    p.set_defaults(fn=cmd_restriction)

    p = sub.add_parser("invert", help="inversion check on a bump")
    p.add_argument("--count", type=int, default=24)
    _add_common(p)
    p.set_defaults(fn=cmd_invert)

    p = sub.add_parser("norms", help="Riesz threshold scan")
    p.add_argument("mode", nargs="?", default="scan", choices=["scan"])
    p.add_argument("--p-list", default="1.0")
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=3)
    _add_common(p)
    p.set_defaults(fn=cmd_norms)

    p = sub.add_parser("gamma", help="Fourier coefficient table of the dyadic multiplier")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--j", type=int, default=2)
    p.add_argument("--qmax", type=int, default=32)
    p.add_argument("--n-s", type=int, default=9)
    _add_common(p)
    p.set_defaults(fn=cmd_gamma)

    p = sub.add_parser("bench", help="hot-kernel benchmark: numba vs numpy")
    p.add_argument("--size", type=int, default=48)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--kmax-bench", type=int, default=256)
    p.add_argument("--backends", default="numba,numpy")
    _add_common(p)
    p.set_defaults(fn=cmd_bench)

    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"ERR: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
