"""Command-line entry point: ``hartree-lab <command> ...`` or ``python3 -m hartree_lab``.

Exit status is 0 when every requested check passed, 1 when a check or a
sweep row failed, 2 for usage and configuration errors, 3 for output
directory collisions.
"""

import argparse
import csv
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .bubble import hls_identity_residual, wn_check
from .eigen import spectrum_for
from .errors import ConfigurationError, HartreeLabError
from .greens import (
    BallDomain,
    gx0_closed,
    gx0_integral,
    gx0_mixed_closed,
    gx0_mixed_integral,
    robin_ball,
    robin_hessian_exact,
)
from .groundstate import SolverOptions, default_grid, solve_ground_state
from .specfun import constant_set, domain_constants
from .sweep import GridPolicy, fit_asymptotics, run_sweep, write_plots

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

CONFIG_KEYS = {
    "dim": int, "radius": float, "eps": float, "eps_list": str, "nodes": int,
    "grading": float, "tol": float, "out_dir": str, "policy": str, "workers": int,
}


def read_config(path):
    """Plain key=value lines; '#' starts a comment."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    cfg = {}
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{num}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"{path}:{num}: unknown key '{key}'")
        try:
            cfg[key] = CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{num}: bad value for '{key}'") from exc
    return cfg


def merged_config(args, required):
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in required:
        if key not in cfg:
            raise ConfigurationError(f"missing required key '{key}'")
    if cfg.get("dim", 3) not in (3, 4, 5):
        raise ConfigurationError("dim must be 3, 4 or 5")
    cfg.setdefault("radius", 1.0)
    cfg.setdefault("policy", "fail")
    if cfg["policy"] not in ("overwrite", "fail"):
        raise ConfigurationError("policy must be overwrite or fail")
    return cfg


def prepare_out_dir(path, policy):
    if os.path.isdir(path) and os.listdir(path) and policy == "fail":
        raise FileExistsError(f"output directory {path} is not empty (policy fail)")
    os.makedirs(path, exist_ok=True)
    return path


def write_manifest(out_dir, command, cfg, wall):
    import scipy
    with open(os.path.join(out_dir, "manifest.txt"), "w", newline="\n") as fh:
        fh.write(f"command = {command}\n")
        for key in sorted(cfg):
            fh.write(f"{key} = {cfg[key]}\n")
        fh.write(f"hartree_lab = {__version__}\n")
        fh.write(f"python = {platform.python_version()}\n")
        fh.write(f"numpy = {np.__version__}\n")
        fh.write(f"scipy = {scipy.__version__}\n")
        fh.write(f"wall_seconds = {wall:.3f}\n")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _emit(rows, fmt, out=None):
    out = out or sys.stdout
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["name", "value"])
        for name, val in rows:
            w.writerow([name, repr(float(val)) if np.isscalar(val) else " ".join(map(repr, val))])
    else:
        width = max(len(name) for name, _ in rows)
        for name, val in rows:
            text = f"{val:.12g}" if np.isscalar(val) else ", ".join(f"{v:.12g}" for v in val)
            out.write(f"{name:<{width}}  {text}\n")


# -- commands ---------------------------------------------------------------

def cmd_constants(args):
    cs = constant_set(args.dim)
    rows = list(cs.as_rows())
    if args.ball is not None:
        ball = BallDomain(args.dim, args.ball)
        x0 = np.zeros(args.dim)
        dc = domain_constants(args.dim, float(robin_ball(ball, x0)), robin_hessian_exact(ball, x0), cs)
        rows += [("robin_value", dc.robin_value), ("F_n", dc.F_n), ("F_n_consistent", dc.F_n_consistent),
                 ("C_0", dc.C_0), ("nu", dc.nu), ("A_0_statement", dc.A_0_statement),
                 ("A_0_proof", dc.A_0_proof)]
    _emit(rows, args.format)
    return EXIT_OK


def identity_report(n, tol):
    """(name, value, passed) for each identity check at dimension n."""
    out = []
    out.append(("hls_identity", hls_identity_residual(n)))
    quad, closed, factor = wn_check(n)
    ct = constant_set(n).c_tilde
    expected = ct ** (4.0 / (n - 2))
    out.append(("wn_quadrature_vs_closed_times_factor", abs(quad - closed * expected) / abs(quad)))
    ball = BallDomain(n, 1.0)
    worst0 = worst1 = 0.0
    for rad in (0.0, 0.3, 0.6):
        x0 = np.zeros(n)
        x0[0] = rad
        c = gx0_closed(ball, x0)
        worst0 = max(worst0, abs(gx0_integral(ball, x0) - c) / abs(c))
        m = gx0_mixed_closed(ball, x0)
        worst1 = max(worst1, np.max(np.abs(gx0_mixed_integral(ball, x0) - m)) / np.max(np.abs(m)))
    out.append(("gx0_surface", worst0))
    out.append(("gx0_mixed_surface", worst1))
    return [(name, val, val < tol) for name, val in out], factor


def cmd_identities(args):
    report, factor = identity_report(args.dim, args.tolerance)
    for name, val, ok in report:
        print(f"{name:<40} {val:.3e}  {'pass' if ok else 'FAIL'}")
    print(f"{'wn_discrepancy_factor':<40} {factor:.12g}")
    failed = [name for name, _, ok in report if not ok]
    if failed:
        print("failed identities: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _solve(cfg):
    n, R, eps = cfg["dim"], cfg["radius"], cfg["eps"]
    grid = default_grid(n, R, eps, cfg.get("nodes"), cfg.get("grading"))
    opts = SolverOptions(tol=cfg.get("tol", 1e-8))
    return solve_ground_state(n, eps, grid, opts)


def cmd_solve(args):
    cfg = merged_config(args, ("dim", "eps"))
    t0 = time.perf_counter()
    state = _solve(cfg)
    print(f"sup_norm {state.sup_norm!r}")
    print(f"mu {state.mu!r}")
    print(f"residual {state.residual:.3e}")
    print(f"iterations {state.iterations}")
    if cfg.get("out_dir"):
        out = prepare_out_dir(cfg["out_dir"], cfg["policy"])
        _write_rows(os.path.join(out, "groundstate.csv"), ["r", "u"],
                    zip(state.grid.nodes, state.u.values))
        write_manifest(out, "solve", cfg, time.perf_counter() - t0)
    return EXIT_OK


def cmd_spectrum(args):
    cfg = merged_config(args, ("dim", "eps"))
    t0 = time.perf_counter()
    state = _solve(cfg)
    spec = spectrum_for(state)
    k = cfg["dim"] + 3
    rows = [(i, p.lam, p.ell, p.multiplicity) for i, p in enumerate(spec.expanded()[:k], 1)]
    for i, lam, ell, _ in rows:
        print(f"lambda_{i} {lam!r} ell={ell}")
    if cfg.get("out_dir"):
        out = prepare_out_dir(cfg["out_dir"], cfg["policy"])
        _write_rows(os.path.join(out, "spectrum.csv"), ["index", "lambda", "ell", "multiplicity"], rows)
        write_manifest(out, "spectrum", cfg, time.perf_counter() - t0)
    return EXIT_OK


def cmd_sweep(args):
    cfg = merged_config(args, ("dim", "eps_list", "out_dir"))
    try:
        eps_list = [float(s) for s in cfg["eps_list"].split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigurationError("eps_list must be comma-separated numbers") from exc
    t0 = time.perf_counter()
    policy = GridPolicy(grading=cfg.get("grading"))
    out = prepare_out_dir(cfg["out_dir"], cfg["policy"])
    table = run_sweep(cfg["dim"], cfg["radius"], eps_list, policy, workers=cfg.get("workers", 1))
    table.write_csv(os.path.join(out, "sweep.csv"))
    fit_asymptotics(table).write_csv(os.path.join(out, "fits.csv"))
    if not args.no_plots and len(table.good_rows()) > 0:
        write_plots(table, os.path.join(out, "plots"))
    write_manifest(out, "sweep", cfg, time.perf_counter() - t0)
    bad = [r for r in table.rows if not r.ok]
    for r in bad:
        print(f"eps={r.eps!r}: {r.status}", file=sys.stderr)
    print(f"wrote {len(table.rows)} rows to {out}")
    return EXIT_FAIL if bad else EXIT_OK


# -- parser -----------------------------------------------------------------

def _run_flags(p, need_eps=True):
    p.add_argument("--config", help="key=value file; flags override its entries")
    p.add_argument("--dim", type=int, choices=(3, 4, 5))
    p.add_argument("--radius", type=float, help="ball radius (default 1)")
    if need_eps:
        p.add_argument("--eps", type=float, help="subcriticality ε in [0.02, 0.5]")
    p.add_argument("--nodes", type=int, help="grid nodes (default scales like ε^-1/2)")
    p.add_argument("--grading", type=float, help="mesh grading (default from the predicted scale)")
    p.add_argument("--tol", type=float, help="ground-state residual tolerance (default 1e-8)")
    p.add_argument("--out", dest="out_dir", help="output directory")
    p.add_argument("--policy", choices=("overwrite", "fail"), help="existing output directory (default fail)")


def build_parser():
    ap = argparse.ArgumentParser(prog="hartree-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="print dimension constants")
    p.add_argument("--dim", type=int, choices=(3, 4, 5), required=True)
    p.add_argument("--ball", type=float, help="also print ball constants for this radius")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("identities", help="check the closed-form identities")
    p.add_argument("--dim", type=int, choices=(3, 4, 5), required=True)
    p.add_argument("--tolerance", type=float, default=1e-6, help="relative tolerance (default 1e-6)")
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("solve", help="compute a ground state")
    _run_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("spectrum", help="print the first n+3 eigenvalues")
    _run_flags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="ε-sweep with fits and plots")
    _run_flags(p, need_eps=False)
    p.add_argument("--eps-list", dest="eps_list", help="comma-separated, strictly decreasing")
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileExistsError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except HartreeLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
