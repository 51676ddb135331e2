"""Command-line front end: ``greenbvp {green,solve,verify}``.

Exit codes: 0 success, 1 verification failure, 2 ill-posed problem or bad
configuration.  A JSON run report goes to stderr; CSV data goes to the
configured output path (or stdout).
"""

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import config as config_mod
from .assembly import GreenOperator
from .bvp import residual_report, solve_bvp
from .errors import ConfigError, GreenError, IllPosed
from .recursive import recursive_green
from .verification import SUITES, run_suite


def _fmt(v):
    return "%.17g" % v


def _json_float(v):
    """Strict JSON has no inf/nan; those become null."""
    v = float(v)
    return v if np.isfinite(v) else None


def _coord_header(dim, prefix=""):
    return [f"{prefix}x"] if dim == 1 else [f"{prefix}x", f"{prefix}y"]


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
        return None
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def build_green(cfg, method=None):
    method = method or cfg.method
    op = cfg.build_operator()
    domain = cfg.build_domain()
    bd = cfg.build_boundary(domain)
    fs = op.fundamental()
    bcs = cfg.build_conditions(bd, op)
    if method == "recursive":
        return recursive_green(fs, bcs, bd), bd, bcs
    return GreenOperator(fs, bcs, bd), bd, bcs


def dump_g(gop, path):
    """Boundary-response matrix (or the stage matrices) as row-major re,im pairs."""
    if hasattr(gop, "gmat"):
        mats = [gop.gmat.matrix]
    else:
        mats = [st.g for st in gop.state.stages]
    rows = []
    for M in mats:
        for r in M:
            rows.append([v for z in r for v in (_fmt(z.real), _fmt(z.imag))])
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return path


def cmd_green(cfg, method=None, output=None, dump=None):
    t0 = time.perf_counter()
    gop, bd, _ = build_green(cfg, method)
    t1 = time.perf_counter()
    src = cfg.green_sources()
    grid = cfg.green_grid()
    dim = cfg.dim
    rows = []
    if len(src) and len(grid):
        G = gop.matrix(grid, src)
        for j, xp in enumerate(src):
            for i, x in enumerate(grid):
                rows.append([_fmt(v) for v in x] + [_fmt(v) for v in xp] + [_fmt(G[i, j].real), _fmt(G[i, j].imag)])
    header = ["x", "xp"] if dim == 1 else ["x", "y", "xp", "yp"]
    path = _write_csv(output or cfg.output.get("path"), header + ["re_G", "im_G"], rows)
    files = [p for p in (path, dump_g(gop, dump) if dump else None) if p]
    report = {
        "command": "green",
        "method": method or cfg.method,
        "condition_estimate": _json_float(gop.condition_estimate),
        "bc_residual_max": gop.bc_residual(src) if len(src) else 0.0,
        "timings": {"construct_s": t1 - t0, "total_s": time.perf_counter() - t0},
        "outputs": files,
    }
    return report


def cmd_solve(cfg, method=None, output=None, dump=None, residuals=None, cache_g=True):
    t0 = time.perf_counter()
    gop, bd, bcs = build_green(cfg, method)
    vq = cfg.build_volume(bd.domain)
    f = cfg.build_source()
    phi = cfg.build_boundary_data(bd, bcs)
    grid = cfg.output_grid()
    t1 = time.perf_counter()
    sol = solve_bvp(gop, vq, f, phi, cache_g=cache_g, sample_grid=grid if len(grid) else None)
    u = sol.samples[1] if sol.samples is not None else np.zeros(0, dtype=complex)
    rows = [[_fmt(v) for v in x] + [_fmt(z.real), _fmt(z.imag)] for x, z in zip(grid, u)]
    path = _write_csv(output or cfg.output.get("path"), _coord_header(cfg.dim) + ["re_u", "im_u"], rows)
    rep = residual_report(sol, gop, grid=grid if len(grid) else None)
    files = [path] if path else []
    res_path = residuals or cfg.output.get("residuals")
    if res_path:
        per = rep["boundary_residual_per_condition"]
        res_rows = [["pde", _fmt(rep["pde_residual"])]] + [[f"boundary_{j + 1}", _fmt(v)] for j, v in enumerate(per)]
        files.append(_write_csv(res_path, ["quantity", "max_abs"], res_rows))
    if dump:
        files.append(dump_g(gop, dump))
    return {
        "command": "solve",
        "method": method or cfg.method,
        "condition_estimate": _json_float(gop.condition_estimate),
        "residuals": rep,
        "timings": {"construct_s": t1 - t0, "total_s": time.perf_counter() - t0},
        "outputs": files,
    }


def cmd_verify(suite="all", output=None, fmt="text"):
    rows = run_suite(suite)
    ok = all(r.passed for r in rows)
    if fmt == "csv":
        _write_csv(output, ["suite", "name", "max_error", "tolerance", "status"],
                   [[r.suite, r.name, "%.3e" % r.max_error, "%.0e" % r.tolerance, "pass" if r.passed else "FAIL"]
                    for r in rows])
    else:
        width = max(len(r.name) for r in rows)
        lines = [f"{'suite':<10} {'name':<{width}} {'max_error':>10} {'tolerance':>9} status"]
        lines += [f"{r.suite:<10} {r.name:<{width}} {r.max_error:10.3e} {r.tolerance:9.0e} "
                  f"{'pass' if r.passed else 'FAIL'}" for r in rows]
        text = "\n".join(lines) + "\n"
        if output in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(output, "w") as fh:
                fh.write(text)
    return ok, {"command": "verify", "suite": suite, "checks": len(rows),
                "failed": [r.name for r in rows if not r.passed]}


def make_parser():
    p = argparse.ArgumentParser(prog="greenbvp", description="Green functions for linear boundary value problems.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("green", "sample G(x, x') on a grid"), ("solve", "solve L u = f, B u = Phi")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config", help="TOML problem file")
        s.add_argument("--method", choices=config_mod.METHODS, help="override the configured construction")
        s.add_argument("--output", help="CSV path ('-' for stdout); overrides output.path")
        s.add_argument("--dump-g", dest="dump_g", metavar="PATH",
                       help="write the boundary-response matrix as row-major re,im pairs")
        if name == "solve":
            s.add_argument("--residuals", metavar="PATH", help="write the residual report as CSV")
            s.add_argument("--no-cache-g", dest="cache_g", action="store_false",
                           help="evaluate G at volume nodes per target instead of caching densities")
    v = sub.add_parser("verify", help="run the invariant suites")
    v.add_argument("suite", nargs="?", default="all", choices=SUITES + ("all",))
    v.add_argument("--format", choices=("text", "csv"), default="text")
    v.add_argument("--output", help="write the table here instead of stdout")
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        if args.command == "verify":
            ok, report = cmd_verify(args.suite, args.output, args.format)
            print(json.dumps(report, sort_keys=True, allow_nan=False), file=sys.stderr)
            return 0 if ok else 1
        cfg = config_mod.load(args.config)
        if args.command == "green":
            report = cmd_green(cfg, args.method, args.output, args.dump_g)
        else:
            report = cmd_solve(cfg, args.method, args.output, args.dump_g, args.residuals, args.cache_g)
    except IllPosed as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        print(json.dumps({"error": type(exc).__name__, "condition_estimate": _json_float(exc.condition_estimate)},
                         sort_keys=True), file=sys.stderr)
        return 2
    except (ConfigError, GreenError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(report, sort_keys=True, allow_nan=False), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
