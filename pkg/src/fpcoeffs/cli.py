"""Command-line front end.

Subcommands
-----------
single   full pipeline for one parameter point
sweep    the same over a list of values of gamma, theta or delta
oracle   drift coefficient K* from direct quadrature only
eigs     lowest eigenpairs of the discretized operator

Exit codes: 0 ok, 2 bad parameter, 3 tunnelling collapse, 4 no convergence,
5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace

import numpy as np

from .config import FIELD_NAMES, RunConfig, config_from_mapping, load_config
from .discretize import assemble_fd, dump_triplets
from .eigensolve import lowest_eigenpairs
from .errors import BadParameter, FPCoeffsError
from .oracle import drift_oracle
from .outputs import SWEEP_COLUMNS, atomic_write, emit_plots, write_csv, write_json
from .pipeline import PointResult, compute_point, solve_operator
from .svgplot import line_plot

log = logging.getLogger("fpcoeffs")

EXIT_OK = 0


def _clean(x):
    """JSON-friendly scalar: numpy types unwrapped, non-finite floats as None."""
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    return x


def point_report(res: PointResult) -> dict:
    spec = res.spec
    dec = res.dec
    lam = res.positive_eigenvalues
    sym = res.symmetry
    rep = {
        "status": res.status,
        "exit_code": res.error.exit_code if res.error is not None else EXIT_OK,
        "message": str(res.error) if res.error is not None else "",
        "vartheta": spec.vartheta,
        "V": spec.V,
        "log_Z": spec.log_Z,
        "D": res.D,
        "K": res.K,
        "K_star": res.K_star,
        "K_star_error_estimate": res.oracle.quad_error_estimate,
        "K_star_rectangle": res.oracle.K_rectangle,
        "rel_err": res.rel_err,
        "drift_ok": res.drift_ok if res.series is not None else False,
        "N_auto": res.N_auto,
        "n_modes": len(dec),
        "eigensolver": dec.method,
        "max_residual": float(np.max(dec.residuals)),
        "max_backward_error": res.backward_error,
        "zero_mode_eigenvalue": dec.eigenvalues[dec.zero_mode_index] if dec.zero_mode_index is not None else None,
        "gap": dec.gap,
        "lambda_lowest": list(lam[:5]),
        "symmetry_broken": res.symmetry_broken,
        "symmetry_scores": list(sym.scores) if sym else None,
        "symmetry_parities": list(sym.parities) if sym else None,
        "config": res.config.as_dict(),
    }
    return _clean(rep)


def run_single(cfg: RunConfig) -> dict:
    """Run one point and write eigenvalues.csv, coefficients.csv and report.json.

    Returns the report; its ``exit_code`` is nonzero when the point hit a
    tunnelling collapse or a convergence failure.  Coefficient files are only
    written when partial sums exist.
    """
    if cfg.sweep_param is not None or cfg.sweep_values:
        raise BadParameter("single run given a sweep; use the sweep subcommand")
    cfg.validate()
    res = compute_point(cfg)
    out = cfg.output_dir
    files = []
    if "csv" in cfg.formats:
        files.append(write_eigen_csv(os.path.join(out, "eigenvalues.csv"), res.dec, res.mesh,
                                     cfg.write_vectors))
        coef = os.path.join(out, "coefficients.csv")
        if res.series is not None:
            s = res.series
            rows = zip(range(1, len(s.lambdas) + 1), s.lambdas, s.eta, s.omega,
                       s.D_partial, s.K_partial)
            files.append(write_csv(coef, ("n", "lambda_n", "eta_n", "omega_n", "D_partial",
                                          "K_partial"), rows))
        elif os.path.exists(coef):
            os.unlink(coef)
    if "svg" in cfg.formats and res.series is not None:
        s = res.series
        n = list(range(1, len(s.lambdas) + 1))
        files.append(atomic_write(
            os.path.join(out, "partial_sums.svg"),
            line_plot(n, {"D_N": list(s.D_partial), "K_N": list(s.K_partial),
                          "K*": [res.K_star] * len(n)}, "partial sums", "N", "value")))
    report = point_report(res)
    report["files"] = files + [os.path.join(out, "report.json")]
    write_json(os.path.join(out, "report.json"), report)
    return report


def write_eigen_csv(path, dec, mesh, with_vectors: bool = True) -> str:
    header = ["index", "lambda", "residual"]
    if with_vectors:
        header += [f"u({x:.17g})" for x in mesh.nodes]
    rows = []
    for k in range(len(dec)):
        row = [k, dec.eigenvalues[k], dec.residuals[k]]
        if with_vectors:
            row += list(mesh.full_vector(dec.eigenvectors[:, k]))
        rows.append(row)
    return write_csv(path, header, rows)


def _sweep_row(task: tuple[str, RunConfig]) -> list:
    param, cfg = task
    value = getattr(cfg, param)
    try:
        res = compute_point(cfg)
    except FPCoeffsError as exc:
        log.warning("point %s=%g failed: %s", param, value, exc)
        row = [param, value, type(exc).__name__] + [math.nan] * (len(SWEEP_COLUMNS) - 3)
        row[SWEEP_COLUMNS.index("N_auto")] = None
        row[SWEEP_COLUMNS.index("symmetry_broken")] = None
        return row
    lam = list(res.positive_eigenvalues[:5]) + [math.nan] * 5
    sym = res.symmetry
    return [param, value, res.status, res.spec.V, *lam[:5], res.D, res.K, res.K_star,
            res.rel_err, res.N_auto, res.symmetry_broken,
            max(sym.scores) if sym else math.nan,
            res.dec.gap if res.dec.gap is not None else math.nan]


def run_sweep(cfg: RunConfig) -> dict:
    """Run every sweep point (in parallel when ``workers > 1``), write sweep.csv and plots.

    Points that fail are recorded in the ``status`` column; the sweep goes on.
    """
    points = cfg.points()
    cfg.validate()
    param = cfg.sweep_param
    tasks = [(param, p) for p in points]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(tasks))) as ex:
            rows = list(ex.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    out = cfg.output_dir
    path = write_csv(os.path.join(out, "sweep.csv"), SWEEP_COLUMNS, rows)
    plots = emit_plots(path, out, cfg.formats)
    return {"csv": path, "plots": plots,
            "rows": [dict(zip(SWEEP_COLUMNS, r)) for r in rows]}


def run_oracle(cfg: RunConfig) -> dict:
    spec = cfg.potential()
    o = drift_oracle(spec, rtol=cfg.oracle_rtol)
    return _clean({"K_star": o.K_star, "quad_error_estimate": o.quad_error_estimate,
                   "K_rectangle": o.K_rectangle, "V": spec.V, "vartheta": spec.vartheta,
                   "log_Z": spec.log_Z})


def run_eigs(cfg: RunConfig, count: int = 6, fd_points: int | None = None,
             dump_dir: str | None = None) -> dict:
    spec, op = solve_operator(cfg)
    dec = lowest_eigenpairs(op, count, method=cfg.eigensolver)
    out = {"eigenvalues": list(dec.eigenvalues), "residuals": list(dec.residuals),
           "method": dec.method, "n_dof": op.n}
    if "csv" in cfg.formats:
        out["csv"] = write_eigen_csv(os.path.join(cfg.output_dir, "eigenvalues.csv"), dec,
                                     op.mesh, cfg.write_vectors)
    if dump_dir:
        out["matrices"] = list(dump_triplets(op, dump_dir))
    if fd_points:
        fd = lowest_eigenpairs(assemble_fd(cfg.R, fd_points, spec), count, method=cfg.eigensolver)
        out["fd_eigenvalues"] = list(fd.eigenvalues)
    return _clean(out)


# ---------------------------------------------------------------- argparse

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat YAML document of RunConfig fields")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        kw = dict(dest=f.name, default=argparse.SUPPRESS)
        if f.name in ("formats", "sweep_values"):
            kw.update(type=_csv_list, metavar="A,B,...")
        elif f.name == "write_vectors":
            kw.update(action=argparse.BooleanOptionalAction)
        elif f.name == "case":
            kw.update(type=lambda s: None if s.lower() == "none" else s,
                      help="A, B, C, quadratic or none")
        elif f.name in ("delta", "gamma", "theta", "R", "rel_tol", "tol_zero", "s_tol",
                        "oracle_rtol", "drift_tol"):
            kw.update(type=float)
        elif isinstance(f.default, int):
            kw.update(type=int)
        p.add_argument(flag, **kw)


def _csv_list(s: str) -> list[str]:
    return [t for t in s.replace(",", " ").split() if t]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fpcoeffs", description=__doc__.split("\n\n")[0],
                                 formatter_class=argparse.RawDescriptionHelpFormatter,
                                 epilog="exit codes: 0 ok, 2 bad parameter, 3 tunnelling "
                                        "collapse, 4 no convergence, 5 I/O failure")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("single", "full pipeline for one point"),
                           ("sweep", "pipeline over a parameter list"),
                           ("oracle", "drift coefficient from direct quadrature"),
                           ("eigs", "lowest eigenpairs of the discrete operator")):
        p = sub.add_parser(name, help=helptext)
        _add_config_flags(p)
        if name == "sweep":
            p.add_argument("--param", dest="sweep_param", default=argparse.SUPPRESS)
            p.add_argument("--values", dest="sweep_values", type=_csv_list,
                           default=argparse.SUPPRESS)
        if name == "eigs":
            p.add_argument("--count", type=int, default=6)
            p.add_argument("--fd-points", type=int, default=None,
                           help="also solve the finite-difference discretization")
            p.add_argument("--dump-matrices", default=None, metavar="DIR",
                           help="write A and B as row/col/value triplets")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base = load_config(ns.config).as_dict() if getattr(ns, "config", None) else {}
    overrides = {k: v for k, v in vars(ns).items() if k in FIELD_NAMES}
    base.update(overrides)
    return config_from_mapping(base)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * ns.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
        if ns.command == "single":
            rep = run_single(cfg)
            code = rep["exit_code"]
            summary = {k: rep[k] for k in ("status", "D", "K", "K_star", "rel_err", "N_auto",
                                           "V", "symmetry_broken", "lambda_lowest")}
            print(json.dumps(summary, indent=2))
            if rep["message"]:
                print(f"error: {rep['message']}", file=sys.stderr)
            return code
        if ns.command == "sweep":
            if cfg.sweep_param is None:
                cfg = replace(cfg, sweep_param="gamma")
            res = run_sweep(cfg)
            print(json.dumps({"csv": res["csv"], "plots": res["plots"],
                              "status": [r["status"] for r in res["rows"]]}, indent=2))
            return EXIT_OK
        if ns.command == "oracle":
            print(json.dumps(run_oracle(cfg), indent=2))
            return EXIT_OK
        if ns.command == "eigs":
            rep = run_eigs(cfg, ns.count, ns.fd_points, ns.dump_matrices)
            print(json.dumps(rep, indent=2))
            return EXIT_OK
    except FPCoeffsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return EXIT_OK  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
