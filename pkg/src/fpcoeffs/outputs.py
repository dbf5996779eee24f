"""Flat-file outputs: atomic writes, fixed-precision CSV, sweep plots."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

from .config import FORMATS
from .errors import BadParameter, IoFailure
from .svgplot import line_plot

_UMASK = os.umask(0)
os.umask(_UMASK)

SWEEP_COLUMNS = ("param", "value", "status", "V", "lambda_1", "lambda_2", "lambda_3",
                 "lambda_4", "lambda_5", "D", "K", "K_star", "rel_err", "N_auto",
                 "symmetry_broken", "symmetry_score", "gap")


def fmt(x) -> str:
    """Cell formatting: 17 significant digits for floats, plain ints and strings."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float) or hasattr(x, "dtype"):
        x = float(x)
        return "nan" if math.isnan(x) else f"{x:.17g}"
    return str(x)


def atomic_write(path: str | os.PathLike, text: str) -> str:
    """Write ``text`` to a temporary file beside ``path`` and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o666 & ~_UMASK)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> str:
    return atomic_write(path, csv_text(header, rows))


def write_json(path, data) -> str:
    return atomic_write(path, json.dumps(data, indent=2, allow_nan=True) + "\n")


def read_sweep_csv(path) -> tuple[str, dict[str, list[float]]]:
    """Load a sweep table; returns the swept parameter name and numeric columns."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise BadParameter(f"sweep table {path} has no data rows")
    param = rows[0]["param"]
    cols = {}
    for key in rows[0]:
        if key in ("param", "status", "symmetry_broken"):
            continue
        cols[key] = [_num(r[key]) for r in rows]
    return param, cols


def _num(s: str) -> float:
    try:
        return float(s)
    except (TypeError, ValueError):
        return math.nan


def _log10(xs):
    return [math.log10(x) if x > 0 and math.isfinite(x) else math.nan for x in xs]


def emit_plots(csv_path, out_dir, formats=("svg",)) -> list[str]:
    """Write the sweep figures as SVG: each quantity in a linear and a log10 variant."""
    bad = set(formats) - set(FORMATS)
    if bad:
        raise BadParameter(f"unknown output format(s) {sorted(bad)}")
    if "svg" not in formats:
        return []
    param, cols = read_sweep_csv(csv_path)
    x = cols["value"]
    lx = _log10(x)
    lam = {f"lambda_{j}": cols[f"lambda_{j}"] for j in range(1, 6) if f"lambda_{j}" in cols}
    figures = {
        "lambda": (lam, "eigenvalues"),
        "D": ({"D": cols["D"]}, "diffusion coefficient D"),
        "K": ({"K": cols["K"], "K*": cols["K_star"]}, "drift coefficient K"),
        "rel_err": ({"|K-K*|/K*": cols["rel_err"]}, "relative drift error"),
    }
    written = []
    for name, (series, title) in figures.items():
        written.append(atomic_write(os.path.join(out_dir, f"{name}.svg"),
                                    line_plot(x, series, title, param, name)))
        logs = {k: _log10(v) for k, v in series.items()}
        written.append(atomic_write(os.path.join(out_dir, f"{name}_log.svg"),
                                    line_plot(lx, logs, f"{title} (log-log)",
                                              f"log10 {param}", f"log10 {name}")))
    return written
