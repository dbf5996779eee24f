"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import filecmp
import math
import sys
import time
from functools import lru_cache

import numpy as np
import pytest

from fpcoeffs import (RunConfig, assemble, assemble_fd, build_mesh, case_potential,
                      compute_point, fourier_coefficients, lowest_eigenpairs,
                      quadratic_potential, truncated_coefficients, with_zero_mode)
from fpcoeffs.cli import run_single
from fpcoeffs.quadrature import composite_gauss


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
    return emit


@lru_cache(maxsize=None)
def quadratic_run(vartheta: float):
    t0 = time.perf_counter()
    spec = quadratic_potential(vartheta)
    mesh = build_mesh(10.0, 200, 4, 21)
    op = assemble(mesh, spec)
    dec = with_zero_mode(lowest_eigenpairs(op, 8))
    fc = fourier_coefficients(dec, spec, mesh)
    series = truncated_coefficients(dec, fc.eta, fc.omega)
    return dec, series, time.perf_counter() - t0


@lru_cache(maxsize=None)
def pipeline_run(case: str, gamma: float, delta: float | None = None, n_elements: int = 1000):
    t0 = time.perf_counter()
    res = compute_point(RunConfig(case=case, gamma=gamma, delta=delta, n_elements=n_elements))
    return res, time.perf_counter() - t0


CRIT2 = [("A", g, None, 200) for g in (1.0, 10.0, 50.0)]
CRIT3 = [("A", 1.0, None, 1000)]
CRIT6 = [("C", 1.0, d, 1000) for d in (1.0, 5.0, 10.0)]


def test_criterion_1_quadratic_known_answer(report):
    problems, worst_eig, worst_coef, total = [], 0.0, 0.0, 0.0
    for vt in (0.5, 1.0, 2.0):
        dec, s, dt = quadratic_run(vt)
        total += dt
        err = np.abs(dec.eigenvalues[:6] - np.arange(6))
        worst_eig = max(worst_eig, err.max())
        if err.max() >= 1e-8:
            problems.append(f"vartheta={vt}: |lambda_n - n| up to {err.max():.2e} "
                            f"(n={int(err.argmax())})")
        cerr = max(np.abs(s.D_partial / vt - 1).max(), np.abs(s.K_partial - 1).max())
        worst_coef = max(worst_coef, cerr)
        if cerr >= 1e-8:
            problems.append(f"vartheta={vt}: D^N, K^N relative error {cerr:.2e}")
    if total >= 5.0:
        problems.append(f"runtime {total:.1f}s")
    ok = not problems
    report(1, ok, f"eigen err {worst_eig:.2e}, D/K err {worst_coef:.2e}, {total:.2f}s"
           + ("" if ok else "; " + "; ".join(problems)))
    assert ok, problems


def test_criterion_2_drift_oracle_case_a(report):
    parts, ok = [], True
    for key in CRIT2:
        res, dt = pipeline_run(*key)
        good = res.ok and res.rel_err < 1e-4 and dt < 60
        ok &= good
        parts.append(f"gamma={key[1]:g}: rel_err={res.rel_err:.2e} N_auto={res.N_auto} {dt:.1f}s")
    report(2, ok, "; ".join(parts))
    assert ok


def test_criterion_3_mode_count(report):
    res, _ = pipeline_run(*CRIT3[0])
    s = res.series
    d_err = abs(s.D_partial[9] - s.D_partial[49]) / s.D_partial[49]
    k_err = abs(s.K_partial[14] - res.K_star) / res.K_star
    ok = d_err < 1e-6 and k_err < 1e-4
    report(3, ok, f"|D10-D50|/D50={d_err:.2e}, |K15-K*|/K*={k_err:.2e}")
    assert ok


def test_criterion_4_tunnelling_decay(report):
    t0 = time.perf_counter()
    mesh = build_mesh()

    def lowest(gamma):
        return lowest_eigenpairs(assemble(mesh, case_potential("A", gamma)), 4).eigenvalues

    gammas = np.array([10.0, 20.0, 40.0, 60.0, 80.0])
    lam = np.array([lowest(g) for g in gammas])
    lam2_ref = lowest(1.0)[2]
    y = np.log(lam[:, 1])
    c = np.polyfit(gammas, y, 1)
    r2 = 1 - np.sum((y - np.polyval(c, gammas)) ** 2) / np.sum((y - y.mean()) ** 2)
    ratio = lam[:, 2] / lam2_ref
    dt = time.perf_counter() - t0
    ok = c[0] < 0 and r2 >= 0.99 and np.all((ratio > 0.1) & (ratio < 10)) and dt < 300
    report(4, ok, f"slope={c[0]:.4f}, R2={r2:.6f}, lambda_2/lambda_2(1) in "
           f"[{ratio.min():.3f}, {ratio.max():.3f}], {dt:.1f}s")
    assert ok


def test_criterion_5_breakdown_detection(report):
    parts, ok = [], True
    for case, gamma in (("A", 120.0), ("B", 7.0)):
        res, _ = pipeline_run(case, gamma)
        flagged = res.status == "TunnellingCollapse" or res.symmetry_broken
        ok &= flagged
        parts.append(f"case {case} gamma={gamma:g}: status={res.status}, "
                     f"symmetry_broken={res.symmetry_broken}")
    report(5, ok, "; ".join(parts))
    assert ok


def test_criterion_6_case_c(report):
    parts, ok = [], True
    for key in CRIT6:
        res, _ = pipeline_run(*key)
        spec = res.spec
        x, w = composite_gauss(-spec.R, spec.R, 800, 32, (0.0,))
        compat = float(np.dot(w, (x - spec.V) * spec.maxwellian(x)))
        good = res.ok and spec.V != 0 and abs(compat) < 1e-10 and res.rel_err < 1e-3
        ok &= good
        parts.append(f"delta={key[2]:g}: V={spec.V:.4f}, compat={compat:.1e}, "
                     f"rel_err={res.rel_err:.2e}")
    report(6, ok, "; ".join(parts))
    assert ok


def test_criterion_7_monotone_positive(report):
    series = [quadratic_run(vt)[1] for vt in (0.5, 1.0, 2.0)]
    for key in CRIT2 + CRIT3 + CRIT6:
        res, _ = pipeline_run(*key)
        series.append(res.series)
    # breakdown runs produce no series by design
    missing = sum(s is None for s in series)
    bad = [i for i, s in enumerate(series)
           if s is None or not (np.all(np.diff(s.D_partial) >= 0) and s.D_partial[-1] > 0)]
    ok = not bad
    report(7, ok, f"{len(series) - missing} series checked, {len(bad)} violations")
    assert ok


def test_criterion_8_fem_fd(report):
    spec = case_potential("A", 1.0)
    fem = lowest_eigenpairs(assemble(build_mesh(), spec), 6).eigenvalues
    fd = lowest_eigenpairs(assemble_fd(10.0, 4001, spec), 6).eigenvalues
    rel = np.abs(fd[1:6] - fem[1:6]) / fem[1:6]
    zero_gap = abs(fd[0] - fem[0])
    ok = rel.max() < 1e-3 and zero_gap < 1e-3
    report(8, ok, f"positive eigenvalues rel diff max {rel.max():.2e}, zero modes differ by {zero_gap:.1e}")
    assert ok


def test_criterion_9_determinism(report, tmp_path):
    same = True
    for _, gamma, _, n in CRIT2:
        dirs = []
        for rep in range(2):
            out = tmp_path / f"g{gamma:g}_{rep}"
            run_single(RunConfig(case="A", gamma=gamma, n_elements=n, output_dir=str(out)))
            dirs.append(out)
        for name in ("eigenvalues.csv", "coefficients.csv"):
            same &= filecmp.cmp(dirs[0] / name, dirs[1] / name, shallow=False)
    report(9, same, "eigenvalue and coefficient CSVs byte-identical across repeated runs"
           if same else "outputs differ between runs")
    assert same


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
