"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.  The Monte Carlo criteria use fixed seeds; tolerances are
pinned in the assertions.
"""

import os
import time

import numpy as np

from marfit import (
    BandSpec,
    BandedDesign,
    ExperimentSpec,
    LassoProblem,
    MarCoefficients,
    MatrixSeries,
    NoiseSpec,
    TuningMethod,
    a_side_problem,
    banded_ls_step_A,
    banded_ls_step_B,
    fit_banded,
    fit_sparse,
    gen_banded_coeffs,
    kron,
    lambda_max_value,
    lasso_cd,
    ls_step_A,
    ls_step_B,
    normalize_identification,
    run_monte_carlo,
    simulate,
    vec,
)
from marfit.cli import main as cli_main

SEED = 20260808


def _report(name: str, ok: bool, detail: str, started: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}: {detail} ({time.time() - started:.1f}s)")
    assert ok, f"{name}: {detail}"


def test_criterion_1_bandwidth_recovery():
    started = time.time()
    spec = ExperimentSpec(
        table="table2", design="banded", p1=6, p2=4, k1=1, k2=1, rho=0.5, T_values=(400,)
    )
    res = run_monte_carlo(spec, 50, SEED)
    row = res.rows[0]
    ok = row["E1_pct"] >= 95.0 and row["E2_pct"] >= 95.0 and row["n_ok"] == 50
    _report(
        "criterion 1 (bandwidth recovery, T=400, 50 reps)",
        ok,
        f"E1={row['E1_pct']:.0f}% E2={row['E2_pct']:.0f}% (need >= 95%)",
        started,
    )


def test_criterion_2_error_decay_and_ordering():
    started = time.time()
    spec = ExperimentSpec(
        table="table3",
        design="banded",
        p1=6,
        p2=4,
        k1=2,
        k2=1,
        rho=0.5,
        T_values=(200, 500, 1000, 2000),
        estimators=("banded", "alse"),
    )
    res = run_monte_carlo(spec, 30, SEED)
    banded = {r["T"]: r for r in res.rows if r["estimator"] == "banded"}
    alse = {r["T"]: r for r in res.rows if r["estimator"] == "alse"}
    errs_A = [banded[T]["err_A"] for T in (200, 500, 1000, 2000)]
    decay_ok = all(a > b for a, b in zip(errs_A, errs_A[1:]))
    level_ok = abs(banded[2000]["err_A"] - (-3.214)) <= 0.3
    dominance_ok = all(banded[T]["err_S"] <= alse[T]["err_S"] for T in (200, 500, 1000, 2000))
    _report(
        "criterion 2 (error decay and method ordering, 30 reps)",
        decay_ok and level_ok and dominance_ok,
        f"errA across T: {[round(e, 3) for e in errs_A]} (strictly decreasing: {decay_ok}); "
        f"errA(2000)={banded[2000]['err_A']:.3f} vs -3.214 +/- 0.3 ({level_ok}); "
        f"banded err_S <= alse err_S at all T ({dominance_ok})",
        started,
    )


def test_criterion_3_initialization_order_insensitivity():
    started = time.time()
    spec = ExperimentSpec(
        table="table1", design="banded", p1=6, p2=4, k1=2, k2=1, rho=0.5, T_values=(500,), eta=1e-6
    )
    res = run_monte_carlo(spec, 30, SEED)
    row = res.rows[0]
    ok = row["max_log10_dA"] <= -6.0 and row["n_ok"] == 30
    _report(
        "criterion 3 (initialization-order insensitivity, 30 reps)",
        ok,
        f"max log10 ||A1-A2||_F = {row['max_log10_dA']:.2f} (need <= -6)",
        started,
    )


def test_criterion_4_sparse_recovery_ksc():
    started = time.time()
    spec = ExperimentSpec(
        table="table4",
        design="sparse",
        p1=6,
        p2=4,
        r1=0.3,
        r2=0.3,
        rho=0.9,
        T_values=(800,),
        tunings=("ksc",),
    )
    res = run_monte_carlo(spec, 30, SEED)
    row = res.rows[0]
    cr_ok = row["cr_A"] >= 0.90 and row["cr_B"] >= 0.93
    err_ok = abs(row["err_lasso"] - (-1.856)) <= 0.3
    _report(
        "criterion 4 (sparse recovery with KSC, T=800, 30 reps)",
        cr_ok and err_ok and row["n_ok"] == 30,
        f"cr_A={row['cr_A']:.3f} (>=0.90), cr_B={row['cr_B']:.3f} (>=0.93), "
        f"err_S={row['err_lasso']:.3f} vs -1.856 +/- 0.3",
        started,
    )


def test_criterion_5_tuning_method_ordering():
    started = time.time()
    spec = ExperimentSpec(
        table="table4",
        design="sparse",
        p1=6,
        p2=4,
        r1=0.3,
        r2=0.3,
        rho=0.9,
        T_values=(400,),
        tunings=("sdcv", "mcv"),
    )
    res = run_monte_carlo(spec, 30, SEED)
    rows = {r["tuning"]: r for r in res.rows}
    cr_order = (
        rows["sdcv"]["cr_A"] >= rows["mcv"]["cr_A"] and rows["sdcv"]["cr_B"] >= rows["mcv"]["cr_B"]
    )
    err_order = rows["mcv"]["err_lasso"] <= rows["sdcv"]["err_lasso"]
    _report(
        "criterion 5 (tuning-method ordering, T=400, 30 reps)",
        cr_order and err_order,
        f"cr_A sdCV={rows['sdcv']['cr_A']:.3f} >= mCV={rows['mcv']['cr_A']:.3f}; "
        f"err mCV={rows['mcv']['err_lasso']:.3f} <= sdCV={rows['sdcv']['err_lasso']:.3f}",
        started,
    )


def test_criterion_6_oracle_equivalences():
    started = time.time()
    rng = np.random.default_rng(SEED)
    failures = []

    # (a) Lasso at lambda = 0 equals least squares to 1e-8
    X = rng.standard_normal((60, 5))
    R = rng.standard_normal((60, 3))
    sol = lasso_cd(LassoProblem(X, R, n_pairs=60, block=1, lam=0.0), tol=1e-12)
    ls = np.linalg.solve(X.T @ X, X.T @ R)
    if not np.allclose(sol.theta, ls, atol=1e-8):
        failures.append("(a) lambda=0 != LS")

    # (b) row-separable A-side Lasso equals monolithic solve to 1e-10, p1 <= 4
    for p1, p2 in ((2, 3), (3, 2), (4, 3)):
        data = rng.standard_normal((30, p1, p2))
        series = MatrixSeries(data)
        B_hat = rng.standard_normal((p2, p2))
        prob = a_side_problem(series, B_hat)
        lam = 0.3 * lambda_max_value(prob)
        sol = lasso_cd(
            LassoProblem(prob.design, prob.responses, prob.n_pairs, prob.block, lam), tol=1e-14
        )
        Z = np.vstack([kron(B_hat @ data[t - 1].T, np.eye(p1)) for t in range(1, 30)])
        y = np.concatenate([vec(data[t]) for t in range(1, 30)])
        theta = np.zeros(p1 * p1)
        col_ss = np.einsum("ij,ij->j", Z, Z)
        resid = y.copy()
        thr = 0.5 * 29 * lam
        for _ in range(100_000):
            max_d = 0.0
            for g in range(p1 * p1):
                rho = Z[:, g] @ resid + col_ss[g] * theta[g]
                new = np.sign(rho) * max(abs(rho) - thr, 0.0) / col_ss[g]
                d = abs(new - theta[g])
                if d > 0:
                    resid -= (new - theta[g]) * Z[:, g]
                    theta[g] = new
                max_d = max(max_d, d)
            if max_d < 1e-14:
                break
        if not np.allclose(sol.coef, theta, atol=1e-10):
            failures.append(f"(b) separability p1={p1}")

    # (c) banded fit at maximal bandwidth equals the ALSE half-step to 1e-10
    truth = gen_banded_coeffs(BandedDesign(6, 4, BandSpec(2, 1), 0.5), seed=SEED)
    series = simulate(truth, NoiseSpec(), T=200, seed=SEED + 1)
    if not np.allclose(
        banded_ls_step_A(series, truth.B, 5), ls_step_A(series, truth.B), atol=1e-10
    ):
        failures.append("(c) banded max-k A != ls_step_A")
    if not np.allclose(
        banded_ls_step_B(series, truth.A, 3), ls_step_B(series, truth.A), atol=1e-10
    ):
        failures.append("(c) banded max-k B != ls_step_B")

    # (d) vec-Kronecker identity over 200 random triples to 1e-10
    for _ in range(200):
        p1, p2 = rng.integers(1, 7, size=2)
        A = rng.standard_normal((p1, p1))
        Y = rng.standard_normal((p1, p2))
        B = rng.standard_normal((p2, p2))
        if not np.allclose(vec(A @ Y @ B.T), kron(B, A) @ vec(Y), atol=1e-10):
            failures.append("(d) vec-kron identity")
            break

    # (e) KKT certificate for every Lasso solution
    for seed in range(5):
        prob_rng = np.random.default_rng(seed)
        Xk = prob_rng.standard_normal((50, 6))
        Rk = prob_rng.standard_normal((50, 2))
        base = LassoProblem(Xk, Rk, n_pairs=50, block=1)
        for frac in (0.5, 0.05):
            lam = frac * lambda_max_value(base)
            s = lasso_cd(LassoProblem(Xk, Rk, 50, 1, lam), tol=1e-12)
            if not (s.converged and s.kkt_residual <= 1e-8):
                failures.append(f"(e) KKT seed={seed} frac={frac}")

    # (f) normalization idempotent and product-preserving
    for _ in range(20):
        A = rng.standard_normal((4, 4))
        B = rng.standard_normal((3, 3))
        once = normalize_identification(MarCoefficients(A=A, B=B))
        twice = normalize_identification(once)
        if not (
            np.allclose(once.A, twice.A, atol=1e-12)
            and np.allclose(kron(once.B, once.A), kron(B, A), atol=1e-12)
        ):
            failures.append("(f) normalization")
            break

    _report(
        "criterion 6 (oracle equivalences a-f)",
        not failures,
        "all six equivalences hold" if not failures else "; ".join(failures),
        started,
    )


def test_criterion_7_determinism(tmp_path):
    started = time.time()
    truth = gen_banded_coeffs(BandedDesign(6, 4, BandSpec(1, 1), 0.5), seed=SEED)
    series = simulate(truth, NoiseSpec(), T=300, seed=SEED + 1)

    fit1 = fit_banded(series)
    fit2 = fit_banded(series)
    banded_ok = np.array_equal(fit1.coeffs.A, fit2.coeffs.A) and np.array_equal(
        fit1.coeffs.B, fit2.coeffs.B
    )

    sp1 = fit_sparse(series, TuningMethod("ksc", n_splits=10, seed=SEED))
    sp2 = fit_sparse(series, TuningMethod("ksc", n_splits=10, seed=SEED))
    sparse_ok = (
        np.array_equal(sp1.coeffs.A, sp2.coeffs.A)
        and sp1.lambda_A == sp2.lambda_A
        and sp1.lambda_B == sp2.lambda_B
    )

    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "table = table3\ndesign = banded\np1 = 4\np2 = 3\nk1 = 1\nk2 = 1\n"
        "rho = 0.5\nT = 80\nn_reps = 4\nseed = 6\nestimators = banded,alse\n"
    )
    blobs = []
    for i, threads in enumerate(("1", "4")):
        out = str(tmp_path / f"run{i}")
        code = cli_main(["benchmark", str(cfg), "--output-dir", out, "--threads", threads])
        assert code == 0
        with open(os.path.join(out, "table3.csv"), "rb") as fh:
            blobs.append(fh.read())
    cli_ok = blobs[0] == blobs[1]

    _report(
        "criterion 7 (bit-reproducibility, threads 1 vs 4)",
        banded_ok and sparse_ok and cli_ok,
        f"banded fit identical: {banded_ok}; sparse fit identical: {sparse_ok}; "
        f"benchmark bytes identical across thread counts: {cli_ok}",
        started,
    )
