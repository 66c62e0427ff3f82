"""Banded iterated least squares with per-row BIC bandwidth selection.

The A-side update regresses each row of ``Y_t`` on the band columns of
``Qhat'_{t-1} = (Y_{t-1} B')'``; the B-side mirrors it with
``Rhat_{t-1} = A Y_{t-1}``.  For each row j the bandwidth is chosen by

    BIC_j(k) = log RSS_j(k) + (loglog(T2)/T2) * tau_j(k) * log(max(p, T2)),

with T2 the number of stacked scalar observations on that side, and the
side-level bandwidth is the max over rows.  Regression samples are the T-1
lag pairs (t = 2..T), so T2 = p2*(T-1) on the A side and p1*(T-1) on the B
side.  Off-band entries of the refit matrices are exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alse import AlseConfig, FitTrace, _renormalize, fit_alse, residual_ss
from .errors import IllPosedRegressionError
from .matcore import BandSpec, MarCoefficients, MatrixSeries

__all__ = [
    "RowRegression",
    "BicTrace",
    "BandedConfig",
    "BandedFitResult",
    "tau_count",
    "stacked_design_A",
    "stacked_design_B",
    "build_row_regression_A",
    "build_row_regression_B",
    "bic_row",
    "banded_ls_step_A",
    "banded_ls_step_B",
    "select_bandwidth",
    "fit_banded",
]

RSS_FLOOR = 1e-300
_RANK_TOL = 1e-12
_RSS_REL_FLOOR = (64 * np.finfo(float).eps) ** 2


def _effective_rss(rss: float, response_ss: float) -> float:
    """Clamp RSS from below at the numerical-zero scale of the LS solve.

    Residual mass below ``(64 eps ||v||)^2`` is floating-point noise; treating
    it as a common floor makes BIC comparisons at exact fits deterministic
    (the penalty then decides, favouring the smallest bandwidth).
    """
    return max(rss, RSS_FLOOR, _RSS_REL_FLOOR * response_ss)


def tau_count(j: int, k: int, p: int) -> int:
    """Number of in-band entries in row ``j`` (1-based) of a ``p x p`` matrix.

    Equals ``k+j`` for j <= k+1, ``2k+1`` for k+1 < j <= p-k and
    ``p+k-j+1`` for j > p-k, capped at ``p`` when the band saturates.
    """
    if not 1 <= j <= p:
        raise ValueError(f"row index j={j} out of range 1..{p}")
    if not 0 <= k < p:
        raise ValueError(f"bandwidth k={k} out of range 0..{p - 1}")
    return min(p, j + k) - max(1, j - k) + 1


def _band_slice(j: int, k: int, p: int) -> slice:
    """0-based column slice of the band of row ``j`` (1-based)."""
    return slice(max(1, j - k) - 1, min(p, j + k))


@dataclass(frozen=True)
class RowRegression:
    """One stacked row regression: response v_j and its tau_j(k) band columns."""

    response: np.ndarray
    design: np.ndarray
    row_index: int
    bandwidth: int


@dataclass
class BicTrace:
    """BIC scan record for one side: rss/bic per (row, candidate k)."""

    k_grid: np.ndarray
    rss: np.ndarray  # shape (p, len(k_grid))
    bic: np.ndarray
    k_by_row: np.ndarray  # chosen k per row (ties -> smallest k)
    k_hat: int
    K_max: int


def stacked_design_A(series: MatrixSeries, B_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stacked A-side design and responses over the T-1 lag pairs.

    Returns ``X`` of shape ((T-1)*p2, p1) whose blocks are ``Qhat'_{t-1}``,
    and ``V`` of the same row count whose column i stacks row i of Y_t.
    """
    data = series.data
    Qhat = data[:-1] @ np.asarray(B_hat, dtype=float).T
    X = Qhat.transpose(0, 2, 1).reshape(-1, series.p1)
    V = data[1:].transpose(0, 2, 1).reshape(-1, series.p1)
    return X, V


def stacked_design_B(series: MatrixSeries, A_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stacked B-side design/responses: blocks ``Rhat_{t-1}``, columns of Y_t."""
    data = series.data
    Rhat = np.asarray(A_hat, dtype=float) @ data[:-1]
    X = Rhat.reshape(-1, series.p2)
    W = data[1:].reshape(-1, series.p2)
    return X, W


def build_row_regression_A(series: MatrixSeries, B_hat: np.ndarray, j: int, k: int) -> RowRegression:
    """Row regression for row ``j`` (1-based) of A at bandwidth ``k``."""
    tau_count(j, k, series.p1)  # validates j, k
    X, V = stacked_design_A(series, B_hat)
    return RowRegression(response=V[:, j - 1], design=X[:, _band_slice(j, k, series.p1)], row_index=j, bandwidth=k)


def build_row_regression_B(series: MatrixSeries, A_hat: np.ndarray, j: int, k: int) -> RowRegression:
    """Row regression for row ``j`` (1-based) of B at bandwidth ``k``."""
    tau_count(j, k, series.p2)
    X, W = stacked_design_B(series, A_hat)
    return RowRegression(response=W[:, j - 1], design=X[:, _band_slice(j, k, series.p2)], row_index=j, bandwidth=k)


def _row_ls(X: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, float]:
    """Thin-design LS by QR with a rank guard; returns (beta, rss)."""
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    top = float(diag.max()) if diag.size else 0.0
    if top == 0.0 or float(diag.min()) <= top * _RANK_TOL:
        cond = np.inf if diag.min() == 0.0 else (top / float(diag.min())) ** 2
        raise IllPosedRegressionError("row regression design is rank deficient", condition=cond)
    beta = np.linalg.solve(R, Q.T @ v)
    resid = v - X @ beta
    return beta, float(resid @ resid)


def bic_row(reg: RowRegression, p: int, t_scaled: int | None = None) -> tuple[float, float]:
    """(RSS, BIC) of one row regression.

    ``t_scaled`` is the stacked sample count on this side (p2*(T-1) for A,
    p1*(T-1) for B); it defaults to the response length, which equals it.
    RSS is floored at 1e-300 before the log so exact fits stay finite.
    """
    if t_scaled is None:
        t_scaled = reg.response.shape[0]
    _, rss = _row_ls(reg.design, reg.response)
    tau = reg.design.shape[1]
    penalty = np.log(np.log(t_scaled)) / t_scaled * tau * np.log(max(p, t_scaled))
    return rss, float(np.log(_effective_rss(rss, float(reg.response @ reg.response))) + penalty)


def _scan_rows(
    X: np.ndarray, resp: np.ndarray, p: int, K_max: int, include_zero: bool
) -> tuple[BicTrace, dict]:
    """BIC scan of all rows over k in the grid; returns the trace and betas."""
    t_scaled = X.shape[0]
    k_lo = 0 if include_zero else 1
    k_grid = np.arange(k_lo, K_max + 1)
    n_k = len(k_grid)
    rss = np.empty((p, n_k))
    bic = np.empty((p, n_k))
    betas: dict = {}
    log_pen = np.log(np.log(t_scaled)) / t_scaled * np.log(max(p, t_scaled))
    for j in range(1, p + 1):
        v = resp[:, j - 1]
        v_ss = float(v @ v)
        for idx, k in enumerate(k_grid):
            beta, r = _row_ls(X[:, _band_slice(j, int(k), p)], v)
            betas[(j, int(k))] = beta
            rss[j - 1, idx] = r
            bic[j - 1, idx] = np.log(_effective_rss(r, v_ss)) + log_pen * tau_count(j, int(k), p)
    best_idx = np.argmin(bic, axis=1)  # first minimum -> smallest k
    k_by_row = k_grid[best_idx]
    k_hat = int(k_by_row.max())
    return BicTrace(k_grid=k_grid, rss=rss, bic=bic, k_by_row=k_by_row, k_hat=k_hat, K_max=K_max), betas


def _assemble_banded(betas: dict, p: int, k: int) -> np.ndarray:
    M = np.zeros((p, p))
    for j in range(1, p + 1):
        M[j - 1, _band_slice(j, k, p)] = betas[(j, k)]
    return M


def _refit_rows(X: np.ndarray, resp: np.ndarray, p: int, k: int) -> np.ndarray:
    M = np.zeros((p, p))
    for j in range(1, p + 1):
        beta, _ = _row_ls(X[:, _band_slice(j, k, p)], resp[:, j - 1])
        M[j - 1, _band_slice(j, k, p)] = beta
    return M


def banded_ls_step_A(series: MatrixSeries, B_hat: np.ndarray, k: int) -> np.ndarray:
    """LS update of A constrained to bandwidth ``k`` (row-wise QR solves)."""
    X, V = stacked_design_A(series, B_hat)
    return _refit_rows(X, V, series.p1, k)


def banded_ls_step_B(series: MatrixSeries, A_hat: np.ndarray, k: int) -> np.ndarray:
    """LS update of B constrained to bandwidth ``k``."""
    X, W = stacked_design_B(series, A_hat)
    return _refit_rows(X, W, series.p2, k)


def default_K_max(T: int, p: int) -> int:
    """Default bandwidth search bound: min(ceil(sqrt(T)), p-1)."""
    return max(1, min(int(np.ceil(np.sqrt(T))), p - 1))


def select_bandwidth(
    series: MatrixSeries,
    fixed_coeff: np.ndarray,
    side: str,
    K_max: int,
    include_zero: bool = False,
) -> tuple[int, BicTrace]:
    """Per-row BIC bandwidth selection for one side; k_hat = max over rows."""
    if K_max < 1:
        raise ValueError("K_max must be >= 1")
    if side == "A":
        X, resp = stacked_design_A(series, fixed_coeff)
        p = series.p1
    elif side == "B":
        X, resp = stacked_design_B(series, fixed_coeff)
        p = series.p2
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    trace, _ = _scan_rows(X, resp, p, min(K_max, p - 1), include_zero)
    return trace.k_hat, trace


@dataclass(frozen=True)
class BandedConfig:
    """Controls for the banded alternating fit (Step-1 ALSE plus Step-2 loop)."""

    eta: float = 1e-6
    max_iter: int = 200
    K1_max: int | None = None  # default min(ceil(sqrt(T)), p1-1)
    K2_max: int | None = None
    include_zero: bool = False
    order: str = "A"
    init: object = "identity"

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.order not in ("A", "B"):
            raise ValueError(f"order must be 'A' or 'B', got {self.order!r}")

    def alse(self) -> AlseConfig:
        return AlseConfig(eta=self.eta, max_iter=self.max_iter, init=self.init, order=self.order)


@dataclass
class BandedFitResult:
    """Banded fit output: coefficients, selected band, and scan traces."""

    coeffs: MarCoefficients
    band: BandSpec
    trace: FitTrace
    bic_traces: list  # per iteration: (BicTrace A-side, BicTrace B-side)
    init_trace: FitTrace


def _banded_half_step(series, fixed, side, K_max, include_zero):
    if side == "A":
        X, resp = stacked_design_A(series, fixed)
        p = series.p1
    else:
        X, resp = stacked_design_B(series, fixed)
        p = series.p2
    trace, betas = _scan_rows(X, resp, p, K_max, include_zero)
    return _assemble_banded(betas, p, trace.k_hat), trace


def fit_banded(series: MatrixSeries, config: BandedConfig = BandedConfig()) -> BandedFitResult:
    """Two-step banded estimation: ALSE initialization, then alternating
    banded refits with per-iteration BIC bandwidth selection on each side.

    Stops when both Frobenius deltas fall below ``eta``; exhaustion of
    ``max_iter`` is flagged in the trace, not raised.
    """
    K1 = config.K1_max if config.K1_max is not None else default_K_max(series.T_len, series.p1)
    K2 = config.K2_max if config.K2_max is not None else default_K_max(series.T_len, series.p2)
    K1 = min(K1, series.p1 - 1)
    K2 = min(K2, series.p2 - 1)
    init, init_trace = fit_alse(series, config.alse())
    A, B = init.A.copy(), init.B.copy()
    trace = FitTrace()
    bic_traces = []
    data = series.data
    k1_hat, k2_hat = K1, K2
    for _ in range(config.max_iter):
        A_prev, B_prev = A, B
        if config.order == "A":
            A, bic_a = _banded_half_step(series, B, "A", K1, config.include_zero)
            A, B = _renormalize(A, B)
            trace.objective.append(residual_ss(data, A, B))
            B, bic_b = _banded_half_step(series, A, "B", K2, config.include_zero)
            trace.objective.append(residual_ss(data, A, B))
        else:
            B, bic_b = _banded_half_step(series, A, "B", K2, config.include_zero)
            trace.objective.append(residual_ss(data, A, B))
            A, bic_a = _banded_half_step(series, B, "A", K1, config.include_zero)
            A, B = _renormalize(A, B)
            trace.objective.append(residual_ss(data, A, B))
        k1_hat, k2_hat = bic_a.k_hat, bic_b.k_hat
        bic_traces.append((bic_a, bic_b))
        trace.iterations += 1
        dA = float(np.linalg.norm(A - A_prev, "fro"))
        dB = float(np.linalg.norm(B - B_prev, "fro"))
        trace.deltas_A.append(dA)
        trace.deltas_B.append(dB)
        if dA <= config.eta and dB <= config.eta:
            trace.converged = True
            break
    coeffs = MarCoefficients(A=A, B=B, normalized=True)
    return BandedFitResult(
        coeffs=coeffs,
        band=BandSpec(k1=k1_hat, k2=k2_hat),
        trace=trace,
        bic_traces=bic_traces,
        init_trace=init_trace,
    )
