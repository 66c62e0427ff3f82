"""Alternating (iterated) least-squares estimation of the MAR(1) pair (A, B).

Each half-step solves one side exactly while the other is held fixed:

* A-step: with ``Qhat_{t-1} = Y_{t-1} B'``, minimize
  ``sum_t ||Y_t - A Qhat_{t-1}||_F^2`` -> closed-form Gram solve.
* B-step: with ``Rhat_{t-1} = A Y_{t-1}``, minimize
  ``sum_t ||Y_t - Rhat_{t-1} B'||_F^2``.

The pair is renormalized to the identification convention after every
A-update, which leaves the objective unchanged.  This estimator is both the
baseline comparison method and the initializer for the banded and sparse
iterated estimators.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCoefficientsError, IllPosedRegressionError
from .matcore import MarCoefficients, MatrixSeries, normalize_identification

__all__ = ["AlseConfig", "FitTrace", "ls_step_A", "ls_step_B", "fit_alse"]

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class AlseConfig:
    """Convergence controls for the alternating loop.

    ``init`` is either the string ``"identity"`` (A0 = I/sqrt(p1), B0 from one
    B-step) or a provided :class:`MarCoefficients` pair.  ``order`` selects
    which half-step runs first inside each iteration ("A" updates A first
    from the initial B, "B" updates B first from the initial A).
    """

    eta: float = 1e-6
    max_iter: int = 200
    init: object = "identity"
    order: str = "A"

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.order not in ("A", "B"):
            raise ValueError(f"order must be 'A' or 'B', got {self.order!r}")
        if not (self.init == "identity" or isinstance(self.init, MarCoefficients)):
            raise ValueError("init must be 'identity' or a MarCoefficients pair")


@dataclass
class FitTrace:
    """Per-iteration convergence record of an alternating fit."""

    iterations: int = 0
    deltas_A: list = field(default_factory=list)
    deltas_B: list = field(default_factory=list)
    objective: list = field(default_factory=list)  # RSS after each half-step
    converged: bool = False


def _solve_gram(G: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    """Solve G x = rhs for symmetric PSD G with a condition guard."""
    evals = np.linalg.eigvalsh(G)
    lo, hi = float(evals[0]), float(evals[-1])
    cond = np.inf if lo <= 0.0 else hi / lo
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllPosedRegressionError(
            f"{what}: Gram matrix is numerically singular (condition ~ {cond:.3e})",
            condition=cond,
        )
    c = np.linalg.cholesky(G)
    y = np.linalg.solve(c, rhs)
    return np.linalg.solve(c.T, y)


def residual_ss(data: np.ndarray, A: np.ndarray, B: np.ndarray) -> float:
    """Full-model residual sum of squares sum_t ||Y_t - A Y_{t-1} B'||_F^2."""
    resid = data[1:] - A @ data[:-1] @ B.T
    return float(np.sum(resid * resid))


def ls_step_A(series: MatrixSeries, B: np.ndarray) -> np.ndarray:
    """Exact LS update of A given B.

    Returns ``(sum_t Y_t Qhat'_{t-1}) (sum_t Qhat_{t-1} Qhat'_{t-1})^{-1}``
    over the T-1 lag pairs.
    """
    data = series.data
    Qhat = data[:-1] @ np.asarray(B, dtype=float).T
    M = np.einsum("tij,tkj->ik", data[1:], Qhat)
    G = np.einsum("tij,tkj->ik", Qhat, Qhat)
    return _solve_gram(G, M.T, "A-step").T


def ls_step_B(series: MatrixSeries, A: np.ndarray) -> np.ndarray:
    """Exact LS update of B given A (mirror of :func:`ls_step_A`)."""
    data = series.data
    Rhat = np.asarray(A, dtype=float) @ data[:-1]
    M = np.einsum("tji,tjk->ik", Rhat, data[1:])  # sum_t Rhat' Y_t
    G = np.einsum("tji,tjk->ik", Rhat, Rhat)
    return _solve_gram(G, M, "B-step").T


def _initial_pair(series: MatrixSeries, config: AlseConfig) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(config.init, MarCoefficients):
        pair = normalize_identification(config.init)
        return pair.A.copy(), pair.B.copy()
    A0 = np.eye(series.p1) / np.sqrt(series.p1)
    B0 = ls_step_B(series, A0)
    return A0, B0


def fit_alse(series: MatrixSeries, config: AlseConfig = AlseConfig()) -> tuple[MarCoefficients, FitTrace]:
    """Alternate exact LS half-steps until both Frobenius deltas fall below eta.

    Hitting ``max_iter`` is flagged in the trace (``converged = False``), not
    raised.  The output pair carries the identification normalization.
    """
    n_obs = series.p1 * series.p2 * (series.T_len - 1)
    if n_obs < series.p1**2 + series.p2**2:
        warnings.warn(
            f"series provides {n_obs} observations for {series.p1**2 + series.p2**2} "
            "parameters; the fit may be ill posed",
            stacklevel=2,
        )
    A, B = _initial_pair(series, config)
    trace = FitTrace()
    data = series.data
    for _ in range(config.max_iter):
        A_prev, B_prev = A, B
        if config.order == "A":
            A = ls_step_A(series, B)
            A, B = _renormalize(A, B)
            trace.objective.append(residual_ss(data, A, B))
            B = ls_step_B(series, A)
            trace.objective.append(residual_ss(data, A, B))
        else:
            B = ls_step_B(series, A)
            trace.objective.append(residual_ss(data, A, B))
            A = ls_step_A(series, B)
            A, B = _renormalize(A, B)
            trace.objective.append(residual_ss(data, A, B))
        trace.iterations += 1
        dA = float(np.linalg.norm(A - A_prev, "fro"))
        dB = float(np.linalg.norm(B - B_prev, "fro"))
        trace.deltas_A.append(dA)
        trace.deltas_B.append(dB)
        if dA <= config.eta and dB <= config.eta:
            trace.converged = True
            break
    return MarCoefficients(A=A, B=B, normalized=True), trace


def _renormalize(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Apply the identification rescaling to plain arrays (product preserved)."""
    norm = float(np.linalg.norm(A, "fro"))
    if norm == 0.0:
        raise DegenerateCoefficientsError("cannot normalize: ||A||_F = 0")
    c = norm if float(np.trace(A)) >= 0.0 else -norm
    return A / c, c * B
