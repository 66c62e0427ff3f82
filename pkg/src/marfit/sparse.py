"""Iterated Lasso estimation of sparse (A, B) with three tuning selectors.

The vec/Kronecker reformulation makes the A-side problem

    min_alpha (1/n) sum_t ||vec(Y_t) - ((B Y'_{t-1}) (x) I_p1) alpha||^2
              + lambda ||alpha||_1

separable across the p1 rows of A, all sharing the stacked design whose
blocks are ``Qhat'_{t-1}``; the B side mirrors it with ``Rhat_{t-1}``
blocks.  ``n`` counts the stacked lag pairs (T-1).  The solver is cyclic
coordinate descent on the Gram form with active-set sweeps and warm starts
along a geometric lambda path.

Penalty selection: K-fold cross-validation with the min rule (mCV) or the
one-standard-error rule (sdCV), or selection-stability via average Cohen's
kappa between active sets fitted on random half-splits (KSC).  Tuning is
selected in the first iteration of the alternating loop and kept frozen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alse import AlseConfig, FitTrace, _renormalize, fit_alse, residual_ss
from .errors import ConfigError, TuningFailureError
from .matcore import MarCoefficients, MatrixSeries

__all__ = [
    "LassoProblem",
    "LassoSolution",
    "LambdaGrid",
    "TuningMethod",
    "SparseConfig",
    "SparseFitResult",
    "RecoveryScore",
    "a_side_problem",
    "b_side_problem",
    "lambda_max_value",
    "make_lambda_grid",
    "lasso_cd",
    "solve_path",
    "cohens_kappa",
    "select_lambda_cv",
    "select_lambda_ksc",
    "fit_sparse",
    "recovery_score",
]


@dataclass(frozen=True)
class LassoProblem:
    """A family of row Lasso problems sharing one stacked design.

    ``design`` has ``n_pairs * block`` rows; block ``t`` of the design is the
    regressor matrix of lag pair ``t``.  Column ``i`` of ``responses`` is the
    response of row-problem ``i``; the monolithic coefficient vector orders
    coordinates as ``theta.ravel()`` with ``theta[g, i]`` the loading of
    design column ``g`` in problem ``i`` (this equals ``vec`` of the
    coefficient matrix).
    """

    design: np.ndarray
    responses: np.ndarray
    n_pairs: int
    block: int
    lam: float = 0.0

    @property
    def n_problems(self) -> int:
        return self.responses.shape[1]

    def rows_of(self, pairs: np.ndarray) -> np.ndarray:
        pairs = np.asarray(pairs, dtype=int)
        return (pairs[:, None] * self.block + np.arange(self.block)).ravel()

    def gram(self, pairs: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(X'X, X'responses) over all pairs or the given subset."""
        if pairs is None:
            X, R = self.design, self.responses
        else:
            rows = self.rows_of(pairs)
            X, R = self.design[rows], self.responses[rows]
        return X.T @ X, X.T @ R


def a_side_problem(series: MatrixSeries, B_hat: np.ndarray, lam: float = 0.0) -> LassoProblem:
    """A-side family: blocks ``Qhat'_{t-1}``, responses the rows of Y_t."""
    data = series.data
    Qhat = data[:-1] @ np.asarray(B_hat, dtype=float).T
    X = Qhat.transpose(0, 2, 1).reshape(-1, series.p1)
    V = data[1:].transpose(0, 2, 1).reshape(-1, series.p1)
    return LassoProblem(design=X, responses=V, n_pairs=series.T_len - 1, block=series.p2, lam=lam)


def b_side_problem(series: MatrixSeries, A_hat: np.ndarray, lam: float = 0.0) -> LassoProblem:
    """B-side family: blocks ``Rhat_{t-1}``, responses the columns of Y_t."""
    data = series.data
    Rhat = np.asarray(A_hat, dtype=float) @ data[:-1]
    X = Rhat.reshape(-1, series.p2)
    W = data[1:].reshape(-1, series.p2)
    return LassoProblem(design=X, responses=W, n_pairs=series.T_len - 1, block=series.p1, lam=lam)


def lambda_max_value(problem: LassoProblem) -> float:
    """Smallest penalty with an all-zero solution: max_g |(2/n) Z_g' y|."""
    _, C = problem.gram()
    return float(2.0 / problem.n_pairs * np.max(np.abs(C)))


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly decreasing geometric penalty grid."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) == 0:
            raise ValueError("lambda grid must be a nonempty 1-d array")
        if np.any(vals <= 0) or np.any(np.diff(vals) >= 0):
            raise ValueError("lambda grid must be positive and strictly decreasing")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


def make_lambda_grid(lambda_max: float, n_lambda: int = 100, ratio: float = 1e-3) -> LambdaGrid:
    """Geometric grid from ``lambda_max`` down to ``ratio * lambda_max``."""
    if lambda_max <= 0:
        raise ValueError("lambda_max must be > 0")
    if n_lambda < 2:
        raise ValueError("n_lambda must be >= 2")
    exponents = np.arange(n_lambda) / (n_lambda - 1)
    return LambdaGrid(values=lambda_max * ratio**exponents)


@dataclass
class LassoSolution:
    """Coordinate-descent output with its optimality certificate."""

    theta: np.ndarray  # (p, n_problems)
    lam: float
    converged: bool
    passes: int
    kkt_residual: float

    @property
    def coef(self) -> np.ndarray:
        """Monolithic coefficient vector (= vec of the coefficient matrix)."""
        return self.theta.ravel()

    @property
    def matrix(self) -> np.ndarray:
        """Coefficient matrix with rows indexed by problem (A or B itself)."""
        return self.theta.T.copy()


def _sweep(G, C, theta, thr, diag, idx) -> float:
    """One cyclic CD pass over the coordinates in ``idx`` (all problems at once)."""
    max_d = 0.0
    for g in idx:
        dg = diag[g]
        if dg <= 0.0:
            continue
        r = C[g] - G[g] @ theta + dg * theta[g]
        new = np.sign(r) * np.maximum(np.abs(r) - thr, 0.0) / dg
        d = float(np.max(np.abs(new - theta[g])))
        if d > max_d:
            max_d = d
        theta[g] = new
    return max_d


def _cd_gram(G, C, lam, n_pairs, theta, tol, max_passes) -> tuple[int, bool]:
    """Active-set cyclic CD on the Gram form; mutates ``theta`` in place."""
    p = G.shape[0]
    thr = 0.5 * n_pairs * lam
    diag = np.ascontiguousarray(np.diag(G))
    all_idx = range(p)
    passes = 0
    while passes < max_passes:
        active = np.flatnonzero(np.any(theta != 0.0, axis=1))
        while len(active) and passes < max_passes:
            passes += 1
            if _sweep(G, C, theta, thr, diag, active) < tol:
                break
        if passes >= max_passes:
            break
        passes += 1
        if _sweep(G, C, theta, thr, diag, all_idx) < tol:
            return passes, True
    return passes, False


def _kkt_residual(G, C, theta, lam, n_pairs) -> float:
    grad = 2.0 / n_pairs * (C - G @ theta)
    zero = theta == 0.0
    viol = 0.0
    if np.any(zero):
        viol = max(viol, float(np.max(np.abs(grad[zero])) - lam))
    if np.any(~zero):
        viol = max(viol, float(np.max(np.abs(grad[~zero] - lam * np.sign(theta[~zero])))))
    return max(viol, 0.0)


def lasso_cd(
    problem: LassoProblem,
    tol: float = 1e-9,
    max_passes: int = 10_000,
    warm_start: np.ndarray | None = None,
) -> LassoSolution:
    """Solve the row-separable Lasso family at ``problem.lam``.

    Minimizes ``(1/n) ||y - Z theta||^2 + lam ||theta||_1`` per problem,
    ``n`` = number of stacked lag pairs.  Non-convergence after
    ``max_passes`` is flagged on the result together with the KKT residual,
    not raised.
    """
    if problem.lam < 0:
        raise ValueError("lambda must be >= 0")
    G, C = problem.gram()
    theta = np.zeros_like(C) if warm_start is None else np.array(warm_start, dtype=float)
    passes, converged = _cd_gram(G, C, problem.lam, problem.n_pairs, theta, tol, max_passes)
    return LassoSolution(
        theta=theta,
        lam=problem.lam,
        converged=converged,
        passes=passes,
        kkt_residual=_kkt_residual(G, C, theta, problem.lam, problem.n_pairs),
    )


def solve_path(
    G: np.ndarray,
    C: np.ndarray,
    n_pairs: int,
    grid: LambdaGrid,
    tol: float = 1e-9,
    max_passes: int = 10_000,
) -> np.ndarray:
    """Warm-started solution path over a decreasing grid; shape (L, p, q)."""
    theta = np.zeros_like(C)
    out = np.empty((len(grid),) + C.shape)
    for i, lam in enumerate(grid.values):
        _cd_gram(G, C, float(lam), n_pairs, theta, tol, max_passes)
        out[i] = theta
    return out


def cohens_kappa(s1: np.ndarray, s2: np.ndarray) -> float:
    """Chance-corrected agreement of two binary selections.

    Defined as 0 when either selection is degenerate (all or none), where
    the usual estimator is 0/0.
    """
    s1 = np.asarray(s1, dtype=bool).ravel()
    s2 = np.asarray(s2, dtype=bool).ravel()
    if s1.shape != s2.shape:
        raise ValueError("selections must have equal length")
    m1, m2 = s1.mean(), s2.mean()
    if m1 in (0.0, 1.0) or m2 in (0.0, 1.0):
        return 0.0
    p_agree = float(np.mean(s1 == s2))
    p_chance = m1 * m2 + (1.0 - m1) * (1.0 - m2)
    return float((p_agree - p_chance) / (1.0 - p_chance))


@dataclass(frozen=True)
class TuningMethod:
    """Penalty selector: one of sd.cv / m.cv / ksc / fixed.

    ``kind``: "sdcv" (CV, one-standard-error rule), "mcv" (CV, min rule),
    "ksc" (kappa selection with ``n_splits`` half-splits and threshold
    ``1 - alpha``), or "fixed" (``lambda_A``/``lambda_B`` given).
    """

    kind: str
    cv_folds: int = 10
    n_splits: int = 50
    alpha: float = 0.4
    lambda_A: float | None = None
    lambda_B: float | None = None
    seed: int = 0
    ksc_rule: str = "min"
    cv_scheme: str = "random"

    def __post_init__(self):
        if self.kind not in ("sdcv", "mcv", "ksc", "fixed"):
            raise ValueError(f"unknown tuning kind {self.kind!r}")
        if self.cv_scheme not in ("random", "blocks"):
            raise ValueError("cv_scheme must be 'random' or 'blocks'")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")
        if self.n_splits < 2:
            raise ValueError("n_splits must be >= 2")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.ksc_rule not in ("min", "max"):
            raise ValueError("ksc_rule must be 'min' or 'max'")
        if self.kind == "fixed" and (self.lambda_A is None or self.lambda_B is None):
            raise ValueError("fixed tuning needs lambda_A and lambda_B")


def select_lambda_cv(
    problem: LassoProblem,
    grid: LambdaGrid,
    folds: int = 10,
    rule: str = "1se",
    seed=0,
    tol: float = 1e-9,
    max_passes: int = 10_000,
    scheme: str = "random",
) -> tuple[float, dict]:
    """K-fold CV over lag-pair indices.

    ``rule="min"`` returns the error-minimizing lambda; ``rule="1se"`` the
    largest lambda whose mean CV error is within one standard error of the
    minimum.  Folds are random seeded partitions of the pairs by default;
    ``scheme="blocks"`` uses contiguous time blocks instead.
    """
    if rule not in ("min", "1se"):
        raise ValueError("rule must be 'min' or '1se'")
    if scheme not in ("random", "blocks"):
        raise ValueError("scheme must be 'random' or 'blocks'")
    if folds < 2 or folds > problem.n_pairs - 1:
        raise ConfigError(f"cannot form {folds} folds from {problem.n_pairs} lag pairs")
    if scheme == "random":
        rng = np.random.default_rng(seed)
        order = rng.permutation(problem.n_pairs)
    else:
        order = np.arange(problem.n_pairs)
    parts = np.array_split(order, folds)
    L = len(grid)
    errors = np.empty((folds, L))
    for f, val in enumerate(parts):
        train = np.concatenate([parts[g] for g in range(folds) if g != f])
        G, C = problem.gram(train)
        thetas = solve_path(G, C, len(train), grid, tol, max_passes)
        rows = problem.rows_of(val)
        Xv, Rv = problem.design[rows], problem.responses[rows]
        resid = Rv[None, :, :] - np.matmul(Xv, thetas)
        errors[f] = np.mean(resid**2, axis=(1, 2))
    mean_err = errors.mean(axis=0)
    i_min = int(np.argmin(mean_err))
    se_min = float(np.std(errors[:, i_min], ddof=1) / np.sqrt(folds))
    if rule == "min":
        chosen = i_min
    else:
        within = np.flatnonzero(mean_err <= mean_err[i_min] + se_min)
        chosen = int(within[0])  # grid is decreasing: first index = largest lambda
    diag = {
        "kind": rule,
        "grid": grid.values.copy(),
        "cv_mean": mean_err,
        "cv_se_at_min": se_min,
        "chosen_index": chosen,
    }
    return float(grid.values[chosen]), diag


def select_lambda_ksc(
    problem: LassoProblem,
    grid: LambdaGrid,
    n_splits: int = 50,
    alpha: float = 0.4,
    seed=0,
    rule: str = "min",
    tol: float = 1e-9,
    max_passes: int = 10_000,
) -> tuple[float, dict]:
    """Kappa selection: stability of active sets across random half-splits.

    For each split the Lasso path is fitted on both halves and the active
    sets compared by Cohen's kappa; S(lambda) averages over splits.  Returns
    the smallest grid lambda with S(lambda)/max S >= 1 - alpha (or the
    largest under ``rule="max"``).
    """
    if n_splits < 2:
        raise ValueError("n_splits must be >= 2")
    rng = np.random.default_rng(seed)
    n = problem.n_pairs
    half = n // 2
    L = len(grid)
    kappas = np.empty((n_splits, L))
    for b in range(n_splits):
        perm = rng.permutation(n)
        sel = []
        for pairs in (perm[:half], perm[half:]):
            G, C = problem.gram(pairs)
            thetas = solve_path(G, C, len(pairs), grid, tol, max_passes)
            sel.append(thetas != 0.0)
        for li in range(L):
            kappas[b, li] = cohens_kappa(sel[0][li], sel[1][li])
    stability = kappas.mean(axis=0)
    s_max = float(stability.max())
    if s_max <= 0.0:
        raise TuningFailureError(
            "selection stability is degenerate at every lambda; fall back to cross-validation"
        )
    feasible = np.flatnonzero(stability / s_max >= 1.0 - alpha)
    chosen = int(feasible[-1]) if rule == "min" else int(feasible[0])
    diag = {
        "kind": "ksc",
        "grid": grid.values.copy(),
        "stability": stability,
        "chosen_index": chosen,
    }
    return float(grid.values[chosen]), diag


@dataclass(frozen=True)
class SparseConfig:
    """Controls for the sparse alternating fit and its inner CD solver."""

    eta: float = 1e-6
    max_iter: int = 200
    n_lambda: int = 100
    lambda_min_ratio: float = 1e-3
    cd_tol: float = 1e-9
    max_passes: int = 10_000
    order: str = "A"
    init: object = "identity"

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.order not in ("A", "B"):
            raise ValueError(f"order must be 'A' or 'B', got {self.order!r}")


@dataclass
class SparseFitResult:
    """Sparse fit output: coefficients, frozen penalties, sparsity, traces."""

    coeffs: MarCoefficients
    lambda_A: float
    lambda_B: float
    sparsity_A: float
    sparsity_B: float
    trace: FitTrace
    tuning_diagnostics: dict
    init_trace: FitTrace
    cd_converged: bool = True


def _renorm_or_keep(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Identification rescaling, skipped when the penalty zeroed A entirely."""
    if float(np.linalg.norm(A, "fro")) == 0.0:
        return A, B
    return _renormalize(A, B)


def _select_lambda(problem: LassoProblem, tuning: TuningMethod, config: SparseConfig, side: str, seed):
    if tuning.kind == "fixed":
        lam = tuning.lambda_A if side == "A" else tuning.lambda_B
        return float(lam), {"kind": "fixed", "lambda": float(lam)}
    lmax = lambda_max_value(problem)
    if lmax <= 0.0:
        raise TuningFailureError(f"{side}-side design is orthogonal to every response")
    grid = make_lambda_grid(lmax, config.n_lambda, config.lambda_min_ratio)
    if tuning.kind == "ksc":
        return select_lambda_ksc(
            problem, grid, tuning.n_splits, tuning.alpha, seed, tuning.ksc_rule, config.cd_tol, config.max_passes
        )
    rule = "1se" if tuning.kind == "sdcv" else "min"
    return select_lambda_cv(
        problem, grid, tuning.cv_folds, rule, seed, config.cd_tol, config.max_passes, tuning.cv_scheme
    )


def fit_sparse(
    series: MatrixSeries,
    tuning: TuningMethod,
    config: SparseConfig = SparseConfig(),
) -> SparseFitResult:
    """Alternating Lasso fit: ALSE initialization, penalties selected in the
    first iteration and frozen, identification normalization after each
    A-update.  Stops on the Frobenius criteria with ``eta``.
    """
    init, init_trace = fit_alse(series, AlseConfig(eta=config.eta, max_iter=config.max_iter, init=config.init, order=config.order))
    A, B = init.A.copy(), init.B.copy()
    lam = {"A": None, "B": None}
    diags: dict = {}
    cd_ok = True
    trace = FitTrace()
    data = series.data
    seed_seq = (
        tuning.seed
        if isinstance(tuning.seed, np.random.SeedSequence)
        else np.random.SeedSequence(tuning.seed)
    )
    side_seeds = dict(zip(("A", "B"), seed_seq.spawn(2)))

    def half_step(side: str, A, B):
        nonlocal cd_ok
        problem = a_side_problem(series, B) if side == "A" else b_side_problem(series, A)
        if lam[side] is None:
            lam[side], diags[side] = _select_lambda(problem, tuning, config, side, side_seeds[side])
        warm = (A if side == "A" else B).T.copy()
        sol = lasso_cd(
            LassoProblem(problem.design, problem.responses, problem.n_pairs, problem.block, lam[side]),
            tol=config.cd_tol,
            max_passes=config.max_passes,
            warm_start=warm,
        )
        cd_ok = cd_ok and sol.converged
        return sol.matrix

    for _ in range(config.max_iter):
        A_prev, B_prev = A, B
        if config.order == "A":
            A = half_step("A", A, B)
            A, B = _renorm_or_keep(A, B)
            trace.objective.append(residual_ss(data, A, B))
            B = half_step("B", A, B)
            trace.objective.append(residual_ss(data, A, B))
        else:
            B = half_step("B", A, B)
            trace.objective.append(residual_ss(data, A, B))
            A = half_step("A", A, B)
            A, B = _renorm_or_keep(A, B)
            trace.objective.append(residual_ss(data, A, B))
        trace.iterations += 1
        dA = float(np.linalg.norm(A - A_prev, "fro"))
        dB = float(np.linalg.norm(B - B_prev, "fro"))
        trace.deltas_A.append(dA)
        trace.deltas_B.append(dB)
        if dA <= config.eta and dB <= config.eta:
            trace.converged = True
            break
    coeffs = MarCoefficients(A=A, B=B, normalized=float(np.linalg.norm(A, "fro")) > 0.0)
    return SparseFitResult(
        coeffs=coeffs,
        lambda_A=lam["A"],
        lambda_B=lam["B"],
        sparsity_A=float(np.mean(A == 0.0)),
        sparsity_B=float(np.mean(B == 0.0)),
        trace=trace,
        tuning_diagnostics=diags,
        init_trace=init_trace,
        cd_converged=cd_ok,
    )


@dataclass(frozen=True)
class RecoveryScore:
    """Zero/nonzero recovery counts: S1 both zero, S2 false positive,
    S3 both nonzero, S4 false negative; cr = (|S1|+|S3|)/p^2."""

    cr: float
    s1: int
    s2: int
    s3: int
    s4: int


def recovery_score(est: np.ndarray, truth: np.ndarray) -> RecoveryScore:
    """Support-recovery accuracy; zero means bit-zero on both sides."""
    est = np.asarray(est)
    truth = np.asarray(truth)
    if est.shape != truth.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {truth.shape}")
    ez, tz = est == 0.0, truth == 0.0
    s1 = int(np.sum(ez & tz))
    s2 = int(np.sum(~ez & tz))
    s3 = int(np.sum(~ez & ~tz))
    s4 = int(np.sum(ez & ~tz))
    return RecoveryScore(cr=(s1 + s3) / est.size, s1=s1, s2=s2, s3=s3, s4=s4)
