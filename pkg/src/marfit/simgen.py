"""Ground-truth coefficient generators and MAR(1) simulation.

Two coefficient designs are supported:

* banded: entries on the band ``|i-j| <= k`` drawn from U[-1, 1], zero
  elsewhere; A rescaled to unit Frobenius norm, B rescaled so that
  ``rho(A) rho(B)`` hits a target.
* sparse: each row is a mix of U[1, 2] and U[-2, -1] draws, a fixed number
  of entries zeroed at random positions and the row randomly permuted,
  leaving exactly ``floor(r * p)`` nonzeros per row.

Simulation starts from the zero matrix, runs a burn-in, and adds i.i.d.
standard-normal innovations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCoefficientsError, StationarityError
from .matcore import BandSpec, MarCoefficients, MatrixSeries, is_stationary, normalize_identification, spectral_radius

__all__ = [
    "BandedDesign",
    "SparseDesign",
    "NoiseSpec",
    "gen_banded_coeffs",
    "gen_sparse_coeffs",
    "simulate",
]

_MAX_REDRAWS = 100
DEFAULT_BURN_IN = 200


@dataclass(frozen=True)
class BandedDesign:
    """Banded ground-truth design: dimensions, band, and target rho(A)*rho(B)."""

    p1: int
    p2: int
    band: BandSpec
    rho_target: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.rho_target < 1.0:
            raise ValueError(f"rho_target must be in (0, 1), got {self.rho_target}")
        self.band.validate_for(self.p1, self.p2)


@dataclass(frozen=True)
class SparseDesign:
    """Sparse ground-truth design: r1, r2 are per-row proportions of nonzeros."""

    p1: int
    p2: int
    r1: float
    r2: float
    rho_target: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.rho_target < 1.0:
            raise ValueError(f"rho_target must be in (0, 1), got {self.rho_target}")
        if not (0.0 < self.r1 <= 1.0 and 0.0 < self.r2 <= 1.0):
            raise ValueError(f"r1, r2 must be in (0, 1], got ({self.r1}, {self.r2})")
        if int(self.r1 * self.p1) < 1 or int(self.r2 * self.p2) < 1:
            raise ValueError("each row must keep at least one nonzero: floor(r*p) >= 1")


@dataclass(frozen=True)
class NoiseSpec:
    """Innovation law: i.i.d. standard Gaussian entries, identity covariance.

    ``scale`` is a test hook (0 turns the noise off); the shipped release
    only supports the standard-gaussian kind.
    """

    kind: str = "standard-gaussian"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind != "standard-gaussian":
            raise ValueError(f"unsupported noise kind: {self.kind!r}")
        if self.scale < 0:
            raise ValueError("noise scale must be >= 0")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _banded_uniform(p: int, k: int, rng: np.random.Generator) -> np.ndarray:
    M = rng.uniform(-1.0, 1.0, size=(p, p))
    i, j = np.indices((p, p))
    M[np.abs(i - j) > k] = 0.0
    return M


def _draw_until_nondegenerate(draw, what: str):
    for _ in range(_MAX_REDRAWS):
        M = draw()
        if spectral_radius(M) > 0.0:
            return M
    raise DegenerateCoefficientsError(
        f"could not draw {what} with positive spectral radius in {_MAX_REDRAWS} attempts"
    )


def gen_banded_coeffs(design: BandedDesign, seed) -> MarCoefficients:
    """Draw a banded (A, B) pair per the banded design.

    A gets ``||A||_F = 1``; B is rescaled so ``rho(A) rho(B) = rho_target``;
    the sign convention is applied afterwards.  Deterministic given the seed.
    """
    rng = _rng(seed)
    A = _draw_until_nondegenerate(lambda: _banded_uniform(design.p1, design.band.k1, rng), "A")
    A = A / np.linalg.norm(A, "fro")
    B = _draw_until_nondegenerate(lambda: _banded_uniform(design.p2, design.band.k2, rng), "B")
    B = B * (design.rho_target / (spectral_radius(A) * spectral_radius(B)))
    return normalize_identification(MarCoefficients(A=A, B=B))


def _sparse_rows(p: int, r: float, rng: np.random.Generator) -> np.ndarray:
    n_keep = int(r * p)
    M = np.empty((p, p))
    n_pos = p // 2
    for i in range(p):
        row = np.concatenate([rng.uniform(1.0, 2.0, n_pos), rng.uniform(-2.0, -1.0, p - n_pos)])
        zero_at = rng.choice(p, size=p - n_keep, replace=False)
        row[zero_at] = 0.0
        M[i] = row[rng.permutation(p)]
    return M


def gen_sparse_coeffs(design: SparseDesign, seed) -> MarCoefficients:
    """Draw a sparse (A, B) pair with exactly floor(r*p) nonzeros per row.

    Scaling and sign convention as in :func:`gen_banded_coeffs`.
    """
    rng = _rng(seed)
    A = _draw_until_nondegenerate(lambda: _sparse_rows(design.p1, design.r1, rng), "A")
    A = A / np.linalg.norm(A, "fro")
    B = _draw_until_nondegenerate(lambda: _sparse_rows(design.p2, design.r2, rng), "B")
    B = B * (design.rho_target / (spectral_radius(A) * spectral_radius(B)))
    return normalize_identification(MarCoefficients(A=A, B=B))


def simulate(
    coeffs: MarCoefficients,
    noise: NoiseSpec,
    T: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed=None,
) -> MatrixSeries:
    """Simulate ``Y_t = A Y_{t-1} B' + E_t`` and return the last ``T`` matrices.

    The chain starts at the zero matrix and runs ``burn_in + T`` steps;
    innovations have i.i.d. N(0, scale^2) entries.

    Raises
    ------
    StationarityError
        If ``rho(A) rho(B) >= 1``.
    """
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    if not is_stationary(coeffs):
        raise StationarityError("cannot simulate: rho(A) * rho(B) >= 1")
    rng = _rng(seed)
    p1, p2 = coeffs.p1, coeffs.p2
    A, Bt = coeffs.A, coeffs.B.T
    out = np.empty((T, p1, p2))
    Y = np.zeros((p1, p2))
    for step in range(burn_in + T):
        E = noise.scale * rng.standard_normal((p1, p2)) if noise.scale > 0 else 0.0
        Y = A @ Y @ Bt + E
        if step >= burn_in:
            out[step - burn_in] = Y
    return MatrixSeries(out)
