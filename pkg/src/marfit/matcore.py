"""Core representation and linear-algebra primitives for bilinear MAR(1) models.

The model is ``Y_t = A Y_{t-1} B' + E_t`` with ``Y_t`` a ``p1 x p2`` matrix,
``A`` acting on rows and ``B`` on columns.  The pair ``(A, B)`` is only
identified up to the rescaling ``(cA, B/c)``; the convention adopted here is
``||A||_F = 1`` with ``tr(A) >= 0``.

Everything in this module is a pure function of its inputs; the container
types freeze their arrays after construction so values can be shared across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCoefficientsError

__all__ = [
    "MatrixSeries",
    "MarCoefficients",
    "BandSpec",
    "vec",
    "unvec",
    "kron",
    "spectral_radius",
    "normalize_identification",
    "is_stationary",
]


def _as_locked_array(data, name: str) -> np.ndarray:
    arr = np.array(data, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class MatrixSeries:
    """An ordered sequence of T real p1 x p2 matrices.

    Parameters
    ----------
    data : array_like
        Array of shape ``(T, p1, p2)`` or a sequence of equally shaped
        2-d matrices.  Copied and frozen on construction.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = _as_locked_array(self.data, "series")
        if arr.ndim != 3:
            raise ValueError(f"series must be (T, p1, p2) shaped, got ndim={arr.ndim}")
        if arr.shape[0] < 2:
            raise ValueError(f"series needs T >= 2 observations, got T={arr.shape[0]}")
        object.__setattr__(self, "data", arr)

    @property
    def T_len(self) -> int:
        return self.data.shape[0]

    @property
    def p1(self) -> int:
        return self.data.shape[1]

    @property
    def p2(self) -> int:
        return self.data.shape[2]

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, t) -> np.ndarray:
        return self.data[t]


@dataclass(frozen=True)
class MarCoefficients:
    """The coefficient pair (A, B) of a MAR(1) model.

    ``normalized`` records whether the identification convention
    (``||A||_F = 1``, ``tr(A) >= 0``) has been applied.
    """

    A: np.ndarray
    B: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        A = _as_locked_array(self.A, "A")
        B = _as_locked_array(self.B, "B")
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ValueError(f"B must be square, got shape {B.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def p1(self) -> int:
        return self.A.shape[0]

    @property
    def p2(self) -> int:
        return self.B.shape[0]

    def product(self) -> np.ndarray:
        """The identified Kronecker product ``B (x) A`` (invariant under rescaling)."""
        return kron(self.B, self.A)


@dataclass(frozen=True)
class BandSpec:
    """Bandwidth pair (k1, k2): entries with |i-j| > k are zero."""

    k1: int
    k2: int

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError(f"bandwidths must be non-negative, got ({self.k1}, {self.k2})")

    def validate_for(self, p1: int, p2: int) -> None:
        if self.k1 > p1 - 1:
            raise ValueError(f"k1={self.k1} out of range for p1={p1}")
        if self.k2 > p2 - 1:
            raise ValueError(f"k2={self.k2} out of range for p2={p2}")


def vec(M: np.ndarray) -> np.ndarray:
    """Stack the columns of ``M`` into one vector (column-major order)."""
    M = np.asarray(M, dtype=float)
    return M.reshape(-1, order="F").copy()


def unvec(v: np.ndarray, m: int, n: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a length ``m*n`` vector to ``m x n``."""
    v = np.asarray(v, dtype=float)
    if v.size != m * n:
        raise ValueError(f"cannot reshape length-{v.size} vector to {m}x{n}")
    return v.reshape(m, n, order="F").copy()


def kron(L: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``L[i, j] * R``.

    Satisfies ``vec(A Y B') = kron(B, A) @ vec(Y)`` for conformable A, Y, B.
    """
    return np.kron(np.asarray(L, dtype=float), np.asarray(R, dtype=float))


def spectral_radius(M: np.ndarray) -> float:
    """Largest eigenvalue modulus, from a dense QR-type eigendecomposition."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"spectral radius needs a square matrix, got shape {M.shape}")
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def normalize_identification(coeffs: MarCoefficients) -> MarCoefficients:
    """Rescale (A, B) -> (A/c, cB) so that ||A||_F = 1 and tr(A) >= 0.

    The Kronecker product ``B (x) A`` (and hence the model) is unchanged.
    A zero trace counts as the positive sign, which makes the map
    deterministic and idempotent.
    """
    norm = float(np.linalg.norm(coeffs.A, ord="fro"))
    if norm == 0.0:
        raise DegenerateCoefficientsError("cannot normalize: ||A||_F = 0")
    sign = 1.0 if float(np.trace(coeffs.A)) >= 0.0 else -1.0
    c = sign * norm
    return MarCoefficients(A=coeffs.A / c, B=c * coeffs.B, normalized=True)


def is_stationary(coeffs: MarCoefficients) -> bool:
    """True iff rho(A) * rho(B) < 1 (strict)."""
    return spectral_radius(coeffs.A) * spectral_radius(coeffs.B) < 1.0
