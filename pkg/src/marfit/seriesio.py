"""File formats: long-format series CSV, versioned model files, experiment configs.

* SeriesFile: delimited text with header ``t,row,col,value``; 1-based indices,
  every (t, row, col) triple present exactly once, dimensions inferred as the
  maxima.  Values use 17 significant digits, which round-trips doubles exactly.
* ModelFile: human-readable coefficient dump plus fit metadata, gated by a
  version line; unknown versions are rejected.
* ExperimentConfig: ``key = value`` lines describing a Monte Carlo run;
  unknown keys are errors.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ConfigError, DataFormatError
from .evalkit import ExperimentSpec
from .matcore import MarCoefficients, MatrixSeries

__all__ = [
    "write_series",
    "read_series",
    "write_model",
    "read_model",
    "parse_experiment_config",
    "MODEL_FORMAT_VERSION",
]

MODEL_FORMAT_VERSION = "marfit-model v1"
_FLOAT_FMT = ".17g"


def _fmt(x: float) -> str:
    return format(float(x), _FLOAT_FMT)


def write_series(path: str, series: MatrixSeries) -> None:
    """Write a series as long-format CSV (header ``t,row,col,value``)."""
    data = series.data
    with open(path, "w") as fh:
        fh.write("t,row,col,value\n")
        for t in range(series.T_len):
            for i in range(series.p1):
                for j in range(series.p2):
                    fh.write(f"{t + 1},{i + 1},{j + 1},{_fmt(data[t, i, j])}\n")


def read_series(path: str) -> MatrixSeries:
    """Parse a SeriesFile; malformed rows raise DataFormatError with line numbers."""
    entries = {}
    t_max = r_max = c_max = 0
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "t,row,col,value":
            raise DataFormatError(f"{path}:1: expected header 't,row,col,value', got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise DataFormatError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
            try:
                t, i, j = int(parts[0]), int(parts[1]), int(parts[2])
                val = float(parts[3])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
            if t < 1 or i < 1 or j < 1:
                raise DataFormatError(f"{path}:{lineno}: indices must be >= 1")
            if not np.isfinite(val):
                raise DataFormatError(f"{path}:{lineno}: non-finite value {parts[3]!r}")
            key = (t, i, j)
            if key in entries:
                raise DataFormatError(f"{path}:{lineno}: duplicate entry for (t,row,col)={key}")
            entries[key] = val
            t_max, r_max, c_max = max(t_max, t), max(r_max, i), max(c_max, j)
    if not entries:
        raise DataFormatError(f"{path}: no data rows")
    if len(entries) != t_max * r_max * c_max:
        raise DataFormatError(
            f"{path}: incomplete coverage: {len(entries)} entries for "
            f"T={t_max}, p1={r_max}, p2={c_max} (need {t_max * r_max * c_max})"
        )
    data = np.empty((t_max, r_max, c_max))
    for (t, i, j), val in entries.items():
        data[t - 1, i - 1, j - 1] = val
    try:
        return MatrixSeries(data)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def _write_matrix(fh, name: str, M: np.ndarray) -> None:
    fh.write(f"{name}:\n")
    for row in M:
        fh.write(" ".join(_fmt(x) for x in row) + "\n")


def write_model(path: str, coeffs: MarCoefficients, metadata: dict | None = None) -> None:
    """Write a versioned ModelFile; matrix entries use 17 significant digits."""
    metadata = metadata or {}
    with open(path, "w") as fh:
        fh.write(MODEL_FORMAT_VERSION + "\n")
        fh.write(f"p1: {coeffs.p1}\n")
        fh.write(f"p2: {coeffs.p2}\n")
        fh.write(f"normalized: {str(coeffs.normalized).lower()}\n")
        for key, val in metadata.items():
            if ":" in str(key) or "\n" in str(val):
                raise ValueError(f"metadata key/value not serializable: {key!r}")
            fh.write(f"{key}: {val}\n")
        _write_matrix(fh, "A", coeffs.A)
        _write_matrix(fh, "B", coeffs.B)


def read_model(path: str) -> tuple[MarCoefficients, dict]:
    """Load a ModelFile, rejecting unknown format versions."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MODEL_FORMAT_VERSION:
        got = lines[0] if lines else "<empty>"
        raise DataFormatError(f"{path}: unsupported model format {got!r} (expected {MODEL_FORMAT_VERSION!r})")
    meta: dict = {}
    idx = 1
    while idx < len(lines) and lines[idx] != "A:":
        line = lines[idx]
        if ": " not in line:
            raise DataFormatError(f"{path}:{idx + 1}: expected 'key: value', got {line!r}")
        key, val = line.split(": ", 1)
        meta[key] = val
        idx += 1
    try:
        p1 = int(meta.pop("p1"))
        p2 = int(meta.pop("p2"))
        normalized = meta.pop("normalized") == "true"
    except KeyError as exc:
        raise DataFormatError(f"{path}: missing required field {exc}") from exc

    def _read_block(start: int, label: str, n_rows: int, n_cols: int):
        if start >= len(lines) or lines[start] != f"{label}:":
            raise DataFormatError(f"{path}: expected '{label}:' block at line {start + 1}")
        rows = []
        for r in range(n_rows):
            lineno = start + 1 + r
            try:
                row = [float(x) for x in lines[lineno].split()]
            except (IndexError, ValueError) as exc:
                raise DataFormatError(f"{path}:{lineno + 1}: bad matrix row") from exc
            if len(row) != n_cols:
                raise DataFormatError(f"{path}:{lineno + 1}: expected {n_cols} values, got {len(row)}")
            rows.append(row)
        return np.array(rows), start + 1 + n_rows

    A, idx = _read_block(idx, "A", p1, p1)
    B, idx = _read_block(idx, "B", p2, p2)
    if any(line.strip() for line in lines[idx:]):
        raise DataFormatError(f"{path}:{idx + 1}: trailing content after matrices")
    return MarCoefficients(A=A, B=B, normalized=normalized), meta


_CFG_KEYS = {
    "table",
    "design",
    "p1",
    "p2",
    "k1",
    "k2",
    "r1",
    "r2",
    "rho",
    "T",
    "estimators",
    "tunings",
    "n_reps",
    "seed",
    "eta",
    "max_iter",
    "burn_in",
}
_CFG_REQUIRED = {"table", "design", "p1", "p2", "T", "n_reps", "seed"}


def parse_experiment_config(path: str) -> tuple[ExperimentSpec, int, int]:
    """Parse a ``key = value`` experiment config into (spec, n_reps, seed).

    Unknown keys and missing required keys are configuration errors.
    """
    raw: dict = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in _CFG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = val
    missing = _CFG_REQUIRED - raw.keys()
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(sorted(missing))}")
    try:
        n_reps = int(raw.pop("n_reps"))
        seed = int(raw.pop("seed"))
        spec = ExperimentSpec(
            table=raw.pop("table"),
            design=raw.pop("design", "banded"),
            p1=int(raw.pop("p1")),
            p2=int(raw.pop("p2")),
            k1=int(raw.pop("k1", 1)),
            k2=int(raw.pop("k2", 1)),
            r1=float(raw.pop("r1", 0.3)),
            r2=float(raw.pop("r2", 0.3)),
            rho=float(raw.pop("rho", 0.5)),
            T_values=tuple(int(s) for s in raw.pop("T").split(",")),
            estimators=tuple(s.strip() for s in raw.pop("estimators", "banded,alse").split(",")),
            tunings=tuple(s.strip() for s in raw.pop("tunings", "ksc").split(",")),
            eta=float(raw.pop("eta", 1e-6)),
            max_iter=int(raw.pop("max_iter", 200)),
            burn_in=int(raw.pop("burn_in", 200)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if n_reps < 1:
        raise ConfigError(f"{path}: n_reps must be >= 1, got {n_reps}")
    return spec, n_reps, seed


def ensure_dir(path: str) -> None:
    if path and not os.path.isdir(path):
        os.makedirs(path, exist_ok=True)
