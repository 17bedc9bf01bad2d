"""Small numeric helpers shared across modules."""

from __future__ import annotations

import numpy as np

#: Default relative tolerance for consistency checks.
DEFAULT_TOL = 1e-9

#: Relative determinant floor below which a matrix counts as singular,
#: measured against (spectral norm)**n so the test is scale-free.
DET_FLOOR = 1e-12


def as_matrix(m, n_rows: int | None = None, n_cols: int | None = None) -> np.ndarray:
    """Coerce to a float 2-D array, optionally enforcing a shape."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {a.ndim}")
    if n_rows is not None and a.shape[0] != n_rows:
        raise ValueError(f"expected {n_rows} rows, got {a.shape[0]}")
    if n_cols is not None and a.shape[1] != n_cols:
        raise ValueError(f"expected {n_cols} columns, got {a.shape[1]}")
    return a


def is_invertible(a: np.ndarray, det_floor: float = DET_FLOOR) -> bool:
    """Scale-free invertibility test: |det A| > det_floor * ||A||_2**n."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        return False
    if not np.all(np.isfinite(a)):
        return False
    norm = np.linalg.norm(a, 2)
    if norm == 0.0:
        return False
    det = np.linalg.det(a)
    return bool(abs(det) > det_floor * norm**n)


def rel_residual(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance between a and b, relative to max(1, ||a||, ||b||)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.linalg.norm(a)), float(np.linalg.norm(b)))
    return float(np.linalg.norm(a - b)) / scale
