"""Dense 2-D float64 arrays and the handful of operations layers need.

A "matrix" throughout the toolkit is a C-contiguous 2-D float64 numpy
array, rows = samples and columns = features. These wrappers exist to
attach the shape and finiteness contracts every caller relies on: a
failed shape check names both operand shapes, and no operation lets a
NaN or infinity escape. Treat matrices as immutable; all operations
return new arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteError, ShapeError


def as_matrix(data) -> np.ndarray:
    """Coerce nested lists / arrays to a validated 2-D float64 matrix."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ShapeError(f"matrix must be 2-D, got {a.ndim}-D shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix contains NaN or infinite entries")
    return a


def _check_finite(a: np.ndarray, op: str) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{op} produced non-finite values")
    return a


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b with a shape check naming both operands."""
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dims differ, {a.shape} @ {b.shape}")
    # overflow surfaces as NonFiniteError; numpy's warning is redundant
    with np.errstate(over="ignore", invalid="ignore"):
        return _check_finite(a @ b, "matmul")


def add_row_broadcast(a: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Add a 1 x n bias row to every row of a."""
    if bias.shape != (1, a.shape[1]):
        raise ShapeError(
            f"add_row_broadcast: bias must be 1x{a.shape[1]} for operand "
            f"{a.shape}, got {bias.shape}"
        )
    with np.errstate(over="ignore", invalid="ignore"):
        return _check_finite(a + bias, "add_row_broadcast")


def transpose(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a.T)


def argmax_rows(a: np.ndarray) -> np.ndarray:
    """Index of the max entry in each row; ties go to the lower index."""
    if a.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    if a.shape[1] < 1:
        raise ShapeError(f"argmax_rows needs at least one column, got {a.shape}")
    return np.argmax(a, axis=1)
