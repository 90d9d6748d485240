"""Dense float64 kernels with explicit shape and finiteness contracts.

Matrices are plain C-contiguous float64 numpy arrays; these wrappers add
the error reporting the rest of the package relies on.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericError


def as_matrix(values) -> np.ndarray:
    """Coerce to a 2-D float64 array."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={a.ndim}")
    return a


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with a shape check that names both operands."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(
            f"matmul needs 2-D operands, got ndims {a.ndim} and {b.ndim}"
        )
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply shapes {a.shape} and {b.shape}: "
            f"inner dimensions {a.shape[1]} != {b.shape[0]}"
        )
    return a @ b


def ensure_finite(name: str, a: np.ndarray) -> np.ndarray:
    """Raise NumericError if any entry is NaN or infinite."""
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{name} contains non-finite values")
    return a


def ensure_same_shape(what: str, a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{what}: shapes {a.shape} and {b.shape} differ")
