import numpy as np
import pytest

from oracles import matmul_triple_loop
from varcf.errors import DimensionError, NumericError
from varcf.rng import RngState
from varcf.tensor import as_matrix, ensure_finite, matmul


def test_identity_case():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(matmul(np.eye(2), m), m)


def test_row_times_column():
    out = matmul(np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]]))
    assert np.array_equal(out, np.array([[11.0]]))


def test_rectangular_product():
    a = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    b = np.array([[2.0, 5.0], [3.0, 7.0]])
    expected = np.array([[2.0, 5.0], [3.0, 7.0], [5.0, 12.0]])
    assert np.array_equal(matmul(a, b), expected)


def test_shape_mismatch_names_both_shapes():
    with pytest.raises(DimensionError) as excinfo:
        matmul(np.ones((2, 3)), np.ones((2, 3)))
    assert "(2, 3)" in str(excinfo.value)


def test_agrees_with_triple_loop_oracle():
    rng = RngState(123)
    for _ in range(10):
        a = rng.normal(5, 5)
        b = rng.normal(5, 5)
        expected = np.array(matmul_triple_loop(a.tolist(), b.tolist()))
        got = matmul(a, b)
        scale = max(np.abs(expected).max(), 1.0)
        assert np.max(np.abs(got - expected)) / scale < 1e-12


def test_ensure_finite_rejects_nan_and_inf():
    ensure_finite("ok", np.array([1.0, -2.0]))
    with pytest.raises(NumericError, match="loss"):
        ensure_finite("loss", np.array([1.0, np.nan]))
    with pytest.raises(NumericError):
        ensure_finite("x", np.array([np.inf]))


def test_as_matrix_requires_2d():
    with pytest.raises(DimensionError):
        as_matrix(np.ones(3))
