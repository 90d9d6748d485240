"""Layer primitives: embedding lookup, dense affine, latent sampler, combiners.

Every forward has a hand-written backward.  The sampler follows the rule
``z = mu + exp(logvar) * eps`` exactly: the scale applied to the noise is
exp of the variance head's raw output, with no halving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, IndexRangeError
from .rng import RngState
from .tensor import ensure_same_shape, matmul

ACTIVATIONS = ("linear", "relu")
EMBEDDING_INIT_STD = 0.05


@dataclass
class EmbeddingTable:
    """Lookup table of dense rows, one per user or item id."""

    weights: np.ndarray  # (num_entries, dim)

    @property
    def num_entries(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def init(cls, num_entries: int, dim: int, rng: RngState) -> "EmbeddingTable":
        if num_entries <= 0 or dim <= 0:
            raise DimensionError(f"embedding shape must be positive, got {(num_entries, dim)}")
        return cls(weights=EMBEDDING_INIT_STD * rng.normal(num_entries, dim))


@dataclass
class DenseLayer:
    """Affine map with an optional relu, stored as (in_dim x out_dim) weights."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "linear"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise DimensionError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[1],):
            raise DimensionError(
                f"dense layer weights {self.weights.shape} and bias {self.bias.shape} disagree"
            )

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def glorot(
        cls, in_dim: int, out_dim: int, rng: RngState, activation: str = "linear"
    ) -> "DenseLayer":
        if in_dim <= 0 or out_dim <= 0:
            raise DimensionError(f"dense shape must be positive, got {(in_dim, out_dim)}")
        limit = np.sqrt(6.0 / (in_dim + out_dim))
        w = (2.0 * rng.uniform(in_dim * out_dim) - 1.0).reshape(in_dim, out_dim) * limit
        return cls(weights=w, bias=np.zeros(out_dim), activation=activation)


@dataclass
class VariationalHead:
    """Paired dense heads mapping an embedding to mean and log-scale vectors."""

    mean: DenseLayer
    logvar: DenseLayer

    def __post_init__(self):
        if (self.mean.in_dim, self.mean.out_dim) != (self.logvar.in_dim, self.logvar.out_dim):
            raise DimensionError("mean and logvar heads must share dimensions")

    @classmethod
    def init(cls, in_dim: int, out_dim: int, rng: RngState) -> "VariationalHead":
        return cls(
            mean=DenseLayer.glorot(in_dim, out_dim, rng),
            logvar=DenseLayer.glorot(in_dim, out_dim, rng),
        )


def embedding_forward(table: EmbeddingTable, ids: np.ndarray) -> np.ndarray:
    """Gather rows: output row b is table.weights[ids[b]]."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1:
        raise DimensionError(f"ids must be a 1-D batch, got ndim={ids.ndim}")
    bad = (ids < 0) | (ids >= table.num_entries)
    if bad.any():
        offender = int(ids[bad][0])
        raise IndexRangeError(
            f"id {offender} outside table range [0, {table.num_entries})"
        )
    return table.weights[ids]


def embedding_backward(ids: np.ndarray, grad_out: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Accumulate per-row gradients: returns (unique ids, summed gradient rows)."""
    ids = np.asarray(ids, dtype=np.int64)
    if grad_out.shape[0] != ids.shape[0]:
        raise DimensionError(
            f"batch mismatch: {ids.shape[0]} ids vs {grad_out.shape[0]} gradient rows"
        )
    unique, inverse = np.unique(ids, return_inverse=True)
    rows = np.zeros((unique.shape[0], grad_out.shape[1]))
    np.add.at(rows, inverse, grad_out)
    return unique, rows


def dense_forward(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    """activation(x @ W + b), row-wise over the batch."""
    if x.ndim != 2 or x.shape[1] != layer.in_dim:
        raise DimensionError(
            f"dense input {x.shape} does not match in_dim {layer.in_dim}"
        )
    pre = matmul(x, layer.weights) + layer.bias
    if layer.activation == "relu":
        return np.maximum(pre, 0.0)
    return pre


def dense_backward(
    layer: DenseLayer, x: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradients (grad_x, grad_W, grad_b) of dense_forward.

    The relu derivative at exactly 0 is taken as 0.
    """
    if x.ndim != 2 or x.shape[1] != layer.in_dim:
        raise DimensionError(f"dense input {x.shape} does not match in_dim {layer.in_dim}")
    if grad_out.shape != (x.shape[0], layer.out_dim):
        raise DimensionError(
            f"grad_out {grad_out.shape} does not match output ({x.shape[0]}, {layer.out_dim})"
        )
    if layer.activation == "relu":
        pre = matmul(x, layer.weights) + layer.bias
        grad_out = grad_out * (pre > 0.0)
    grad_x = matmul(grad_out, layer.weights.T)
    grad_w = matmul(x.T, grad_out)
    grad_b = grad_out.sum(axis=0)
    return grad_x, grad_w, grad_b


def variational_sample(mu: np.ndarray, logvar: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """z = mu + exp(logvar) * eps, elementwise."""
    ensure_same_shape("variational_sample(mu, logvar)", mu, logvar)
    ensure_same_shape("variational_sample(mu, eps)", mu, eps)
    return mu + np.exp(logvar) * eps


def variational_backward(
    grad_z: np.ndarray, logvar: np.ndarray, eps: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Reparameterized gradients: (grad_mu, grad_logvar) for a fixed eps."""
    ensure_same_shape("variational_backward(grad_z, logvar)", grad_z, logvar)
    ensure_same_shape("variational_backward(grad_z, eps)", grad_z, eps)
    return grad_z, grad_z * eps * np.exp(logvar)


def dot_combine(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise inner products, one scalar per batch row."""
    ensure_same_shape("dot_combine", p, q)
    return np.einsum("ij,ij->i", p, q)


def dot_backward(
    grad: np.ndarray, p: np.ndarray, q: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the row-wise dot: (grad * q, grad * p)."""
    ensure_same_shape("dot_backward", p, q)
    if grad.shape != (p.shape[0],):
        raise DimensionError(f"grad shape {grad.shape} does not match batch {p.shape[0]}")
    g = grad[:, None]
    return g * q, g * p


def concat_combine(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise concatenation [p | q]."""
    ensure_same_shape("concat_combine", p, q)
    return np.hstack([p, q])


def concat_backward(grad_out: np.ndarray, left_cols: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a concatenated gradient back into its two halves."""
    if grad_out.ndim != 2 or not 0 < left_cols < grad_out.shape[1]:
        raise DimensionError(
            f"cannot split grad {grad_out.shape} at column {left_cols}"
        )
    return grad_out[:, :left_cols], grad_out[:, left_cols:]
