"""Adam optimizer with lazy updates for sparse embedding gradients.

Parameters are handled as a flat ``{name: float64 array}`` mapping.
Gradients split into two kinds: dense tensors (updated as a whole) and
row-indexed embedding gradients, where only the touched rows have their
moments decayed and their values moved ("lazy" Adam).  A tensor or row
whose gradient is exactly zero is left untouched, so an all-zero
gradient set is the identity regardless of accumulated moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StructureError


@dataclass
class GradientSet:
    """Gradients structure-matched to a flat parameter mapping.

    dense:     name -> full gradient array (same shape as the parameter)
    embedding: name -> (unique row ids, per-row gradient matrix)
    """

    dense: dict[str, np.ndarray] = field(default_factory=dict)
    embedding: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def scaled(self, factor: float) -> "GradientSet":
        return GradientSet(
            dense={k: v * factor for k, v in self.dense.items()},
            embedding={k: (ids, rows * factor) for k, (ids, rows) in self.embedding.items()},
        )


class AdamState:
    """First/second moment accumulators plus the shared step counter."""

    def __init__(
        self,
        params: dict[str, np.ndarray],
        learning_rate: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def _check(self, name: str, shape: tuple) -> None:
        if name not in self.m:
            raise StructureError(f"gradient for unknown parameter {name!r}")
        if self.m[name].shape != shape:
            raise StructureError(
                f"parameter {name!r}: accumulator shape {self.m[name].shape} "
                f"does not match {shape}"
            )


def adam_update(
    params: dict[str, np.ndarray], grads: GradientSet, state: AdamState
) -> dict[str, np.ndarray]:
    """One Adam step, in place on ``params``; returns the same mapping.

    Bias correction uses the shared step counter t, which advances by
    exactly one per call.  Embedding rows absent from the gradient (or
    present with an exactly-zero row) keep their values and moments.
    """
    state.t += 1
    lr, b1, b2, eps = state.learning_rate, state.beta1, state.beta2, state.eps
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t

    for name, g in grads.dense.items():
        if name not in params:
            raise StructureError(f"gradient for unknown parameter {name!r}")
        p = params[name]
        if g.shape != p.shape:
            raise StructureError(
                f"parameter {name!r}: gradient shape {g.shape} does not match {p.shape}"
            )
        state._check(name, g.shape)
        if not g.any():
            continue
        m, v = state.m[name], state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)

    for name, (ids, rows) in grads.embedding.items():
        if name not in params:
            raise StructureError(f"gradient for unknown parameter {name!r}")
        p = params[name]
        if rows.ndim != 2 or rows.shape[1] != p.shape[1] or rows.shape[0] != ids.shape[0]:
            raise StructureError(
                f"embedding {name!r}: gradient rows {rows.shape} with {ids.shape[0]} ids "
                f"do not match table {p.shape}"
            )
        state._check(name, p.shape)
        touched = rows.any(axis=1)
        if not touched.any():
            continue
        ids, rows = ids[touched], rows[touched]
        m_rows = b1 * state.m[name][ids] + (1.0 - b1) * rows
        v_rows = b2 * state.v[name][ids] + (1.0 - b2) * np.square(rows)
        state.m[name][ids] = m_rows
        state.v[name][ids] = v_rows
        p[ids] -= lr * (m_rows / bc1) / (np.sqrt(v_rows / bc2) + eps)

    return params
