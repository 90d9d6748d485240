"""Deterministic, counter-based random number generation.

The generator is SplitMix64: output i is a bijective 64-bit mix of
``seed + GAMMA * i``.  Because each draw depends only on (seed, counter),
batches of any size vectorize in numpy, the full state is two integers,
and a serialized state replays the exact same stream on any platform.
Standard normals come from the Box-Muller transform applied to pairs of
uniforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 2.0 ** -53


def _mix64(z: np.ndarray) -> np.ndarray:
    # finalizer from SplitMix64; input and output are uint64 arrays
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, *tags: int) -> int:
    """Derive an independent 64-bit sub-seed from a base seed and integer tags.

    Used to give split / shuffle / sampling stages their own streams so
    they never collide even when configured with the same user-facing seed.
    """
    z = np.array([seed & _MASK64], dtype=np.uint64)
    for tag in tags:
        t = np.array([tag & _MASK64], dtype=np.uint64)
        z = _mix64(z ^ (t * _GAMMA))
    return int(z[0])


@dataclass
class RngState:
    """Explicit generator state: a 64-bit seed plus a draw counter."""

    seed: int
    counter: int = 0

    def __post_init__(self):
        self.seed = self.seed & _MASK64
        if self.counter < 0:
            raise ValueError("counter must be non-negative")

    def clone(self) -> "RngState":
        return RngState(self.seed, self.counter)

    def state_dict(self) -> dict:
        return {"seed": self.seed, "counter": self.counter}

    @classmethod
    def from_state_dict(cls, state: dict) -> "RngState":
        return cls(int(state["seed"]), int(state["counter"]))

    def _next_words(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        return _mix64(np.uint64(self.seed) + _GAMMA * idx)

    def uniform(self, n: int) -> np.ndarray:
        """n i.i.d. draws from Uniform[0, 1), as float64."""
        if n <= 0:
            raise DimensionError(f"need a positive draw count, got {n}")
        return (self._next_words(n) >> np.uint64(11)) * _INV_2_53

    def normal(self, rows: int, cols: int = 1) -> np.ndarray:
        """(rows, cols) matrix of i.i.d. N(0, 1) draws via Box-Muller."""
        if rows <= 0 or cols <= 0:
            raise DimensionError(f"normal sample shape must be positive, got {(rows, cols)}")
        n = rows * cols
        npairs = (n + 1) // 2
        u = self.uniform(2 * npairs)
        u1, u2 = u[0::2], u[1::2]
        # 1 - u1 lies in (0, 1], so the log is finite
        radius = np.sqrt(-2.0 * np.log1p(-u1))
        theta = (2.0 * np.pi) * u2
        z = np.empty(2 * npairs)
        z[0::2] = radius * np.cos(theta)
        z[1::2] = radius * np.sin(theta)
        return z[:n].reshape(rows, cols)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n); consumes n draws."""
        if n == 0:
            return np.empty(0, dtype=np.int64)
        return np.argsort(self.uniform(n), kind="stable").astype(np.int64)

    def integers(self, n: int, high: int) -> np.ndarray:
        """n draws from {0, ..., high-1} (for tests and demos)."""
        if high <= 0:
            raise DimensionError(f"high must be positive, got {high}")
        return np.minimum((self.uniform(n) * high).astype(np.int64), high - 1)


def sample_standard_normal(rng: RngState, shape: tuple[int, int]) -> np.ndarray:
    """Matrix of i.i.d. N(0, 1) draws; advances ``rng`` by the words consumed."""
    rows, cols = shape
    return rng.normal(rows, cols)
