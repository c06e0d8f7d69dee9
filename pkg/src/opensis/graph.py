"""Network topologies: sampled Erdos-Renyi graphs and the expected adjacency.

Adjacency matrices are stored dense. Node counts in this package stay at a
few hundred, where dense eigensolves and matrix-vector products are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Adjacency",
    "SpectralInfo",
    "InvalidProbability",
    "CannotEmpty",
    "sample_er_graph",
    "expected_adjacency",
    "largest_eigenvalue",
    "attach_node",
    "remove_node",
]


class InvalidProbability(ValueError):
    pass


class CannotEmpty(ValueError):
    """Raised when removing the last node of a graph."""


def _check_p(p: float) -> None:
    if not (0.0 <= p <= 1.0):
        raise InvalidProbability(f"edge probability must lie in [0, 1], got {p!r}")


@dataclass(frozen=True, eq=False)
class Adjacency:
    """Symmetric, nonnegative, zero-diagonal weight matrix.

    ``uniform_weight`` is set when every off-diagonal entry equals the same
    value (the expected Erdos-Renyi adjacency); the flow kernel then uses an
    O(n) product instead of a dense one.
    """

    weights: np.ndarray
    uniform_weight: float | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def validate(self) -> None:
        w = self.weights
        if not np.array_equal(w, w.T):
            raise ValueError("adjacency is not symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("adjacency has a nonzero diagonal")
        if np.any(w < 0):
            raise ValueError("adjacency has negative weights")

    def __eq__(self, other):
        if not isinstance(other, Adjacency):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True)
class SpectralInfo:
    lambda1: float


def sample_er_graph(n: int, p: float, rng: np.random.Generator) -> Adjacency:
    """Sample G(n, p): each unordered pair is linked independently with probability p."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    _check_p(p)
    upper = np.triu(rng.random((n, n)) < p, k=1).astype(float)
    return Adjacency(upper + upper.T)


def expected_adjacency(n: int, p: float) -> Adjacency:
    """Mean of the G(n, p) ensemble, p * (11^T - I)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    _check_p(p)
    w = np.full((n, n), float(p))
    np.fill_diagonal(w, 0.0)
    return Adjacency(w, uniform_weight=float(p))


def largest_eigenvalue(a: Adjacency) -> SpectralInfo:
    if a.n == 1:
        return SpectralInfo(0.0)
    return SpectralInfo(float(np.linalg.eigvalsh(a.weights)[-1]))


def attach_node(a: Adjacency, p: float, rng: np.random.Generator) -> Adjacency:
    """Append one node linked to each existing node with probability p."""
    _check_p(p)
    n = a.n
    links = (rng.random(n) < p).astype(float)
    w = np.zeros((n + 1, n + 1))
    w[:n, :n] = a.weights
    w[n, :n] = links
    w[:n, n] = links
    return Adjacency(w)


def remove_node(a: Adjacency, j: int) -> Adjacency:
    """Delete row and column ``j`` (0-based matrix index)."""
    if a.n == 1:
        raise CannotEmpty("cannot remove the only node of a graph")
    if not 0 <= j < a.n:
        raise IndexError(f"node index {j} out of range for n={a.n}")
    keep = np.arange(a.n) != j
    return Adjacency(a.weights[np.ix_(keep, keep)], uniform_weight=a.uniform_weight)
