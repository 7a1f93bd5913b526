"""Mahalanobis metrics and the squared-distance linearization.

A Mahalanobis distance ``d(x, y) = ||A x - A y||`` has a square that is
linear in the entries of ``G = A^T A``::

    d(x, y)^2 = <flatten(G), flatten((x - y)(x - y)^T)>

Everything the metric learner does rests on this identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from fairbandits.errors import InvalidInputError

NORM_TOL = 1e-12


def pairs(k: int) -> list[tuple[int, int]]:
    """Canonical pair order ``(0,1), (0,2), ..., (k-2,k-1)``."""
    return list(combinations(range(k), 2))


def pair_index(i: int, j: int, k: int) -> int:
    """Slot of the unordered pair ``{i, j}`` in a pair-indexed vector."""
    if i == j:
        raise InvalidInputError("a pair needs two distinct indices")
    if i > j:
        i, j = j, i
    # number of pairs whose first index is < i, then offset within row i
    return i * k - i * (i + 1) // 2 + (j - i - 1)


def canonical(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class MetricSpec:
    """Ground-truth fairness metric ``d(x, y) = ||A x - A y||_2``.

    ``A`` may be rank deficient, in which case ``d`` is only a pseudo-metric.
    """

    A: np.ndarray
    G: np.ndarray = field(init=False, repr=False)
    g_flat: np.ndarray = field(init=False, repr=False)
    frobenius_G: float = field(init=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidInputError(f"A must be square, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InvalidInputError("A has non-finite entries")
        G = A.T @ A
        G = 0.5 * (G + G.T)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "g_flat", G.reshape(-1).copy())
        object.__setattr__(self, "frobenius_G", float(np.linalg.norm(G)))

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_row_major(cls, entries: Sequence[float], d: int) -> "MetricSpec":
        entries = np.asarray(entries, dtype=float)
        if entries.size != d * d:
            raise InvalidInputError(f"expected {d * d} entries for A, got {entries.size}")
        return cls(entries.reshape(d, d))

    def to_row_major(self) -> list[float]:
        return [float(v) for v in self.A.reshape(-1)]

    @classmethod
    def random(cls, d: int, rng: np.random.Generator, frobenius: float = 1.0) -> "MetricSpec":
        """Gaussian ``A`` rescaled so that ``||A^T A||_F == frobenius``."""
        A = rng.standard_normal((d, d))
        G_norm = np.linalg.norm(A.T @ A)
        return cls(A * np.sqrt(frobenius / G_norm))


@dataclass(frozen=True)
class ContextSet:
    """The ``k`` contexts shown in one round, stored as a ``(k, d)`` array."""

    contexts: np.ndarray

    def __post_init__(self):
        X = np.array(self.contexts, dtype=float)
        if X.ndim != 2:
            raise InvalidInputError("contexts must be a (k, d) array")
        if X.shape[0] < 2:
            raise InvalidInputError(f"need at least 2 contexts, got {X.shape[0]}")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("contexts have non-finite entries")
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms > 1 + NORM_TOL):
            raise InvalidInputError(f"context norm {norms.max():.17g} exceeds 1")
        X.setflags(write=False)
        object.__setattr__(self, "contexts", X)

    @property
    def k(self) -> int:
        return self.contexts.shape[0]

    @property
    def d(self) -> int:
        return self.contexts.shape[1]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.contexts[i]

    def __len__(self) -> int:
        return self.k


def _check_vectors(x1, x2, d: int | None = None):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.ndim != 1 or x1.shape != x2.shape:
        raise InvalidInputError(f"dimension mismatch: {x1.shape} vs {x2.shape}")
    if d is not None and x1.shape[0] != d:
        raise InvalidInputError(f"vectors have length {x1.shape[0]}, metric expects {d}")
    return x1, x2


def mahalanobis_distance(metric: MetricSpec, x1, x2) -> float:
    x1, x2 = _check_vectors(x1, x2, metric.d)
    return float(np.linalg.norm(metric.A @ (x1 - x2)))


def flatten_pair(x1, x2) -> np.ndarray:
    """Row-major flattening of ``(x1 - x2)(x1 - x2)^T``."""
    x1, x2 = _check_vectors(x1, x2)
    diff = x1 - x2
    return np.outer(diff, diff).reshape(-1)


def true_distance_vector(metric: MetricSpec, ctx: ContextSet) -> np.ndarray:
    """Pair-indexed vector of true distances, canonical ``i < j`` order."""
    if ctx.d != metric.d:
        raise InvalidInputError(f"contexts have dimension {ctx.d}, metric expects {metric.d}")
    Y = ctx.contexts @ metric.A.T
    return np.array([np.linalg.norm(Y[i] - Y[j]) for i, j in pairs(ctx.k)])


def pair_vector_to_dict(values: Iterable[float], k: int) -> dict[tuple[int, int], float]:
    return dict(zip(pairs(k), values))
