"""Ridge-regression reward estimates with self-normalized confidence widths."""
from __future__ import annotations

import math

import numpy as np

from fairbandits.errors import InvalidInputError
from fairbandits.geometry import ContextSet

REFACTOR_EVERY = 500
DRIFT_TOL = 1e-8


class RidgeState:
    """Regularized design matrix ``V = lambda*I + sum x x^T`` and ``X^T Y``.

    ``V^{-1}`` is kept up to date with Sherman-Morrison updates and recomputed
    from ``V`` every :data:`REFACTOR_EVERY` observations.
    """

    def __init__(self, d: int, lam: float = 1.0, delta: float = 0.05):
        if lam <= 0:
            raise InvalidInputError("lambda must be positive")
        if not 0 < delta < 1:
            raise InvalidInputError("delta must lie in (0, 1)")
        self.d = d
        self.lam = float(lam)
        self.delta = float(delta)
        self.V = lam * np.eye(d)
        self.V_inv = np.eye(d) / lam
        self.xty = np.zeros(d)
        self.n_obs = 0
        self.max_drift = 0.0

    def _vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.d:
            raise InvalidInputError(f"expected a context of dimension {self.d}, got {x.size}")
        return x

    def update(self, x, r: float) -> None:
        x = self._vec(x)
        if not math.isfinite(r):
            raise InvalidInputError(f"non-finite reward {r!r}")
        self.V += np.outer(x, x)
        Vx = self.V_inv @ x
        self.V_inv -= np.outer(Vx, Vx) / (1.0 + x @ Vx)
        self.xty += r * x
        self.n_obs += 1
        if self.n_obs % REFACTOR_EVERY == 0:
            fresh = np.linalg.inv(self.V)
            self.max_drift = max(self.max_drift, float(np.abs(fresh - self.V_inv).max()))
            self.V_inv = 0.5 * (fresh + fresh.T)

    @property
    def theta(self) -> np.ndarray:
        return self.V_inv @ self.xty

    def norm_inv(self, x) -> float:
        """``||x||`` in the ``V^{-1}`` norm."""
        x = self._vec(x)
        return math.sqrt(max(float(x @ self.V_inv @ x), 0.0))

    def radius(self, t: int) -> float:
        if t < 1:
            raise InvalidInputError("round index starts at 1")
        return math.sqrt(2 * self.d * math.log((1 + t / self.lam) / self.delta)) + math.sqrt(self.lam)

    def predict_with_width(self, x, t: int) -> tuple[float, float]:
        x = self._vec(x)
        r_tilde = float(self.theta @ x)
        w = min(self.norm_inv(x) * self.radius(t), 1.0)
        return r_tilde, w

    def ucb_rewards(self, ctx: ContextSet | np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Upper confidence rewards, widths and point estimates for every context."""
        X = ctx.contexts if isinstance(ctx, ContextSet) else np.atleast_2d(np.asarray(ctx, dtype=float))
        if X.shape[1] != self.d:
            raise InvalidInputError(f"expected contexts of dimension {self.d}")
        r_tilde = X @ self.theta
        norms = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", X, self.V_inv, X), 0.0))
        w = np.minimum(norms * self.radius(t), 1.0)
        return r_tilde + w, w, r_tilde


# Aggregate bounds used for run diagnostics.

def width_sum_bound(T: int, d: int, lam: float, delta: float) -> float:
    """Upper bound on the total width of the pulled arms over ``T`` single-action rounds."""
    return math.sqrt(2 * d * math.log(1 + T / (d * lam))) * (
        math.sqrt(2 * d * T * math.log((1 + T / lam) / delta)) + math.sqrt(T * lam)
    )


def multi_width_sum_bound(T: int, d: int, k: int, lam: float, delta: float) -> float:
    """Bound on the summed widths of all pulled arms when up to ``k`` arms are pulled per round."""
    return k * math.sqrt(2 * d * math.log(1 + k * T / (d * lam))) * math.sqrt(
        2 * d * k * T * math.log((1 + k * T / lam) / delta)
    ) + math.sqrt(k * T * lam)


def per_arm_norm_bound(T: int, d: int, k: int, lam: float) -> float:
    """Claimed bound on ``sum ||x||_{V^{-1}}`` over the rounds a single arm is pulled."""
    return math.sqrt(2 * d * math.log(1 + k * T / (d * lam)))


def martingale_threshold(T: int, delta: float, increment_bound: float = 1.0) -> float:
    """Azuma threshold ``c * sqrt(2 T log(1/delta))`` for increments bounded by ``c``."""
    return increment_bound * math.sqrt(2 * T * math.log(1 / delta))
