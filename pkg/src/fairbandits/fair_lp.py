"""Fairness-constrained reward maximization.

Two programs over ``p in R^k``, both maximizing ``<a, p>`` subject to
``|p_i - p_j| <= c_ij`` for every pair and ``p >= 0``:

* ``single``: additionally ``sum(p) <= 1`` (a sub-distribution over arms);
* ``multi``: additionally ``p_i <= 1`` (independent pull probabilities).

Both feasible regions contain ``p = 0`` and are downward closed, so the
all-slack basis is a feasible starting vertex and no phase one is needed.
The solver is a dense tableau simplex using Bland's rule, which makes the
returned vertex a deterministic function of the instance.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from fairbandits.errors import InvalidInputError
from fairbandits.geometry import pair_index, pairs

Mode = Literal["single", "multi"]

FEAS_TOL = 1e-9
TIGHT_TOL = 1e-7
PIVOT_TOL = 1e-12
REWARD_BOUND = 2.0


@dataclass(frozen=True)
class LpInstance:
    rewards: np.ndarray
    caps: np.ndarray
    mode: Mode = "single"

    def __post_init__(self):
        a = np.array(self.rewards, dtype=float).reshape(-1)
        c = np.array(self.caps, dtype=float).reshape(-1)
        k = a.size
        if k < 1:
            raise InvalidInputError("need at least one reward")
        if c.size != k * (k - 1) // 2:
            raise InvalidInputError(f"{k} arms need {k * (k - 1) // 2} caps, got {c.size}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(c))):
            raise InvalidInputError("rewards and caps must be finite")
        if np.any(c < 0):
            raise InvalidInputError("caps must be nonnegative")
        if np.any(np.abs(a) > REWARD_BOUND):
            raise InvalidInputError(f"rewards must lie in [-{REWARD_BOUND}, {REWARD_BOUND}]")
        if self.mode not in ("single", "multi"):
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "rewards", a)
        object.__setattr__(self, "caps", c)

    @property
    def k(self) -> int:
        return self.rewards.size


@dataclass(frozen=True)
class LpSolution:
    policy: np.ndarray
    objective: float
    tight_pairs: frozenset


def constraint_matrix(k: int, mode: Mode) -> np.ndarray:
    """Rows of ``M p <= b`` in the order: pair constraints (both signs), then budget rows."""
    prs = pairs(k)
    rows = []
    for i, j in prs:
        r = np.zeros(k)
        r[i], r[j] = 1.0, -1.0
        rows.append(r)
        rows.append(-r)
    if mode == "single":
        rows.append(np.ones(k))
    else:
        rows.extend(np.eye(k))
    return np.array(rows).reshape(-1, k)


def constraint_rhs(caps: np.ndarray, k: int, mode: Mode) -> np.ndarray:
    budget = np.ones(1 if mode == "single" else k)
    return np.concatenate([np.repeat(caps, 2), budget])


def _bland_simplex(c: np.ndarray, M: np.ndarray, b: np.ndarray, max_iter: int = 100_000) -> np.ndarray:
    """Maximize ``c @ x`` s.t. ``M x <= b``, ``x >= 0`` with ``b >= 0``."""
    m, n = M.shape
    T = np.hstack([M, np.eye(m)])
    rhs = b.astype(float).copy()
    cost = np.concatenate([c, np.zeros(m)])
    basis = np.arange(n, n + m)
    for _ in range(max_iter):
        entering = np.flatnonzero(cost > PIVOT_TOL)
        if entering.size == 0:
            break
        e = entering[0]
        col = T[:, e]
        pos = col > PIVOT_TOL
        if not pos.any():
            raise RuntimeError("unbounded LP; the fairness programs are always bounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = rhs[pos] / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + PIVOT_TOL)
        r = ties[np.argmin(basis[ties])]

        piv = T[r, e]
        T[r] /= piv
        rhs[r] /= piv
        f = T[:, e].copy()
        f[r] = 0.0
        T -= np.outer(f, T[r])
        rhs -= f * rhs[r]
        cost = cost - cost[e] * T[r]
        rhs[(rhs < 0) & (rhs > -1e-11)] = 0.0
        basis[r] = e
    else:
        raise RuntimeError("simplex iteration limit reached")
    x = np.zeros(n + m)
    x[basis] = rhs
    return x[:n]


def tight_pairs_of(policy: np.ndarray, caps: np.ndarray, tol: float = TIGHT_TOL) -> frozenset:
    k = policy.size
    return frozenset(
        (i, j) for n, (i, j) in enumerate(pairs(k)) if abs(policy[i] - policy[j]) >= caps[n] - tol
    )


def solve_fair_lp(inst: LpInstance) -> LpSolution:
    M = constraint_matrix(inst.k, inst.mode)
    b = constraint_rhs(inst.caps, inst.k, inst.mode)
    p = _bland_simplex(inst.rewards, M, b)
    p[(p < 0) & (p > -1e-12)] = 0.0
    return LpSolution(
        policy=p,
        objective=float(inst.rewards @ p),
        tight_pairs=tight_pairs_of(p, inst.caps),
    )


def is_feasible(p: np.ndarray, caps: np.ndarray, mode: Mode, tol: float = FEAS_TOL) -> bool:
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12):
        return False
    if mode == "single" and p.sum() > 1 + tol:
        return False
    if mode == "multi" and np.any(p > 1 + tol):
        return False
    return all(abs(p[i] - p[j]) <= caps[n] + tol for n, (i, j) in enumerate(pairs(p.size)))


def perturb_one_cap(inst: LpInstance, pair: tuple[int, int], delta: float) -> LpInstance:
    """Copy of ``inst`` with the cap on ``pair`` shifted by ``delta``."""
    i, j = pair
    n = pair_index(i, j, inst.k)
    caps = inst.caps.copy()
    caps[n] += delta
    if caps[n] < 0:
        raise InvalidInputError(f"cap on {pair} would become negative ({caps[n]:.3g})")
    return replace(inst, caps=caps)
