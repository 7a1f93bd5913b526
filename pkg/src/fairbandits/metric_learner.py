"""Online estimation of squared distances from one-bit feedback.

Each unordered pair of arms owns a :class:`DistanceEstimator` that predicts
``<alpha, u>`` for the unknown ``alpha = flatten(A^T A)``.  After a guess the
estimator may be told whether the guess was too large; rounds without
feedback leave no trace, because :meth:`DistanceEstimator.guess` never mutates
state.

The estimator keeps the version space of all ``alpha`` consistent with past
feedback, intersected with the box ``|alpha_i| <= bound``, and answers each
query with the midpoint of the range of ``<alpha, u>`` over that polytope.
Every piece of feedback therefore halves the width of the version space along
the queried direction.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import highspy
import numpy as np

from fairbandits.errors import InconsistentFeedbackError, InvalidInputError
from fairbandits.geometry import ContextSet, canonical, flatten_pair, pairs

_INF = highspy.kHighsInf
# Halfspaces are stored with unit-norm normals; widths below this are not refined.
RESOLUTION = 1e-7
# A converged space answers from its cached bounding box when that outer interval is this narrow.
BOX_RESOLUTION = 1e-6
QUIET_QUERIES = 25
CONTAINMENT_TOL = 1e-9


@dataclass
class Halfspace:
    """``<alpha, u> <= g`` if ``too_large`` else ``<alpha, u> >= g``."""

    u: np.ndarray
    g: float
    too_large: bool

    def satisfied_by(self, alpha: np.ndarray, tol: float = CONTAINMENT_TOL) -> bool:
        v = float(alpha @ self.u)
        scale = max(1.0, float(np.linalg.norm(self.u)))
        return v <= self.g + tol * scale if self.too_large else v >= self.g - tol * scale


class VersionSpace:
    """Box ``|alpha_i| <= bound`` cut by feedback halfspaces.

    Interval queries are linear programs solved by a persistent HiGHS model,
    which warm-starts from the previous basis.

    With ``symmetric=True`` the space is ``R^{s*s}`` and every query must be
    the flattening of a symmetric matrix.  ``<alpha, u>`` then depends on
    ``alpha`` only through its diagonal and the sums ``alpha_ij + alpha_ji``,
    so the LPs run over those ``s(s+1)/2`` coordinates (the off-diagonal sums
    range over ``[-2 bound, 2 bound]``).  The projection of the box onto these
    coordinates is exactly that smaller box, so all intervals are unchanged.

    Once :data:`QUIET_QUERIES` queries pass without a cut, the extent of the
    space along each LP coordinate is cached.  A query whose outer interval
    from that box is narrower than ``BOX_RESOLUTION * ||u||`` is answered from
    the box and is not refined further; its midpoint is within half that
    width of the exact one.
    """

    def __init__(self, dim: int, bound: float = 1.0, max_halfspaces: int | None = None,
                 symmetric: bool = False):
        if dim < 1 or bound <= 0:
            raise InvalidInputError("dim must be positive and bound > 0")
        self.dim = dim
        self.bound = float(bound)
        self.symmetric = symmetric
        self.halfspaces: list[Halfspace] = []
        self.max_halfspaces = max_halfspaces
        self._prune_at = max_halfspaces
        if symmetric:
            side = math.isqrt(dim)
            if side * side != dim:
                raise InvalidInputError(f"symmetric version space needs a square dimension, got {dim}")
            self._side = side
            iu = np.triu_indices(side)
            self._picks = iu[0] * side + iu[1]
            var_bound = np.where(iu[0] == iu[1], self.bound, 2 * self.bound)
        else:
            self._picks = None
            var_bound = np.full(dim, self.bound)
        self._nvar = var_bound.size
        self._cols = np.arange(self._nvar, dtype=np.int32)
        self._cache: dict[tuple[bytes, bool], tuple[float, float, bool]] = {}
        self._box: tuple[np.ndarray, np.ndarray] | None = None
        self._quiet = 0
        self._lp = highspy.Highs()
        self._lp.setOptionValue("output_flag", False)
        self._lp.setOptionValue("presolve", "off")
        self._lp.setOptionValue("simplex_strategy", 4)
        self._lp.setOptionValue("primal_feasibility_tolerance", 1e-9)
        self._lp.setOptionValue("dual_feasibility_tolerance", 1e-9)
        self._lp.addVars(self._nvar, -var_bound, var_bound)

    def __len__(self) -> int:
        return len(self.halfspaces)

    def _reduce(self, u: np.ndarray) -> np.ndarray:
        if self._picks is None:
            return u
        U = u.reshape(self._side, self._side)
        if not np.array_equal(U, U.T):
            raise InvalidInputError("symmetric version space received a non-symmetric query")
        return u[self._picks]

    def _minimize(self, cost: np.ndarray) -> float:
        self._lp.changeColsCost(self._nvar, self._cols, cost)
        self._lp.run()
        status = self._lp.getModelStatus()
        if status == highspy.HighsModelStatus.kOptimal:
            return float(self._lp.getInfo().objective_function_value)
        if status == highspy.HighsModelStatus.kInfeasible:
            raise InconsistentFeedbackError(
                f"version space is empty after {len(self.halfspaces)} halfspaces"
            )
        # Rare numerical trouble: solve from scratch with dual simplex, then IPM.
        try:
            for option, value in (("simplex_strategy", 1), ("solver", "ipm")):
                self._lp.setOptionValue(option, value)
                self._lp.clearSolver()
                self._lp.run()
                status = self._lp.getModelStatus()
                if status == highspy.HighsModelStatus.kOptimal:
                    return float(self._lp.getInfo().objective_function_value)
        finally:
            self._lp.setOptionValue("solver", "choose")
            self._lp.setOptionValue("simplex_strategy", 4)
        raise InconsistentFeedbackError(f"LP status {self._lp.modelStatusToString(status)}")

    def interval(self, u, exact: bool = True) -> tuple[float, float]:
        """``(min, max)`` of ``<alpha, u>`` over the version space.

        With ``exact=False`` a converged space may answer with the slightly
        wider interval from its cached bounding box.
        """
        lo, hi, _ = self._interval(self._check(u), use_box=not exact)
        return lo, hi

    def _interval(self, u: np.ndarray, use_box: bool = True) -> tuple[float, float, bool]:
        key = (u.tobytes(), use_box)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        beta = self._reduce(u)
        if not u.any():
            out = (0.0, 0.0, False)
        elif not self.halfspaces:
            r = self.bound * float(np.abs(u).sum())
            out = (-r, r, False)
        else:
            out = self._from_box(beta, float(np.linalg.norm(u))) if use_box else None
            if out is None:
                lo = self._minimize(beta)
                hi = -self._minimize(-beta)
                out = (lo, max(lo, hi), False)
        self._cache[key] = out
        return out

    def _from_box(self, beta: np.ndarray, norm: float) -> tuple[float, float, bool] | None:
        self._quiet += 1
        if self._box is None:
            if self._quiet < QUIET_QUERIES:
                return None
            eye = np.eye(self._nvar)
            lo = np.array([self._minimize(e) for e in eye])
            hi = np.array([-self._minimize(-e) for e in eye])
            self._box = (lo, np.maximum(lo, hi))
        lo_b, hi_b = self._box
        lo = float(np.minimum(beta * lo_b, beta * hi_b).sum())
        hi = float(np.maximum(beta * lo_b, beta * hi_b).sum())
        if hi - lo > BOX_RESOLUTION * norm:
            return None
        return lo, hi, True

    def add(self, u, g: float, too_large: bool) -> bool:
        """Intersect with the feedback halfspace; returns False if nothing changed."""
        u = self._check(u)
        norm = float(np.linalg.norm(u))
        if norm == 0.0:
            return False
        lo, hi, converged = self._interval(u)
        if converged or (hi - lo) / norm <= RESOLUTION:
            return False
        if too_large and g >= hi:
            return False
        if not too_large and g <= lo:
            return False
        sign = 1.0 if too_large else -1.0
        row = sign * self._reduce(u) / norm
        self._lp.addRow(-_INF, sign * g / norm, self._nvar, self._cols, row)
        self.halfspaces.append(Halfspace(u.copy(), float(g), bool(too_large)))
        self._cache.clear()
        self._box = None
        self._quiet = 0
        if self._prune_at is not None and len(self.halfspaces) > self._prune_at:
            self.prune()
        return True

    def prune(self) -> int:
        """Drop redundant halfspaces, oldest first; returns how many were removed.

        Only redundant halfspaces are removed, so the polytope never grows.
        If the cap cannot be met the next attempt is deferred until a quarter
        of the cap has been added again.
        """
        target = self.max_halfspaces if self.max_halfspaces is not None else 0
        removed = 0
        row = 0
        while row < len(self.halfspaces) and len(self.halfspaces) > target:
            h = self.halfspaces[row]
            norm = float(np.linalg.norm(h.u))
            sign = 1.0 if h.too_large else -1.0
            rhs = sign * h.g / norm
            self._lp.changeRowBounds(row, -_INF, _INF)
            try:
                worst = -self._minimize(-sign * self._reduce(h.u) / norm)
            except InconsistentFeedbackError:
                worst = np.inf
            if worst <= rhs + 1e-12:
                self._lp.deleteRows(1, np.array([row], dtype=np.int32))
                del self.halfspaces[row]
                removed += 1
            else:
                self._lp.changeRowBounds(row, -_INF, rhs)
                row += 1
        self._cache.clear()
        if self.max_halfspaces is not None:
            self._prune_at = max(self.max_halfspaces, len(self.halfspaces) + self.max_halfspaces // 4)
        return removed

    def contains(self, alpha, tol: float = CONTAINMENT_TOL) -> bool:
        alpha = self._check(alpha)
        if np.any(np.abs(alpha) > self.bound + tol):
            return False
        return all(h.satisfied_by(alpha, tol) for h in self.halfspaces)

    def _check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.size != self.dim:
            raise InvalidInputError(f"expected a vector of length {self.dim}, got {u.size}")
        if not np.all(np.isfinite(u)):
            raise InvalidInputError("non-finite query vector")
        return u


def default_halfspace_cap(dim: int, bound: float, epsilon_sq: float) -> int:
    return max(dim, math.ceil(4 * dim * math.log2(max(bound / epsilon_sq, 2.0))))


class DistanceEstimator:
    """Guess/feedback learner for one unknown linear functional ``<alpha, u>``.

    ``valid_mistakes`` is only maintained when the caller supplies the true
    value in :meth:`feedback`; in simulation that caller is the harness.
    """

    def __init__(self, dim: int, epsilon_sq: float, bound: float = 1.0, prune: bool = True,
                 symmetric: bool = False):
        if epsilon_sq <= 0:
            raise InvalidInputError("epsilon_sq must be positive")
        cap = default_halfspace_cap(dim, bound, epsilon_sq) if prune else None
        self.version_space = VersionSpace(dim, bound, max_halfspaces=cap, symmetric=symmetric)
        self.epsilon_sq = float(epsilon_sq)
        self.valid_mistakes = 0
        self.feedback_rounds = 0

    def guess(self, u) -> float:
        lo, hi = self.version_space.interval(u, exact=False)
        return 0.5 * (lo + hi)

    def feedback(self, u, g: float, too_large: bool, true_value: float | None = None) -> bool:
        """Record one bit of feedback; returns whether the version space shrank."""
        added = self.version_space.add(u, g, too_large)
        self.feedback_rounds += 1
        if true_value is not None and abs(g - true_value) > self.epsilon_sq:
            self.valid_mistakes += 1
        return added


@dataclass
class RoundQuery:
    """Everything the bank computed for one round, reused when feedback arrives."""

    ctx: ContextSet
    us: list[np.ndarray]
    guesses: np.ndarray
    d_hat: np.ndarray


@dataclass
class FeedbackReport:
    """What happened to each pair when the oracle answer was applied."""

    too_large: list[tuple[int, int]] = field(default_factory=list)
    not_too_large: list[tuple[int, int]] = field(default_factory=list)
    new_mistakes: int = 0
    # filled only when ground truth is supplied
    unsound_violations: int = 0
    truth_excluded: int = 0


class EstimatorBank:
    """One :class:`DistanceEstimator` per canonical pair of arms."""

    def __init__(self, k: int, d: int, epsilon_sq: float, bound: float = 1.0, prune: bool = True):
        self.k, self.d = k, d
        self.pairs = pairs(k)
        self.estimators = {
            p: DistanceEstimator(d * d, epsilon_sq, bound, prune, symmetric=True) for p in self.pairs
        }

    def estimate_distances(self, ctx: ContextSet) -> RoundQuery:
        if ctx.k != self.k or ctx.d != self.d:
            raise InvalidInputError(f"bank expects {self.k} contexts of dimension {self.d}")
        X = ctx.contexts
        us = [flatten_pair(X[i], X[j]) for i, j in self.pairs]
        guesses = np.array([self.estimators[p].guess(u) for p, u in zip(self.pairs, us)])
        return RoundQuery(ctx, us, guesses, np.sqrt(np.maximum(guesses, 0.0)))

    def apply_oracle_round(
        self,
        query: RoundQuery,
        violations: Iterable[tuple[int, int]],
        tight: Iterable[tuple[int, int]],
        alpha_true: np.ndarray | None = None,
    ) -> FeedbackReport:
        """Violated pairs were guessed too large; tight, unviolated pairs were not.

        A pair that is both violated and tight counts as violated only.
        """
        violated = {canonical(*p) for p in violations}
        confirmed = {canonical(*p) for p in tight} - violated
        report = FeedbackReport()
        for n, p in enumerate(self.pairs):
            if p in violated:
                too_large = True
                report.too_large.append(p)
            elif p in confirmed:
                too_large = False
                report.not_too_large.append(p)
            else:
                continue
            u, g = query.us[n], float(query.guesses[n])
            est = self.estimators[p]
            truth = None if alpha_true is None else float(alpha_true @ u)
            before = est.valid_mistakes
            added = est.feedback(u, g, too_large, truth)
            report.new_mistakes += est.valid_mistakes - before
            if truth is not None:
                if too_large and not g > truth - CONTAINMENT_TOL:
                    report.unsound_violations += 1
                if added and not est.version_space.halfspaces[-1].satisfied_by(alpha_true):
                    report.truth_excluded += 1
        return report

    @property
    def valid_mistakes(self) -> int:
        return sum(e.valid_mistakes for e in self.estimators.values())

    @property
    def feedback_rounds(self) -> int:
        return sum(e.feedback_rounds for e in self.estimators.values())

    def contains(self, alpha: np.ndarray) -> bool:
        return all(e.version_space.contains(alpha) for e in self.estimators.values())

    def dump(self, query: RoundQuery | None = None) -> str:
        """One JSON object per pair: interval on the last queried direction and counters."""
        lines = []
        for n, p in enumerate(self.pairs):
            est = self.estimators[p]
            rec = {
                "pair": list(p),
                "halfspaces": len(est.version_space),
                "feedback_rounds": est.feedback_rounds,
                "valid_mistakes": est.valid_mistakes,
            }
            if query is not None:
                lo, hi = est.version_space.interval(query.us[n])
                rec.update(lo=lo, hi=hi)
            lines.append(json.dumps(rec))
        return "\n".join(lines) + "\n"
