"""Empirical risk statistics: lower-tail CVaR and order-statistic quantiles.

Conventions (used consistently by every training loop in this package):

* ``quantile(values, p)`` is the ``ceil(p * N)``-th smallest value.  No
  interpolation: thresholds are always actual sample values, so selecting
  ``values <= quantile(values, p)`` keeps at least ``ceil(p * N)`` items.
* ``cvar(values, alpha)`` is the mean of the ``ceil(alpha * N)`` smallest
  values (hard selection, matching the quantile convention above).
* ``weighted_quantile`` generalizes the quantile to nonnegative sample
  weights: the smallest value ``v`` whose cumulative normalized weight of
  ``{values <= v}`` reaches ``p``.  With uniform weights it coincides with
  ``quantile`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """A statistic was requested with an out-of-domain parameter."""


def _as_values(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ParameterError("values must be a nonempty 1-D array")
    return arr


def quantile(values, p: float) -> float:
    """Order-statistic quantile: the ceil(p*N)-th smallest value, p in (0,1)."""
    arr = _as_values(values)
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level p must be in (0, 1), got {p}")
    k = math.ceil(p * arr.size)
    k = min(max(k, 1), arr.size)
    return float(np.sort(arr)[k - 1])


def cvar(values, alpha: float) -> float:
    """Lower-tail empirical CVaR: mean of the ceil(alpha*N) smallest values."""
    arr = _as_values(values)
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must be in (0, 1], got {alpha}")
    k = math.ceil(alpha * arr.size)
    k = min(max(k, 1), arr.size)
    tail = np.sort(arr)[:k]
    return float(np.mean(tail))


def weighted_quantile(values, weights, p: float) -> float:
    """Smallest v whose normalized weight of {values <= v} is >= p.

    Ties share cumulative mass, so among equal values the common value is
    returned; a zero-weight sample never shifts the result.
    """
    arr = _as_values(values)
    w = np.asarray(weights, dtype=float)
    if w.shape != arr.shape:
        raise ParameterError("values and weights must have matching length")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level p must be in (0, 1), got {p}")
    if np.any(w < 0):
        raise ParameterError("weights must be nonnegative")
    total = float(np.sum(w))
    if total <= 0.0:
        raise ParameterError("weights must have positive sum")
    order = np.argsort(arr, kind="stable")
    sorted_vals = arr[order]
    cum = np.cumsum(w[order]) / total
    idx = int(np.searchsorted(cum, p, side="left"))
    idx = min(idx, arr.size - 1)
    return float(sorted_vals[idx])


@dataclass(frozen=True)
class ReturnBatch:
    """Per-task mean returns with optional per-rollout detail and weights.

    ``per_task_returns[i]`` is the mean over rollouts of task i (the paper's
    R_i); ``per_rollout_returns`` has shape (N, M) when M rollouts per task
    were generated.  ``weights`` default to 1 (tasks drawn from the original
    distribution carry weight 1).
    """

    per_task_returns: np.ndarray
    per_rollout_returns: np.ndarray | None = None
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        r = np.asarray(self.per_task_returns, dtype=float)
        object.__setattr__(self, "per_task_returns", r)
        if self.per_rollout_returns is not None:
            rr = np.asarray(self.per_rollout_returns, dtype=float)
            if rr.ndim != 2 or rr.shape[0] != r.size:
                raise ParameterError("per_rollout_returns must be N x M")
            object.__setattr__(self, "per_rollout_returns", rr)
        w = self.weights
        w = np.ones_like(r) if w is None else np.asarray(w, dtype=float)
        if w.shape != r.shape:
            raise ParameterError("weights must match per_task_returns")
        if np.any(w < 0):
            raise ParameterError("weights must be nonnegative")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_rollout_matrix(cls, per_rollout_returns, weights=None) -> "ReturnBatch":
        rr = np.asarray(per_rollout_returns, dtype=float)
        if rr.ndim != 2:
            raise ParameterError("per_rollout_returns must be N x M")
        return cls(rr.mean(axis=1), rr, weights)

    @property
    def n_tasks(self) -> int:
        return int(self.per_task_returns.size)

    def quantile(self, p: float) -> float:
        return quantile(self.per_task_returns, p)

    def weighted_quantile(self, p: float) -> float:
        return weighted_quantile(self.per_task_returns, self.weights, p)

    def cvar(self, alpha: float) -> float:
        return cvar(self.per_task_returns, alpha)
