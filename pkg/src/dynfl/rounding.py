"""Randomized rounding of the fractional solutions, for both opening modes.

Both rounders share the same first step: for each client, time is greedily
partitioned into maximal intervals on which the client's fractional
assignment keeps at least one half of its mass on a common set of facilities
(``sum_i min_{t in I} x[t, i, j] >= 1/2``).  Clients then stick to a single
facility per interval, so each client switches at most once per interval
boundary.

Fixed mode samples a multiset of facilities proportionally to the opening
weights and connects each client, per interval, to the cheapest sampled
facility.  Hourly mode draws one exponential threshold per facility, opens a
facility whenever its opening weight exceeds its threshold, and connects each
client, per interval, to the facility minimizing ``threshold / interval
mass`` -- a choice that is provably open throughout the interval whenever the
minimized ratio is below one.  If some (client, interval) pair has no ratio
below one, the draw is rejected and the caller retries with fresh thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DynflError, Instance, Mode, Solution
from .relaxation import FractionalSolution

#: Slack when testing the 1/2 mass threshold, absorbing LP round-off.
GREEDY_TOL = 1e-9


class RetryBudgetExceededError(DynflError):
    """Hourly rounding kept rejecting threshold draws."""


def sampling_rate(n: int, T: int) -> float:
    """The rate ``2 ln(2 n T)`` shared by both randomized rounders."""
    return 2.0 * math.log(2.0 * n * T)


@dataclass(frozen=True)
class IntervalPartition:
    """Greedy per-client time intervals plus the per-interval facility mass.

    ``boundaries[j]`` is the 1-based cut sequence ``(1, ..., T+1)`` for client
    ``j``; ``interval_mins[j][k]`` is the length-``m`` vector of per-facility
    minima of ``x`` over the ``k``-th interval.
    """

    boundaries: tuple
    interval_mins: tuple

    def intervals(self, j: int):
        """Yield ``(t_lo, t_hi, mins)`` with 0-based half-open step range."""
        bounds = self.boundaries[j]
        for k in range(len(bounds) - 1):
            yield bounds[k] - 1, bounds[k + 1] - 1, self.interval_mins[j][k]

    def num_intervals(self, j: int) -> int:
        return len(self.boundaries[j]) - 1


def partition_intervals(x_client: np.ndarray) -> tuple[tuple, tuple]:
    """Greedy maximal intervals for one client.

    ``x_client`` has shape ``(T, m)`` with rows summing to one.  Starting from
    each cut, the interval is extended while the summed per-facility minima
    stay at least 1/2; the extension that would drop below 1/2 starts the next
    interval.  Singletons always qualify, so the partition is well-defined.
    Returns ``(boundaries, mins)`` as stored in :class:`IntervalPartition`.
    """
    T = x_client.shape[0]
    bounds = [1]
    mins = []
    t0 = 0
    while t0 < T:
        cur = x_client[t0].copy()
        end = t0 + 1
        while end < T:
            cand = np.minimum(cur, x_client[end])
            if float(cand.sum()) < 0.5 - GREEDY_TOL:
                break
            cur = cand
            end += 1
        cur.setflags(write=False)
        bounds.append(end + 1)
        mins.append(cur)
        t0 = end
    return tuple(bounds), tuple(mins)


def partition_all(frac: FractionalSolution) -> IntervalPartition:
    """Partition every client of a fractional solution."""
    n = frac.x.shape[2]
    per_client = [partition_intervals(frac.x[:, :, j]) for j in range(n)]
    return IntervalPartition(boundaries=tuple(b for b, _ in per_client),
                             interval_mins=tuple(m for _, m in per_client))


# ---------------------------------------------------------------------------
# Fixed opening cost
# ---------------------------------------------------------------------------

def draw_count(frac: FractionalSolution, n: int, T: int) -> int:
    """Number of facility draws: ``ceil(2 ln(2nT) * sum_i y_i)``.

    Rounding up only increases the chance that every (client, interval) pair
    is covered by a draw inside its own mass.
    """
    return int(math.ceil(sampling_rate(n, T) * float(frac.y.sum())))


def sample_facilities_fixed(frac: FractionalSolution, rng: np.random.Generator) -> np.ndarray:
    """Draw facilities i.i.d. proportionally to the opening weights.

    Returns the multiset of draws as an integer array.  Raises if all opening
    weights are zero (impossible for a valid fractional solution).
    """
    if frac.mode is not Mode.FIXED:
        raise ValueError("fixed-mode fractional solution required")
    y = np.clip(frac.y, 0.0, None)
    total = float(y.sum())
    if total <= 0.0:
        raise ValueError("all opening weights are zero; nothing to sample")
    T, _, n = frac.x.shape
    count = draw_count(frac, n, T)
    return rng.choice(y.size, size=count, replace=True, p=y / total)


def assign_fixed(instance: Instance, partition: IntervalPartition,
                 draws: np.ndarray) -> Solution:
    """Connect each client, per interval, to the cheapest drawn facility.

    Cheapest means minimal summed distance over the interval, ties broken by
    lowest facility index.  The open set is the support of the draws.
    """
    support = np.unique(np.asarray(draws, dtype=np.int64))
    if support.size == 0:
        raise ValueError("no facilities drawn")
    assignment = np.empty((instance.T, instance.n), dtype=np.int64)
    for j in range(instance.n):
        for t_lo, t_hi, _ in partition.intervals(j):
            costs = instance.d[t_lo:t_hi, support, j].sum(axis=0)
            assignment[t_lo:t_hi, j] = support[int(np.argmin(costs))]
    return Solution(mode=Mode.FIXED, openings=frozenset(int(i) for i in support),
                    assignment=assignment)


def round_fixed(instance: Instance, frac: FractionalSolution,
                rng: np.random.Generator) -> Solution:
    """One rounding trial for the fixed opening-cost mode."""
    partition = partition_all(frac)
    draws = sample_facilities_fixed(frac, rng)
    return assign_fixed(instance, partition, draws)


# ---------------------------------------------------------------------------
# Hourly opening cost
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdDraw:
    """One positive exponential threshold per facility (rate ``2 ln(2nT)``)."""

    rho: np.ndarray
    rate: float


def sample_thresholds(frac: FractionalSolution, rng: np.random.Generator) -> ThresholdDraw:
    """Draw i.i.d. exponential thresholds with survival ``exp(-2 ln(2nT) a)``."""
    T, m, n = frac.x.shape
    rate = sampling_rate(n, T)
    rho = rng.exponential(scale=1.0 / rate, size=m)
    while np.any(rho <= 0.0):  # zero draws are measure-zero but forbidden
        redo = rho <= 0.0
        rho[redo] = rng.exponential(scale=1.0 / rate, size=int(redo.sum()))
    rho.setflags(write=False)
    return ThresholdDraw(rho=rho, rate=rate)


def open_schedule(frac: FractionalSolution, thresholds: ThresholdDraw) -> tuple:
    """Open facility ``i`` at every step where its weight exceeds its threshold."""
    if frac.mode is not Mode.HOURLY:
        raise ValueError("hourly-mode fractional solution required")
    open_mask = frac.y > thresholds.rho[None, :]
    return tuple(frozenset(np.flatnonzero(row).tolist()) for row in open_mask)


def assign_hourly(instance: Instance, frac: FractionalSolution,
                  partition: IntervalPartition,
                  thresholds: ThresholdDraw) -> Solution | None:
    """Assign clients per interval by minimal threshold-to-mass ratio.

    Returns ``None`` (retry with fresh thresholds) when some (client,
    interval) pair has no facility with ratio strictly below one; that is a
    normal outcome, not an error.  When the ratio is below one the chosen
    facility is open at every step of the interval, since its threshold lies
    below the interval mass, which never exceeds the opening weight.
    """
    rho = thresholds.rho
    assignment = np.empty((instance.T, instance.n), dtype=np.int64)
    for j in range(instance.n):
        for t_lo, t_hi, mins in partition.intervals(j):
            support = np.flatnonzero(mins > 0.0)
            ratios = rho[support] / mins[support]
            k = int(np.argmin(ratios))
            if ratios[k] >= 1.0:
                return None
            i_star = int(support[k])
            assert bool(np.all(frac.y[t_lo:t_hi, i_star] > rho[i_star]))
            assignment[t_lo:t_hi, j] = i_star
    return Solution(mode=Mode.HOURLY, openings=open_schedule(frac, thresholds),
                    assignment=assignment)


def round_hourly(instance: Instance, frac: FractionalSolution,
                 rng: np.random.Generator, retry_budget: int = 64) -> Solution:
    """One rounding trial for the hourly mode, redrawing rejected thresholds.

    Each redraw is accepted with probability at least 1/2, so the default
    budget fails with negligible probability; exhausting it raises.
    """
    partition = partition_all(frac)
    for _ in range(retry_budget):
        thresholds = sample_thresholds(frac, rng)
        solution = assign_hourly(instance, frac, partition, thresholds)
        if solution is not None:
            return solution
    raise RetryBudgetExceededError(
        f"no accepted threshold draw in {retry_budget} attempts "
        f"(n={instance.n}, T={instance.T}); the fractional solution may be invalid")
