"""Brute-force optimal solvers and the per-snapshot static baseline.

Once the open facilities are pinned down, the objective separates across
clients, and the best assignment of one client is a minimum-cost walk over
time: stay on the current facility for free or hop to another open one for
``g``.  ``optimal_assignment`` solves that walk by dynamic programming; the
exact solvers wrap it in exhaustive enumeration of the opening decisions.

Enumeration sizes are guarded; limits can be raised through the
``DYNFL_SIZE_GUARD`` environment variable, e.g.::

    DYNFL_SIZE_GUARD="fixed_m_max=22,hourly_state_max=2e6,hourly_t_max=10"

All solvers are deterministic: cost ties are broken by the lexicographically
smallest open set and then the lexicographically smallest assignment
sequence (exact float ties only).
"""

from __future__ import annotations

import itertools
import os

import numpy as np

from .model import (CostBreakdown, DimensionMismatchError, DynflError, Instance,
                    Mode, Solution, evaluate_cost)

_DEFAULT_GUARDS = {
    "fixed_m_max": 16,
    "hourly_state_max": 100_000,
    "hourly_t_max": 8,
}

_CHUNK = 8192


class SizeGuardError(DynflError):
    """The instance exceeds the enumeration guard for an exact solver."""


def _size_guards() -> dict:
    out = dict(_DEFAULT_GUARDS)
    raw = os.environ.get("DYNFL_SIZE_GUARD", "")
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in out:
            raise ValueError(
                f"DYNFL_SIZE_GUARD entry {part!r} invalid; known keys: "
                f"{', '.join(_DEFAULT_GUARDS)}")
        out[key] = int(float(val))
    return out


def _stay_or_switch(nxt: np.ndarray, g: float) -> np.ndarray:
    """Per (facility, client): min of staying on it or paying ``g`` to move."""
    m = nxt.shape[0]
    if m == 1:
        return nxt.copy()
    min1 = nxt.min(axis=0)
    arg1 = nxt.argmin(axis=0)
    min2 = np.partition(nxt, 1, axis=0)[1]
    other = np.where(np.arange(m)[:, None] == arg1[None, :], min2[None, :], min1[None, :])
    return np.minimum(nxt, g + other)


def optimal_assignment(instance: Instance, openings) -> tuple[np.ndarray, float]:
    """Cheapest assignment (distance + switching) given the open facilities.

    ``openings`` is a single set (kept open at all steps) or a per-step
    sequence of ``T`` sets.  Solved per client by dynamic programming over
    (step, facility); ties resolved toward the lexicographically smallest
    assignment sequence.  Returns ``(assignment, cost)`` where the cost
    excludes opening fees.
    """
    T, m, n = instance.T, instance.m, instance.n
    if isinstance(openings, (set, frozenset)):
        sets = [frozenset(openings)] * T
    else:
        sets = [frozenset(s) for s in openings]
        if len(sets) != T:
            raise DimensionMismatchError(f"{len(sets)} open sets for T={T} steps")
    masks = np.zeros((T, m), dtype=bool)
    for t, s in enumerate(sets):
        if not s:
            raise ValueError(f"empty open set at step {t + 1}: no feasible assignment")
        if not all(0 <= i < m for i in s):
            raise DimensionMismatchError("open facility id out of range")
        masks[t, sorted(s)] = True

    suffix = [np.empty(0)] * T
    suffix[T - 1] = np.where(masks[T - 1][:, None], instance.d[T - 1], np.inf)
    for t in range(T - 2, -1, -1):
        move = _stay_or_switch(suffix[t + 1], instance.g)
        suffix[t] = np.where(masks[t][:, None], instance.d[t] + move, np.inf)

    assignment = np.empty((T, n), dtype=np.int64)
    assignment[0] = np.argmin(suffix[0], axis=0)
    cost = float(suffix[0][assignment[0], np.arange(n)].sum())
    facil = np.arange(m)[:, None]
    for t in range(1, T):
        cand = suffix[t] + instance.g * (facil != assignment[t - 1][None, :])
        assignment[t] = np.argmin(cand, axis=0)
    return assignment, cost


def _combination_blocks(m: int, size: int, chunk: int = _CHUNK):
    block = []
    for combo in itertools.combinations(range(m), size):
        block.append(combo)
        if len(block) == chunk:
            yield np.asarray(block, dtype=np.int64)
            block = []
    if block:
        yield np.asarray(block, dtype=np.int64)


def _batched_assignment_costs(d: np.ndarray, subsets: np.ndarray, g: float) -> np.ndarray:
    """Distance+switching DP cost for many equal-size open sets at once."""
    T = d.shape[0]
    size = subsets.shape[1]
    value = d[0][subsets]  # (N, size, n)
    if size == 1:
        for t in range(1, T):
            value = value + d[t][subsets]
        return value[:, 0, :].sum(axis=1)
    rows = np.arange(size)[None, :, None]
    for t in range(1, T):
        min1 = value.min(axis=1)
        arg1 = value.argmin(axis=1)
        min2 = np.partition(value, 1, axis=1)[:, 1, :]
        other = np.where(rows == arg1[:, None, :], min2[:, None, :], min1[:, None, :])
        value = d[t][subsets] + np.minimum(value, g + other)
    return value.min(axis=1).sum(axis=1)


def exact_fixed(instance: Instance) -> tuple[Solution, CostBreakdown]:
    """Exact optimum in fixed mode by enumeration of the open set.

    Subsets are scanned by increasing size; a size is skipped entirely once
    its opening fee alone exceeds the incumbent (safe: the other cost terms
    are non-negative).
    """
    if instance.mode is not Mode.FIXED:
        raise ValueError("instance mode must be fixed")
    guard = _size_guards()["fixed_m_max"]
    if instance.m > guard:
        raise SizeGuardError(
            f"exact_fixed enumerates 2^m subsets; m={instance.m} exceeds the "
            f"limit {guard}. Raise it via DYNFL_SIZE_GUARD=fixed_m_max=... if "
            f"you really want this.")
    best_cost = np.inf
    best_set: tuple | None = None
    for size in range(1, instance.m + 1):
        if best_set is not None and instance.f * size > best_cost:
            break
        for block in _combination_blocks(instance.m, size):
            costs = instance.f * size + _batched_assignment_costs(
                instance.d, block, instance.g)
            k = int(np.argmin(costs))  # first minimum: lexicographically first
            cand_cost = float(costs[k])
            cand = tuple(int(v) for v in block[k])
            if cand_cost < best_cost or (cand_cost == best_cost and
                                         (best_set is None or cand < best_set)):
                best_cost = cand_cost
                best_set = cand
    assignment, _ = optimal_assignment(instance, frozenset(best_set))
    solution = Solution(mode=Mode.FIXED, openings=frozenset(best_set),
                        assignment=assignment)
    return solution, evaluate_cost(instance, solution)


def _switch_transform(values: np.ndarray, g: float) -> np.ndarray:
    """min-plus transform: ``W[p] = min_q values[q] + g * hamming(p, q)``.

    ``values`` is shaped ``(m,) * n`` (one axis per client); the transform
    runs one stay-or-switch pass per axis, which is exact because the
    switching cost is additive across clients.
    """
    W = values
    ndim = W.ndim
    for axis in range(ndim):
        m = W.shape[axis]
        if m == 1:
            continue
        min1 = W.min(axis=axis, keepdims=True)
        arg1 = np.expand_dims(W.argmin(axis=axis), axis)
        min2 = np.partition(W, 1, axis=axis).take([1], axis=axis)
        shape = [1] * ndim
        shape[axis] = m
        idx = np.arange(m).reshape(shape)
        other = np.where(idx == arg1, min2, min1)
        W = np.minimum(W, g + other)
    return W


def exact_hourly(instance: Instance) -> tuple[Solution, CostBreakdown]:
    """Exact optimum in hourly mode by DP over full assignment vectors.

    Since extra open facilities only cost money, the open set at each step is
    the image of the assignment; the DP therefore runs over the ``m**n``
    assignment vectors with the switching cost bridged between steps.
    """
    if instance.mode is not Mode.HOURLY:
        raise ValueError("instance mode must be hourly")
    guards = _size_guards()
    states = (2 ** instance.m) * (instance.m ** instance.n)
    if states > guards["hourly_state_max"] or instance.T > guards["hourly_t_max"]:
        raise SizeGuardError(
            f"exact_hourly state space 2^m * m^n = {states} (limit "
            f"{guards['hourly_state_max']}) with T={instance.T} (limit "
            f"{guards['hourly_t_max']}). Raise DYNFL_SIZE_GUARD if needed.")
    T, m, n, f, g = instance.T, instance.m, instance.n, instance.f, instance.g
    phis = np.asarray(list(itertools.product(range(m), repeat=n)), dtype=np.int64)
    P = phis.shape[0]
    image_size = np.asarray([len(set(map(int, row))) for row in phis])
    cols = np.arange(n)[None, :]
    step_cost = np.empty((T, P))
    for t in range(T):
        step_cost[t] = f * image_size + instance.d[t][phis, cols].sum(axis=1)

    shape = (m,) * n
    suffix = np.empty((T, P))
    suffix[T - 1] = step_cost[T - 1]
    for t in range(T - 2, -1, -1):
        moved = _switch_transform(suffix[t + 1].reshape(shape), g).ravel()
        suffix[t] = step_cost[t] + moved

    assignment = np.empty((T, n), dtype=np.int64)
    p = int(np.argmin(suffix[0]))  # first minimum: lexicographically smallest
    assignment[0] = phis[p]
    for t in range(1, T):
        hamming = (phis != phis[p][None, :]).sum(axis=1)
        p = int(np.argmin(suffix[t] + g * hamming))
        assignment[t] = phis[p]
    openings = tuple(frozenset(int(v) for v in row) for row in assignment)
    solution = Solution(mode=Mode.HOURLY, openings=openings, assignment=assignment)
    return solution, evaluate_cost(instance, solution)


def _static_snapshot(dt: np.ndarray, f: float) -> tuple:
    """Lex-smallest optimal open set for one static snapshot (m, n)."""
    m = dt.shape[0]
    best_cost = np.inf
    best: tuple | None = None
    for size in range(1, m + 1):
        if best is not None and f * size > best_cost:
            break
        for block in _combination_blocks(m, size, chunk=65536):
            costs = f * size + dt[block].min(axis=1).sum(axis=1)
            k = int(np.argmin(costs))
            cand_cost = float(costs[k])
            cand = tuple(int(v) for v in block[k])
            if cand_cost < best_cost or (cand_cost == best_cost and
                                         (best is None or cand < best)):
                best_cost = cand_cost
                best = cand
    return best


def static_baseline(instance: Instance) -> tuple[Solution, CostBreakdown]:
    """Optimal static solution per snapshot, evaluated as one dynamic solution.

    Each snapshot is solved independently (exact enumeration, nearest-open
    assignment, lexicographic ties) and the snapshots are concatenated:
    fixed-mode accounting opens the union of the per-snapshot sets, hourly
    accounting pays per snapshot.  The evaluated cost includes whatever
    switching the concatenation incurs, which is the point of the comparison.
    """
    guard = _size_guards()["fixed_m_max"]
    if instance.m > guard:
        raise SizeGuardError(
            f"static_baseline enumerates 2^m subsets per snapshot; m={instance.m} "
            f"exceeds the limit {guard}. Raise DYNFL_SIZE_GUARD if needed.")
    assignment = np.empty((instance.T, instance.n), dtype=np.int64)
    per_step = []
    for t in range(instance.T):
        chosen = _static_snapshot(instance.d[t], instance.f)
        support = np.asarray(chosen, dtype=np.int64)
        assignment[t] = support[np.argmin(instance.d[t][support], axis=0)]
        per_step.append(frozenset(int(v) for v in chosen))
    if instance.mode is Mode.FIXED:
        openings = frozenset().union(*per_step)
        solution = Solution(mode=Mode.FIXED, openings=openings, assignment=assignment)
    else:
        solution = Solution(mode=Mode.HOURLY, openings=tuple(per_step),
                            assignment=assignment)
    return solution, evaluate_cost(instance, solution)
