"""Build the LP relaxations, unpack solver output, and check their structure.

Variables (all lower-bounded by 0):

* ``y`` -- fractional opening weight per facility (fixed mode) or per
  facility per step (hourly mode);
* ``x[t, i, j]`` -- fraction of client ``j`` served by facility ``i`` at
  step ``t``; rows sum to one over facilities;
* ``z[t, i, j]`` -- fractional switch mass, at least ``x[t] - x[t+1]``,
  defined for ``t < T`` only (none when ``T = 1``).

The objective charges ``f`` against the opening weights, the distances
against ``x`` and ``g`` against ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import LinearProgram, LpSolution, LpStatus, Relation, solve_lp
from .model import DynflError, Instance, Mode

ROW_SUM_TOL = 1e-7
LINK_TOL = 1e-9
FACT_TOL = 1e-7


class LpConsistencyError(DynflError):
    """Solver output violates a structural invariant: an engine bug."""


@dataclass(frozen=True)
class VariableIndex:
    """Bijection between named LP variables and column indices.

    Column layout: opening weights first (facility-major; hourly adds a step
    dimension, step-major), then ``x`` in (t, i, j) order, then ``z``.
    """

    mode: Mode
    n: int
    m: int
    T: int

    @property
    def num_y(self) -> int:
        return self.m if self.mode is Mode.FIXED else self.T * self.m

    @property
    def num_vars(self) -> int:
        return self.num_y + self.T * self.m * self.n + (self.T - 1) * self.m * self.n

    def y_index(self, i: int, t: int | None = None) -> int:
        if self.mode is Mode.FIXED:
            return i
        return t * self.m + i

    def x_index(self, t: int, i: int, j: int) -> int:
        return self.num_y + (t * self.m + i) * self.n + j

    def z_index(self, t: int, i: int, j: int) -> int:
        return self.num_y + (self.T * self.m + t * self.m + i) * self.n + j

    def names(self) -> list[str]:
        out = []
        if self.mode is Mode.FIXED:
            out += [f"y_{i}" for i in range(self.m)]
        else:
            out += [f"y_{i}_t{t}" for t in range(self.T) for i in range(self.m)]
        out += [f"x_{i}_{j}_t{t}" for t in range(self.T)
                for i in range(self.m) for j in range(self.n)]
        out += [f"z_{i}_{j}_t{t}" for t in range(self.T - 1)
                for i in range(self.m) for j in range(self.n)]
        return out


@dataclass(frozen=True)
class FractionalSolution:
    """Optimal LP variables reshaped into arrays.

    ``y`` has shape ``(m,)`` in fixed mode and ``(T, m)`` in hourly mode;
    ``x`` has shape ``(T, m, n)`` and ``z`` shape ``(T-1, m, n)``.
    """

    mode: Mode
    y: np.ndarray
    x: np.ndarray
    z: np.ndarray
    lp_value: float


def _build(instance: Instance) -> tuple[LinearProgram, VariableIndex]:
    index = VariableIndex(mode=instance.mode, n=instance.n, m=instance.m, T=instance.T)
    n, m, T = instance.n, instance.m, instance.T
    nv = index.num_vars

    c = np.zeros(nv)
    if instance.mode is Mode.FIXED:
        c[:m] = instance.f
    else:
        c[:T * m] = instance.f
    for t in range(T):
        for i in range(m):
            base = index.x_index(t, i, 0)
            c[base:base + n] = instance.d[t, i]
    if T > 1:
        c[index.z_index(0, 0, 0):] = instance.g

    rows = T * m * n + T * n + (T - 1) * m * n
    A = np.zeros((rows, nv))
    b = np.zeros(rows)
    senses: list[Relation] = []
    r = 0
    # x <= y (per t, i, j)
    for t in range(T):
        for i in range(m):
            y_col = index.y_index(i, t if instance.mode is Mode.HOURLY else None)
            for j in range(n):
                A[r, index.x_index(t, i, j)] = 1.0
                A[r, y_col] = -1.0
                senses.append(Relation.LE)
                r += 1
    # sum_i x == 1 (per t, j)
    for t in range(T):
        for j in range(n):
            for i in range(m):
                A[r, index.x_index(t, i, j)] = 1.0
            b[r] = 1.0
            senses.append(Relation.EQ)
            r += 1
    # x_t - x_{t+1} - z <= 0 (per t < T, i, j)
    for t in range(T - 1):
        for i in range(m):
            for j in range(n):
                A[r, index.x_index(t, i, j)] = 1.0
                A[r, index.x_index(t + 1, i, j)] = -1.0
                A[r, index.z_index(t, i, j)] = -1.0
                senses.append(Relation.LE)
                r += 1
    return LinearProgram(c=c, A=A, senses=tuple(senses), b=b), index


def build_lp_fixed(instance: Instance) -> tuple[LinearProgram, VariableIndex]:
    """Relaxation with one opening weight per facility."""
    if instance.mode is not Mode.FIXED:
        raise ValueError("instance mode must be fixed")
    return _build(instance)


def build_lp_hourly(instance: Instance) -> tuple[LinearProgram, VariableIndex]:
    """Relaxation with one opening weight per facility per step."""
    if instance.mode is not Mode.HOURLY:
        raise ValueError("instance mode must be hourly")
    return _build(instance)


def extract_fractional(sol: LpSolution, index: VariableIndex) -> FractionalSolution:
    """Reshape an Optimal LP solution and verify its structural invariants."""
    if sol.status is not LpStatus.OPTIMAL:
        raise ValueError(f"LP status is {sol.status.value}, expected optimal")
    v = sol.values
    n, m, T = index.n, index.m, index.T
    if index.mode is Mode.FIXED:
        y = v[:m].copy()
        y_tm = np.broadcast_to(y, (T, m))
    else:
        y = v[:T * m].reshape(T, m).copy()
        y_tm = y
    x = v[index.num_y:index.num_y + T * m * n].reshape(T, m, n).copy()
    z = v[index.num_y + T * m * n:].reshape(max(T - 1, 0), m, n).copy()

    row_sums = x.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
        raise LpConsistencyError("assignment fractions do not sum to 1 per (client, step)")
    if np.any(x - y_tm[:, :, None] > LINK_TOL):
        raise LpConsistencyError("x exceeds its opening weight")
    if T > 1:
        if np.any(z < -LINK_TOL):
            raise LpConsistencyError("negative switch mass")
        if np.any((x[:-1] - x[1:]) - z > LINK_TOL):
            raise LpConsistencyError("switch mass below x_t - x_{t+1}")
    for arr in (y, x, z):
        arr.setflags(write=False)
    return FractionalSolution(mode=index.mode, y=y, x=x, z=z,
                              lp_value=float(sol.objective_value))


def solve_relaxation(instance: Instance) -> FractionalSolution:
    """Build, solve and unpack the relaxation matching the instance mode."""
    if instance.mode is Mode.FIXED:
        lp, index = build_lp_fixed(instance)
    else:
        lp, index = build_lp_hourly(instance)
    return extract_fractional(solve_lp(lp), index)


def check_fact2(frac: FractionalSolution, partition) -> bool:
    """Check the switch-mass lower bound behind the rounding analysis.

    For every client and every interval of its greedy partition except the
    last, the total ``z`` mass accumulated inside the interval must reach
    1/2 (up to tolerance).  Holds for any optimal fractional solution.
    """
    for j, bounds in enumerate(partition.boundaries):
        for k in range(len(bounds) - 2):
            lo, hi = bounds[k] - 1, bounds[k + 1] - 1  # 0-based z slots
            mass = float(frac.z[lo:hi, :, j].sum())
            if mass < 0.5 - FACT_TOL:
                return False
    return True
