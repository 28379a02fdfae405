"""Core problem data: instances, solutions, feasibility, costs, and file formats.

An instance describes ``n`` clients and ``m`` candidate facilities observed over
``T`` time steps, with a distance tensor ``d[t, i, j]`` (facility ``i`` to
client ``j`` at step ``t``), a facility opening cost ``f`` and a per-client
switching cost ``g``.  Two accounting modes exist for the opening cost:

* ``fixed``  -- ``f`` is paid once per opened facility, which then stays open
  for the whole horizon;
* ``hourly`` -- ``f`` is paid per facility per time step it is open.

Time steps are 1-indexed conceptually (``t = 1..T``); arrays are stored
0-indexed, so array slot ``t0`` holds step ``t0 + 1``.  Facility and client
ids are 0-based everywhere, including the file formats.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

FILE_FORMAT_VERSION = 1

#: Absolute tolerance used when comparing costs in tests and reports.
COST_TOL = 1e-9


class Mode(str, enum.Enum):
    """Opening-cost accounting mode."""

    FIXED = "fixed"
    HOURLY = "hourly"


class DynflError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInstanceError(DynflError):
    """Instance data violates a structural invariant."""


class ParseError(DynflError):
    """A file could not be parsed; the message names the offending path."""


class DimensionMismatchError(DynflError):
    """Solution shape or mode does not match the instance.

    Structural: distinct from infeasibility of a well-shaped solution.
    """


class InfeasibleSolutionError(DynflError):
    """A solution assigns some client to a facility that is not open."""

    def __init__(self, violations: Sequence[tuple[int, int]]):
        self.violations = list(violations)
        preview = ", ".join(f"(t={t + 1}, j={j})" for t, j in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" and {len(self.violations) - 5} more"
        super().__init__(f"infeasible solution: {preview}{more}")


def default_sentinel(n: int, m: int, T: int, f: float, g: float,
                     max_distance: float = 0.0) -> float:
    """Sentinel value standing in for an infinite distance.

    Chosen to exceed ``f*m*T + g*n*T`` (the largest opening+switching bill any
    solution can run up), so a solution that avoids sentinel edges always beats
    one that uses them.  Also kept above every finite distance in the instance
    so finite entries can never collide with it.
    """
    return 10.0 * max(1.0, f * m * T + g * n * T, max_distance)


@dataclass(frozen=True)
class Instance:
    """A dynamic facility location instance.

    ``d`` has shape ``(T, m, n)``: ``d[t, i, j]`` is the (non-negative, finite)
    distance from facility ``i`` to client ``j`` at step ``t + 1``.  Entries
    equal to ``infinity_sentinel`` represent forbidden (infinite) connections.
    Immutable after construction; safe to share between workers.
    """

    n: int
    m: int
    T: int
    f: float
    g: float
    mode: Mode
    d: np.ndarray
    infinity_sentinel: float | None = None

    def __post_init__(self):
        for name in ("n", "m", "T"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise InvalidInstanceError(f"{name} must be an integer >= 1, got {v!r}")
        for name in ("f", "g"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise InvalidInstanceError(f"{name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "mode", Mode(self.mode))
        d = np.asarray(self.d, dtype=np.float64)
        if d.shape != (self.T, self.m, self.n):
            raise InvalidInstanceError(
                f"distance tensor must have shape (T={self.T}, m={self.m}, n={self.n}), "
                f"got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise InvalidInstanceError("distances must be finite (use the sentinel for infinity)")
        if np.any(d < 0):
            t, i, j = np.argwhere(d < 0)[0]
            raise InvalidInstanceError(f"negative distance at (t={t + 1}, i={i}, j={j})")
        sentinel = self.infinity_sentinel
        if sentinel is None:
            sentinel = default_sentinel(self.n, self.m, self.T, self.f, self.g,
                                        float(d.max()) if d.size else 0.0)
        sentinel = float(sentinel)
        bound = self.f * self.m * self.T + self.g * self.n * self.T
        if not math.isfinite(sentinel) or sentinel <= bound:
            raise InvalidInstanceError(
                f"infinity_sentinel must be finite and exceed f*m*T + g*n*T = {bound}")
        if float(d.max(initial=0.0)) > sentinel:
            raise InvalidInstanceError("distances must not exceed the infinity sentinel")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "infinity_sentinel", sentinel)

    def digest(self) -> str:
        """Short content hash, used as a stable instance id in reports."""
        payload = json.dumps(_instance_payload(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


Openings = Union[frozenset, tuple]


@dataclass(frozen=True)
class Solution:
    """Open facilities plus a per-step assignment of clients to facilities.

    ``openings`` is a single ``frozenset`` of facility ids in fixed mode, or a
    length-``T`` tuple of frozensets in hourly mode.  ``assignment`` has shape
    ``(T, n)`` with ``assignment[t, j]`` the facility serving client ``j`` at
    step ``t + 1``.  Immutable after construction.
    """

    mode: Mode
    openings: Openings
    assignment: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        a = np.asarray(self.assignment, dtype=np.int64).copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        if self.mode is Mode.FIXED:
            object.__setattr__(self, "openings", frozenset(int(i) for i in self.openings))
        else:
            object.__setattr__(
                self, "openings",
                tuple(frozenset(int(i) for i in s) for s in self.openings))

    def open_at(self, t: int) -> frozenset:
        """Facilities open at 0-based step index ``t``."""
        return self.openings if self.mode is Mode.FIXED else self.openings[t]

    def open_union(self) -> frozenset:
        if self.mode is Mode.FIXED:
            return self.openings
        return frozenset().union(*self.openings) if self.openings else frozenset()


@dataclass(frozen=True)
class CostBreakdown:
    """The three objective terms plus their total."""

    opening: float
    distance: float
    switching: float
    total: float


def validate(instance: Instance, solution: Solution) -> tuple[bool, list[tuple[int, int]]]:
    """Check feasibility of ``solution`` for ``instance``.

    Returns ``(ok, violations)`` where violations lists each 0-based
    ``(t, j)`` pair whose assigned facility is not open at step ``t``.
    Shape or mode mismatches raise :class:`DimensionMismatchError` instead of
    being reported as infeasibility.
    """
    if solution.mode is not instance.mode:
        raise DimensionMismatchError(
            f"solution mode {solution.mode.value!r} != instance mode {instance.mode.value!r}")
    a = solution.assignment
    if a.shape != (instance.T, instance.n):
        raise DimensionMismatchError(
            f"assignment shape {a.shape} != (T={instance.T}, n={instance.n})")
    if a.size and (a.min() < 0 or a.max() >= instance.m):
        raise DimensionMismatchError("assignment references a facility id out of range")
    if instance.mode is Mode.HOURLY:
        if len(solution.openings) != instance.T:
            raise DimensionMismatchError(
                f"hourly openings have {len(solution.openings)} steps, expected T={instance.T}")
    for sets in ([solution.openings] if instance.mode is Mode.FIXED else solution.openings):
        for i in sets:
            if not 0 <= i < instance.m:
                raise DimensionMismatchError(f"open facility id {i} out of range")
    violations = []
    for t in range(instance.T):
        open_t = solution.open_at(t)
        for j in range(instance.n):
            if int(a[t, j]) not in open_t:
                violations.append((t, j))
    return not violations, violations


def evaluate_cost(instance: Instance, solution: Solution) -> CostBreakdown:
    """Evaluate the objective: opening + distance + switching.

    Opening pays ``f`` per open facility (fixed) or per facility per open step
    (hourly); switching pays ``g`` per client per change of assigned facility
    between consecutive steps (transitions ``t -> t+1`` for ``t < T`` only).
    Raises :class:`InfeasibleSolutionError` for infeasible solutions.
    """
    ok, violations = validate(instance, solution)
    if not ok:
        raise InfeasibleSolutionError(violations)
    if instance.mode is Mode.FIXED:
        opening = instance.f * len(solution.openings)
    else:
        opening = instance.f * sum(len(s) for s in solution.openings)
    a = solution.assignment
    t_idx = np.repeat(np.arange(instance.T), instance.n)
    j_idx = np.tile(np.arange(instance.n), instance.T)
    distance = float(instance.d[t_idx, a.ravel(), j_idx].sum())
    switches = int(np.count_nonzero(a[1:] != a[:-1])) if instance.T > 1 else 0
    switching = instance.g * switches
    return CostBreakdown(opening=opening, distance=distance, switching=switching,
                         total=opening + distance + switching)


# ---------------------------------------------------------------------------
# File formats (JSON; schemas and golden files live under schemas/).
# ---------------------------------------------------------------------------

def _instance_payload(instance: Instance) -> dict:
    return {
        "version": FILE_FORMAT_VERSION,
        "n": instance.n,
        "m": instance.m,
        "T": instance.T,
        "f": instance.f,
        "g": instance.g,
        "mode": instance.mode.value,
        "infinity_sentinel": instance.infinity_sentinel,
        "distances": instance.d.tolist(),
    }


def _dump_canonical(payload: dict, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_instance(instance: Instance, path: str | os.PathLike) -> None:
    """Write an instance file; ``read_instance`` reproduces it bit-exactly."""
    _dump_canonical(_instance_payload(instance), path)


def _parse_error(path, message) -> ParseError:
    return ParseError(f"{path}: {message}")


def read_instance(path: str | os.PathLike) -> Instance:
    """Read and validate an instance file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _parse_error(path, f"cannot read instance file ({exc})") from exc
    if not isinstance(raw, dict):
        raise _parse_error(path, "instance file must contain a JSON object")
    required = ["version", "n", "m", "T", "f", "g", "mode", "infinity_sentinel", "distances"]
    missing = [k for k in required if k not in raw]
    if missing:
        raise _parse_error(path, f"missing fields: {', '.join(missing)}")
    if raw["version"] != FILE_FORMAT_VERSION:
        raise _parse_error(path, f"unsupported version {raw['version']!r}")
    if raw["mode"] not in (Mode.FIXED.value, Mode.HOURLY.value):
        raise _parse_error(path, f"mode must be 'fixed' or 'hourly', got {raw['mode']!r}")
    try:
        d = np.asarray(raw["distances"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise _parse_error(path, f"distances must be a numeric [T][m][n] array ({exc})") from exc
    try:
        return Instance(n=raw["n"], m=raw["m"], T=raw["T"], f=raw["f"], g=raw["g"],
                        mode=Mode(raw["mode"]), d=d,
                        infinity_sentinel=raw["infinity_sentinel"])
    except (InvalidInstanceError, TypeError, ValueError) as exc:
        raise _parse_error(path, str(exc)) from exc


def _solution_payload(solution: Solution) -> dict:
    if solution.mode is Mode.FIXED:
        open_field = sorted(solution.openings)
    else:
        open_field = [sorted(s) for s in solution.openings]
    return {
        "mode": solution.mode.value,
        "open": open_field,
        "assignment": solution.assignment.tolist(),
    }


def write_solution(solution: Solution, path: str | os.PathLike) -> None:
    """Write a solution file; ``read_solution`` reproduces it bit-exactly."""
    _dump_canonical(_solution_payload(solution), path)


def read_solution(path: str | os.PathLike) -> Solution:
    """Read a solution file (feasibility against an instance is checked separately)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _parse_error(path, f"cannot read solution file ({exc})") from exc
    if not isinstance(raw, dict):
        raise _parse_error(path, "solution file must contain a JSON object")
    for key in ("mode", "open", "assignment"):
        if key not in raw:
            raise _parse_error(path, f"missing field: {key}")
    mode = raw["mode"]
    if mode not in (Mode.FIXED.value, Mode.HOURLY.value):
        raise _parse_error(path, f"mode must be 'fixed' or 'hourly', got {mode!r}")
    try:
        assignment = np.asarray(raw["assignment"], dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise _parse_error(path, f"assignment must be an integer [T][n] array ({exc})") from exc
    if assignment.ndim != 2:
        raise _parse_error(path, f"assignment must be 2-dimensional, got ndim={assignment.ndim}")
    try:
        if mode == Mode.FIXED.value:
            openings: Openings = frozenset(int(i) for i in raw["open"])
        else:
            openings = tuple(frozenset(int(i) for i in s) for s in raw["open"])
            if len(openings) != assignment.shape[0]:
                raise _parse_error(
                    path, f"hourly 'open' has {len(openings)} steps but assignment has "
                          f"{assignment.shape[0]}")
    except (TypeError, ValueError) as exc:
        raise _parse_error(path, f"'open' field malformed ({exc})") from exc
    return Solution(mode=Mode(mode), openings=openings, assignment=assignment)
