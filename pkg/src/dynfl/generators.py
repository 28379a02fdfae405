"""Instance generators: structured examples and randomized test instances.

All generators return fully validated :class:`~dynfl.model.Instance` objects
and are deterministic (the random-walk family is seeded).  Facilities are
co-located with clients in the classroom and crossing families, i.e. facility
``i`` sits at client ``i``'s position and ``m = n``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .model import Instance, InvalidInstanceError, Mode, default_sentinel

logger = logging.getLogger(__name__)


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise InvalidInstanceError(message)


def gen_classroom(groups: int, group_size: int, horizon: int, intra: float = 0.0,
                  inter: float = 1e3, f: float = 1.0, g: float = 1.0) -> Instance:
    """Groups of co-located clients plus one roving client.

    ``groups * group_size`` clients sit in fixed groups (pairwise distance
    ``intra`` inside a group, ``inter`` across groups).  One extra client (the
    last index) visits group ``t mod groups`` at step ``t``: distance ``intra``
    to that group's members and ``inter`` to everyone else.  A facility can be
    opened at every client.
    """
    _check(groups >= 2, "groups must be >= 2")
    _check(group_size >= 1, "group size must be >= 1")
    _check(horizon >= 1, "horizon must be >= 1")
    _check(inter > intra >= 0, "need inter > intra >= 0")
    n = groups * group_size + 1
    rover = n - 1
    group_of = np.repeat(np.arange(groups), group_size)
    base = np.where(group_of[:, None] == group_of[None, :], intra, inter)
    np.fill_diagonal(base, 0.0)
    d = np.empty((horizon, n, n))
    for t0 in range(horizon):
        cur = (t0 + 1) % groups
        snap = np.full((n, n), inter)
        snap[:rover, :rover] = base
        rover_row = np.where(group_of == cur, intra, inter)
        snap[rover, :rover] = rover_row
        snap[:rover, rover] = rover_row
        snap[rover, rover] = 0.0
        d[t0] = snap
    sentinel = default_sentinel(n, n, horizon, f, g, float(d.max()))
    return Instance(n=n, m=n, T=horizon, f=f, g=g, mode=Mode.FIXED, d=d,
                    infinity_sentinel=sentinel)


def gen_crossing(group_size: int, horizon: int, step: float = 10.0,
                 f: float = 1.0, g: float = 1.0) -> Instance:
    """Two co-located groups walking toward and past each other on a line.

    Group one sits at ``t * step`` and group two at ``(T + 1 - t) * step`` at
    step ``t``; they coincide at ``t = (T + 1) / 2`` when ``T`` is odd.
    Distances are absolute position differences; facilities are co-located
    with clients.
    """
    _check(group_size >= 1, "group size must be >= 1")
    _check(horizon >= 2, "horizon must be >= 2")
    _check(step > 0, "step must be positive")
    n = 2 * group_size
    group2 = np.arange(n) >= group_size
    d = np.empty((horizon, n, n))
    for t0 in range(horizon):
        t = t0 + 1
        pos = np.where(group2, (horizon + 1 - t) * step, t * step)
        d[t0] = np.abs(pos[:, None] - pos[None, :])
    sentinel = default_sentinel(n, n, horizon, f, g, float(d.max()))
    return Instance(n=n, m=n, T=horizon, f=f, g=g, mode=Mode.FIXED, d=d,
                    infinity_sentinel=sentinel)


def gen_setcover_gadget(universe: int, sets: list, f: float = 1.0) -> Instance:
    """Covering gadget: one step per element, one facility per candidate set.

    A single client must be served at every step; facility ``i`` is at
    distance 0 at step ``t`` when set ``i`` contains element ``t`` (elements
    are 1-based) and at the infinity sentinel otherwise, with ``g = 0``.  Any
    finite-cost open set is therefore exactly a cover, and the optimum cost is
    ``f`` times the minimum cover size.  An uncovered element makes the
    instance infeasible by design; it is allowed but logged.
    """
    _check(universe >= 1, "universe must be >= 1")
    _check(len(sets) >= 1, "at least one set required")
    sets = [frozenset(int(e) for e in s) for s in sets]
    for idx, s in enumerate(sets):
        _check(len(s) >= 1, f"set {idx} is empty")
        _check(all(1 <= e <= universe for e in s),
               f"set {idx} has elements outside 1..{universe}")
    covered = frozenset().union(*sets)
    if len(covered) < universe:
        missing = sorted(set(range(1, universe + 1)) - covered)
        logger.warning("gadget leaves elements %s uncovered: every solution "
                       "will pay the infinity sentinel", missing)
    m, T = len(sets), universe
    sentinel = default_sentinel(1, m, T, f, 0.0)
    d = np.full((T, m, 1), sentinel)
    for i, s in enumerate(sets):
        for e in s:
            d[e - 1, i, 0] = 0.0
    return Instance(n=1, m=m, T=T, f=f, g=0.0, mode=Mode.FIXED, d=d,
                    infinity_sentinel=sentinel)


def _fold_unit(p: np.ndarray) -> np.ndarray:
    # Reflect arbitrary coordinates into [0, 1].
    q = np.mod(p, 2.0)
    return np.where(q > 1.0, 2.0 - q, q)


def gen_random_walk(n: int, m: int, T: int, step: float = 0.1, f: float = 1.0,
                    g: float = 1.0, seed: int = 0,
                    mode: Mode = Mode.FIXED) -> Instance:
    """Clients and facilities on independent reflected walks in the unit square.

    Each point starts uniformly in the square and adds a uniform increment in
    ``[-step, step]^2`` per time step, reflected at the boundary; distances
    are Euclidean.  Deterministic for a given seed.
    """
    _check(n >= 1 and m >= 1 and T >= 1, "n, m, T must be >= 1")
    _check(step >= 0, "step must be >= 0")
    rng = np.random.default_rng(seed)
    clients = rng.uniform(0.0, 1.0, size=(n, 2))
    facilities = rng.uniform(0.0, 1.0, size=(m, 2))
    d = np.empty((T, m, n))
    for t0 in range(T):
        if t0 > 0:
            clients = _fold_unit(clients + rng.uniform(-step, step, size=(n, 2)))
            facilities = _fold_unit(facilities + rng.uniform(-step, step, size=(m, 2)))
        diff = facilities[:, None, :] - clients[None, :, :]
        d[t0] = np.sqrt((diff ** 2).sum(axis=2))
    sentinel = default_sentinel(n, m, T, f, g, float(d.max()))
    return Instance(n=n, m=m, T=T, f=f, g=g, mode=Mode(mode), d=d,
                    infinity_sentinel=sentinel)


@dataclass(frozen=True)
class GeneratorSpec:
    """A named generator plus its parameters; ``build()`` produces the instance."""

    kind: str  # classroom | crossing | setcover | random-walk
    params: dict = field(default_factory=dict)
    seed: int | None = None

    _BUILDERS = {
        "classroom": gen_classroom,
        "crossing": gen_crossing,
        "setcover": gen_setcover_gadget,
        "random-walk": gen_random_walk,
    }

    def build(self) -> Instance:
        try:
            builder = self._BUILDERS[self.kind]
        except KeyError:
            raise InvalidInstanceError(f"unknown generator kind {self.kind!r}") from None
        params = dict(self.params)
        if self.seed is not None:
            params["seed"] = self.seed
        return builder(**params)
