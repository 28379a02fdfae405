import logging

import numpy as np
import pytest

import dynfl as dl
from dynfl.generators import GeneratorSpec
from dynfl.model import COST_TOL


def triangle_holds(d_snapshot, tol=1e-9):
    M = d_snapshot
    via = (M[:, :, None] + M[None, :, :]).min(axis=1)
    return bool(np.all(M <= via + tol))


def test_classroom_dimensions_and_rover_row():
    inst = dl.gen_classroom(5, 4, 10, intra=0.0, inter=1e3)
    assert (inst.n, inst.m, inst.T) == (21, 21, 10)
    assert inst.d.shape == (10, 21, 21)
    rover = 20
    # at t=1 the rover sits with group 1 (clients 4..7)
    row = inst.d[0, rover, :rover]
    assert np.all(row[4:8] == 0.0)
    assert np.all(np.delete(row, np.s_[4:8]) == 1e3)
    assert inst.d[0, rover, rover] == 0.0


def test_classroom_cycles_through_groups():
    inst = dl.gen_classroom(3, 1, 6, intra=0.0, inter=5.0)
    rover = 3
    visited = [int(np.argmin(inst.d[t, rover, :rover])) for t in range(6)]
    assert visited == [1, 2, 0, 1, 2, 0]


def test_classroom_and_crossing_are_metric():
    for inst in (dl.gen_classroom(3, 2, 4, intra=0.5, inter=7.0),
                 dl.gen_crossing(3, 5, step=10.0)):
        for t in range(inst.T):
            snap = inst.d[t]
            assert np.allclose(snap, snap.T)
            assert np.all(np.diag(snap) == 0.0)
            assert triangle_holds(snap)


def test_classroom_rejects_bad_parameters():
    with pytest.raises(dl.InvalidInstanceError):
        dl.gen_classroom(1, 2, 3)
    with pytest.raises(dl.InvalidInstanceError):
        dl.gen_classroom(2, 2, 3, intra=2.0, inter=1.0)


def test_crossing_groups_coincide_at_midpoint():
    inst = dl.gen_crossing(3, 5, step=10.0)
    assert np.all(inst.d[2] == 0.0)  # t = 3 = (T+1)/2
    assert np.any(inst.d[0] > 0.0)
    # group distance matches the position gap at t=1: |1*10 - 5*10|
    assert inst.d[0, 0, 3] == pytest.approx(40.0)


def test_gadget_structure():
    inst = dl.gen_setcover_gadget(3, [[1, 2], [2, 3], [3]], f=1.0)
    assert (inst.n, inst.m, inst.T, inst.g) == (1, 3, 3, 0.0)
    assert inst.mode is dl.Mode.FIXED
    members = inst.d[:, :, 0] == 0.0
    assert members.T.tolist() == [[True, True, False],
                                  [False, True, True],
                                  [False, False, True]]
    assert np.all((inst.d == 0.0) | (inst.d == inst.infinity_sentinel))


def test_gadget_whole_universe_set_costs_f():
    inst = dl.gen_setcover_gadget(4, [[1, 2, 3, 4]], f=2.5)
    _, bd = dl.exact_fixed(inst)
    assert bd.total == pytest.approx(2.5, abs=COST_TOL)


def test_gadget_noncover_pays_sentinel():
    inst = dl.gen_setcover_gadget(3, [[1, 2], [2, 3], [3]], f=1.0)
    sol = dl.Solution(mode=dl.Mode.FIXED, openings={0}, assignment=np.zeros((3, 1), int))
    total = dl.evaluate_cost(inst, sol).total
    assert total > inst.f * inst.m * inst.T  # dominated by any actual cover


def test_gadget_flags_uncovered_elements(caplog):
    with caplog.at_level(logging.WARNING, logger="dynfl.generators"):
        dl.gen_setcover_gadget(3, [[1]], f=1.0)
    assert any("uncovered" in rec.message for rec in caplog.records)


def test_random_walk_is_seed_deterministic():
    a = dl.gen_random_walk(4, 3, 6, step=0.2, seed=11)
    b = dl.gen_random_walk(4, 3, 6, step=0.2, seed=11)
    assert np.array_equal(a.d, b.d)
    c = dl.gen_random_walk(4, 3, 6, step=0.2, seed=12)
    assert not np.array_equal(a.d, c.d)


def test_random_walk_unit_square_distances():
    inst = dl.gen_random_walk(5, 4, 8, step=0.5, seed=2)
    assert float(inst.d.max()) <= np.sqrt(2.0) + 1e-12
    assert float(inst.d.min()) >= 0.0


def test_random_walk_zero_step_never_switches():
    inst = dl.gen_random_walk(3, 3, 4, step=0.0, f=1.0, g=0.5, seed=21)
    assert all(np.array_equal(inst.d[0], inst.d[t]) for t in range(inst.T))
    _, bd = dl.exact_fixed(inst)
    assert bd.switching == 0.0


def test_generated_instances_validate():
    # construction runs the full model validation; re-check one round trip
    for inst in (dl.gen_classroom(2, 1, 3), dl.gen_crossing(2, 4),
                 dl.gen_setcover_gadget(2, [[1], [2]]),
                 dl.gen_random_walk(2, 2, 3, seed=0)):
        assert inst.infinity_sentinel > inst.f * inst.m * inst.T + inst.g * inst.n * inst.T
        assert float(inst.d.max()) <= inst.infinity_sentinel


def test_generator_spec_dispatch():
    inst = GeneratorSpec(kind="random-walk",
                         params={"n": 2, "m": 2, "T": 3, "step": 0.1},
                         seed=5).build()
    assert (inst.n, inst.m, inst.T) == (2, 2, 3)
    same = GeneratorSpec(kind="random-walk",
                         params={"n": 2, "m": 2, "T": 3, "step": 0.1, "seed": 5}).build()
    assert np.array_equal(inst.d, same.d)
    with pytest.raises(dl.InvalidInstanceError):
        GeneratorSpec(kind="voronoi").build()
