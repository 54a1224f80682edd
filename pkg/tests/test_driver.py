import math

import numpy as np
import pytest

from errwlab.cycles import make_cycle
from errwlab.driver import (
    Driver,
    delay_first_departure,
    first_visit_jump,
    make_random_driver,
    run_driven_walk,
)

G4 = make_cycle(4)
G6 = make_cycle(6)


def test_driver_validation():
    with pytest.raises(ValueError):
        Driver.build([(1.0,), (1.0,)], 0)  # too few lines
    with pytest.raises(ValueError):
        Driver.build([(1.0,), (0.0,), (1.0,)], 0)  # nonpositive gap
    with pytest.raises(ValueError):
        Driver.build([(1.0,), (math.inf,), (1.0,)], 0)
    with pytest.raises(ValueError):
        Driver.build([(1.0,), (1.0,), (1.0,)], 3)  # start out of range
    with pytest.raises(ValueError):
        Driver.build([(1.0,)] * 3, 0, tail_mass=(0.0, -1.0, 0.0))


def test_driver_json_round_trip():
    d = Driver.build(
        [(0.5, 0.2), (0.6,), (5.0,), (1.0, 2.0)], 1, tail_mass=(0.1, 0, 0, 0.3)
    )
    clone = Driver.from_json(d.to_json())
    assert clone == d
    assert math.isclose(clone.line_total(0), 0.8, rel_tol=1e-12)
    with pytest.raises(ValueError):
        Driver.from_dict({"gap_lists": [[1.0]] * 3, "start_vertex": 0, "x": 1})


def test_random_driver_is_reproducible():
    a = make_random_driver(4, 10, np.random.default_rng(5))
    b = make_random_driver(4, 10, np.random.default_rng(5))
    assert a == b
    assert all(len(g) == 10 for g in a.gap_lists)
    assert all(g > 0 for gaps in a.gap_lists for g in gaps)


def test_driven_walk_boundary_equals_incidence_image():
    # The boundary vector is accumulated from line erosion, independently
    # of the occupation vector; they must be linked by the incidence map.
    for seed in range(5):
        d = make_random_driver(4, 15, np.random.default_rng(seed))
        result = run_driven_walk(d, G4, 40)
        assert result.report.incidence_residual() < 1e-12


def test_driven_walk_is_deterministic():
    d = make_random_driver(6, 12, np.random.default_rng(8))
    a = run_driven_walk(d, G6, 30)
    b = run_driven_walk(d, G6, 30)
    assert np.array_equal(a.run.edges, b.run.edges)
    assert np.array_equal(a.report.occupation, b.report.occupation)


def test_first_visit_jump():
    d = Driver.build([(0.5, 0.2, 0.9), (0.6,), (5.0,), (1.0, 2.0)], 0)
    run = run_driven_walk(d, G4, 10).run
    # Path 0 -> 1 -> 0 -> 3 from the hand-traced fixture.
    assert first_visit_jump(run, 0) == 0
    assert first_visit_jump(run, 1) == 1
    assert first_visit_jump(run, 3) == 3
    assert first_visit_jump(run, 2) is None


def test_delay_shifts_occupation_by_exactly_r():
    d = Driver.build([(0.5, 0.2, 0.9), (0.6,), (5.0,), (1.0, 2.0)], 0)
    base = run_driven_walk(d, G4, 10)
    for vertex in (0, 1, 3):
        for r in (0.25, 1.0):
            bumped = delay_first_departure(d, G4, vertex, r, base.run)
            pert = run_driven_walk(bumped, G4, 10)
            diff = np.asarray(pert.report.occupation) - np.asarray(
                base.report.occupation
            )
            expect = np.zeros(4)
            expect[vertex] = r
            assert np.allclose(diff, expect, atol=1e-12)


def test_delay_of_unvisited_vertex_changes_nothing():
    # Line 2 needs a second gap: the never-reached case bumps the right
    # line one past its consumed prefix, which must exist in the list.
    d = Driver.build([(0.5, 0.2, 0.9), (0.6,), (5.0, 5.0), (1.0, 2.0)], 0)
    base = run_driven_walk(d, G4, 10)
    bumped = delay_first_departure(d, G4, 2, 0.7, base.run)
    assert bumped != d  # gaps did move, the dynamics just never see them
    pert = run_driven_walk(bumped, G4, 10)
    diff = np.asarray(pert.report.occupation) - np.asarray(
        base.report.occupation
    )
    assert np.all(diff == 0.0)
    assert np.array_equal(pert.run.edges, base.run.edges)


def test_delay_start_vertex_bumps_first_gaps():
    d = Driver.build([(0.5,), (0.6,), (5.0,), (1.0,)], 0)
    base = run_driven_walk(d, G4, 4)
    bumped = delay_first_departure(d, G4, 0, 0.3, base.run)
    # Start vertex: gap 0 of both incident lines (3 and 0) grows by r.
    assert math.isclose(bumped.gap_lists[0][0], 0.8, rel_tol=1e-12)
    assert math.isclose(bumped.gap_lists[3][0], 1.3, rel_tol=1e-12)
    assert bumped.gap_lists[1] == d.gap_lists[1]
    assert bumped.gap_lists[2] == d.gap_lists[2]


def test_delay_requires_positive_amount():
    d = make_random_driver(4, 5, np.random.default_rng(0))
    base = run_driven_walk(d, G4, 10)
    with pytest.raises(ValueError):
        delay_first_departure(d, G4, 0, 0.0, base.run)


def test_delay_distributes_over_repeated_application():
    # Delaying by r twice at the same vertex equals delaying by 2r.
    d = make_random_driver(4, 12, np.random.default_rng(3))
    base = run_driven_walk(d, G4, 25)
    once = delay_first_departure(d, G4, 1, 0.2, base.run)
    base_once = run_driven_walk(once, G4, 25)
    twice = delay_first_departure(once, G4, 1, 0.2, base_once.run)
    direct = delay_first_departure(d, G4, 1, 0.4, base.run)
    for a, b in zip(twice.gap_lists, direct.gap_lists):
        assert np.allclose(a, b, rtol=1e-12)
