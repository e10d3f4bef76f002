import math

import numpy as np
import pytest

from hallunav.geometry import Point2, TurnTriple, representative_min_set
from hallunav.lattice import (LatticeWorld, PathNotFound, SQRT2,
                              continuous_shortest_length, distance_field,
                              rasterize_polyline, rasterize_segment,
                              shortest_path, verify_definition1,
                              verify_goes_through, _segment_clip_cell)

STEPS = ((1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
         (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2))


def bellman_ford_lengths(world, source):
    """Independent oracle: relax edges to a fixpoint, no heap, no heuristic."""
    dist = np.full((world.height, world.width), np.inf)
    dist[source[1], source[0]] = 0.0
    blocked = world.blocked
    changed = True
    while changed:
        changed = False
        for cy in range(world.height):
            for cx in range(world.width):
                if blocked[cy, cx] or not np.isfinite(dist[cy, cx]):
                    continue
                for dx, dy, cost in STEPS:
                    nx, ny = cx + dx, cy + dy
                    if not (0 <= nx < world.width and 0 <= ny < world.height):
                        continue
                    if blocked[ny, nx]:
                        continue
                    if dx and dy and (blocked[cy, nx] or blocked[ny, cx]):
                        continue
                    nd = dist[cy, cx] + cost
                    if nd < dist[ny, nx] - 1e-12:
                        dist[ny, nx] = nd
                        changed = True
    return dist


def test_straight_row():
    w = LatticeWorld.empty(1.0, 5, 5)
    p = shortest_path(w, (0, 2), (4, 2))
    assert p.length_units == pytest.approx(4.0)
    assert p.cells == [(0, 2), (1, 2), (2, 2), (3, 2), (4, 2)]


def test_blocked_column_unreachable():
    w = LatticeWorld.empty(1.0, 5, 5)
    w.blocked[:, 2] = True
    assert shortest_path(w, (0, 2), (4, 2)) is None


def test_single_cell_detour_length():
    w = LatticeWorld.empty(1.0, 5, 5)
    w.blocked[2, 2] = True
    p = shortest_path(w, (0, 2), (4, 2))
    # cross-checked against the exhaustive relaxation oracle
    oracle = bellman_ford_lengths(w, (0, 2))[2, 4]
    assert p.length_units == pytest.approx(oracle, abs=1e-9)
    assert p.length_units == pytest.approx(2 + 2 * SQRT2, abs=1e-9)


def test_invalid_endpoints_rejected():
    w = LatticeWorld.empty(1.0, 5, 5)
    w.blocked[2, 2] = True
    with pytest.raises(ValueError):
        shortest_path(w, (2, 2), (4, 2))
    with pytest.raises(ValueError):
        shortest_path(w, (0, 0), (9, 9))


def test_optimality_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    for _ in range(12):
        n = int(rng.integers(5, 13))
        w = LatticeWorld.empty(1.0, n, n)
        w.blocked = rng.random((n, n)) < 0.25
        free = np.argwhere(~w.blocked)
        if len(free) < 2:
            continue
        s = tuple(free[rng.integers(len(free))][::-1])
        g = tuple(free[rng.integers(len(free))][::-1])
        oracle = bellman_ford_lengths(w, s)
        p = shortest_path(w, s, g)
        if not np.isfinite(oracle[g[1], g[0]]):
            assert p is None
        else:
            assert p.length_units == pytest.approx(oracle[g[1], g[0]], abs=1e-9)
        field = distance_field(w, s)
        assert np.allclose(field, oracle, atol=1e-9, equal_nan=False)


def test_monotone_under_extra_blocking():
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = LatticeWorld.empty(1.0, 9, 9)
        w.blocked = rng.random((9, 9)) < 0.2
        w.blocked[0, 0] = w.blocked[8, 8] = False
        before = shortest_path(w, (0, 0), (8, 8))
        cand = np.argwhere(~w.blocked)
        cx, cy = cand[rng.integers(len(cand))][::-1]
        if (cx, cy) in ((0, 0), (8, 8)):
            continue
        w.blocked[cy, cx] = True
        after = shortest_path(w, (0, 0), (8, 8))
        if before is None:
            assert after is None
        elif after is not None:
            assert after.length_units >= before.length_units - 1e-9


def test_deterministic_repetition():
    rng = np.random.default_rng(2)
    w = LatticeWorld.empty(1.0, 12, 12)
    w.blocked = rng.random((12, 12)) < 0.2
    w.blocked[0, 0] = w.blocked[11, 11] = False
    p1 = shortest_path(w, (0, 0), (11, 11))
    p2 = shortest_path(w, (0, 0), (11, 11))
    assert (p1 is None) == (p2 is None)
    if p1 is not None:
        assert p1.cells == p2.cells


def test_raster_chain_properties():
    w = LatticeWorld.empty(0.025, 100, 100)
    rng = np.random.default_rng(3)
    for _ in range(30):
        p0 = tuple(rng.uniform(0.2, 2.3, 2))
        p1 = tuple(rng.uniform(0.2, 2.3, 2))
        if math.dist(p0, p1) < 0.05:
            continue
        cells = rasterize_segment(w, p0, p1)
        assert cells[0] == w.cell_of(*p0)
        assert cells[-1] == w.cell_of(*p1)
        for a, b in zip(cells[:-1], cells[1:]):
            assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1
        for cell in cells:
            assert _segment_clip_cell(p0, p1, cell, 0.025) is not None


CANON = TurnTriple(Point2(0.55, 1.55), Point2(1.55, 2.55), Point2(2.55, 1.55))


def _canonical_setup():
    # 41x41 lattice that contains the canonical triple and its ellipse
    world = LatticeWorld.empty(0.075, 41, 41)
    wall = representative_min_set(CANON)
    cells = rasterize_polyline(world, [(wall.a.x, wall.a.y), (wall.b.x, wall.b.y)])
    start = world.cell_of(CANON.c_c.x, CANON.c_c.y)
    goal = world.cell_of(CANON.c_g.x, CANON.c_g.y)
    segs = [((wall.a.x, wall.a.y), (wall.b.x, wall.b.y))]
    ends = ((CANON.c_c.x, CANON.c_c.y), (CANON.c_g.x, CANON.c_g.y))
    return world, cells, start, goal, segs, ends


def test_definition1_representative_wall_passes():
    world, cells, start, goal, segs, ends = _canonical_setup()
    report = verify_definition1(world, cells, start, goal, segs, ends)
    assert report.passed
    assert all(c.optimum_near_cell for c in report.checks)
    assert len(report.lines()) == len(cells) + 1


def test_definition1_flags_cell_outside_region():
    world, cells, start, goal, segs, ends = _canonical_setup()
    report = verify_definition1(world, cells + [(2, 2)], start, goal, segs, ends)
    assert not report.passed
    verdicts = {c.cell: c.passed for c in report.checks}
    assert verdicts[(2, 2)] is False
    assert all(ok for cell, ok in verdicts.items() if cell != (2, 2))


def test_definition1_empty_set_passes_vacuously():
    world, _, start, goal, _, _ = _canonical_setup()
    report = verify_definition1(world, [], start, goal)
    assert report.passed and report.checks == []


def test_definition1_propagates_unreachable():
    w = LatticeWorld.empty(1.0, 5, 5)
    wall = [(2, y) for y in range(5)]
    with pytest.raises(PathNotFound):
        verify_definition1(w, wall, (0, 2), (4, 2))


def test_goes_through_wall_cells():
    world, cells, start, goal, _, _ = _canonical_setup()
    mid = cells[len(cells) // 2]
    assert verify_goes_through(world, cells, mid, start, goal)
    # the first raster cell is the one anchored at the turn point
    anchor = cells[0]
    assert abs((anchor[0] + 0.5) * 0.075 - CANON.c_m.x) <= 0.075
    assert abs((anchor[1] + 0.5) * 0.075 - CANON.c_m.y) <= 0.075
    assert verify_goes_through(world, cells, anchor, start, goal)
    # removing the anchor cell also strictly shortens the optimum
    full = world.blocked.copy()
    for ix, iy in cells:
        full[iy, ix] = True
    from hallunav.lattice import LatticeWorld as LW
    blocked_world = LW(world.resolution, world.width, world.height, full)
    base = shortest_path(blocked_world, start, goal)
    full[anchor[1], anchor[0]] = False
    alt = shortest_path(blocked_world, start, goal)
    assert alt.length_units < base.length_units - 1e-9


def test_goes_through_mostly_false_for_thick_blob_interior():
    # a non-minimal obstacle: removing an interior cell changes nothing
    w = LatticeWorld.empty(1.0, 21, 21)
    blob = [(x, y) for x in range(8, 13) for y in range(8, 13)]
    assert not verify_goes_through(w, blob, (10, 10), (0, 10), (20, 10))
    report = verify_definition1(w, blob, (0, 10), (20, 10))
    assert not report.passed


def test_continuous_length_straight_and_around():
    w = LatticeWorld.empty(0.1, 20, 20)
    s, g = (0.35, 0.55), (1.85, 0.55)
    assert continuous_shortest_length(w, s, g) == pytest.approx(1.5, abs=1e-9)
    w.blocked[0:8, 10] = True  # wall x in [1.0, 1.1], y in [0.0, 0.8]
    # taut route grazes both top corners of the wall; by-hand optimum
    expect = (math.dist(s, (1.0, 0.8)) + math.dist((1.0, 0.8), (1.1, 0.8))
              + math.dist((1.1, 0.8), g))
    got = continuous_shortest_length(w, s, g, bend_near=[(10, 0), (10, 7)])
    assert got == pytest.approx(expect, abs=1e-3)
    assert got >= math.dist(s, g)
