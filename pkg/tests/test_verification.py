import numpy as np

from hallunav.geometry import in_region_g, mirror_turn_point
from hallunav.verification import (random_blocking_triple, run_verification,
                                   sanity_out_of_region_cell, world_for_triple)


def test_random_triples_block_the_base_segment():
    rng = np.random.default_rng(0)
    for _ in range(50):
        t = random_blocking_triple(rng)
        m = mirror_turn_point(t)
        # the wall from the apex to its mirror point must cross the base:
        # the two ends are on opposite sides and the crossing is interior
        bx, by = t.c_g.x - t.c_c.x, t.c_g.y - t.c_c.y
        def side(p):
            return bx * (p.y - t.c_c.y) - by * (p.x - t.c_c.x)
        assert side(t.c_m) * side(m) < 0.0
        assert in_region_g(m, t, 1e-9)


def test_world_for_triple_contains_region():
    rng = np.random.default_rng(1)
    t0 = random_blocking_triple(rng)
    world, t = world_for_triple(t0, 0.025)
    for p in (t.c_c, t.c_m, t.c_g, mirror_turn_point(t)):
        assert world.in_bounds(world.cell_of(p.x, p.y))


def test_small_sweep_passes_and_renders():
    report = run_verification(seed=5, n_triples=3, resolution=0.025)
    assert report.passed
    labels = [c.label for _, c in report.checks]
    assert labels.count("representative") == 3
    text = report.render()
    assert text.endswith("OVERALL PASS\n")
    # one verdict line per obstacle cell
    assert text.count(" cell=") == sum(c.cell_count for _, c in report.checks)
    assert run_verification(seed=5, n_triples=3, resolution=0.025).render() == text


def test_out_of_region_cell_is_flagged():
    assert sanity_out_of_region_cell()
