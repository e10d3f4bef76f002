"""Oracle sweep over random turning triples.

For each seeded random triple the representative blocking segment and one
single-segment member from ``construct_min_member`` are rasterised onto a
fine lattice and checked with the brute-force planner:

  * minimality: removing any single obstacle cell changes the optimum;
  * the post-removal optimum passes within one cell of the removed cell;
  * every obstacle cell centre lies in region G (one cell diagonal slack);
  * the base optimum grazes an ellipse anchor of the set (the turn point or
    its mirror image for the representative segment; the turn point or the
    ellipse exit for a member) and its taut length matches the two-leg
    route length within tolerance.

Triples are sampled so the blocking segment actually separates start from
goal (the apex projects into the interior of the base segment); the mirror
anchor is accepted interchangeably with the turn point because the two
roundings have exactly equal continuous length and the lattice breaks the
tie arbitrarily.  Two-segment members pass through the start or goal
configuration by construction, which makes the lattice planning problem
ill-posed, so the sweep samples member points until a single-segment member
appears; two-segment geometry is exercised by the unit tests instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (Point2, Segment2, TurnTriple, construct_min_member,
                       in_region_g, major_axis_length, mirror_turn_point,
                       representative_min_set)
from .lattice import (LatticeWorld, continuous_shortest_length,
                      rasterize_polyline, verify_definition1)


def random_blocking_triple(rng: np.random.Generator,
                           base_range: tuple[float, float] = (1.0, 1.8),
                           t_range: tuple[float, float] = (0.35, 0.65),
                           h_range: tuple[float, float] = (0.3, 0.55)) -> TurnTriple:
    """Random non-colinear triple whose apex projects strictly inside the
    base segment, so the mirror segment separates the two base endpoints.
    The lateral offset is drawn as a fraction (h_range) of the base length."""
    base = rng.uniform(*base_range)
    ang = rng.uniform(0.0, 2.0 * math.pi)
    t = rng.uniform(*t_range)
    h = rng.uniform(*h_range) * base * (1.0 if rng.random() < 0.5 else -1.0)
    ex, ey = math.cos(ang), math.sin(ang)
    nx, ny = -ey, ex
    c_c = Point2(0.0, 0.0)
    c_g = Point2(base * ex, base * ey)
    c_m = Point2(t * base * ex + h * nx, t * base * ey + h * ny)
    return TurnTriple(c_c, c_m, c_g)


def _ellipse_bbox(triple: TurnTriple) -> tuple[float, float, float, float]:
    a = major_axis_length(triple) / 2.0
    cx = (triple.c_c.x + triple.c_g.x) / 2.0
    cy = (triple.c_c.y + triple.c_g.y) / 2.0
    fx, fy = triple.c_g.x - cx, triple.c_g.y - cy
    c_f = math.hypot(fx, fy)
    b = math.sqrt(max(a * a - c_f * c_f, 0.0))
    ct, st = fx / c_f, fy / c_f
    ex = math.hypot(a * ct, b * st)
    ey = math.hypot(a * st, b * ct)
    return cx - ex, cy - ey, cx + ex, cy + ey


def _shift(triple: TurnTriple, ox: float, oy: float) -> TurnTriple:
    return TurnTriple(Point2(triple.c_c.x + ox, triple.c_c.y + oy),
                      Point2(triple.c_m.x + ox, triple.c_m.y + oy),
                      Point2(triple.c_g.x + ox, triple.c_g.y + oy))


def world_for_triple(triple: TurnTriple, resolution: float,
                     margin: float = 0.3) -> tuple[LatticeWorld, TurnTriple]:
    """Empty lattice that contains the triple's whole ellipse plus a margin,
    with the triple shifted into the world frame (all coordinates positive)."""
    x0, y0, x1, y1 = _ellipse_bbox(triple)
    ox, oy = margin - x0, margin - y0
    width = int(math.ceil((x1 - x0 + 2.0 * margin) / resolution)) + 1
    height = int(math.ceil((y1 - y0 + 2.0 * margin) / resolution)) + 1
    return LatticeWorld.empty(resolution, width, height), _shift(triple, ox, oy)


def sample_point_in_g(triple: TurnTriple, rng: np.random.Generator,
                      max_tries: int = 1000) -> Point2:
    x0, y0, x1, y1 = _ellipse_bbox(triple)
    for _ in range(max_tries):
        p = Point2(rng.uniform(x0, x1), rng.uniform(y0, y1))
        if in_region_g(p, triple, 0.0):
            return p
    raise RuntimeError("failed to sample a point in region G")


def _sample_verifiable_member(triple: TurnTriple, world: LatticeWorld,
                              rng: np.random.Generator,
                              max_tries: int = 200) -> list[Segment2] | None:
    """Sample member sets until one is single-segment and its raster stays
    clear of the start/goal cells (members crossing the base segment right
    next to an endpoint would block the planning problem itself)."""
    start = world.cell_of(triple.c_c.x, triple.c_c.y)
    goal = world.cell_of(triple.c_g.x, triple.c_g.y)
    for _ in range(max_tries):
        c = sample_point_in_g(triple, rng)
        member = construct_min_member(c, triple)
        if len(member) != 1:
            continue
        seg = member[0]
        cells = rasterize_polyline(world, [(seg.a.x, seg.a.y), (seg.b.x, seg.b.y)])
        clear = all(max(abs(x - ex), abs(y - ey)) >= 2
                    for x, y in cells for ex, ey in (start, goal))
        if clear:
            return member
    return None


@dataclass
class SetCheck:
    label: str                  # "representative" or "member"
    cell_count: int
    def1_passed: bool
    prop1_passed: bool          # post-removal optimum near every removed cell
    prop4_passed: bool          # all cell centres inside G
    anchor: str                 # which ellipse anchor the base optimum grazed
    anchor_ok: bool
    taut_len_m: float
    expected_len_m: float
    length_ok: bool
    cell_lines: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.def1_passed and self.prop1_passed and self.prop4_passed
                and self.anchor_ok and self.length_ok)


@dataclass
class VerificationReport:
    seed: int
    resolution: float
    n_triples: int
    checks: list[tuple[int, SetCheck]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for _, c in self.checks)

    def render(self) -> str:
        lines = [f"# verify v1 seed={self.seed} triples={self.n_triples} "
                 f"resolution={self.resolution!r}"]
        for i, c in self.checks:
            lines.append(
                f"triple={i} set={c.label} cells={c.cell_count} "
                f"def1={'PASS' if c.def1_passed else 'FAIL'} "
                f"prop1={'PASS' if c.prop1_passed else 'FAIL'} "
                f"prop4={'PASS' if c.prop4_passed else 'FAIL'} "
                f"anchor={c.anchor} anchor_ok={'Y' if c.anchor_ok else 'N'} "
                f"taut_len={c.taut_len_m:.4f} expected={c.expected_len_m:.4f} "
                f"len={'PASS' if c.length_ok else 'FAIL'}")
            for cl in c.cell_lines:
                lines.append(f"triple={i} set={c.label} {cl}")
        n_pass = sum(1 for _, c in self.checks if c.passed)
        lines.append(f"summary sets={len(self.checks)} passed={n_pass}")
        lines.append("OVERALL " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"


def _near_cell(path_cells, target) -> bool:
    tx, ty = target
    return any(max(abs(x - tx), abs(y - ty)) <= 1 for x, y in path_cells)


def _check_set(world: LatticeWorld, triple: TurnTriple, polyline_pts,
               anchors: dict[str, Point2], label: str,
               length_tol: float = 0.03) -> SetCheck:
    cells = rasterize_polyline(world, polyline_pts)
    start = world.cell_of(triple.c_c.x, triple.c_c.y)
    goal = world.cell_of(triple.c_g.x, triple.c_g.y)
    segments = list(zip(polyline_pts[:-1], polyline_pts[1:]))
    report = verify_definition1(world, cells, start, goal, segments,
                                ((triple.c_c.x, triple.c_c.y),
                                 (triple.c_g.x, triple.c_g.y)))
    prop1 = all(c.optimum_near_cell for c in report.checks)
    diag = math.sqrt(2.0) * world.resolution
    prop4 = all(in_region_g(Point2(*world.cell_center(c)), triple, diag)
                for c in cells)
    anchor_name, anchor_ok = "none", False
    for name, pt in anchors.items():
        if _near_cell(report.base.cells, world.cell_of(pt.x, pt.y)):
            anchor_name, anchor_ok = name, True
            break
    expected = major_axis_length(triple)
    blocked_world = LatticeWorld(world.resolution, world.width, world.height,
                                 world.blocked.copy())
    for ix, iy in cells:
        blocked_world.blocked[iy, ix] = True
    taut = continuous_shortest_length(blocked_world,
                                      (triple.c_c.x, triple.c_c.y),
                                      (triple.c_g.x, triple.c_g.y),
                                      bend_near=[cells[0], cells[-1]])
    length_ok = abs(taut - expected) <= length_tol * expected
    return SetCheck(label, len(cells), report.passed, prop1, prop4,
                    anchor_name, anchor_ok, taut, expected, length_ok,
                    report.lines())


def run_verification(seed: int, n_triples: int = 20,
                     resolution: float = 0.025) -> VerificationReport:
    report = VerificationReport(seed, resolution, n_triples)
    for i in range(n_triples):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                           spawn_key=(i,)))
        triple = random_blocking_triple(rng)
        world, t = world_for_triple(triple, resolution)
        wall = representative_min_set(t)
        anchors = {"c_m": t.c_m, "c_m_mirror": mirror_turn_point(t)}
        report.checks.append(
            (i, _check_set(world, t, [(wall.a.x, wall.a.y), (wall.b.x, wall.b.y)],
                           anchors, "representative")))
        member = _sample_verifiable_member(t, world, rng)
        if member is not None:
            seg = member[0]
            anchors = {"c_m": t.c_m, "c_e": seg.b}
            report.checks.append(
                (i, _check_set(world, t, [(seg.a.x, seg.a.y), (seg.b.x, seg.b.y)],
                               anchors, "member")))
    return report


def sanity_out_of_region_cell(seed: int = 0, resolution: float = 0.025) -> bool:
    """Adding one cell far outside G to the representative set must make the
    minimality check fail at that cell (its removal changes nothing)."""
    rng = np.random.default_rng(seed)
    triple = random_blocking_triple(rng)
    world, t = world_for_triple(triple, resolution, margin=0.6)
    wall = representative_min_set(t)
    cells = rasterize_polyline(world, [(wall.a.x, wall.a.y), (wall.b.x, wall.b.y)])
    far = (2, 2)  # margin corner, well outside the ellipse
    report = verify_definition1(world, cells + [far],
                                world.cell_of(t.c_c.x, t.c_c.y),
                                world.cell_of(t.c_g.x, t.c_g.y))
    by_cell = {c.cell: c for c in report.checks}
    return (not by_cell[far].passed) and not report.passed
