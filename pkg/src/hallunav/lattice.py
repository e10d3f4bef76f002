"""Brute-force shortest paths on a fine occupancy lattice.

This is the independent oracle used to check, on rasterised instances, that
an obstacle set is minimal: removing any single cell must change the
optimum.  Movement is 8-connected with straight moves costing one
resolution and diagonal moves sqrt(2) resolutions.  A diagonal move is
allowed only when both adjacent orthogonal cells are free, so a thin
rasterised wall cannot be slipped through at a corner.

The per-cell minimality verdict has three tiers.  (1) The freed-cell
optimum is strictly shorter in the lattice metric, computed exactly from
two Dijkstra distance fields.  (2) The re-planned route differs under the
deterministic tie-break.  (3) When the lattice is inconclusive (its metric
overestimates Euclidean lengths by a route-dependent factor of up to ~8%,
which near the wall ends can swamp the O(resolution) true gain), a
continuum witness decides: the best two-leg route bending inside the freed
cell's piece of the continuous source segment is measured against the best
route around either segment end.  Both are plain metric computations on
the obstacle geometry.

Cells are (ix, iy) pairs; the blocked array is indexed [iy, ix].
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

SQRT2 = math.sqrt(2.0)

_STEPS = (
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2),
)

Cell = tuple[int, int]


class PathNotFound(RuntimeError):
    """Start and goal are not connected in the given world."""


@dataclass
class LatticeWorld:
    resolution: float
    width: int
    height: int
    blocked: np.ndarray  # bool, shape (height, width)

    def __post_init__(self) -> None:
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        if self.blocked.shape != (self.height, self.width):
            raise ValueError("blocked array shape mismatch")

    @classmethod
    def empty(cls, resolution: float, width: int, height: int) -> "LatticeWorld":
        return cls(resolution, width, height,
                   np.zeros((height, width), dtype=bool))

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def cell_center(self, cell: Cell) -> tuple[float, float]:
        return ((cell[0] + 0.5) * self.resolution,
                (cell[1] + 0.5) * self.resolution)

    def cell_of(self, x: float, y: float) -> Cell:
        return (int(math.floor(x / self.resolution)),
                int(math.floor(y / self.resolution)))


@dataclass
class LatticePath:
    cells: list[Cell]
    length_units: float  # in resolutions; metres = length_units * resolution
    resolution: float

    @property
    def length_m(self) -> float:
        return self.length_units * self.resolution

    def points(self) -> list[tuple[float, float]]:
        r = self.resolution
        return [((ix + 0.5) * r, (iy + 0.5) * r) for ix, iy in self.cells]


def _octile(ax: int, ay: int, bx: int, by: int) -> float:
    dx, dy = abs(ax - bx), abs(ay - by)
    return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)


def shortest_path(world: LatticeWorld, start: Cell, goal: Cell) -> LatticePath | None:
    """Minimum-length 8-connected path, or None when unreachable.

    Deterministic: ties are broken lexicographically by (f-cost, h-cost,
    cell index).  Raises ValueError when start or goal is out of bounds or
    blocked.
    """
    blocked = world.blocked
    w, h = world.width, world.height
    for name, cell in (("start", start), ("goal", goal)):
        if not world.in_bounds(cell):
            raise ValueError(f"{name} cell {cell} out of bounds")
        if blocked[cell[1], cell[0]]:
            raise ValueError(f"{name} cell {cell} is blocked")

    g = np.full((h, w), np.inf)
    parent = np.full((h, w), -1, dtype=np.int64)
    closed = np.zeros((h, w), dtype=bool)
    sx, sy = start
    gx, gy = goal
    g[sy, sx] = 0.0
    h0 = _octile(sx, sy, gx, gy)
    heap = [(h0, h0, sy * w + sx, sx, sy)]
    while heap:
        _, _, _, cx, cy = heapq.heappop(heap)
        if closed[cy, cx]:
            continue
        closed[cy, cx] = True
        if (cx, cy) == goal:
            break
        gc = g[cy, cx]
        for dx, dy, cost in _STEPS:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h):
                continue
            if blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0 and (blocked[cy, nx] or blocked[ny, cx]):
                continue  # no corner cutting
            ng = gc + cost
            if ng < g[ny, nx]:
                g[ny, nx] = ng
                parent[ny, nx] = cy * w + cx
                hn = _octile(nx, ny, gx, gy)
                heapq.heappush(heap, (ng + hn, hn, ny * w + nx, nx, ny))
    if not closed[gy, gx]:
        return None
    cells = [goal]
    while cells[-1] != start:
        p = parent[cells[-1][1], cells[-1][0]]
        cells.append((int(p % w), int(p // w)))
    cells.reverse()
    return LatticePath(cells, float(g[gy, gx]), world.resolution)


def distance_field(world: LatticeWorld, source: Cell) -> np.ndarray:
    """Dijkstra distances (in resolution units) from source to every free
    cell, np.inf where unreachable.  Same movement rule as shortest_path."""
    blocked = world.blocked
    w, h = world.width, world.height
    if not world.in_bounds(source) or blocked[source[1], source[0]]:
        raise ValueError(f"source cell {source} invalid")
    dist = np.full((h, w), np.inf)
    dist[source[1], source[0]] = 0.0
    heap = [(0.0, source[1] * w + source[0], source[0], source[1])]
    while heap:
        d, _, cx, cy = heapq.heappop(heap)
        if d > dist[cy, cx]:
            continue
        for dx, dy, cost in _STEPS:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h):
                continue
            if blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0 and (blocked[cy, nx] or blocked[ny, cx]):
                continue
            nd = d + cost
            if nd < dist[ny, nx]:
                dist[ny, nx] = nd
                heapq.heappush(heap, (nd, ny * w + nx, nx, ny))
    return dist


def traverse_cells(resolution: float, p0: tuple[float, float],
                   p1: tuple[float, float]) -> list[Cell]:
    """All cells the segment from p0 to p1 passes through (supercover grid
    march); at an exact corner crossing the two side cells are included
    too."""
    inv = 1.0 / resolution
    x, y = p0[0] * inv, p0[1] * inv
    x1, y1 = p1[0] * inv, p1[1] * inv
    dx, dy = x1 - x, y1 - y
    ix, iy = int(math.floor(x)), int(math.floor(y))
    ix1, iy1 = int(math.floor(x1)), int(math.floor(y1))
    cells = [(ix, iy)]
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    t_max_x = ((ix + (sx > 0)) - x) / dx if dx != 0 else math.inf
    t_max_y = ((iy + (sy > 0)) - y) / dy if dy != 0 else math.inf
    t_dx = abs(1.0 / dx) if dx != 0 else math.inf
    t_dy = abs(1.0 / dy) if dy != 0 else math.inf
    guard = 0
    while (ix, iy) != (ix1, iy1) and guard < 10_000_000:
        guard += 1
        if abs(t_max_x - t_max_y) < 1e-12:
            cells.append((ix + sx, iy))
            cells.append((ix, iy + sy))
            ix += sx
            iy += sy
            t_max_x += t_dx
            t_max_y += t_dy
        elif t_max_x < t_max_y:
            ix += sx
            t_max_x += t_dx
        else:
            iy += sy
            t_max_y += t_dy
        cells.append((ix, iy))
        if min(t_max_x, t_max_y) > 1.0 + 1e-9 and (ix, iy) != (ix1, iy1):
            break  # numerical safety: past the segment end
    return cells


def _adjacent(a: Cell, b: Cell) -> bool:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1])) <= 1


def rasterize_segment(world: LatticeWorld, p0: tuple[float, float],
                      p1: tuple[float, float]) -> list[Cell]:
    """Thin 8-connected raster of a continuous segment.

    Marches the true segment and keeps only cells containing a piece of
    positive length (an endpoint exactly on a grid line would otherwise
    contribute a touch-only cell whose removal cannot change anything),
    then thins redundant cells so that removing any single cell opens an
    orthogonal passage through its location."""
    chain: list[Cell] = []
    for cell in traverse_cells(world.resolution, p0, p1):
        if cell in chain[-2:]:
            continue
        clip = _segment_clip_cell(p0, p1, cell, world.resolution)
        if clip is None or clip[1] - clip[0] <= 1e-12:
            continue
        chain.append(cell)
    thinned: list[Cell] = []
    for i, cell in enumerate(chain):
        if (0 < i < len(chain) - 1 and thinned
                and _adjacent(thinned[-1], chain[i + 1])):
            continue  # kept neighbours already touch; this cell is redundant
        if cell not in thinned:
            thinned.append(cell)
    return thinned


def rasterize_polyline(world: LatticeWorld,
                       points: list[tuple[float, float]]) -> list[Cell]:
    """Raster of a polyline; shared joint cells are not duplicated."""
    cells: list[Cell] = []
    seen: set[Cell] = set()
    for a, b in zip(points[:-1], points[1:]):
        for cell in rasterize_segment(world, a, b):
            if cell not in seen:
                seen.add(cell)
                cells.append(cell)
    return cells


def _segment_clip_cell(p0, p1, cell: Cell, resolution: float,
                       pad: float = 0.0) -> tuple[float, float] | None:
    """Liang-Barsky: parameter interval of segment p0-p1 inside the closed
    cell square (grown by pad), or None."""
    t0, t1 = 0.0, 1.0
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    x0 = cell[0] * resolution - pad
    x1 = (cell[0] + 1) * resolution + pad
    y0 = cell[1] * resolution - pad
    y1 = (cell[1] + 1) * resolution + pad
    for p, q in ((-dx, p0[0] - x0), (dx, x1 - p0[0]),
                 (-dy, p0[1] - y0), (dy, y1 - p0[1])):
        if p == 0.0:
            if q < 0.0:
                return None
            continue
        r = q / p
        if p < 0.0:
            if r > t1:
                return None
            t0 = max(t0, r)
        else:
            if r < t0:
                return None
            t1 = min(t1, r)
    if t0 > t1:
        return None
    return t0, t1


_GRAZE_PAD = 1e-9  # m; blocked squares grow by this much for passage tests


def _line_of_sight(blocked: np.ndarray, resolution: float, p, q) -> bool:
    """Free straight passage: the chord must stay more than _GRAZE_PAD away
    from every blocked square's surface.  With bend vertices offset into
    free quadrants this forbids both interior crossings and squeezing
    through the corner point between two diagonally adjacent blocked cells,
    while still allowing arbitrarily tight wraps around exposed corners."""
    h, w = blocked.shape
    for ix, iy in traverse_cells(resolution, p, q):
        if not (0 <= ix < w and 0 <= iy < h):
            return False  # leaving the grid counts as blocked
        if blocked[iy, ix]:
            clip = _segment_clip_cell(p, q, (ix, iy), resolution,
                                      pad=_GRAZE_PAD)
            if clip is not None:
                return False
    return True


def _bend_candidates(blocked: np.ndarray, res: float,
                     cells: list[Cell]) -> list[tuple[float, float]]:
    """Bend points for taut continuous routes: every corner of the given
    blocked cells, offset a hair into each free quadrant around it.  The
    offset keeps route vertices strictly in free space, so a route cannot
    change sides of a thin wall by pivoting exactly on its surface."""
    h, w = blocked.shape
    eps = res * 1e-3
    out = []
    corners: set[tuple[int, int]] = set()
    for x, y in cells:
        corners.update(((x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)))
    for cx, cy in sorted(corners):
        for qx, qy in ((-1, -1), (0, -1), (-1, 0), (0, 0)):
            ix, iy = cx + qx, cy + qy
            if 0 <= ix < w and 0 <= iy < h and not blocked[iy, ix]:
                out.append((cx * res + eps * (2 * qx + 1),
                            cy * res + eps * (2 * qy + 1)))
    return out


def continuous_shortest_length(world: LatticeWorld, s: tuple[float, float],
                               g: tuple[float, float],
                               bend_near: list[Cell] | None = None) -> float:
    """Shortest continuous length from s to g around the blocked set, under
    the lattice's traversability semantics (obstacle interiors and diagonal
    pinch corners are impassable, boundary grazing is allowed).

    Dijkstra over a visibility graph whose vertices are free-quadrant
    points next to blocked-cell corners; the continuum optimum bends only
    at such corners.  `bend_near` limits the candidate corners to the
    vicinity of the given cells (e.g. the two ends of a thin wall, the only
    places a taut route around it can bend); None uses every blocked cell.
    This is the faithful continuous counterpart of the 8-connected metric,
    which overestimates Euclidean lengths by a route-dependent factor of up
    to ~8%."""
    blocked, res = world.blocked, world.resolution
    if _line_of_sight(blocked, res, s, g):
        return math.dist(s, g)
    if bend_near is None:
        ys, xs = np.nonzero(blocked)
        seed_cells = list(zip(xs.tolist(), ys.tolist()))
    else:
        seed_cells = []
        seen = set()
        for bx, by in bend_near:
            for dx in range(-2, 3):
                for dy in range(-2, 3):
                    c = (bx + dx, by + dy)
                    if c in seen:
                        continue
                    seen.add(c)
                    if 0 <= c[0] < world.width and 0 <= c[1] < world.height \
                            and blocked[c[1], c[0]]:
                        seed_cells.append(c)
    verts = [s, g] + _bend_candidates(blocked, res, seed_cells)
    n = len(verts)
    dist = [math.inf] * n
    done = [False] * n
    dist[0] = 0.0
    heap = [(0.0, 0)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == 1:
            return d
        pu = verts[u]
        for v in range(n):
            if done[v]:
                continue
            nd = d + math.dist(pu, verts[v])
            if nd < dist[v] and _line_of_sight(blocked, res, pu, verts[v]):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return math.inf


def _v_min_over_gap(s, g, seg_a, seg_b, t0: float, t1: float,
                    iters: int = 80) -> float:
    """Minimum of |s q| + |q g| for q on the sub-segment of seg_a-seg_b with
    parameter in [t0, t1] (convex in the parameter; ternary search)."""
    ax, ay = seg_a
    dx, dy = seg_b[0] - seg_a[0], seg_b[1] - seg_a[1]

    def f(t: float) -> float:
        qx, qy = ax + t * dx, ay + t * dy
        return math.hypot(qx - s[0], qy - s[1]) + math.hypot(qx - g[0], qy - g[1])

    lo, hi = t0, t1
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return min(f(lo), f(hi), f(t0), f(t1))


@dataclass
class CellCheck:
    cell: Cell
    base_length_m: float
    new_length_m: float
    strictly_shorter: bool
    route_changed: bool
    continuum_shorter: bool
    optimum_near_cell: bool

    @property
    def passed(self) -> bool:
        return self.strictly_shorter or self.route_changed or self.continuum_shorter

    def line(self) -> str:
        return (f"cell=({self.cell[0]},{self.cell[1]}) "
                f"base={self.base_length_m:.6f} new={self.new_length_m:.6f} "
                f"shorter={'Y' if self.strictly_shorter else 'N'} "
                f"route_changed={'Y' if self.route_changed else 'N'} "
                f"continuum={'Y' if self.continuum_shorter else 'N'} "
                f"near_removed={'Y' if self.optimum_near_cell else 'N'} "
                f"{'PASS' if self.passed else 'FAIL'}")


@dataclass
class Definition1Report:
    start: Cell
    goal: Cell
    base: LatticePath
    checks: list[CellCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [c.line() for c in self.checks]
        out.append(f"set cells={len(self.checks)} "
                   f"{'PASS' if self.passed else 'FAIL'}")
        return out


def _incoming_best(blocked: np.ndarray, dist: np.ndarray, cell: Cell) -> float:
    """Cheapest way (in units) to step onto `cell` from the distance field,
    with `cell` treated as free and everything else as in `blocked`."""
    cx, cy = cell
    h, w = blocked.shape
    best = math.inf
    for dx, dy, cost in _STEPS:
        ux, uy = cx + dx, cy + dy
        if not (0 <= ux < w and 0 <= uy < h):
            continue
        if blocked[uy, ux]:
            continue
        if dx != 0 and dy != 0 and (blocked[uy, cx] or blocked[cy, ux]):
            continue  # orthogonal cells of the move u -> cell
        cand = dist[uy, ux] + cost
        if cand < best:
            best = cand
    return best


def _continuum_gain(cell: Cell, resolution: float, start_m, goal_m,
                    segments) -> bool:
    """Continuum witness: does the best two-leg route bending inside this
    cell's piece of some source segment strictly beat the best route around
    the ends of that segment?"""
    for a, b in segments:
        clip = _segment_clip_cell(a, b, cell, resolution)
        if clip is None:
            continue
        around = min(
            math.dist(start_m, a) + math.dist(a, goal_m),
            math.dist(start_m, b) + math.dist(b, goal_m))
        through = _v_min_over_gap(start_m, goal_m, a, b, clip[0], clip[1])
        if through < around - 1e-12:
            return True
    return False


def verify_definition1(world: LatticeWorld, obstacle_cells: list[Cell],
                       start: Cell, goal: Cell, source_segments=None,
                       continuous_endpoints=None) -> Definition1Report:
    """Check that removing any single obstacle cell changes the optimum.

    Primary signal: the freed-cell optimum is strictly shorter in the
    lattice metric (exact, from two distance fields).  Fallbacks: the
    re-planned cell sequence differs; or, when `source_segments` (the
    continuous segments the cells rasterise, as ((ax,ay),(bx,by)) pairs)
    are given, the continuum witness of the module docstring, evaluated
    from `continuous_endpoints` (the exact start/goal configurations; cell
    centres when omitted).  Also records, per cell, whether the
    post-removal optimum passes within one cell (Chebyshev adjacency) of
    the removed cell.

    Raises PathNotFound when no path exists with the full obstacle set, and
    ValueError when start/goal are blocked (including by the obstacle set).
    """
    full = world.blocked.copy()
    for ix, iy in obstacle_cells:
        if not world.in_bounds((ix, iy)):
            raise ValueError(f"obstacle cell ({ix},{iy}) out of bounds")
        full[iy, ix] = True
    fworld = LatticeWorld(world.resolution, world.width, world.height, full)
    base = shortest_path(fworld, start, goal)
    if base is None:
        raise PathNotFound(f"no path from {start} to {goal} with obstacles")
    d_start = distance_field(fworld, start)
    d_goal = distance_field(fworld, goal)
    base_units = base.length_units
    res = world.resolution
    if continuous_endpoints is not None:
        start_m, goal_m = continuous_endpoints
    else:
        start_m, goal_m = fworld.cell_center(start), fworld.cell_center(goal)

    report = Definition1Report(start, goal, base)
    for cell in obstacle_cells:
        cx, cy = cell
        full[cy, cx] = False
        in_best = _incoming_best(full, d_start, cell)
        out_best = _incoming_best(full, d_goal, cell)
        through = in_best + out_best
        strictly_shorter = through < base_units - 1e-9
        route_changed = False
        continuum = False
        if strictly_shorter:
            new_units = through
            near = True  # the new optimum passes through the freed cell itself
        else:
            alt = shortest_path(fworld, start, goal)
            new_units = alt.length_units
            route_changed = alt.cells != base.cells
            near = any(max(abs(ax - cx), abs(ay - cy)) <= 1 for ax, ay in alt.cells)
            if not route_changed and source_segments is not None:
                continuum = _continuum_gain(cell, res, start_m, goal_m,
                                            source_segments)
                near = near or continuum
        full[cy, cx] = True
        report.checks.append(CellCheck(cell, base_units * res, new_units * res,
                                       strictly_shorter, route_changed,
                                       continuum, near))
    return report


def verify_goes_through(world: LatticeWorld, obstacle_cells: list[Cell],
                        removed_cell: Cell, start: Cell, goal: Cell) -> bool:
    """True iff the optimum after removing removed_cell passes within one
    cell of it.  removed_cell must belong to obstacle_cells."""
    if removed_cell not in obstacle_cells:
        raise ValueError("removed_cell not in obstacle set")
    full = world.blocked.copy()
    for ix, iy in obstacle_cells:
        full[iy, ix] = True
    fworld = LatticeWorld(world.resolution, world.width, world.height, full)
    base = shortest_path(fworld, start, goal)
    if base is None:
        raise PathNotFound(f"no path from {start} to {goal} with obstacles")
    cx, cy = removed_cell
    full[cy, cx] = False
    alt = shortest_path(fworld, start, goal)
    if alt is None:
        raise PathNotFound("removal disconnected the world (impossible)")
    return any(max(abs(ax - cx), abs(ay - cy)) <= 1 for ax, ay in alt.cells)
