"""Deployment environment: cave-like occupancy grids, a simulated LiDAR,
an accumulating known map with a Dijkstra global planner, footprint-sweep
collision gating, the two-phase recovery behaviour, and the episode loop.

Safety model.  The global planner treats unknown space as free.  The
collision gate is two checks: a horizon rollout of the candidate action
against the known obstacles (steers away from perceived dead ends), and a
one-step check that additionally treats unobserved cells as blocked.  Cells
are marked observed-free when a beam passes through them, when they lie
under the robot's own collision-free footprint, or inside the carved spawn
pocket.  Because every cell a forward step can sweep lies inside the
forward field of view, the conservative one-step check only ever bites on
blind reversing; together the two checks make executed motion provably
collision-free, which the episode loop asserts against the true grid.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .exploration import Action, Pose, step_unicycle, wrap_angle
from .hallucination import LidarSpec
from .learner import ModelParams, encode_input, forward

SQRT2 = math.sqrt(2.0)


class WorldGenError(RuntimeError):
    """No traversable world found within the attempt budget."""


@dataclass
class OccupancyGrid:
    resolution: float
    width: int
    height: int
    occupied: np.ndarray  # bool, (height, width)
    start: Pose
    goal: tuple[float, float]
    seed: int = 0
    fill_prob: float = 0.0

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor(x / self.resolution)),
                int(math.floor(y / self.resolution)))

    @property
    def size_m(self) -> tuple[float, float]:
        return self.width * self.resolution, self.height * self.resolution


def _neighbor_counts(occ: np.ndarray) -> np.ndarray:
    p = np.pad(occ.astype(np.int8), 1)
    return (p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:]
            + p[1:-1, :-2] + p[1:-1, 2:]
            + p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:])


def inflate(occ: np.ndarray, r: int) -> np.ndarray:
    """Chebyshev dilation by r cells."""
    out = occ.copy()
    h, w = occ.shape
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx == 0 and dy == 0:
                continue
            ys = slice(max(0, dy), min(h, h + dy))
            xs = slice(max(0, dx), min(w, w + dx))
            ys0 = slice(max(0, -dy), min(h, h - dy))
            xs0 = slice(max(0, -dx), min(w, w - dx))
            out[ys0, xs0] |= occ[ys, xs]
    return out


def _traversable(occ: np.ndarray, a: tuple[int, int], b: tuple[int, int],
                 inflation: int) -> bool:
    """Plannability under the same rules the global planner uses."""
    blocked = inflate(occ, inflation)
    if blocked[a[1], a[0]] or blocked[b[1], b[0]]:
        return False
    return _dijkstra_cells(blocked, a, b) is not None


def generate_world(seed: int, size: int = 40, fill_prob: float = 0.42,
                   ca_iterations: int = 3, resolution: float = 0.15,
                   carve_radius: float = 0.6, attempts: int = 100) -> OccupancyGrid:
    """Cave-style world: random fill, then smoothing (a cell turns occupied
    with >= 5 of 8 occupied neighbours, free with <= 3, else keeps), walled
    border, carved start/goal pockets.  Regenerates with the next sub-seed
    until start and goal connect on the free map inflated by the planner's
    two-cell robot clearance."""
    if size < 20:
        raise ValueError("size must be at least 20 cells per side")
    if not 0.0 <= fill_prob <= 1.0:
        raise ValueError("fill_prob must be in [0, 1]")
    side = size * resolution
    sx, sy = 0.9, 0.9
    gx, gy = side - 0.9, side - 0.9
    start = Pose(sx, sy, math.atan2(gy - sy, gx - sx))
    ys, xs = np.mgrid[0:size, 0:size]
    cx = (xs + 0.5) * resolution
    cy = (ys + 0.5) * resolution

    for k in range(attempts):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                           spawn_key=(k,)))
        occ = rng.random((size, size)) < fill_prob
        for _ in range(ca_iterations):
            counts = _neighbor_counts(occ)
            occ = np.where(counts >= 5, True, np.where(counts <= 3, False, occ))
        occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = True
        for px, py in ((sx, sy), (gx, gy)):
            occ[(cx - px) ** 2 + (cy - py) ** 2 <= carve_radius ** 2] = False
        occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = True
        grid = OccupancyGrid(resolution, size, size, occ, start, (gx, gy),
                             seed, fill_prob)
        a = grid.cell_of(sx, sy)
        b = grid.cell_of(gx, gy)
        if _traversable(occ, a, b, 2):
            return grid
    raise WorldGenError(f"no traversable world after {attempts} attempts "
                        f"(seed={seed}, fill_prob={fill_prob})")


@dataclass
class ScanResult:
    ranges: np.ndarray        # (B,)
    hit_cells: np.ndarray     # (M, 2) cells a beam terminated in
    visited_cells: np.ndarray  # (K, 2) free cells beams passed through


def raycast(grid: OccupancyGrid, pose: Pose,
            sensor: LidarSpec | None = None) -> ScanResult:
    """Per-beam grid march to the first occupied cell, clipped to the sensor
    limit.  Ranges are exact distances to the entered cell's boundary."""
    sensor = sensor or LidarSpec()
    res = grid.resolution
    occ = grid.occupied
    angles = pose.psi + sensor.relative_angles()
    dx, dy = np.cos(angles), np.sin(angles)
    b = sensor.beam_count

    ix0, iy0 = grid.cell_of(pose.x, pose.y)
    if occ[iy0, ix0]:
        raise ValueError("sensor pose is inside an occupied cell")
    ix = np.full(b, ix0)
    iy = np.full(b, iy0)
    step_x = np.where(dx > 0, 1, -1)
    step_y = np.where(dy > 0, 1, -1)
    with np.errstate(divide="ignore"):
        t_max_x = np.where(dx != 0, ((ix + (dx > 0)) * res - pose.x) / dx, np.inf)
        t_max_y = np.where(dy != 0, ((iy + (dy > 0)) * res - pose.y) / dy, np.inf)
        t_dx = np.where(dx != 0, res / np.abs(dx), np.inf)
        t_dy = np.where(dy != 0, res / np.abs(dy), np.inf)

    ranges = np.full(b, sensor.max_range)
    hit = np.zeros(b, dtype=bool)
    active = np.ones(b, dtype=bool)
    visited = [np.array([[ix0, iy0]])]
    hits_x, hits_y = [], []
    while active.any():
        take_x = t_max_x < t_max_y
        t_next = np.where(take_x, t_max_x, t_max_y)
        over = active & (t_next > sensor.max_range)
        active &= ~over
        adv = active
        mx = adv & take_x
        my = adv & ~take_x
        ix = np.where(mx, ix + step_x, ix)
        iy = np.where(my, iy + step_y, iy)
        t_max_x = np.where(mx, t_max_x + t_dx, t_max_x)
        t_max_y = np.where(my, t_max_y + t_dy, t_max_y)
        inb = adv & (ix >= 0) & (ix < grid.width) & (iy >= 0) & (iy < grid.height)
        out = adv & ~inb
        ranges[out] = np.where(take_x[out], t_max_x[out] - t_dx[out],
                               t_max_y[out] - t_dy[out])
        active &= inb
        if not active.any():
            break
        occ_here = np.zeros(b, dtype=bool)
        occ_here[active] = occ[iy[active], ix[active]]
        newly_hit = active & occ_here
        t_entry = np.where(mx, t_max_x - t_dx, t_max_y - t_dy)
        ranges[newly_hit] = t_entry[newly_hit]
        hit |= newly_hit
        hits_x.append(ix[newly_hit])
        hits_y.append(iy[newly_hit])
        active &= ~newly_hit
        passed = active.copy()
        if passed.any():
            visited.append(np.stack((ix[passed], iy[passed]), axis=1))
    hit_cells = (np.stack((np.concatenate(hits_x), np.concatenate(hits_y)), axis=1)
                 if hits_x else np.empty((0, 2), dtype=int))
    all_visited = np.unique(np.concatenate(visited), axis=0)
    return ScanResult(ranges, hit_cells, all_visited)


def simulate_lidar(grid: OccupancyGrid, pose: Pose,
                   sensor: LidarSpec | None = None) -> np.ndarray:
    return raycast(grid, pose, sensor).ranges


@dataclass
class KnownMap:
    observed: np.ndarray
    occupied: np.ndarray

    @classmethod
    def blank(cls, width: int, height: int) -> "KnownMap":
        return cls(np.zeros((height, width), dtype=bool),
                   np.zeros((height, width), dtype=bool))

    def update_scan(self, scan: ScanResult) -> None:
        v = scan.visited_cells
        self.observed[v[:, 1], v[:, 0]] = True
        h = scan.hit_cells
        if h.shape[0]:
            self.observed[h[:, 1], h[:, 0]] = True
            self.occupied[h[:, 1], h[:, 0]] = True

    def mark_free_disk(self, x: float, y: float, r: float, resolution: float) -> None:
        h, w = self.observed.shape
        ys, xs = np.mgrid[0:h, 0:w]
        mask = ((xs + 0.5) * resolution - x) ** 2 + \
               ((ys + 0.5) * resolution - y) ** 2 <= r * r
        self.observed |= mask
        self.occupied &= ~mask

    def mark_cells_free(self, cells: np.ndarray) -> None:
        if cells.shape[0]:
            self.observed[cells[:, 1], cells[:, 0]] = True


def _dijkstra_cells(blocked: np.ndarray, start: tuple[int, int],
                    goal: tuple[int, int]) -> list[tuple[int, int]] | None:
    h, w = blocked.shape
    if blocked[goal[1], goal[0]]:
        return None
    dist = np.full((h, w), np.inf)
    parent = np.full((h, w), -1, dtype=np.int64)
    dist[start[1], start[0]] = 0.0
    heap = [(0.0, start[1] * w + start[0], start[0], start[1])]
    steps = ((1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
             (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2))
    while heap:
        d, _, cx, cy = heapq.heappop(heap)
        if d > dist[cy, cx]:
            continue
        if (cx, cy) == goal:
            break
        for dx, dy, c in steps:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h) or blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0 and (blocked[cy, nx] or blocked[ny, cx]):
                continue
            nd = d + c
            if nd < dist[ny, nx]:
                dist[ny, nx] = nd
                parent[ny, nx] = cy * w + cx
                heapq.heappush(heap, (nd, ny * w + nx, nx, ny))
    if not np.isfinite(dist[goal[1], goal[0]]):
        return None
    cells = [goal]
    while cells[-1] != start:
        p = parent[cells[-1][1], cells[-1][0]]
        cells.append((int(p % w), int(p // w)))
    cells.reverse()
    return cells


@dataclass
class GlobalPath:
    cells: list[tuple[int, int]]
    points: np.ndarray  # (M, 2) cell centres in metres

    def local_goal(self, pose: Pose, lookahead: float = 1.0) -> tuple[float, float, float]:
        """(x, y, tangent) at `lookahead` metres of path beyond the nearest
        path point; the final point when the path ends sooner."""
        pts = self.points
        d = np.hypot(pts[:, 0] - pose.x, pts[:, 1] - pose.y)
        i = int(np.argmin(d))
        remaining = 0.0
        for j in range(i, len(pts) - 1):
            seg = pts[j + 1] - pts[j]
            ln = float(np.hypot(*seg))
            if remaining + ln >= lookahead and ln > 0.0:
                f = (lookahead - remaining) / ln
                gx, gy = pts[j] + f * seg
                return float(gx), float(gy), math.atan2(seg[1], seg[0])
            remaining += ln
        if len(pts) >= 2:
            seg = pts[-1] - pts[-2]
            tangent = math.atan2(seg[1], seg[0])
        else:
            tangent = pose.psi
        return float(pts[-1][0]), float(pts[-1][1]), tangent

    def tangent_at(self, pose: Pose) -> float:
        pts = self.points
        if len(pts) < 2:
            return pose.psi
        d = np.hypot(pts[:, 0] - pose.x, pts[:, 1] - pose.y)
        i = min(int(np.argmin(d)), len(pts) - 2)
        seg = pts[i + 1] - pts[i]
        return math.atan2(seg[1], seg[0])


def global_plan(known: KnownMap, resolution: float, start_cell: tuple[int, int],
                goal_cell: tuple[int, int], inflation: int = 1) -> GlobalPath | None:
    """Dijkstra on the known map (unknown treated as free), with obstacles
    inflated; the start cell is always kept plannable."""
    blocked = inflate(known.occupied, inflation) if inflation > 0 else known.occupied.copy()
    blocked[start_cell[1], start_cell[0]] = False
    cells = _dijkstra_cells(blocked, start_cell, goal_cell)
    if cells is None:
        return None
    pts = np.array([((x + 0.5) * resolution, (y + 0.5) * resolution)
                    for x, y in cells])
    return GlobalPath(cells, pts)


def _footprint_overlap_cells(pose: Pose, length: float, width: float,
                             cells_x: np.ndarray, cells_y: np.ndarray,
                             resolution: float) -> np.ndarray:
    """Exact separating-axis overlap test between the oriented footprint
    rectangle and the given cells; True where interiors overlap."""
    cxs = (cells_x + 0.5) * resolution
    cys = (cells_y + 0.5) * resolution
    hl, hw, hc = length / 2.0, width / 2.0, resolution / 2.0
    c, s = math.cos(pose.psi), math.sin(pose.psi)
    dx = cxs - pose.x
    dy = cys - pose.y
    overlap = np.ones(cells_x.shape, dtype=bool)
    # axes: cell x, cell y, footprint long axis, footprint lateral axis
    for ax, ay, rect_ext in (
            (1.0, 0.0, hl * abs(c) + hw * abs(s)),
            (0.0, 1.0, hl * abs(s) + hw * abs(c)),
            (c, s, hl),
            (-s, c, hw)):
        cell_ext = hc * (abs(ax) + abs(ay))
        proj = np.abs(dx * ax + dy * ay)
        overlap &= proj < rect_ext + cell_ext - 1e-12
    return overlap


def footprint_collides(occ: np.ndarray, pose: Pose, length: float,
                       width: float, resolution: float,
                       extra_blocked: np.ndarray | None = None) -> bool:
    """True when the footprint interior overlaps any blocked cell (or leaves
    the grid).  `extra_blocked` adds cells to treat as blocked."""
    h, w = occ.shape
    reach = math.hypot(length, width) / 2.0
    x0 = int(math.floor((pose.x - reach) / resolution))
    x1 = int(math.floor((pose.x + reach) / resolution))
    y0 = int(math.floor((pose.y - reach) / resolution))
    y1 = int(math.floor((pose.y + reach) / resolution))
    if x0 < 0 or y0 < 0 or x1 >= w or y1 >= h:
        return True
    sub = occ[y0:y1 + 1, x0:x1 + 1]
    if extra_blocked is not None:
        sub = sub | extra_blocked[y0:y1 + 1, x0:x1 + 1]
    ys, xs = np.nonzero(sub)
    if ys.size == 0:
        return False
    return bool(_footprint_overlap_cells(pose, length, width, xs + x0, ys + y0,
                                         resolution).any())


def footprint_cells(pose: Pose, length: float, width: float,
                    resolution: float, shape: tuple[int, int]) -> np.ndarray:
    """(K, 2) cells whose interiors the footprint overlaps."""
    h, w = shape
    reach = math.hypot(length, width) / 2.0
    x0 = max(0, int(math.floor((pose.x - reach) / resolution)))
    x1 = min(w - 1, int(math.floor((pose.x + reach) / resolution)))
    y0 = max(0, int(math.floor((pose.y - reach) / resolution)))
    y1 = min(h - 1, int(math.floor((pose.y + reach) / resolution)))
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    xs, ys = xs.ravel(), ys.ravel()
    m = _footprint_overlap_cells(pose, length, width, xs, ys, resolution)
    return np.stack((xs[m], ys[m]), axis=1)


@dataclass
class SafetyConfig:
    dt: float = 0.05
    horizon_s: float = 1.0
    footprint_length: float = 0.51
    footprint_width: float = 0.43


def check_action(known: KnownMap, resolution: float, pose: Pose,
                 action: Action, safety: SafetyConfig, steps: int,
                 unknown_blocks: bool, stop_at=None,
                 stop_radius: float = 0.0) -> bool:
    """Roll the unicycle `steps` timesteps under a constant action and test
    the footprint against the known map at every rolled pose.  With
    unknown_blocks, unobserved cells count as obstacles.  The rollout stops
    early once within stop_radius of stop_at (the robot will not blindly
    extrapolate past its goal)."""
    extra = ~known.observed if unknown_blocks else None
    p = pose
    for _ in range(steps):
        p = step_unicycle(p, action, safety.dt)
        if footprint_collides(known.occupied, p, safety.footprint_length,
                              safety.footprint_width, resolution, extra):
            return False
        if stop_at is not None and math.hypot(p.x - stop_at[0],
                                              p.y - stop_at[1]) <= stop_radius:
            break
    return True


def mpc_collision_check(known: KnownMap, resolution: float, pose: Pose,
                        action: Action, safety: SafetyConfig, stop_at=None,
                        stop_radius: float = 0.0) -> bool:
    """Horizon rollout against perceived obstacles; True when safe."""
    steps = max(1, int(round(safety.horizon_s / safety.dt)))
    return check_action(known, resolution, pose, action, safety, steps, False,
                        stop_at, stop_radius)


def action_is_safe(known: KnownMap, resolution: float, pose: Pose,
                   action: Action, safety: SafetyConfig, stop_at=None,
                   stop_radius: float = 0.0) -> bool:
    """Full gate: horizon check plus the conservative first-step check."""
    return (check_action(known, resolution, pose, action, safety, 1, True)
            and mpc_collision_check(known, resolution, pose, action, safety,
                                    stop_at, stop_radius))


MODE_NORMAL = "normal"
MODE_ROTATE = "recovery_rotate"
MODE_BACKUP = "recovery_backup"


@dataclass
class DeploymentState:
    pose: Pose
    velocity: Action
    scan: np.ndarray | None
    path: GlobalPath | None
    mode: str = MODE_NORMAL


def recovery_step(state: DeploymentState, known: KnownMap, resolution: float,
                  safety: SafetyConfig, rotate_speed: float = 1.0,
                  backup_v: float = -0.2, align_tol: float = 0.15
                  ) -> tuple[Action, str]:
    """Two-phase recovery: rotate in place toward the global-path tangent;
    when aligned, or when rotating is itself unsafe, back up.  Falls back to
    standing still when even backing up is unsafe."""
    mode = state.mode
    if mode == MODE_ROTATE:
        err = wrap_angle(state.path.tangent_at(state.pose) - state.pose.psi) \
            if state.path else 0.0
        if abs(err) > align_tol:
            rot = Action(0.0, math.copysign(rotate_speed, err))
            if action_is_safe(known, resolution, state.pose, rot, safety):
                return rot, MODE_ROTATE
        mode = MODE_BACKUP
    back = Action(backup_v, 0.0)
    if action_is_safe(known, resolution, state.pose, back, safety):
        return back, MODE_BACKUP
    return Action(0.0, 0.0), MODE_BACKUP


@dataclass
class EpisodeLimits:
    dt: float = 0.05
    time_cap_s: float = 50.0
    goal_radius: float = 0.3
    stall_window_s: float = 5.0
    stall_dist: float = 0.05
    inflation_cells: int = 2
    replan_drift: float = 0.75
    local_goal_dist: float = 1.0
    rotate_speed: float = 1.0
    backup_v: float = -0.2
    align_tol: float = 0.15
    carve_radius: float = 0.6
    safety: SafetyConfig = field(default_factory=SafetyConfig)
    sensor: LidarSpec = field(default_factory=LidarSpec)


@dataclass
class EpisodeResult:
    outcome: str              # success | timeout | stuck
    traversal_time: float
    collision_count: int
    recovery_activations: int
    path: np.ndarray          # (T, 3) executed poses


def _path_blocked(path: GlobalPath, blocked: np.ndarray) -> bool:
    return any(blocked[y, x] for x, y in path.cells)


def run_episode(grid: OccupancyGrid, planner, limits: EpisodeLimits | None = None
                ) -> EpisodeResult:
    """Sense -> plan -> gate -> act loop.

    `planner` is either trained ModelParams or a callable
    (scan, pose, goal_xy) -> Action.  Every executed step is re-checked
    against the true grid; overlaps are counted (they indicate a gating bug
    and the test suite asserts the count stays zero).
    """
    limits = limits or EpisodeLimits()
    if isinstance(planner, ModelParams):
        params = planner

        def policy(scan, pose, goal_xy):
            x = encode_input(scan, pose, Pose(goal_xy[0], goal_xy[1], 0.0),
                             limits.sensor.max_range)
            return forward(params, x)
    else:
        policy = planner

    safety = limits.safety
    res = grid.resolution
    pose = grid.start
    known = KnownMap.blank(grid.width, grid.height)
    known.mark_free_disk(pose.x, pose.y, limits.carve_radius, res)
    state = DeploymentState(pose, Action(0.0, 0.0), None, None)
    recoveries = 0
    collisions = 0
    traj = [(pose.x, pose.y, pose.psi)]
    window = deque()  # (t, x, y)
    n_steps = int(round(limits.time_cap_s / limits.dt))
    outcome = "timeout"
    t = 0.0

    for i in range(n_steps):
        scan = raycast(grid, pose, limits.sensor)
        known.update_scan(scan)
        known.mark_cells_free(footprint_cells(pose, safety.footprint_length,
                                              safety.footprint_width, res,
                                              known.observed.shape))
        state.scan = scan.ranges
        if math.hypot(pose.x - grid.goal[0], pose.y - grid.goal[1]) <= limits.goal_radius:
            outcome = "success"
            break

        inflated = inflate(known.occupied, limits.inflation_cells)
        path = state.path
        need_replan = path is None or _path_blocked(path, inflated)
        if not need_replan:
            d = np.hypot(path.points[:, 0] - pose.x, path.points[:, 1] - pose.y)
            need_replan = float(d.min()) > limits.replan_drift
        if need_replan:
            path = global_plan(known, res, grid.cell_of(pose.x, pose.y),
                               grid.cell_of(*grid.goal), limits.inflation_cells)
            if path is None:
                outcome = "stuck"
                break
            state.path = path

        gx, gy, _ = path.local_goal(pose, limits.local_goal_dist)
        learned = policy(scan.ranges, pose, (gx, gy))
        if action_is_safe(known, res, pose, learned, safety,
                          grid.goal, limits.goal_radius):
            action = learned
            state.mode = MODE_NORMAL
        else:
            if state.mode == MODE_NORMAL:
                state.mode = MODE_ROTATE
                recoveries += 1
            action, state.mode = recovery_step(state, known, res, safety,
                                               limits.rotate_speed,
                                               limits.backup_v, limits.align_tol)

        pose = step_unicycle(pose, action, limits.dt)
        state.pose = pose
        state.velocity = action
        t = (i + 1) * limits.dt
        traj.append((pose.x, pose.y, pose.psi))
        if footprint_collides(grid.occupied, pose, safety.footprint_length,
                              safety.footprint_width, res):
            collisions += 1
            outcome = "stuck"
            break

        window.append((t, pose.x, pose.y))
        while window and t - window[0][0] > limits.stall_window_s:
            window.popleft()
        if (t - window[0][0] >= limits.stall_window_s - 1e-9
                and math.hypot(pose.x - window[0][1], pose.y - window[0][2])
                < limits.stall_dist):
            outcome = "stuck"
            break

    if outcome == "timeout":
        t = limits.time_cap_s
    return EpisodeResult(outcome, t, collisions, recoveries, np.array(traj))


WORLD_HEADER = "# world v1"


def save_world(path, grid: OccupancyGrid) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(f"{WORLD_HEADER} seed={grid.seed} fill={grid.fill_prob!r}\n")
        f.write(f"resolution {grid.resolution!r}\n")
        f.write(f"width {grid.width}\nheight {grid.height}\n")
        f.write(f"start {grid.start.x!r} {grid.start.y!r} {grid.start.psi!r}\n")
        f.write(f"goal {grid.goal[0]!r} {grid.goal[1]!r}\n")
        for iy in range(grid.height):
            f.write("".join("1" if v else "0" for v in grid.occupied[iy]) + "\n")


def load_world(path) -> OccupancyGrid:
    with open(path) as f:
        header = f.readline().strip()
        if not header.startswith(WORLD_HEADER):
            raise ValueError(f"not a world file: {path}")
        seed = int(header.split("seed=")[1].split()[0])
        fill = float(header.split("fill=")[1])
        res = float(f.readline().split()[1])
        width = int(f.readline().split()[1])
        height = int(f.readline().split()[1])
        st = f.readline().split()
        start = Pose(float(st[1]), float(st[2]), float(st[3]))
        gl = f.readline().split()
        goal = (float(gl[1]), float(gl[2]))
        occ = np.zeros((height, width), dtype=bool)
        for iy in range(height):
            occ[iy] = np.frombuffer(f.readline().strip().encode(), dtype=np.uint8) == ord("1")
    return OccupancyGrid(res, width, height, occ, start, goal, seed, fill)
