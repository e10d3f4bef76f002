"""Unicycle kinematics, the random open-space exploration policy, and the
extraction of footprint points and turning triples from recorded trails.

Data collection runs the policy in unbounded free space, records poses and
commands, and cuts one datum per timestep: the pose at that step, the pose
roughly one metre of path ahead as the local goal, and the trail between
them.  Timesteps whose lookahead window never accumulates the local-goal
distance (trailing steps, near-pure rotation) are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .geometry import Point2, TurnTriple

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class Action:
    v: float  # m/s
    w: float  # rad/s


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    psi: float


def step_unicycle(pose: Pose, action: Action, dt: float) -> Pose:
    """One Euler step of the unicycle: position advances along the current
    heading, then the heading turns."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return Pose(pose.x + action.v * math.cos(pose.psi) * dt,
                pose.y + action.v * math.sin(pose.psi) * dt,
                wrap_angle(pose.psi + action.w * dt))


def _ramp(current: float, target: float, step: float) -> float:
    if abs(target - current) <= step:
        return target
    return current + math.copysign(step, target - current)


@dataclass
class RandomWalkPolicy:
    """Random exploration: pick a target (v, w), ramp toward it under the
    acceleration limits, and once reached keep it with probability keep_prob
    at every decision tick (`decide_every` steps apart), otherwise draw a
    fresh target uniformly from the command box.

    The tick spacing sets how long commands persist: with twitchy targets
    the action recorded at a pose is hardly determined by the trail around
    it, which floors the supervised loss; a few-second dwell keeps commands
    coherent over the local-goal horizon while the target distribution
    still covers the whole command box.
    """

    dt: float = 0.05
    a_max: float = 2.0        # m/s^2
    alpha_max: float = 3.14   # rad/s^2
    v_min: float = 0.0
    v_max: float = 1.0
    w_max: float = 1.57
    keep_prob: float = 0.9
    decide_every: int = 10    # steps between keep/redraw decisions at target
    v: float = 0.0
    w: float = 0.0
    target_v: float = 0.0
    target_w: float = 0.0
    _tick: int = 0

    def step(self, rng: np.random.Generator) -> Action:
        if self.v == self.target_v and self.w == self.target_w:
            self._tick += 1
            if self._tick >= self.decide_every:
                self._tick = 0
                if rng.random() >= self.keep_prob:
                    self.target_v = float(rng.uniform(self.v_min, self.v_max))
                    self.target_w = float(rng.uniform(-self.w_max, self.w_max))
        self.v = _ramp(self.v, self.target_v, self.a_max * self.dt)
        self.w = _ramp(self.w, self.target_w, self.alpha_max * self.dt)
        return Action(self.v, self.w)


@dataclass
class Rollout:
    dt: float
    poses: np.ndarray    # (T+1, 3)
    actions: np.ndarray  # (T, 2) columns v, w


def rollout_policy(policy: RandomWalkPolicy, duration: float, dt: float,
                   rng: np.random.Generator,
                   start: Pose = Pose(0.0, 0.0, 0.0)) -> Rollout:
    steps = int(round(duration / dt))
    poses = np.empty((steps + 1, 3))
    actions = np.empty((steps, 2))
    pose = start
    poses[0] = (pose.x, pose.y, pose.psi)
    for i in range(steps):
        a = policy.step(rng)
        actions[i] = (a.v, a.w)
        pose = step_unicycle(pose, a, dt)
        poses[i + 1] = (pose.x, pose.y, pose.psi)
    return Rollout(dt, poses, actions)


@dataclass
class RawDatum:
    plan: list[Action]   # single-action plan executed at c_c
    c_c: Pose
    c_g: Pose
    trail: np.ndarray    # (n, 3) poses from c_c up to and including c_g


def data_from_rollout(rollout: Rollout, lookahead_s: float = 10.0,
                      local_goal_dist: float = 1.0) -> list[RawDatum]:
    poses = rollout.poses
    steps = rollout.actions.shape[0]
    window = int(round(lookahead_s / rollout.dt))
    seg = np.hypot(np.diff(poses[:, 0]), np.diff(poses[:, 1]))
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    data: list[RawDatum] = []
    for i in range(steps):
        end = min(steps, i + window)
        ahead = cum[i:end + 1] - cum[i]
        if ahead[-1] < local_goal_dist:
            continue  # not enough future path in the window
        j = int(np.searchsorted(ahead, local_goal_dist))
        if j > 1 and abs(ahead[j - 1] - local_goal_dist) < abs(ahead[j] - local_goal_dist):
            j -= 1
        j += i
        data.append(RawDatum(
            plan=[Action(float(rollout.actions[i, 0]), float(rollout.actions[i, 1]))],
            c_c=Pose(*map(float, poses[i])),
            c_g=Pose(*map(float, poses[j])),
            trail=poses[i:j + 1].copy(),
        ))
    return data


def collect_raw(policy: RandomWalkPolicy, duration: float, dt: float,
                rng: np.random.Generator, lookahead_s: float = 10.0,
                local_goal_dist: float = 1.0) -> list[RawDatum]:
    """Run the policy for `duration` seconds and cut one datum per usable
    timestep (see module docstring for the drop rule)."""
    if duration < 0.0:
        raise ValueError("duration must be non-negative")
    rollout = rollout_policy(policy, duration, dt, rng)
    return data_from_rollout(rollout, lookahead_s, local_goal_dist)


@dataclass(frozen=True)
class FootprintPair:
    left: Point2
    right: Point2
    center: Pose


def footprints(pose: Pose, robot_width: float) -> FootprintPair:
    """Left/right footprint points, half the robot width to each side of the
    centre, perpendicular to the heading."""
    if robot_width <= 0.0:
        raise ValueError("robot_width must be positive")
    half = robot_width / 2.0
    nx, ny = -math.sin(pose.psi), math.cos(pose.psi)
    return FootprintPair(Point2(pose.x + half * nx, pose.y + half * ny),
                         Point2(pose.x - half * nx, pose.y - half * ny),
                         pose)


def footprint_arrays(trail: np.ndarray, robot_width: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised footprints for a whole (n, 3) trail: (left, right), each (n, 2)."""
    half = robot_width / 2.0
    nx, ny = -np.sin(trail[:, 2]), np.cos(trail[:, 2])
    left = np.stack((trail[:, 0] + half * nx, trail[:, 1] + half * ny), axis=1)
    right = np.stack((trail[:, 0] - half * nx, trail[:, 1] - half * ny), axis=1)
    return left, right


def extract_turn_triples(trail: np.ndarray, robot_width: float,
                         omega_eps: float = 1e-3, dt: float = 0.05) -> list[TurnTriple]:
    """One turning triple per interior trail pose with |w| above omega_eps.

    The angular velocity at pose k is recovered from the recorded headings
    (psi[k+1] - psi[k]) / dt.  A left turn (w > 0) takes the left footprint
    points of poses k-1, k, k+1; a right turn takes the right ones.
    Colinear candidates are skipped.
    """
    n = trail.shape[0]
    if n < 3:
        return []
    left, right = footprint_arrays(trail, robot_width)
    dpsi = np.array([wrap_angle(float(d)) for d in np.diff(trail[:, 2])])
    triples: list[TurnTriple] = []
    thresh = omega_eps * dt
    for k in range(1, n - 1):
        if abs(dpsi[k]) <= thresh:
            continue
        side = left if dpsi[k] > 0.0 else right
        try:
            triples.append(TurnTriple(Point2(*side[k - 1]), Point2(*side[k]),
                                      Point2(*side[k + 1])))
        except ValueError:
            continue  # colinear footprint points
    return triples


RAW_HEADER = "# raw-plans v1"


def raw_data_lines(data: Iterable[RawDatum], seed: int) -> Iterator[str]:
    """Line-delimited serialization: header, then per datum the current pose,
    local goal pose, command, trail length and trail poses as decimal text."""
    yield f"{RAW_HEADER} seed={seed}"
    for d in data:
        parts = [repr(d.c_c.x), repr(d.c_c.y), repr(d.c_c.psi),
                 repr(d.c_g.x), repr(d.c_g.y), repr(d.c_g.psi),
                 repr(d.plan[0].v), repr(d.plan[0].w), str(d.trail.shape[0])]
        parts.extend(repr(float(v)) for v in d.trail.ravel())
        yield " ".join(parts)


def save_raw_data(path, data: Iterable[RawDatum], seed: int) -> None:
    with open(path, "w", newline="\n") as f:
        for line in raw_data_lines(data, seed):
            f.write(line + "\n")


def load_raw_data(path) -> tuple[list[RawDatum], int]:
    with open(path) as f:
        header = f.readline().strip()
        if not header.startswith(RAW_HEADER):
            raise ValueError(f"not a raw-plans file: {path}")
        seed = int(header.split("seed=")[1])
        data = []
        for line in f:
            tok = line.split()
            if not tok:
                continue
            n = int(tok[8])
            trail = np.array([float(t) for t in tok[9:9 + 3 * n]]).reshape(n, 3)
            data.append(RawDatum(
                plan=[Action(float(tok[6]), float(tok[7]))],
                c_c=Pose(float(tok[0]), float(tok[1]), float(tok[2])),
                c_g=Pose(float(tok[3]), float(tok[4]), float(tok[5])),
                trail=trail,
            ))
    return data, seed
