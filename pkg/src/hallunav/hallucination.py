"""Turn open-space motion data into synthetic LiDAR training scans.

For each recorded datum the trail's turning triples each contribute one
blocking wall (the segment from the turn's inner footprint point to its
mirror image across the chord of its neighbours).  The trail's left/right
footprint polylines bound a corridor that is guaranteed free.  Both map
onto per-beam [min, max] range envelopes: the corridor boundary gives the
minimum a beam may read (anything nearer would put an obstacle inside the
free corridor), the nearest wall intersection caps the maximum.  Scans are
then sampled inside the envelopes with neighbour-to-neighbour continuity
and a speed-dependent range offset, so the recorded command looks optimal
against many plausible obstacle fields.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .exploration import Action, Pose, RawDatum, footprint_arrays, wrap_angle

_PARALLEL_EPS = 1e-12
_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class LidarSpec:
    beam_count: int = 720
    fov: float = 1.5 * math.pi   # field of view, centred on the heading
    max_range: float = 1.0

    def __post_init__(self) -> None:
        if self.beam_count < 2:
            raise ValueError("beam_count must be at least 2")
        if not 0.0 < self.fov <= 2.0 * math.pi:
            raise ValueError("fov must be in (0, 2*pi]")
        if self.max_range <= 0.0:
            raise ValueError("max_range must be positive")

    def relative_angles(self) -> np.ndarray:
        return np.linspace(-self.fov / 2.0, self.fov / 2.0, self.beam_count)


@dataclass
class LidarEnvelope:
    min: np.ndarray   # (beam_count,)
    max: np.ndarray   # (beam_count,)
    flagged: int = 0  # beams where a wall lay nearer than the free boundary


@dataclass
class HallucinatedSetUnion:
    segments: np.ndarray   # (k, 4) wall segments: ax, ay, bx, by
    left: np.ndarray       # (n, 2) left footprint polyline
    right: np.ndarray      # (n, 2) right footprint polyline


def _reflect_rows(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise mirror image of p across the line a-b (all (k, 2))."""
    ab = b - a
    d2 = np.einsum("ij,ij->i", ab, ab)
    t = np.einsum("ij,ij->i", p - a, ab) / d2
    foot = a + t[:, None] * ab
    return 2.0 * foot - p


def hallucinate_min(datum: RawDatum, robot_width: float,
                    omega_eps: float = 1e-3, dt: float = 0.05) -> HallucinatedSetUnion:
    """Blocking walls for every turning triple of the trail, plus the
    footprint boundary polylines of the whole trail."""
    trail = datum.trail
    left, right = footprint_arrays(trail, robot_width)
    n = trail.shape[0]
    segments = np.empty((0, 4))
    if n >= 3:
        dpsi = np.array([wrap_angle(float(d)) for d in np.diff(trail[:, 2])])
        ks = [k for k in range(1, n - 1) if abs(dpsi[k]) > omega_eps * dt]
        if ks:
            ks = np.array(ks)
            sides = np.where(dpsi[ks, None] > 0.0, left[ks], right[ks])
            prevs = np.where(dpsi[ks, None] > 0.0, left[ks - 1], right[ks - 1])
            nexts = np.where(dpsi[ks, None] > 0.0, left[ks + 1], right[ks + 1])
            chord = nexts - prevs
            rel = sides - prevs
            cross = chord[:, 0] * rel[:, 1] - chord[:, 1] * rel[:, 0]
            ok = np.abs(cross) > 1e-12
            if ok.any():
                cm = sides[ok]
                mirror = _reflect_rows(cm, prevs[ok], nexts[ok])
                segments = np.concatenate((cm, mirror), axis=1)
    return HallucinatedSetUnion(segments, left, right)


def _ray_segment_t(origin: np.ndarray, dirs: np.ndarray,
                   segs: np.ndarray) -> np.ndarray:
    """Intersection distances of B rays with E segments, (B, E); np.inf
    where there is no hit.  Rays: origin (2,), dirs (B, 2).  Segments (E, 4)."""
    if segs.shape[0] == 0:
        return np.full((dirs.shape[0], 0), np.inf)
    p = segs[:, 0:2]
    r = segs[:, 2:4] - p
    diff = p - origin                                # (E, 2)
    denom = dirs[:, 0:1] * r[:, 1] - dirs[:, 1:2] * r[:, 0]   # (B, E)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (diff[:, 0] * r[:, 1] - diff[:, 1] * r[:, 0]) / denom
        u = (dirs[:, 0:1] * diff[:, 1] - dirs[:, 1:2] * diff[:, 0]) / -denom
    valid = (np.abs(denom) > _PARALLEL_EPS) & (t >= -_EDGE_EPS) \
        & (u >= -_EDGE_EPS) & (u <= 1.0 + _EDGE_EPS)
    return np.where(valid, t, np.inf)


def _boundary_edges(union: HallucinatedSetUnion) -> np.ndarray:
    """Edges of the closed swept-corridor polygon: both footprint polylines
    plus the start and end caps."""
    left, right = union.left, union.right
    edges = [np.concatenate((left[:-1], left[1:]), axis=1),
             np.concatenate((right[:-1], right[1:]), axis=1),
             np.concatenate((left[:1], right[:1]), axis=1),
             np.concatenate((left[-1:], right[-1:]), axis=1)]
    return np.concatenate(edges, axis=0)


def envelope(union: HallucinatedSetUnion, sensor: LidarSpec,
             sensor_pose: Pose) -> LidarEnvelope:
    """Per-beam admissible range interval.

    min: the farthest crossing of the corridor-polygon boundary along the
    beam (beyond it the beam is outside the guaranteed-free corridor for
    good), or 0 when the beam never crosses it.  max: the nearest wall
    intersection, else the sensor limit.  When a wall lies nearer than the
    free boundary (sharp turns), max is raised to min and the beam counted
    in `flagged`.
    """
    angles = sensor_pose.psi + sensor.relative_angles()
    dirs = np.stack((np.cos(angles), np.sin(angles)), axis=1)
    origin = np.array((sensor_pose.x, sensor_pose.y))

    t_bound = _ray_segment_t(origin, dirs, _boundary_edges(union))
    finite = np.where(np.isfinite(t_bound), t_bound, -np.inf)
    far = finite.max(axis=1, initial=-np.inf)
    mins = np.where(far > 0.0, far, 0.0)
    mins = np.minimum(mins, sensor.max_range)

    t_wall = _ray_segment_t(origin, dirs, union.segments)
    near_wall = t_wall.min(axis=1, initial=np.inf)
    maxs = np.minimum(near_wall, sensor.max_range)

    flagged = int(np.count_nonzero(mins > maxs))
    maxs = np.maximum(maxs, mins)
    return LidarEnvelope(mins, maxs, flagged)


def offset(plan: Sequence[Action], v_lo: float = 0.3, v_hi: float = 1.0) -> float:
    """Speed-dependent range offset in metres: 0 at or below v_lo, 1 at or
    above v_hi, linear in between."""
    v = plan[0].v
    if v <= v_lo:
        return 0.0
    if v >= v_hi:
        return 1.0
    return (v - v_lo) / (v_hi - v_lo)


def _sample_chain(fresh: np.ndarray, branch: np.ndarray, delta: np.ndarray,
                  lo: np.ndarray, hi: np.ndarray, off: np.ndarray,
                  alpha: float, delta_max: float) -> np.ndarray:
    """Shared sampling core.  All inputs broadcast to (rows, beams): fresh,
    branch, delta are uniform [0,1) draws; lo/hi the envelopes; off the
    per-row offset.  Beam 0 is a fresh draw plus offset; each later beam
    continues the previous value up/down by a small amount with probability
    alpha each, else redraws fresh plus offset; every value is clamped to
    its beam's interval."""
    rows, beams = np.broadcast_shapes(fresh.shape, lo.shape)
    lo = np.broadcast_to(lo, (rows, beams))
    hi = np.broadcast_to(hi, (rows, beams))
    off = np.broadcast_to(off, (rows, 1))
    span = hi - lo
    out = np.empty((rows, beams))
    prev = np.clip(lo[:, 0] + fresh[:, 0] * span[:, 0] + off[:, 0],
                   lo[:, 0], hi[:, 0])
    out[:, 0] = prev
    for i in range(1, beams):
        d = delta[:, i] * delta_max
        fresh_i = lo[:, i] + fresh[:, i] * span[:, i] + off[:, 0]
        up = branch[:, i] < alpha
        down = (branch[:, i] >= alpha) & (branch[:, i] < 2.0 * alpha)
        val = np.where(up, prev + d, np.where(down, prev - d, fresh_i))
        prev = np.clip(val, lo[:, i], hi[:, i])
        out[:, i] = prev
    return out


def sample_scan(env: LidarEnvelope, plan: Sequence[Action], alpha: float,
                rng: np.random.Generator, delta_max: float = 0.05,
                v_lo: float = 0.3, v_hi: float = 1.0) -> np.ndarray:
    """One sampled scan inside the envelope (see _sample_chain).  Draws three
    uniform vectors (fresh values, branch choices, step sizes) in that order."""
    if not 0.0 <= alpha <= 0.5:
        raise ValueError("alpha must be in [0, 0.5]")
    beams = env.min.shape[0]
    fresh = rng.random((1, beams))
    branch = rng.random((1, beams))
    delta = rng.random((1, beams))
    off = np.array([[offset(plan, v_lo, v_hi)]])
    return _sample_chain(fresh, branch, delta, env.min[None, :],
                         env.max[None, :], off, alpha, delta_max)[0]


@dataclass
class TrainDatum:
    scan: np.ndarray
    plan: list[Action]
    c_c: Pose
    c_g: Pose


@dataclass
class TrainingSet:
    """Column-oriented training data; indexing yields TrainDatum views."""

    scans: np.ndarray    # (N, beams)
    v: np.ndarray        # (N,)
    w: np.ndarray        # (N,)
    c_c: np.ndarray      # (N, 3)
    c_g: np.ndarray      # (N, 3)
    manifest: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.scans.shape[0]

    def __getitem__(self, i: int) -> TrainDatum:
        return TrainDatum(self.scans[i], [Action(float(self.v[i]), float(self.w[i]))],
                          Pose(*map(float, self.c_c[i])), Pose(*map(float, self.c_g[i])))


def augment_dataset(raw: Sequence[RawDatum], sampling_count: int = 10,
                    alpha: float = 0.48, seed: int = 0, *,
                    robot_width: float = 0.43,
                    sensor: LidarSpec | None = None,
                    delta_max: float = 0.05,
                    omega_eps: float = 1e-3, dt: float = 0.05,
                    v_lo: float = 0.3, v_hi: float = 1.0,
                    empty_space_v: float = 0.8, constrained_v: float = 0.3,
                    chunk: int = 256) -> TrainingSet:
    """The full hallucination stage: per raw datum, `sampling_count` sampled
    scans plus two unconditional augmentation slots, so the output size is
    exactly (sampling_count + 2) per datum.

    The first extra slot holds an all-clear scan (every beam at the sensor
    limit) when the datum is fast (v > empty_space_v), else one more sample.
    The second holds the most-constrained scan (every beam at its
    boundary-derived minimum) when the datum is slow (v < constrained_v),
    else one more sample.  Each datum draws from its own random stream
    derived from (seed, datum index), so chunked, serial and parallel runs
    agree.
    """
    if not raw:
        raise ValueError("raw dataset is empty")
    if not 0.0 <= alpha <= 0.5:
        raise ValueError("alpha must be in [0, 0.5]")
    if sampling_count < 1:
        raise ValueError("sampling_count must be at least 1")
    sensor = sensor or LidarSpec()
    beams = sensor.beam_count
    per = sampling_count + 2
    n_raw = len(raw)
    total = n_raw * per

    scans = np.empty((total, beams))
    v = np.empty(total)
    w = np.empty(total)
    cc = np.empty((total, 3))
    cg = np.empty((total, 3))
    flagged_total = 0

    for c0 in range(0, n_raw, chunk):
        idx = range(c0, min(c0 + chunk, n_raw))
        k = len(idx)
        lo = np.empty((k, beams))
        hi = np.empty((k, beams))
        offs = np.empty((k, 1))
        fresh = np.empty((k * per, beams))
        branch = np.empty((k * per, beams))
        delta = np.empty((k * per, beams))
        for j, di in enumerate(idx):
            d = raw[di]
            union = hallucinate_min(d, robot_width, omega_eps, dt)
            env = envelope(union, sensor, d.c_c)
            flagged_total += env.flagged
            lo[j], hi[j] = env.min, env.max
            offs[j, 0] = offset(d.plan, v_lo, v_hi)
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(di,)))
            sl = slice(j * per, (j + 1) * per)
            fresh[sl] = rng.random((per, beams))
            branch[sl] = rng.random((per, beams))
            delta[sl] = rng.random((per, beams))
        rep = np.repeat(np.arange(k), per)
        block = _sample_chain(fresh, branch, delta, lo[rep], hi[rep],
                              offs[rep], alpha, delta_max)
        for j, di in enumerate(idx):
            d = raw[di]
            rows = block[j * per:(j + 1) * per]
            if d.plan[0].v > empty_space_v:
                rows[sampling_count] = sensor.max_range
            if d.plan[0].v < constrained_v:
                rows[sampling_count + 1] = lo[j]
            out = slice(di * per, (di + 1) * per)
            scans[out] = rows
            v[out] = d.plan[0].v
            w[out] = d.plan[0].w
            cc[out] = (d.c_c.x, d.c_c.y, d.c_c.psi)
            cg[out] = (d.c_g.x, d.c_g.y, d.c_g.psi)

    manifest = {
        "format": "train-scans v1",
        "seed": seed,
        "alpha": alpha,
        "sampling_count": sampling_count,
        "delta_max": delta_max,
        "robot_width": robot_width,
        "raw_count": n_raw,
        "train_count": total,
        "flagged_beams": flagged_total,
    }
    return TrainingSet(scans, v, w, cc, cg, manifest)


TRAIN_HEADER = "# train-scans v1"


def training_set_lines(ts: TrainingSet) -> Iterator[str]:
    """Line-delimited serialization: ranges to 0.1 mm, then the command and
    the two poses at full precision."""
    yield f"{TRAIN_HEADER} count={len(ts)}"
    for i in range(len(ts)):
        scan = " ".join(f"{x:.4f}" for x in ts.scans[i])
        rest = " ".join(repr(float(x)) for x in
                        (ts.v[i], ts.w[i], *ts.c_c[i], *ts.c_g[i]))
        yield f"{scan} {rest}"


def save_training_set(path, ts: TrainingSet) -> None:
    with open(path, "w", newline="\n") as f:
        for line in training_set_lines(ts):
            f.write(line + "\n")
    with open(manifest_path(path), "w", newline="\n") as f:
        json.dump(ts.manifest, f, sort_keys=True, indent=1)
        f.write("\n")


def manifest_path(path) -> str:
    return str(path) + ".manifest.json"


def load_training_set(path) -> TrainingSet:
    with open(path) as f:
        header = f.readline().strip()
        if not header.startswith(TRAIN_HEADER):
            raise ValueError(f"not a train-scans file: {path}")
    mat = np.loadtxt(path, comments="#", ndmin=2)
    beams = mat.shape[1] - 8
    manifest = {}
    try:
        with open(manifest_path(path)) as f:
            manifest = json.load(f)
    except FileNotFoundError:
        pass
    return TrainingSet(mat[:, :beams], mat[:, beams], mat[:, beams + 1],
                       mat[:, beams + 2:beams + 5], mat[:, beams + 5:beams + 8],
                       manifest)
