"""Command-line interface: collect, hallucinate, train, bench, verify.

Exit codes: 0 success, 1 validation error (bad flags, bad config, bad
inputs), 2 runtime failure.  Diagnostics go to stderr; all outputs are
deterministic for a fixed --seed.
"""

from __future__ import annotations

import argparse
import math
import multiprocessing
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import config as cfgmod
from . import exploration, hallucination, learner, simworld, verification
from .config import ConfigError, PipelineConfig
from .lattice import PathNotFound
from .simworld import WorldGenError


def _policy_from_config(cfg: PipelineConfig) -> exploration.RandomWalkPolicy:
    e = cfg.exploration
    return exploration.RandomWalkPolicy(
        dt=e.dt, a_max=e.a_max, alpha_max=e.alpha_max, v_min=e.v_min,
        v_max=e.v_max, w_max=e.w_max, keep_prob=e.keep_prob,
        decide_every=max(1, round(e.redraw_period_s / e.dt)))


def _sensor_from_config(cfg: PipelineConfig) -> hallucination.LidarSpec:
    return hallucination.LidarSpec(cfg.lidar.beam_count,
                                   math.radians(cfg.lidar.fov_deg),
                                   cfg.lidar.max_range)


def _limits_from_config(cfg: PipelineConfig) -> simworld.EpisodeLimits:
    d = cfg.deploy
    return simworld.EpisodeLimits(
        dt=d.dt, time_cap_s=cfg.bench.time_cap_s, goal_radius=d.goal_radius,
        stall_window_s=d.stall_window_s, stall_dist=d.stall_dist,
        inflation_cells=d.inflation_cells, replan_drift=d.replan_drift,
        local_goal_dist=cfg.exploration.local_goal_dist,
        rotate_speed=d.rotate_speed, backup_v=d.backup_v,
        align_tol=d.align_tol, carve_radius=cfg.world.carve_radius,
        safety=simworld.SafetyConfig(d.dt, d.mpc_horizon_s,
                                     d.footprint_length, d.footprint_width),
        sensor=_sensor_from_config(cfg))


def cmd_collect(cfg: PipelineConfig, out: str) -> int:
    e = cfg.exploration
    if e.duration_s < e.lookahead_s:
        print("warning: duration shorter than the lookahead window; "
              "the dataset will be empty", file=sys.stderr)
    rng = np.random.default_rng(cfg.seed)
    data = exploration.collect_raw(_policy_from_config(cfg), e.duration_s,
                                   e.dt, rng, e.lookahead_s, e.local_goal_dist)
    exploration.save_raw_data(out, data, cfg.seed)
    print(f"collected {len(data)} data points -> {out}")
    return 0


def cmd_hallucinate(cfg: PipelineConfig, raw_path: str, out: str) -> int:
    data, _ = exploration.load_raw_data(raw_path)
    h = cfg.hallucination
    ts = hallucination.augment_dataset(
        data, h.sampling_count, h.alpha, cfg.seed,
        robot_width=cfg.exploration.robot_width,
        sensor=_sensor_from_config(cfg), delta_max=h.delta_max,
        omega_eps=cfg.exploration.omega_eps, dt=cfg.exploration.dt,
        v_lo=h.offset_v_lo, v_hi=h.offset_v_hi, empty_space_v=h.empty_space_v,
        constrained_v=h.constrained_v, chunk=h.chunk)
    hallucination.save_training_set(out, ts)
    print(f"hallucinated {len(ts)} training scans from {len(data)} raw "
          f"data points -> {out}")
    return 0


def cmd_train(cfg: PipelineConfig, data_path: str, out: str) -> int:
    ts = hallucination.load_training_set(data_path)
    tc = learner.TrainConfig(cfg.learner.learning_rate, cfg.learner.momentum,
                             cfg.learner.batch_size, cfg.learner.epochs,
                             cfg.learner.lr_halve_every, cfg.seed)
    params, losses = learner.train(ts, tc, cfg.lidar.max_range)
    learner.save_model(out, params)
    loss_path = out + ".losscurve.txt"
    with open(loss_path, "w", newline="\n") as f:
        for i, loss in enumerate(losses):
            f.write(f"{i} {loss!r}\n")
    print(f"trained on {len(ts)} samples: loss {losses[0]:.6f} -> "
          f"{losses[-1]:.6f} over {cfg.learner.epochs} epochs -> {out}")
    return 0


@dataclass
class BenchRecord:
    world_index: int
    world_seed: int
    fill: float
    trial: int
    outcome: str
    time: float
    recoveries: int
    collisions: int

    def line(self) -> str:
        return (f"world={self.world_index} seed={self.world_seed} "
                f"fill={self.fill!r} trial={self.trial} outcome={self.outcome} "
                f"time={self.time:.2f} recoveries={self.recoveries} "
                f"collisions={self.collisions}")


def world_seed_for(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(entropy=seed,
                                      spawn_key=(index,)).generate_state(1)[0])


def bench_tasks(cfg: PipelineConfig) -> list[tuple[int, int, float]]:
    levels = cfg.bench.fill_levels
    return [(i, world_seed_for(cfg.seed, i), levels[i % len(levels)])
            for i in range(cfg.bench.n_worlds)]


_POOL: dict = {}


def _bench_init(params, cfg):
    _POOL["params"] = params
    _POOL["cfg"] = cfg


def _bench_world(task):
    i, wseed, fill = task
    cfg: PipelineConfig = _POOL["cfg"]
    grid = simworld.generate_world(wseed, cfg.world.size_cells, fill,
                                   cfg.world.ca_iterations,
                                   cfg.world.resolution,
                                   cfg.world.carve_radius)
    limits = _limits_from_config(cfg)
    out = []
    for trial in range(cfg.bench.trials):
        r = simworld.run_episode(grid, _POOL["params"], limits)
        out.append(BenchRecord(i, wseed, fill, trial, r.outcome,
                               r.traversal_time, r.recovery_activations,
                               r.collision_count))
    return out


def run_benchmark(cfg: PipelineConfig, params, workers: int = 0
                  ) -> list[BenchRecord]:
    """Deterministic episode records over the configured world mix; worlds
    fan out across a process pool when workers != 1."""
    tasks = bench_tasks(cfg)
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers == 1:
        _bench_init(params, cfg)
        nested = [_bench_world(t) for t in tasks]
    else:
        with multiprocessing.Pool(workers, initializer=_bench_init,
                                  initargs=(params, cfg)) as pool:
            nested = pool.map(_bench_world, tasks)
    records = [r for group in nested for r in group]
    records.sort(key=lambda r: (r.world_index, r.trial))
    return records


def summarize_benchmark(records: list[BenchRecord]) -> str:
    n = len(records)
    succ = [r for r in records if r.outcome == "success"]
    easy = [r for r in records if r.fill <= 0.1]
    easy_succ = [r for r in easy if r.outcome == "success"]
    lines = ["# bench summary v1",
             f"episodes={n}",
             f"success={len(succ)}",
             f"timeout={sum(1 for r in records if r.outcome == 'timeout')}",
             f"stuck={sum(1 for r in records if r.outcome == 'stuck')}",
             f"collisions={sum(r.collisions for r in records)}",
             f"success_rate={len(succ) / n:.4f}" if n else "success_rate=nan"]
    if easy:
        lines.append(f"easy_success_rate={len(easy_succ) / len(easy):.4f}")
    if succ:
        times = np.array([r.time for r in succ])
        lines.append(f"mean_success_time={times.mean():.3f}")
        lines.append(f"std_success_time={times.std():.3f}")
    return "\n".join(lines) + "\n"


def trajectory_svg(cfg: PipelineConfig, params, tasks, limits,
                   scale: float = 40.0) -> str:
    """Static vector rendering: obstacle cells plus the executed trajectory
    for each given (index, seed, fill) task, laid out in a row."""
    cols = []
    for i, wseed, fill in tasks:
        grid = simworld.generate_world(wseed, cfg.world.size_cells, fill,
                                       cfg.world.ca_iterations,
                                       cfg.world.resolution,
                                       cfg.world.carve_radius)
        result = simworld.run_episode(grid, params, limits)
        cols.append((grid, result))
    if not cols:
        return "<svg xmlns='http://www.w3.org/2000/svg'/>\n"
    side = cols[0][0].size_m[0]
    pad = 0.2 * scale
    w = side * scale
    total_w = len(cols) * (w + pad) + pad
    total_h = w + 2 * pad
    parts = [f"<svg xmlns='http://www.w3.org/2000/svg' "
             f"width='{total_w:.0f}' height='{total_h:.0f}'>"]
    for k, (grid, result) in enumerate(cols):
        ox = pad + k * (w + pad)
        res = grid.resolution * scale
        parts.append(f"<g transform='translate({ox:.1f},{pad:.1f})'>")
        parts.append(f"<rect width='{w:.1f}' height='{w:.1f}' fill='white' "
                     f"stroke='black'/>")
        ys, xs = np.nonzero(grid.occupied)
        for x, y in zip(xs, ys):
            parts.append(f"<rect x='{x * res:.1f}' y='{(grid.height - 1 - y) * res:.1f}' "
                         f"width='{res:.1f}' height='{res:.1f}' fill='#444'/>")
        pts = " ".join(f"{p[0] * scale:.1f},{(side - p[1]) * scale:.1f}"
                       for p in result.path)
        color = {"success": "#2a2", "timeout": "#d80", "stuck": "#c22"}[result.outcome]
        parts.append(f"<polyline points='{pts}' fill='none' stroke='{color}' "
                     f"stroke-width='2'/>")
        sx, sy = grid.start.x, grid.start.y
        gx, gy = grid.goal
        parts.append(f"<circle cx='{sx * scale:.1f}' cy='{(side - sy) * scale:.1f}' "
                     f"r='4' fill='blue'/>")
        parts.append(f"<circle cx='{gx * scale:.1f}' cy='{(side - gy) * scale:.1f}' "
                     f"r='4' fill='green'/>")
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_bench(cfg: PipelineConfig, model_path: str, out_dir: str,
              workers: int) -> int:
    params = learner.load_model(model_path)
    os.makedirs(out_dir, exist_ok=True)
    records = run_benchmark(cfg, params, workers)
    with open(os.path.join(out_dir, "results.txt"), "w", newline="\n") as f:
        f.write(f"# bench v1 seed={cfg.seed}\n")
        for r in records:
            f.write(r.line() + "\n")
    summary = summarize_benchmark(records)
    with open(os.path.join(out_dir, "summary.txt"), "w", newline="\n") as f:
        f.write(summary)
    svg = trajectory_svg(cfg, params, bench_tasks(cfg)[:6],
                         _limits_from_config(cfg))
    with open(os.path.join(out_dir, "trajectories.svg"), "w", newline="\n") as f:
        f.write(svg)
    sys.stdout.write(summary)
    return 0


def cmd_verify(cfg: PipelineConfig, out: str) -> int:
    report = verification.run_verification(cfg.seed, cfg.verify.n_triples,
                                           cfg.verify.resolution)
    text = report.render()
    with open(out, "w", newline="\n") as f:
        f.write(text)
    print(text.strip().splitlines()[-1])
    return 0 if report.passed else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hallunav",
                                description=__doc__.splitlines()[0])
    p.add_argument("--config", help="config file (flat section.key = value)")
    p.add_argument("--seed", type=int, help="override the configured seed")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("collect", help="run the random policy, write raw data")
    c.add_argument("--out", required=True)
    c.add_argument("--duration", type=float, help="override duration (s)")

    h = sub.add_parser("hallucinate", help="raw data -> training scans")
    h.add_argument("--raw", required=True)
    h.add_argument("--out", required=True)

    t = sub.add_parser("train", help="training scans -> model")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="benchmark a model over generated worlds")
    b.add_argument("--model", required=True)
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--workers", type=int, default=0,
                   help="worker processes (0 = logical cores)")

    v = sub.add_parser("verify", help="geometry/oracle verification sweep")
    v.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        if args.config:
            cfg = cfgmod.load_config_file(args.config)
        else:
            cfg = PipelineConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        if args.command == "collect":
            if args.duration is not None:
                if args.duration < 0:
                    raise ConfigError("duration must be non-negative")
                cfg.exploration.duration_s = args.duration
            return cmd_collect(cfg, args.out)
        if args.command == "hallucinate":
            return cmd_hallucinate(cfg, args.raw, args.out)
        if args.command == "train":
            return cmd_train(cfg, args.data, args.out)
        if args.command == "bench":
            return cmd_bench(cfg, args.model, args.out, args.workers)
        if args.command == "verify":
            return cmd_verify(cfg, args.out)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, RuntimeError, PathNotFound, WorldGenError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
