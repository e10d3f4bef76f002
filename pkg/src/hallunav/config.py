"""Pipeline configuration: every tunable of every stage with its default,
(de)serialized as flat ``section.key = value`` text so configs diff cleanly.
Unknown keys are rejected and ranges are validated on load.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field


@dataclass
class ExplorationConfig:
    dt: float = 0.05                # s, control period (20 Hz)
    duration_s: float = 505.0
    a_max: float = 2.0              # m/s^2 linear acceleration limit
    alpha_max: float = 3.14         # rad/s^2 angular acceleration limit
    v_min: float = 0.0
    v_max: float = 1.0
    w_max: float = 1.57
    keep_prob: float = 0.9
    redraw_period_s: float = 0.5
    robot_width: float = 0.43
    goal_radius: float = 0.1
    omega_eps: float = 1e-3
    lookahead_s: float = 10.0
    local_goal_dist: float = 1.0


@dataclass
class LidarConfig:
    beam_count: int = 720
    fov_deg: float = 270.0
    max_range: float = 1.0


@dataclass
class HallucinationConfig:
    sampling_count: int = 10
    alpha: float = 0.48
    delta_max: float = 0.05         # m, neighbour-continuation step bound
    offset_v_lo: float = 0.3
    offset_v_hi: float = 1.0
    empty_space_v: float = 0.8      # above this speed add an all-clear scan
    constrained_v: float = 0.3      # below this speed add a most-constrained scan
    chunk: int = 256


@dataclass
class LearnerConfig:
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 128
    epochs: int = 60
    lr_halve_every: int = 20


@dataclass
class WorldConfig:
    resolution: float = 0.15
    size_cells: int = 40
    fill_prob: float = 0.42
    ca_iterations: int = 3
    carve_radius: float = 0.6


@dataclass
class DeployConfig:
    dt: float = 0.05
    mpc_horizon_s: float = 1.0
    footprint_length: float = 0.51
    footprint_width: float = 0.43
    backup_v: float = -0.2
    rotate_speed: float = 1.0
    align_tol: float = 0.15
    goal_radius: float = 0.3
    stall_window_s: float = 5.0
    stall_dist: float = 0.05
    inflation_cells: int = 2
    replan_drift: float = 0.75


@dataclass
class BenchConfig:
    n_worlds: int = 30
    trials: int = 3
    time_cap_s: float = 50.0
    fill_levels: tuple = (0.0, 0.05, 0.1, 0.2, 0.3, 0.42)


@dataclass
class VerifyConfig:
    n_triples: int = 20
    resolution: float = 0.025


@dataclass
class PipelineConfig:
    seed: int = 7
    exploration: ExplorationConfig = field(default_factory=ExplorationConfig)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    hallucination: HallucinationConfig = field(default_factory=HallucinationConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    world: WorldConfig = field(default_factory=WorldConfig)
    deploy: DeployConfig = field(default_factory=DeployConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)


class ConfigError(ValueError):
    pass


def _sections(cfg: PipelineConfig):
    for f in dataclasses.fields(cfg):
        if dataclasses.is_dataclass(getattr(cfg, f.name)):
            yield f.name, getattr(cfg, f.name)


def dump_config(cfg: PipelineConfig) -> str:
    lines = [f"seed = {cfg.seed}"]
    for name, sec in _sections(cfg):
        for f in dataclasses.fields(sec):
            v = getattr(sec, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            else:
                v = repr(v)
            lines.append(f"{name}.{f.name} = {v}")
    return "\n".join(lines) + "\n"


def _coerce(default, raw: str, key: str):
    if isinstance(default, bool):
        if raw not in ("True", "False"):
            raise ConfigError(f"{key}: expected True/False, got {raw!r}")
        return raw == "True"
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected integer, got {raw!r}") from None
    if isinstance(default, float):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected number, got {raw!r}") from None
    if isinstance(default, tuple):
        try:
            return tuple(float(x) for x in raw.split(","))
        except ValueError:
            raise ConfigError(f"{key}: expected comma-separated numbers") from None
    raise ConfigError(f"{key}: unsupported type")


def load_config(text: str) -> PipelineConfig:
    cfg = PipelineConfig()
    sections = dict(_sections(cfg))
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key == "seed":
            cfg.seed = _coerce(cfg.seed, raw, key)
            continue
        if "." not in key:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        sec_name, attr = key.split(".", 1)
        sec = sections.get(sec_name)
        if sec is None or not hasattr(sec, attr):
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        setattr(sec, attr, _coerce(getattr(sec, attr), raw, key))
    validate_config(cfg)
    return cfg


def validate_config(cfg: PipelineConfig) -> None:
    c = cfg
    checks = [
        (c.exploration.dt > 0, "exploration.dt must be positive"),
        (c.exploration.duration_s >= 0, "exploration.duration_s must be >= 0"),
        (c.exploration.a_max > 0, "exploration.a_max must be positive"),
        (c.exploration.alpha_max > 0, "exploration.alpha_max must be positive"),
        (0 <= c.exploration.v_min <= c.exploration.v_max,
         "exploration velocity bounds out of order"),
        (c.exploration.w_max > 0, "exploration.w_max must be positive"),
        (0 <= c.exploration.keep_prob <= 1, "exploration.keep_prob must be in [0,1]"),
        (c.exploration.redraw_period_s > 0, "exploration.redraw_period_s must be positive"),
        (c.exploration.robot_width > 0, "exploration.robot_width must be positive"),
        (c.lidar.beam_count >= 2, "lidar.beam_count must be >= 2"),
        (0 < c.lidar.fov_deg <= 360, "lidar.fov_deg must be in (0, 360]"),
        (c.lidar.max_range > 0, "lidar.max_range must be positive"),
        (c.hallucination.sampling_count >= 1, "hallucination.sampling_count must be >= 1"),
        (0 <= c.hallucination.alpha <= 0.5, "hallucination.alpha must be in [0, 0.5]"),
        (c.hallucination.delta_max >= 0, "hallucination.delta_max must be >= 0"),
        (c.hallucination.offset_v_lo < c.hallucination.offset_v_hi,
         "hallucination offset endpoints out of order"),
        (c.learner.learning_rate > 0, "learner.learning_rate must be positive"),
        (0 <= c.learner.momentum < 1, "learner.momentum must be in [0, 1)"),
        (c.learner.batch_size >= 1, "learner.batch_size must be >= 1"),
        (c.learner.epochs >= 1, "learner.epochs must be >= 1"),
        (c.learner.lr_halve_every >= 1, "learner.lr_halve_every must be >= 1"),
        (c.world.resolution > 0, "world.resolution must be positive"),
        (c.world.size_cells >= 20, "world.size_cells must be >= 20"),
        (0 <= c.world.fill_prob <= 1, "world.fill_prob must be in [0, 1]"),
        (c.deploy.dt > 0, "deploy.dt must be positive"),
        (c.deploy.mpc_horizon_s > 0, "deploy.mpc_horizon_s must be positive"),
        (c.deploy.backup_v < 0, "deploy.backup_v must be negative"),
        (c.bench.n_worlds >= 1, "bench.n_worlds must be >= 1"),
        (c.bench.trials >= 1, "bench.trials must be >= 1"),
        (c.bench.time_cap_s > 0, "bench.time_cap_s must be positive"),
        (all(0 <= f <= 1 for f in c.bench.fill_levels),
         "bench.fill_levels must be in [0, 1]"),
        (c.verify.n_triples >= 1, "verify.n_triples must be >= 1"),
        (c.verify.resolution > 0, "verify.resolution must be positive"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)


def load_config_file(path) -> PipelineConfig:
    with open(path) as f:
        return load_config(f.read())


def save_config_file(path, cfg: PipelineConfig) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(dump_config(cfg))
