"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL
line.  The default-configuration pipeline (collect -> hallucinate -> train)
is built once per session and reused; the determinism criterion rebuilds it
from scratch and compares bytes.
"""

import hashlib
import math
import time

import numpy as np
import pytest

from hallunav import cli
from hallunav.config import PipelineConfig
from hallunav.exploration import RandomWalkPolicy, collect_raw, raw_data_lines
from hallunav.hallucination import (LidarSpec, augment_dataset, envelope,
                                    hallucinate_min, offset, sample_scan,
                                    training_set_lines)
from hallunav.learner import (TrainConfig, forward, gradient_check,
                              init_params, save_model, train)
from hallunav.verification import run_verification

CFG = PipelineConfig()


def _policy():
    e = CFG.exploration
    return RandomWalkPolicy(dt=e.dt, a_max=e.a_max, alpha_max=e.alpha_max,
                            v_min=e.v_min, v_max=e.v_max, w_max=e.w_max,
                            keep_prob=e.keep_prob,
                            decide_every=max(1, round(e.redraw_period_s / e.dt)))


def _collect():
    rng = np.random.default_rng(CFG.seed)
    e = CFG.exploration
    return collect_raw(_policy(), e.duration_s, e.dt, rng, e.lookahead_s,
                       e.local_goal_dist)


def _augment(raw):
    h = CFG.hallucination
    return augment_dataset(raw, h.sampling_count, h.alpha, CFG.seed,
                           robot_width=CFG.exploration.robot_width,
                           delta_max=h.delta_max,
                           omega_eps=CFG.exploration.omega_eps,
                           dt=CFG.exploration.dt)


def _train(ts):
    lc = CFG.learner
    return train(ts, TrainConfig(lc.learning_rate, lc.momentum, lc.batch_size,
                                 lc.epochs, lc.lr_halve_every, CFG.seed))


def _hash_lines(lines):
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()


def _model_bytes(params):
    import io
    import os
    import tempfile
    fd, path = tempfile.mkstemp()
    os.close(fd)
    try:
        save_model(path, params)
        with open(path, "rb") as f:
            return f.read()
    finally:
        os.unlink(path)


@pytest.fixture(scope="session")
def pipeline():
    t0 = time.perf_counter()
    raw = _collect()
    ts = _augment(raw)
    params, losses = _train(ts)
    build_s = time.perf_counter() - t0
    return {"raw": raw, "ts": ts, "params": params, "losses": losses,
            "build_s": build_s}


def _verdict(name, ok, detail=""):
    print(f"acceptance {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name} failed: {detail}"


# -- criterion 1: minimality/region suite on random triples ------------------

@pytest.fixture(scope="session")
def verification_report():
    t0 = time.perf_counter()
    report = run_verification(CFG.seed, CFG.verify.n_triples,
                              CFG.verify.resolution)
    return report, time.perf_counter() - t0


def test_criterion_1_minimality_suite(verification_report):
    report, elapsed = verification_report
    n = len(report.checks)
    def1 = all(c.def1_passed for _, c in report.checks)
    prop1 = all(c.prop1_passed for _, c in report.checks)
    prop4 = all(c.prop4_passed for _, c in report.checks)
    ok = n >= 2 * CFG.verify.n_triples and def1 and prop1 and prop4 \
        and elapsed < 60.0
    _verdict("criterion-1 minimality/region suite", ok,
             f"(sets={n}, removal-changes-optimum={def1}, "
             f"optimum-near-removed={prop1}, cells-in-region={prop4}, "
             f"runtime={elapsed:.1f}s)")


def test_criterion_2_turn_point_anchoring(verification_report):
    report, _ = verification_report
    anchors = all(c.anchor_ok for _, c in report.checks)
    lengths = all(c.length_ok for _, c in report.checks)
    worst = max(abs(c.taut_len_m - c.expected_len_m) / c.expected_len_m
                for _, c in report.checks)
    _verdict("criterion-2 turn-point anchoring", anchors and lengths,
             f"(anchor-grazed={anchors}, lengths-within-3%={lengths}, "
             f"worst-error={worst * 100:.2f}%)")


# -- criterion 3: envelope soundness ------------------------------------------


def _crossing_count(px, py, poly):
    x1, y1 = poly[:, 0], poly[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    cond = (y1[None, :] > py[:, None]) != (y2[None, :] > py[:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (py[:, None] - y1) * (x2 - x1) / (y2 - y1)
    return np.sum(cond & (px[:, None] < xint), axis=1)


def _dist_to_poly(px, py, poly):
    ax, ay = poly[:, 0], poly[:, 1]
    bx, by = np.roll(ax, -1), np.roll(ay, -1)
    dx, dy = bx - ax, by - ay
    L2 = np.maximum(dx * dx + dy * dy, 1e-300)
    t = np.clip(((px[:, None] - ax) * dx + (py[:, None] - ay) * dy) / L2, 0, 1)
    qx = ax + t * dx
    qy = ay + t * dy
    return np.min(np.hypot(px[:, None] - qx, py[:, None] - qy), axis=1)


def test_criterion_3_envelope_soundness(pipeline):
    rng = np.random.default_rng(101)
    raw = pipeline["raw"]
    idx = rng.choice(len(raw), size=100, replace=False)
    spec = LidarSpec()
    angles = spec.relative_angles()
    srng = np.random.default_rng(102)
    inside_violations = 0
    out_of_envelope = 0
    total_beams = 0
    for i in idx:
        d = raw[i]
        union = hallucinate_min(d, CFG.exploration.robot_width)
        env = envelope(union, spec, d.c_c)
        poly = np.concatenate((union.left, union.right[::-1]), axis=0)
        for _ in range(10):
            scan = sample_scan(env, d.plan, CFG.hallucination.alpha, srng)
            total_beams += scan.shape[0]
            out_of_envelope += int(np.sum((scan < env.min - 1e-12)
                                          | (scan > env.max + 1e-12)))
            returned = scan < spec.max_range - 1e-12
            world = angles[returned] + d.c_c.psi
            px = d.c_c.x + scan[returned] * np.cos(world)
            py = d.c_c.y + scan[returned] * np.sin(world)
            inside = _crossing_count(px, py, poly) % 2 == 1
            if inside.any():
                deep = _dist_to_poly(px[inside], py[inside], poly) > 1e-9
                inside_violations += int(np.sum(deep))
    ok = inside_violations == 0 and out_of_envelope == 0
    _verdict("criterion-3 envelope soundness", ok,
             f"(obstacle-points-inside-corridor={inside_violations}, "
             f"beams-outside-envelope={out_of_envelope} of {total_beams})")


def test_criterion_4_cardinality_identity(pipeline):
    raw, ts = pipeline["raw"], pipeline["ts"]
    exact = len(ts) == 12 * len(raw)
    man = ts.manifest
    recorded = man["sampling_count"] == 10 and man["alpha"] == 0.48
    small = augment_dataset(raw[:37], 10, 0.48, seed=3)
    _verdict("criterion-4 cardinality identity",
             exact and recorded and len(small) == 12 * 37,
             f"(|train|={len(ts)}, 12*|raw|={12 * len(raw)}, "
             f"manifest sampling_count={man['sampling_count']} alpha={man['alpha']})")


def test_criterion_5_offset_endpoints():
    from hallunav.exploration import Action
    lo = offset([Action(0.3, 0.0)])
    hi = offset([Action(1.0, 0.0)])
    grid = np.arange(0.0, 1.2001, 1e-3)
    vals = [offset([Action(float(v), 0.0)]) for v in grid]
    monotone = all(b - a >= -1e-15 for a, b in zip(vals[:-1], vals[1:]))
    _verdict("criterion-5 offset endpoints",
             lo == 0.0 and hi == 1.0 and monotone,
             f"(offset(0.3)={lo}, offset(1.0)={hi}, monotone={monotone})")


def test_criterion_6_learner(pipeline):
    params, losses = pipeline["params"], pipeline["losses"]
    rng = np.random.default_rng(60)
    x = rng.random(722)
    y = np.array([0.5, 0.2])
    gerr = gradient_check(init_params(np.random.default_rng(61)), x, y,
                          np.random.default_rng(62), fraction=0.002)
    ratio_ok = losses[-1] < losses[0] / 10.0
    bounds_ok = True
    for _ in range(10_000):
        a = forward(params, rng.uniform(0, 1.5, 722))
        if not (0.0 <= a.v <= 1.0 and abs(a.w) <= 1.57):
            bounds_ok = False
            break
    _verdict("criterion-6 learner",
             gerr < 1e-4 and ratio_ok and bounds_ok,
             f"(gradient-error={gerr:.2e}, loss {losses[0]:.4f}->{losses[-1]:.4f} "
             f"ratio={losses[0] / losses[-1]:.1f}, bounds={bounds_ok})")


@pytest.fixture(scope="session")
def bench_records(pipeline):
    return cli.run_benchmark(CFG, pipeline["params"], workers=2)


def test_criterion_7_desk_benchmark(pipeline, bench_records):
    raw, ts = pipeline["raw"], pipeline["ts"]
    scale_ok = 9_000 <= len(raw) <= 13_000 and len(ts) == 12 * len(raw)
    build_ok = pipeline["build_s"] < 600.0
    records = bench_records
    n = len(records)
    collisions = sum(r.collisions for r in records)
    succ = [r for r in records if r.outcome == "success"]
    easy = [r for r in records if r.fill <= 0.1]
    easy_rate = sum(r.outcome == "success" for r in easy) / len(easy)
    rate = len(succ) / n
    mean_t = float(np.mean([r.time for r in succ])) if succ else math.inf
    cap_ok = all(r.time <= CFG.bench.time_cap_s + 1e-9 for r in records)
    ok = (scale_ok and build_ok and n == 90 and collisions == 0
          and easy_rate >= 0.9 and rate >= 0.5 and cap_ok
          and mean_t <= CFG.bench.time_cap_s / 2.0)
    _verdict("criterion-7 desk benchmark", ok,
             f"(raw={len(raw)}, build={pipeline['build_s']:.0f}s, "
             f"episodes={n}, collisions={collisions}, "
             f"easy-success={easy_rate:.2f}, success={rate:.2f}, "
             f"mean-success-time={mean_t:.1f}s)")


def test_criterion_8_determinism(pipeline, bench_records):
    raw2 = _collect()
    ts2 = _augment(raw2)
    raw_match = _hash_lines(raw_data_lines(pipeline["raw"], CFG.seed)) == \
        _hash_lines(raw_data_lines(raw2, CFG.seed))
    train_match = _hash_lines(training_set_lines(pipeline["ts"])) == \
        _hash_lines(training_set_lines(ts2))
    params2, _ = _train(ts2)
    model_match = _model_bytes(pipeline["params"]) == _model_bytes(params2)
    records2 = cli.run_benchmark(CFG, params2, workers=2)
    bench_match = [r.line() for r in bench_records] == [r.line() for r in records2]
    ok = raw_match and train_match and model_match and bench_match
    _verdict("criterion-8 determinism", ok,
             f"(raw={raw_match}, train={train_match}, model={model_match}, "
             f"episodes={bench_match})")
