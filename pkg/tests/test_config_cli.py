import json
import os

import numpy as np
import pytest

from hallunav.cli import main, run_benchmark, summarize_benchmark, bench_tasks
from hallunav.config import (ConfigError, PipelineConfig, dump_config,
                             load_config, load_config_file, save_config_file)
from hallunav.learner import load_model


def test_config_roundtrip_identity():
    cfg = PipelineConfig()
    text = dump_config(cfg)
    again = dump_config(load_config(text))
    assert text == again


def test_config_overrides_and_types():
    cfg = load_config("seed = 3\nhallucination.alpha = 0.25\n"
                      "learner.epochs = 7\nbench.fill_levels = 0.1,0.2\n")
    assert cfg.seed == 3
    assert cfg.hallucination.alpha == 0.25
    assert cfg.learner.epochs == 7
    assert cfg.bench.fill_levels == (0.1, 0.2)


def test_config_rejects_unknown_and_invalid():
    with pytest.raises(ConfigError):
        load_config("nonsense.key = 1\n")
    with pytest.raises(ConfigError):
        load_config("exploration.not_a_field = 1\n")
    with pytest.raises(ConfigError):
        load_config("hallucination.alpha = 0.7\n")
    with pytest.raises(ConfigError):
        load_config("learner.epochs = 2.5\n")
    with pytest.raises(ConfigError):
        load_config("this is not a key value line\n")


def test_config_file_roundtrip(tmp_path):
    cfg = PipelineConfig()
    cfg.seed = 123
    cfg.world.fill_prob = 0.2
    path = tmp_path / "cfg.txt"
    save_config_file(path, cfg)
    loaded = load_config_file(path)
    assert dump_config(loaded) == dump_config(cfg)


def _tiny_config(tmp_path):
    path = tmp_path / "tiny.txt"
    path.write_text(
        "seed = 7\n"
        "exploration.duration_s = 40.0\n"
        "learner.epochs = 2\n"
        "learner.batch_size = 256\n"
        "bench.n_worlds = 2\n"
        "bench.trials = 1\n"
        "bench.time_cap_s = 12.0\n"
        "bench.fill_levels = 0.0\n"
        "verify.n_triples = 2\n")
    return str(path)


def test_cli_pipeline_end_to_end(tmp_path, capsys):
    cfg = _tiny_config(tmp_path)
    raw = str(tmp_path / "raw.txt")
    data = str(tmp_path / "train.txt")
    model = str(tmp_path / "model.bin")
    bench = str(tmp_path / "bench")

    assert main(["--config", cfg, "collect", "--out", raw]) == 0
    assert main(["--config", cfg, "hallucinate", "--raw", raw, "--out", data]) == 0
    with open(data + ".manifest.json") as f:
        manifest = json.load(f)
    assert manifest["train_count"] == 12 * manifest["raw_count"]
    assert main(["--config", cfg, "train", "--data", data, "--out", model]) == 0
    assert os.path.exists(model) and os.path.exists(model + ".losscurve.txt")
    load_model(model)
    assert main(["--config", cfg, "bench", "--model", model, "--out", bench,
                 "--workers", "1"]) == 0
    out = capsys.readouterr().out
    assert "episodes=2" in out
    for name in ("results.txt", "summary.txt", "trajectories.svg"):
        assert os.path.exists(os.path.join(bench, name))
    with open(os.path.join(bench, "results.txt")) as f:
        lines = [ln for ln in f if ln.startswith("world=")]
    assert len(lines) == 2
    assert all("collisions=0" in ln for ln in lines)


def test_cli_collect_deterministic_bytes(tmp_path):
    cfg = _tiny_config(tmp_path)
    a = str(tmp_path / "a.txt")
    b = str(tmp_path / "b.txt")
    assert main(["--config", cfg, "collect", "--out", a]) == 0
    assert main(["--config", cfg, "collect", "--out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()
    c = str(tmp_path / "c.txt")
    assert main(["--config", cfg, "--seed", "8", "collect", "--out", c]) == 0
    assert open(a, "rb").read() != open(c, "rb").read()


def test_cli_collect_short_duration_warns(tmp_path, capsys):
    out = str(tmp_path / "raw.txt")
    assert main(["collect", "--out", out, "--duration", "2.0"]) == 0
    err = capsys.readouterr().err
    assert "lookahead" in err
    with open(out) as f:
        assert len(f.readlines()) == 1  # header only


def test_cli_verify_subcommand(tmp_path, capsys):
    cfg = _tiny_config(tmp_path)
    report = str(tmp_path / "verify.txt")
    assert main(["--config", cfg, "verify", "--out", report]) == 0
    text = open(report).read()
    assert "OVERALL PASS" in text
    assert text.count("cell=") > 20  # one verdict line per obstacle cell


def test_cli_exit_codes(tmp_path):
    assert main(["collect"]) == 1                      # missing --out
    assert main(["--config", "/nonexistent", "collect", "--out", "x"]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("hallucination.alpha = 9\n")
    assert main(["--config", str(bad), "collect", "--out", "x"]) == 1
    assert main(["train", "--data", str(tmp_path / "missing.txt"),
                 "--out", str(tmp_path / "m.bin")]) == 2
    assert main(["--help"]) == 0


def test_benchmark_harness_records(tmp_path):
    cfg = PipelineConfig()
    cfg.bench.n_worlds = 2
    cfg.bench.trials = 2
    cfg.bench.time_cap_s = 10.0
    cfg.bench.fill_levels = (0.0,)
    from hallunav.learner import init_params
    params = init_params(np.random.default_rng(0))
    records = run_benchmark(cfg, params, workers=1)
    assert len(records) == 4
    assert [(r.world_index, r.trial) for r in records] == \
        [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert all(r.time <= 10.0 + 1e-9 for r in records)
    summary = summarize_benchmark(records)
    assert "episodes=4" in summary
    tasks = bench_tasks(cfg)
    assert tasks == bench_tasks(cfg)  # deterministic world seeds
