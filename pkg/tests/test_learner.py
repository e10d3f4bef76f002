import math

import numpy as np
import pytest

from hallunav.exploration import Action, Pose
from hallunav.hallucination import TrainingSet
from hallunav.learner import (HIDDEN, INPUT_DIM, ModelParams, TrainConfig,
                              V_SCALE, W_SCALE, encode_input, forward,
                              gradient_check, init_params, load_model,
                              save_model, train)


def small_params(seed=0, dims=(12, 8, 8, 2)):
    return init_params(np.random.default_rng(seed), dims)


def test_encode_goal_frame():
    scan = np.ones(720)
    x = encode_input(scan, Pose(0, 0, 0), Pose(1, 0, 0))
    assert x[-2] == pytest.approx(1.0) and x[-1] == pytest.approx(0.0)
    x = encode_input(scan, Pose(0, 0, 0), Pose(0, 1, 0))
    assert x[-2] == pytest.approx(0.0, abs=1e-12) and x[-1] == pytest.approx(1.0)
    # the robot's own pose cancels out
    x = encode_input(scan, Pose(2, 3, math.pi / 2), Pose(2, 4, 0.7))
    assert x[-2] == pytest.approx(1.0) and abs(x[-1]) < 1e-12
    assert np.allclose(x[:720], 1.0)


def test_encode_normalizes_ranges():
    scan = np.full(720, 0.5)
    x = encode_input(scan, Pose(0, 0, 0), Pose(1, 0, 0), max_range=2.0)
    assert np.allclose(x[:720], 0.25)


def test_forward_zero_params():
    zero = ModelParams(*[np.zeros_like(a) for a in init_params(np.random.default_rng(0)).arrays()])
    a = forward(zero, np.zeros(INPUT_DIM))
    assert a == Action(0.5, 0.0)


def test_forward_bounds_and_determinism():
    rng = np.random.default_rng(1)
    p = init_params(rng)
    for _ in range(200):
        x = rng.uniform(-2, 2, INPUT_DIM)
        a = forward(p, x)
        assert 0.0 <= a.v <= V_SCALE
        assert abs(a.w) <= W_SCALE
        assert forward(p, x) == a


def test_gradient_check_small_and_full():
    rng = np.random.default_rng(2)
    p = small_params()
    x = rng.random(12)
    y = np.array([0.4, -0.2])
    assert gradient_check(p, x, y, np.random.default_rng(0), fraction=0.5) < 1e-4
    full = init_params(np.random.default_rng(3))
    xf = rng.random(INPUT_DIM)
    assert gradient_check(full, xf, y, np.random.default_rng(0), fraction=0.003) < 1e-4


def test_gradient_check_deterministic():
    p = small_params(4)
    x = np.random.default_rng(5).random(12)
    y = np.array([0.1, 0.3])
    e1 = gradient_check(p, x, y, np.random.default_rng(9), fraction=0.5)
    e2 = gradient_check(p, x, y, np.random.default_rng(9), fraction=0.5)
    assert e1 == e2


def test_zero_input_first_layer_gradients_zero():
    from hallunav.learner import _loss_and_grads
    p = small_params(6)
    x = np.zeros((1, 12))
    y = np.array([[0.9, 0.5]])
    _, grads = _loss_and_grads(p, x, y)
    assert np.all(grads[0] == 0.0)  # dL/dW1 = x^T dz1 = 0 for zero input
    assert np.any(grads[5] != 0.0)  # the output bias still learns


def _constant_set(n=512, v=0.4, w=0.2, seed=3):
    scans = np.random.default_rng(seed).random((n, 720))
    cc = np.zeros((n, 3))
    cg = np.tile([1.0, 0.0, 0.0], (n, 1))
    return TrainingSet(scans, np.full(n, v), np.full(n, w), cc, cg)


def test_training_fits_constant_labels():
    ts = _constant_set()
    cfg = TrainConfig(learning_rate=0.3, batch_size=32, epochs=50,
                      lr_halve_every=100, seed=0)
    _, losses = train(ts, cfg)
    assert losses[-1] < 1e-6


def test_training_synthetic_steering_task():
    # w is the sign of the lateral goal offset, scaled; v constant
    rng = np.random.default_rng(7)
    n = 1000
    scans = rng.random((n, 720))
    side = rng.uniform(-0.8, 0.8, n)
    cc = np.zeros((n, 3))
    cg = np.stack([np.full(n, 0.6), side, np.zeros(n)], axis=1)
    ts = TrainingSet(scans, np.full(n, 0.5), np.sign(side) * 0.8, cc, cg)
    _, losses = train(ts, TrainConfig(learning_rate=0.05, batch_size=32,
                                      epochs=60, lr_halve_every=100, seed=1))
    assert losses[-1] < 1e-2


def test_training_deterministic_curve():
    ts = _constant_set(200)
    cfg = TrainConfig(epochs=5, seed=11)
    p1, l1 = train(ts, cfg)
    p2, l2 = train(ts, cfg)
    assert l1 == l2
    assert all(np.array_equal(a, b) for a, b in zip(p1.arrays(), p2.arrays()))


def test_training_aborts_on_non_finite_loss():
    ts = _constant_set(256)
    ts.scans[13, 77] = float("nan")
    with pytest.raises(RuntimeError, match="non-finite"):
        train(ts, TrainConfig(epochs=2, seed=0))


def test_training_rejects_empty():
    with pytest.raises(ValueError):
        train(TrainingSet(np.empty((0, 720)), np.empty(0), np.empty(0),
                          np.empty((0, 3)), np.empty((0, 3))), TrainConfig())


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(momentum=1.0)


def test_model_roundtrip_bit_exact(tmp_path):
    p = init_params(np.random.default_rng(12))
    path = tmp_path / "model.bin"
    save_model(path, p)
    q = load_model(path)
    for a, b in zip(p.arrays(), q.arrays()):
        assert a.dtype == b.dtype and np.array_equal(a, b)
    assert q.w1.shape == (INPUT_DIM, HIDDEN)


def test_model_file_checksum_guard(tmp_path):
    p = small_params()
    path = tmp_path / "model.bin"
    save_model(path, p)
    blob = bytearray(path.read_bytes())
    blob[50] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(ValueError, match="checksum"):
        load_model(path)
    with pytest.raises(ValueError, match="not a model file"):
        load_model(__file__)
