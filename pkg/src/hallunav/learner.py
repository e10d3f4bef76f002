"""The reactive planner: scan + local goal in, one (v, w) command out.

A fully connected network with two hidden layers of 256 rectified-linear
units maps 720 normalised ranges plus the goal expressed in the robot frame
to two raw outputs, squashed into the command box (sigmoid for v, scaled
tanh for w).  Training is plain mini-batch gradient descent with momentum
on the mean squared command error, written out by hand so the gradients can
be audited against finite differences.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .exploration import Action, Pose

V_SCALE = 1.0     # m/s, upper output bound for v (sigmoid-squashed)
W_SCALE = 1.57    # rad/s, symmetric output bound for w (tanh-squashed)
INPUT_DIM = 722   # 720 ranges + goal (dx, dy) in the robot frame
HIDDEN = 256


@dataclass
class ModelParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def arrays(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2, self.w3, self.b3]

    def copy(self) -> "ModelParams":
        return ModelParams(*[a.copy() for a in self.arrays()])


@dataclass
class TrainConfig:
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 128
    epochs: int = 60
    lr_halve_every: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.learning_rate, self.batch_size, self.epochs,
               self.lr_halve_every) <= 0 or not 0.0 <= self.momentum < 1.0:
            raise ValueError("invalid training hyperparameters")


def init_params(rng: np.random.Generator,
                dims: tuple[int, ...] = (INPUT_DIM, HIDDEN, HIDDEN, 2)) -> ModelParams:
    """Uniform init scaled by 1/sqrt(fan_in), zero biases."""
    arrays = []
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        s = 1.0 / math.sqrt(n_in)
        arrays.append(rng.uniform(-s, s, size=(n_in, n_out)))
        arrays.append(np.zeros(n_out))
    return ModelParams(*arrays)


def encode_input(scan: np.ndarray, c_c: Pose, c_g: Pose,
                 max_range: float = 1.0) -> np.ndarray:
    """720 ranges normalised by the sensor limit, then the goal as (dx, dy)
    in the robot frame; the goal orientation is dropped."""
    dx, dy = c_g.x - c_c.x, c_g.y - c_c.y
    cp, sp = math.cos(c_c.psi), math.sin(c_c.psi)
    return np.concatenate((np.asarray(scan) / max_range,
                           (cp * dx + sp * dy, -sp * dx + cp * dy)))


def _forward_batch(params: ModelParams, x: np.ndarray):
    z1 = x @ params.w1 + params.b1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params.w2 + params.b2
    a2 = np.maximum(z2, 0.0)
    o = a2 @ params.w3 + params.b3
    sig = 1.0 / (1.0 + np.exp(-np.clip(o[:, 0], -500.0, 500.0)))
    pred = np.stack((V_SCALE * sig, W_SCALE * np.tanh(o[:, 1])), axis=1)
    return z1, a1, z2, a2, sig, pred


def forward(params: ModelParams, x: np.ndarray) -> Action:
    """Single-sample inference; outputs are squashed into the command box."""
    pred = _forward_batch(params, np.asarray(x)[None, :])[5][0]
    return Action(float(pred[0]), float(pred[1]))


def _loss_and_grads(params: ModelParams, x: np.ndarray, y: np.ndarray):
    z1, a1, z2, a2, sig, pred = _forward_batch(params, x)
    diff = pred - y
    n = x.shape[0]
    loss = float(np.mean(diff * diff))
    dpred = diff / n   # d(mean over n*2 entries)/dpred, times 1/2 folded below
    do = np.empty_like(dpred)
    do[:, 0] = dpred[:, 0] * V_SCALE * sig * (1.0 - sig)
    th = pred[:, 1] / W_SCALE
    do[:, 1] = dpred[:, 1] * W_SCALE * (1.0 - th * th)
    dw3 = a2.T @ do
    db3 = do.sum(axis=0)
    da2 = do @ params.w3.T
    dz2 = da2 * (z2 > 0.0)
    dw2 = a1.T @ dz2
    db2 = dz2.sum(axis=0)
    da1 = dz2 @ params.w2.T
    dz1 = da1 * (z1 > 0.0)
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    return loss, [dw1, db1, dw2, db2, dw3, db3]


def _loss_only(params: ModelParams, x: np.ndarray, y: np.ndarray) -> float:
    pred = _forward_batch(params, x)[5]
    return float(np.mean((pred - y) ** 2))


def _as_arrays(data) -> tuple[np.ndarray, np.ndarray]:
    """Accepts a TrainingSet or any sequence of TrainDatum; returns the
    encoded input matrix builder inputs (scans, goal features) and labels."""
    if hasattr(data, "scans"):
        scans, v, w, cc, cg = data.scans, data.v, data.w, data.c_c, data.c_g
    else:
        scans = np.stack([d.scan for d in data])
        v = np.array([d.plan[0].v for d in data])
        w = np.array([d.plan[0].w for d in data])
        cc = np.array([(d.c_c.x, d.c_c.y, d.c_c.psi) for d in data])
        cg = np.array([(d.c_g.x, d.c_g.y, d.c_g.psi) for d in data])
    dx = cg[:, 0] - cc[:, 0]
    dy = cg[:, 1] - cc[:, 1]
    cp, sp = np.cos(cc[:, 2]), np.sin(cc[:, 2])
    goal = np.stack((cp * dx + sp * dy, -sp * dx + cp * dy), axis=1)
    labels = np.stack((v, w), axis=1)
    return scans, goal, labels


def _batch_x(scans: np.ndarray, goal: np.ndarray, idx: np.ndarray,
             max_range: float) -> np.ndarray:
    x = np.empty((idx.shape[0], scans.shape[1] + 2))
    x[:, :-2] = scans[idx]
    x[:, :-2] /= max_range
    x[:, -2:] = goal[idx]
    return x


def train(data, cfg: TrainConfig, max_range: float = 1.0
          ) -> tuple[ModelParams, list[float]]:
    """Mini-batch SGD with momentum; the learning rate halves every
    cfg.lr_halve_every epochs.  Returns the trained parameters and the loss
    curve: entry 0 is the pre-training loss over the whole set, then one
    (batch-size weighted) mean training loss per epoch.  Aborts with a
    diagnostic if the loss goes non-finite."""
    if len(data) == 0:
        raise ValueError("training data is empty")
    scans, goal, labels = _as_arrays(data)
    n = labels.shape[0]
    rng = np.random.default_rng(cfg.seed)
    params = init_params(rng, (scans.shape[1] + 2, HIDDEN, HIDDEN, 2))
    vel = [np.zeros_like(a) for a in params.arrays()]

    def full_loss() -> float:
        total = 0.0
        for s in range(0, n, 4096):
            idx = np.arange(s, min(s + 4096, n))
            total += _loss_only(params, _batch_x(scans, goal, idx, max_range),
                                labels[idx]) * idx.shape[0]
        return total / n

    losses = [full_loss()]
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate * 0.5 ** (epoch // cfg.lr_halve_every)
        perm = rng.permutation(n)
        sse = 0.0
        for s in range(0, n, cfg.batch_size):
            idx = perm[s:s + cfg.batch_size]
            x = _batch_x(scans, goal, idx, max_range)
            loss, grads = _loss_and_grads(params, x, labels[idx])
            sse += loss * idx.shape[0]
            for p, g, u in zip(params.arrays(), grads, vel):
                u *= cfg.momentum
                u -= lr * g
                p += u
        epoch_loss = sse / n
        if not math.isfinite(epoch_loss):
            raise RuntimeError(
                f"non-finite training loss at epoch {epoch + 1} "
                f"(lr={lr}, batch_size={cfg.batch_size})")
        losses.append(epoch_loss)
    return params, losses


def gradient_check(params: ModelParams, x: np.ndarray, label: np.ndarray,
                   rng: np.random.Generator | None = None,
                   fraction: float = 0.01, step: float = 1e-5) -> float:
    """Max relative error between analytic gradients and central finite
    differences over a random sample of the parameter coordinates."""
    rng = rng or np.random.default_rng(0)
    x2 = np.asarray(x, dtype=float)[None, :]
    y2 = np.asarray(label, dtype=float)[None, :]
    _, grads = _loss_and_grads(params, x2, y2)
    worst = 0.0
    for arr, g in zip(params.arrays(), grads):
        flat, gflat = arr.ravel(), g.ravel()
        k = max(1, int(round(fraction * flat.size)))
        for i in rng.choice(flat.size, size=k, replace=False):
            orig = flat[i]
            flat[i] = orig + step
            lp = _loss_only(params, x2, y2)
            flat[i] = orig - step
            lm = _loss_only(params, x2, y2)
            flat[i] = orig
            num = (lp - lm) / (2.0 * step)
            rel = abs(gflat[i] - num) / max(abs(gflat[i]), abs(num), 1e-6)
            worst = max(worst, rel)
    return worst


MODEL_MAGIC = b"HNAVMLP1\n"


def save_model(path, params: ModelParams) -> None:
    """Binary layout: magic, uint32 array count, then per array a uint32
    ndim + uint32 shape and row-major little-endian float64 data, ending
    with a CRC32 of everything after the magic."""
    payload = bytearray()
    arrays = params.arrays()
    payload += struct.pack("<I", len(arrays))
    for a in arrays:
        payload += struct.pack("<I", a.ndim)
        payload += struct.pack(f"<{a.ndim}I", *a.shape)
        payload += np.ascontiguousarray(a, dtype="<f8").tobytes()
    crc = zlib.crc32(bytes(payload))
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(payload)
        f.write(struct.pack("<I", crc))


def load_model(path) -> ModelParams:
    with open(path, "rb") as f:
        blob = f.read()
    if not blob.startswith(MODEL_MAGIC):
        raise ValueError(f"not a model file: {path}")
    payload, tail = blob[len(MODEL_MAGIC):-4], blob[-4:]
    if zlib.crc32(payload) != struct.unpack("<I", tail)[0]:
        raise ValueError(f"model file checksum mismatch: {path}")
    off = 0
    (count,) = struct.unpack_from("<I", payload, off)
    off += 4
    arrays = []
    for _ in range(count):
        (ndim,) = struct.unpack_from("<I", payload, off)
        off += 4
        shape = struct.unpack_from(f"<{ndim}I", payload, off)
        off += 4 * ndim
        size = int(np.prod(shape)) * 8
        arrays.append(np.frombuffer(payload[off:off + size], dtype="<f8")
                      .reshape(shape).copy())
        off += size
    if len(arrays) != 6:
        raise ValueError("unexpected model structure")
    return ModelParams(*arrays)
