"""Single-hidden-layer feedforward regressor.

Forward inference is single precision with a fixed accumulation order so
software, the compiled kernel, and the generated hardware core agree
bit-for-bit.  Training runs in double precision (from-scratch Adam + MSE);
the final parameters are cast to single precision.
"""

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DivergedError, ShapeMismatchError, ZeroVarianceError

__all__ = [
    "AnnModel",
    "TrainConfig",
    "Metrics",
    "ACTIVATIONS",
    "relu",
    "relu_deriv",
    "tanh",
    "tanh_deriv",
    "sigmoid",
    "sigmoid_deriv",
    "init_model",
    "forward",
    "forward_batch",
    "backprop_gradients",
    "adam_update",
    "train",
    "evaluate",
    "save_model",
    "load_model",
    "float_to_hex",
    "hex_to_float",
]

MODEL_FORMAT = "chaosforge-model-v1"


# double-precision activations for training and the gradient checks
def relu(x):
    return np.maximum(x, 0.0)


def relu_deriv(x):
    # subgradient at 0 defined as 0
    return (np.asarray(x) > 0.0).astype(np.float64)


def tanh(x):
    return np.tanh(x)


def tanh_deriv(x):
    t = np.tanh(x)
    return 1.0 - t * t


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def sigmoid_deriv(x):
    s = sigmoid(x)
    return s * (1.0 - s)


ACTIVATIONS = {
    "relu": (relu, relu_deriv),
    "tanh": (tanh, tanh_deriv),
    "sigmoid": (sigmoid, sigmoid_deriv),
}


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 200
    batch_size: int = 64
    rng_seed: int = 4
    hidden_activation: str = "relu"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("beta1/beta2 must lie in (0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.hidden_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.hidden_activation!r}")


@dataclass
class Metrics:
    mse: float
    mae: float
    rmse: float
    r2: float

    def as_dict(self):
        return {"mse": self.mse, "mae": self.mae, "rmse": self.rmse, "r2": self.r2}


@dataclass
class AnnModel:
    """I-H-O network in single precision plus normalization metadata."""

    w1: np.ndarray  # (H, I) float32
    b1: np.ndarray  # (H,) float32
    w2: np.ndarray  # (O, H) float32
    b2: np.ndarray  # (O,) float32
    hidden_activation: str
    norm_min: np.ndarray  # (I,) float32, raw-coordinate minima
    norm_max: np.ndarray
    rng_seed: int

    def __post_init__(self):
        if self.hidden_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.hidden_activation!r}")
        h, i = self.w1.shape
        o = self.w2.shape[0]
        if self.b1.shape != (h,) or self.w2.shape != (o, h) or self.b2.shape != (o,):
            raise ShapeMismatchError("parameter shapes are inconsistent")
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if arr.dtype != np.float32:
                raise ValueError("parameters must be float32")
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters must be finite")

    @property
    def input_size(self):
        return self.w1.shape[1]

    @property
    def hidden_size(self):
        return self.w1.shape[0]

    @property
    def output_size(self):
        return self.w2.shape[0]

    @property
    def arch(self):
        return (self.input_size, self.hidden_size, self.output_size)

    @property
    def activation_id(self):
        return _kernels.ACTIVATION_IDS[self.hidden_activation]


def _glorot_params(arch, rng):
    """Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases."""
    i, h, o = arch
    lim1 = math.sqrt(6.0 / (i + h))
    lim2 = math.sqrt(6.0 / (h + o))
    w1 = rng.uniform(-lim1, lim1, (h, i))
    b1 = np.zeros(h)
    w2 = rng.uniform(-lim2, lim2, (o, h))
    b2 = np.zeros(o)
    return w1, b1, w2, b2


def init_model(arch, hidden_activation, rng_seed, norm_min=None, norm_max=None):
    """A freshly initialized single-precision model (no training)."""
    i, h, o = arch
    w1, b1, w2, b2 = _glorot_params(arch, np.random.default_rng(rng_seed))
    if norm_min is None:
        norm_min = np.zeros(i, dtype=np.float32)
    if norm_max is None:
        norm_max = np.ones(i, dtype=np.float32)
    return AnnModel(
        w1=w1.astype(np.float32),
        b1=b1.astype(np.float32),
        w2=w2.astype(np.float32),
        b2=b2.astype(np.float32),
        hidden_activation=hidden_activation,
        norm_min=np.asarray(norm_min, dtype=np.float32),
        norm_max=np.asarray(norm_max, dtype=np.float32),
        rng_seed=rng_seed,
    )


def forward(model, x):
    """Bit-reproducible single-precision forward pass."""
    x = np.ascontiguousarray(x, dtype=np.float32)
    if x.shape != (model.input_size,):
        raise ShapeMismatchError(
            f"input has shape {x.shape}, expected ({model.input_size},)"
        )
    return _kernels.ann_forward(
        model.w1, model.b1, model.w2, model.b2, x, model.activation_id
    )


def forward_batch(model, inputs):
    """Row-by-row forward (keeps the scalar accumulation order)."""
    inputs = np.ascontiguousarray(inputs, dtype=np.float32)
    out = np.empty((len(inputs), model.output_size), dtype=np.float32)
    for k in range(len(inputs)):
        out[k] = _kernels.ann_forward(
            model.w1, model.b1, model.w2, model.b2, inputs[k], model.activation_id
        )
    return out


def backprop_gradients(params, xb, yb, hidden_activation="relu"):
    """Mean-squared-error gradients for one batch (double precision).

    ``params`` is the (w1, b1, w2, b2) tuple in float64.  Returns
    ``(loss, (g_w1, g_b1, g_w2, g_b2))`` where the loss is averaged over
    every output entry of the batch.
    """
    act, act_deriv = ACTIVATIONS[hidden_activation]
    w1, b1, w2, b2 = params
    o = w2.shape[0]
    z1 = xb @ w1.T + b1
    a1 = act(z1)
    yp = a1 @ w2.T + b2
    loss = float(np.mean((yp - yb) ** 2))
    m = len(xb)
    d2 = 2.0 * (yp - yb) / (m * o)
    g_w2 = d2.T @ a1
    g_b2 = d2.sum(axis=0)
    d1 = (d2 @ w2) * act_deriv(z1)
    g_w1 = d1.T @ xb
    g_b1 = d1.sum(axis=0)
    return loss, (g_w1, g_b1, g_w2, g_b2)


def adam_update(params, grads, moments, velocities, step, cfg):
    """One in-place Adam step with bias correction (step counts from 1)."""
    for p, g, mo, ve in zip(params, grads, moments, velocities):
        mo *= cfg.beta1
        mo += (1.0 - cfg.beta1) * g
        ve *= cfg.beta2
        ve += (1.0 - cfg.beta2) * g * g
        p -= cfg.learning_rate * (mo / (1.0 - cfg.beta1**step)) / (
            np.sqrt(ve / (1.0 - cfg.beta2**step)) + cfg.eps
        )


def train(dataset, arch, cfg, epoch_log=None):
    """Train on the dataset's chronological training split.

    Deterministic for a fixed ``cfg.rng_seed``: one generator drives the
    weight init and the per-epoch batch shuffles.  Returns the trained
    single-precision model and the test-split metrics.  If ``epoch_log`` is
    a list, the full-training-set MSE after each epoch is appended to it.
    """
    i, h, o = arch
    if dataset.dimension != i:
        raise ShapeMismatchError(
            f"dataset dimension {dataset.dimension} != input size {i}"
        )
    if dataset.targets.shape[1] != o:
        raise ShapeMismatchError(
            f"dataset target dimension {dataset.targets.shape[1]} != output size {o}"
        )
    if h < 1:
        raise ValueError("hidden size must be >= 1")

    act, _ = ACTIVATIONS[cfg.hidden_activation]

    # one generator drives init and all batch shuffles
    rng = np.random.default_rng(cfg.rng_seed)
    params = list(_glorot_params(arch, rng))
    w1, b1, w2, b2 = params

    x_train, y_train = dataset.train_pairs()
    x_train = x_train.astype(np.float64)
    y_train = y_train.astype(np.float64)
    n = len(x_train)
    if n < 1:
        raise ValueError("empty training split")

    mom = [np.zeros_like(p) for p in params]
    vel = [np.zeros_like(p) for p in params]
    step = 0
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for s in range(0, n, cfg.batch_size):
            idx = perm[s : s + cfg.batch_size]
            loss, grads = backprop_gradients(
                params, x_train[idx], y_train[idx], cfg.hidden_activation
            )
            if not np.isfinite(loss):
                raise DivergedError(
                    f"loss became non-finite at epoch {epoch}, step {step}"
                )
            step += 1
            adam_update(params, grads, mom, vel, step, cfg)
        if epoch_log is not None:
            yp_all = act(x_train @ w1.T + b1) @ w2.T + b2
            epoch_log.append(float(np.mean((yp_all - y_train) ** 2)))

    model = AnnModel(
        w1=w1.astype(np.float32),
        b1=b1.astype(np.float32),
        w2=w2.astype(np.float32),
        b2=b2.astype(np.float32),
        hidden_activation=cfg.hidden_activation,
        norm_min=np.asarray(dataset.norm_min, dtype=np.float32),
        norm_max=np.asarray(dataset.norm_max, dtype=np.float32),
        rng_seed=cfg.rng_seed,
    )
    x_test, y_test = dataset.test_pairs()
    metrics = evaluate(model, x_test, y_test)
    return model, metrics


def evaluate(model, inputs, targets):
    """MSE / MAE / RMSE / R^2 of the model's single-precision predictions.

    R^2 uses the total sum of squares around the per-dimension target mean,
    accumulated over every output entry.
    """
    inputs = np.asarray(inputs, dtype=np.float32)
    targets = np.asarray(targets, dtype=np.float32)
    if len(inputs) != len(targets):
        raise ShapeMismatchError("inputs and targets row counts differ")
    if inputs.shape[1] != model.input_size or targets.shape[1] != model.output_size:
        raise ShapeMismatchError("column counts do not match the model")
    preds = forward_batch(model, inputs).astype(np.float64)
    t = targets.astype(np.float64)
    err = preds - t
    mse = float(np.mean(err**2))
    mae = float(np.mean(np.abs(err)))
    ss_res = float(np.sum(err**2))
    ss_tot = float(np.sum((t - t.mean(axis=0)) ** 2))
    if ss_tot == 0.0:
        raise ZeroVarianceError("targets have zero variance; R^2 undefined")
    return Metrics(mse=mse, mae=mae, rmse=math.sqrt(mse), r2=1.0 - ss_res / ss_tot)


def float_to_hex(value):
    """8-hex-digit IEEE-754 bit pattern of a float32."""
    return format(struct.unpack("<I", struct.pack("<f", float(value)))[0], "08x")


def hex_to_float(text):
    return np.float32(
        struct.unpack("<f", struct.pack("<I", int(text, 16)))[0]
    )


def _hex_array(arr):
    if arr.ndim == 1:
        return [float_to_hex(v) for v in arr]
    return [[float_to_hex(v) for v in row] for row in arr]


def _unhex_array(data, shape):
    flat = np.array(
        [hex_to_float(v) for row in (data if isinstance(data[0], list) else [data]) for v in row],
        dtype=np.float32,
    )
    return flat.reshape(shape)


def save_model(model, path):
    """Write the model as JSON with every float32 stored as its bit pattern."""
    doc = {
        "format": MODEL_FORMAT,
        "input_size": model.input_size,
        "hidden_size": model.hidden_size,
        "output_size": model.output_size,
        "hidden_activation": model.hidden_activation,
        "rng_seed": model.rng_seed,
        "norm_min": _hex_array(model.norm_min),
        "norm_max": _hex_array(model.norm_max),
        "w1": _hex_array(model.w1),
        "b1": _hex_array(model.b1),
        "w2": _hex_array(model.w2),
        "b2": _hex_array(model.b2),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> AnnModel:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: unknown model format {doc.get('format')!r}")
    i, h, o = doc["input_size"], doc["hidden_size"], doc["output_size"]
    return AnnModel(
        w1=_unhex_array(doc["w1"], (h, i)),
        b1=_unhex_array(doc["b1"], (h,)),
        w2=_unhex_array(doc["w2"], (o, h)),
        b2=_unhex_array(doc["b2"], (o,)),
        hidden_activation=doc["hidden_activation"],
        norm_min=_unhex_array(doc["norm_min"], (i,)),
        norm_max=_unhex_array(doc["norm_max"], (i,)),
        rng_seed=int(doc["rng_seed"]),
    )
