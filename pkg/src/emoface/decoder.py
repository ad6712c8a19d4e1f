"""Expression decoder network: an MLP regressing 2-D VA to 30-D coefficients.

Forward, backprop, inverted dropout, Adam and the RMSE loss are implemented
from scratch on numpy.  Training is bit-deterministic given the config seed.

Weights file layout (little-endian):
    magic "DFMW" | u32 version=1 | u32 n_widths | u32 widths...
    per layer: f32 weight matrix (out x in, row-major), f32 bias
    f32 norm mean (30) | f32 norm std (30) | u8 normalize_targets
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .dataset import EXPR_DIM, ExpressionDataset, NormStats, compute_norm_stats

FULL_WIDTHS = [2, 4096, 2048, 1024, 512, 128, 64, 30]
DESK_WIDTHS = [2, 256, 128, 64, 30]

_MAGIC = b"DFMW"
_VERSION = 1
_RMSE_GUARD = 1e-12


class DecoderError(ValueError):
    pass


class DivergenceError(FloatingPointError):
    """Training or inference produced a non-finite value."""


def _f32(a: np.ndarray) -> np.ndarray:
    """Quantize to float32-representable values, kept in float64."""
    return a.astype("<f4").astype(np.float64)


@dataclass
class DecoderConfig:
    layer_widths: list[int] = field(default_factory=lambda: list(FULL_WIDTHS))
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 1000
    dropout_rate: float = 0.2
    seed: int = 0
    normalize_targets: bool = True

    def __post_init__(self):
        w = self.layer_widths
        if len(w) < 2 or w[0] != 2 or w[-1] != EXPR_DIM:
            raise DecoderError(f"layer widths must run 2 -> {EXPR_DIM}: {w}")
        if any(x < 1 for x in w):
            raise DecoderError("all layer widths must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise DecoderError("dropout_rate must be in [0, 1)")


@dataclass
class DecoderWeights:
    weights: list[np.ndarray]  # per layer, shape (out, in)
    biases: list[np.ndarray]  # per layer, shape (out,)
    layer_widths: list[int]
    norm: NormStats
    normalize_targets: bool = True

    def n_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "DecoderWeights":
        return DecoderWeights(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            list(self.layer_widths),
            self.norm,
            self.normalize_targets,
        )


@dataclass
class AdamState:
    """Adam accumulators; beta1=0.9, beta2=0.999, eps=1e-8 (standard defaults)."""

    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def zeros_like(w: DecoderWeights) -> "AdamState":
        return AdamState(
            [np.zeros_like(x) for x in w.weights],
            [np.zeros_like(x) for x in w.weights],
            [np.zeros_like(x) for x in w.biases],
            [np.zeros_like(x) for x in w.biases],
        )


@dataclass
class TrainReport:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = -1
    diverged: bool = False


def init_weights(cfg: DecoderConfig) -> DecoderWeights:
    """He-uniform weight init (bound sqrt(6/fan_in)), zero biases."""
    rng = np.random.default_rng(cfg.seed)
    ws, bs = [], []
    for fan_in, fan_out in zip(cfg.layer_widths[:-1], cfg.layer_widths[1:]):
        bound = math.sqrt(6.0 / fan_in)
        ws.append(_f32(rng.uniform(-bound, bound, size=(fan_out, fan_in))))
        bs.append(np.zeros(fan_out))
    return DecoderWeights(
        ws, bs, list(cfg.layer_widths), NormStats.identity(), cfg.normalize_targets
    )


def _forward_full(
    w: DecoderWeights, X: np.ndarray, masks: list[np.ndarray] | None
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Returns (pre-activations z per layer, activations a per layer incl. input).

    Hidden layers: ReLU then (optionally) an inverted-dropout mask.  The final
    layer is linear.  masks[i] applies to the output of hidden layer i.
    """
    a = [np.asarray(X, dtype=np.float64)]
    zs = []
    n = w.n_layers()
    for i in range(n):
        z = a[-1] @ w.weights[i].T + w.biases[i]
        zs.append(z)
        if i < n - 1:
            h = np.maximum(z, 0.0)
            if masks is not None:
                h = h * masks[i]
            a.append(h)
        else:
            a.append(z)
    return zs, a


def forward(
    w: DecoderWeights, X: np.ndarray, masks: list[np.ndarray] | None = None
) -> np.ndarray:
    """Batch forward pass; X is (n, 2) -> (n, 30).  Inference passes no masks."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    _, a = _forward_full(w, X, masks)
    out = a[-1]
    if not np.all(np.isfinite(out)):
        raise DivergenceError("non-finite activation in forward pass")
    return out


def loss_rmse(pred: np.ndarray, target: np.ndarray) -> float:
    """sqrt of the mean squared error over the whole batch and all dimensions."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DecoderError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return float(np.sqrt(np.mean((pred - target) ** 2)))


def backward(
    w: DecoderWeights,
    X: np.ndarray,
    Y: np.ndarray,
    masks: list[np.ndarray] | None = None,
) -> tuple[list[np.ndarray], list[np.ndarray], float]:
    """Gradient of the batch RMSE loss w.r.t. every parameter.

    Returns (weight grads, bias grads, loss).  If the RMSE is below 1e-12 the
    sqrt derivative blows up, so gradients are defined as zero there.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[0] == 0:
        raise DecoderError("empty batch")
    zs, a = _forward_full(w, X, masks)
    diff = a[-1] - Y
    rmse = float(np.sqrt(np.mean(diff**2)))
    gw = [np.zeros_like(m) for m in w.weights]
    gb = [np.zeros_like(b) for b in w.biases]
    if rmse < _RMSE_GUARD:
        return gw, gb, rmse
    # d rmse / d pred = diff / (B * D * rmse)
    delta = diff / (diff.size * rmse)
    n = w.n_layers()
    for i in range(n - 1, -1, -1):
        gw[i] = delta.T @ a[i]
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ w.weights[i]
            if masks is not None:
                delta = delta * masks[i - 1]
            delta = delta * (zs[i - 1] > 0.0)
    return gw, gb, rmse


def adam_step(
    w: DecoderWeights,
    state: AdamState,
    gw: list[np.ndarray],
    gb: list[np.ndarray],
    lr: float,
) -> None:
    """In-place bias-corrected Adam update; increments the step counter."""
    state.t += 1
    b1, b2, eps = state.beta1, state.beta2, state.eps
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for i in range(w.n_layers()):
        for params, grads, m, v in (
            (w.weights, gw, state.m_w, state.v_w),
            (w.biases, gb, state.m_b, state.v_b),
        ):
            m[i] *= b1
            m[i] += (1.0 - b1) * grads[i]
            v[i] *= b2
            v[i] += (1.0 - b2) * grads[i] ** 2
            params[i] -= lr * (m[i] / c1) / (np.sqrt(v[i] / c2) + eps)


def _dropout_masks(
    rng: np.random.Generator, cfg: DecoderConfig, batch: int
) -> list[np.ndarray] | None:
    if cfg.dropout_rate <= 0.0:
        return None
    keep = 1.0 - cfg.dropout_rate
    return [
        (rng.random((batch, width)) < keep) / keep
        for width in cfg.layer_widths[1:-1]
    ]


def train(
    d_train: ExpressionDataset,
    d_val: ExpressionDataset | None,
    cfg: DecoderConfig,
) -> tuple[DecoderWeights, TrainReport]:
    """Mini-batch Adam training with shuffling; the short last batch is kept.

    Validation loss is reported in raw (de-normalized) coefficient space.
    On a non-finite loss, training aborts and returns the report so far.
    """
    if len(d_train) == 0:
        raise DecoderError("empty training set")
    w = init_weights(cfg)
    norm = compute_norm_stats(d_train) if cfg.normalize_targets else NormStats.identity()
    w.norm = norm
    X = d_train.va_array()
    Y_raw = d_train.expr_array()
    Y = norm.normalize(Y_raw) if cfg.normalize_targets else Y_raw
    has_val = d_val is not None and len(d_val) > 0
    if has_val:
        Xv, Yv = d_val.va_array(), d_val.expr_array()
    rng = np.random.default_rng((cfg.seed, 2))
    state = AdamState.zeros_like(w)
    report = TrainReport()
    best_val = math.inf
    n = len(d_train)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            masks = _dropout_masks(rng, cfg, len(idx))
            gw, gb, loss = backward(w, X[idx], Y[idx], masks)
            if not math.isfinite(loss):
                report.diverged = True
                return w, report
            adam_step(w, state, gw, gb, cfg.learning_rate)
            losses.append(loss)
        report.train_loss.append(float(np.mean(losses)))
        if has_val:
            val = loss_rmse(predict(w, Xv), Yv)
            report.val_loss.append(val)
            if val < best_val:
                best_val = val
                report.best_epoch = epoch
        else:
            report.val_loss.append(float("nan"))
    # final weights are float32-exact so a save/load round-trip is bit-identical
    w.weights = [_f32(m) for m in w.weights]
    w.biases = [_f32(b) for b in w.biases]
    w.norm = NormStats(_f32(norm.expr_mean), _f32(norm.expr_std))
    return w, report


def predict(w: DecoderWeights, X: np.ndarray) -> np.ndarray:
    """Inference: no dropout, de-normalized outputs."""
    out = forward(w, X)
    if w.normalize_targets:
        out = w.norm.denormalize(out)
    return out


def decode_track(w: DecoderWeights, va_points: np.ndarray) -> np.ndarray:
    """Per-frame inference over a (n, 2) VA trajectory -> (n, 30) track."""
    va_points = np.asarray(va_points, dtype=np.float64)
    if va_points.size == 0:
        return np.zeros((0, EXPR_DIM))
    return predict(w, va_points.reshape(-1, 2))


def save_weights(w: DecoderWeights, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(w.layer_widths)))
        fh.write(struct.pack(f"<{len(w.layer_widths)}I", *w.layer_widths))
        for mat, bias in zip(w.weights, w.biases):
            fh.write(mat.astype("<f4").tobytes())
            fh.write(bias.astype("<f4").tobytes())
        fh.write(w.norm.expr_mean.astype("<f4").tobytes())
        fh.write(w.norm.expr_std.astype("<f4").tobytes())
        fh.write(struct.pack("<B", 1 if w.normalize_targets else 0))


def load_weights(path) -> DecoderWeights:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise DecoderError("bad magic bytes: not a decoder weights file")
    off = 4
    version, n_widths = struct.unpack_from("<II", data, off)
    off += 8
    if version != _VERSION:
        raise DecoderError(f"unsupported weights version {version}")
    widths = list(struct.unpack_from(f"<{n_widths}I", data, off))
    off += 4 * n_widths
    ws, bs = [], []
    for layer, (fi, fo) in enumerate(zip(widths[:-1], widths[1:])):
        need = 4 * (fi * fo + fo)
        if off + need > len(data):
            raise DecoderError(f"truncated weights file at layer {layer}")
        mat = np.frombuffer(data, "<f4", fi * fo, off).reshape(fo, fi)
        off += 4 * fi * fo
        bias = np.frombuffer(data, "<f4", fo, off)
        off += 4 * fo
        ws.append(mat.astype(np.float64))
        bs.append(bias.astype(np.float64))
    if off + 4 * 2 * EXPR_DIM + 1 > len(data):
        raise DecoderError("truncated weights file in normalization block")
    mean = np.frombuffer(data, "<f4", EXPR_DIM, off).astype(np.float64)
    off += 4 * EXPR_DIM
    std = np.frombuffer(data, "<f4", EXPR_DIM, off).astype(np.float64)
    off += 4 * EXPR_DIM
    normalize = bool(data[off])
    return DecoderWeights(ws, bs, widths, NormStats(mean, std), normalize)
