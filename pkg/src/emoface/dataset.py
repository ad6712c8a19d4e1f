"""Person-specific datasets of (valence-arousal, expression-coefficient) pairs.

File format: UTF-8 JSONL, one sample per line:
    {"video_id": str, "frame": int, "va": [v, a], "expr": [30 floats]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

EXPR_DIM = 30
COEFF_BOUND = 10.0
STD_FLOOR = 1e-6


class DatasetError(ValueError):
    """Raised for malformed or invariant-violating dataset content."""


@dataclass(frozen=True)
class VAPoint:
    """A point on the valence-arousal circumplex, both coordinates in [-1, 1]."""

    valence: float
    arousal: float

    def __post_init__(self):
        for name, x in (("valence", self.valence), ("arousal", self.arousal)):
            if not math.isfinite(x):
                raise DatasetError(f"{name} must be finite, got {x!r}")
            if not -1.0 <= x <= 1.0:
                raise DatasetError(f"{name} out of range [-1, 1]: {x}")

    def as_array(self) -> np.ndarray:
        return np.array([self.valence, self.arousal], dtype=np.float64)


def validate_expr(expr) -> np.ndarray:
    """Check a 30-D expression coefficient vector; returns a float64 copy."""
    e = np.asarray(expr, dtype=np.float64)
    if e.shape != (EXPR_DIM,):
        raise DatasetError(f"expected {EXPR_DIM} coefficients, got shape {e.shape}")
    if not np.all(np.isfinite(e)):
        raise DatasetError("expression coefficients must be finite")
    if np.any(np.abs(e) > COEFF_BOUND):
        raise DatasetError(
            f"expression coefficient magnitude exceeds bound {COEFF_BOUND}"
        )
    return e


@dataclass(frozen=True)
class ExprSample:
    video_id: str
    frame_idx: int
    va: VAPoint
    expr: np.ndarray  # shape (30,)

    def __post_init__(self):
        if self.frame_idx < 0:
            raise DatasetError(f"frame index must be nonnegative: {self.frame_idx}")
        object.__setattr__(self, "expr", validate_expr(self.expr))
        self.expr.setflags(write=False)


@dataclass(frozen=True)
class NormStats:
    """Per-dimension mean/std of expression coefficients; std floored at 1e-6."""

    expr_mean: np.ndarray
    expr_std: np.ndarray

    def normalize(self, e: np.ndarray) -> np.ndarray:
        return (e - self.expr_mean) / self.expr_std

    def denormalize(self, e: np.ndarray) -> np.ndarray:
        return e * self.expr_std + self.expr_mean

    @staticmethod
    def identity() -> "NormStats":
        return NormStats(np.zeros(EXPR_DIM), np.ones(EXPR_DIM))


@dataclass
class ExpressionDataset:
    samples: list[ExprSample] = field(default_factory=list)
    norm: NormStats | None = None

    def __len__(self) -> int:
        return len(self.samples)

    def va_array(self) -> np.ndarray:
        """(n, 2) array of VA inputs."""
        return np.array(
            [[s.va.valence, s.va.arousal] for s in self.samples], dtype=np.float64
        ).reshape(len(self.samples), 2)

    def expr_array(self) -> np.ndarray:
        """(n, 30) array of coefficient targets."""
        return np.array([s.expr for s in self.samples], dtype=np.float64).reshape(
            len(self.samples), EXPR_DIM
        )


def _parse_line(line: str, lineno: int) -> ExprSample:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"line {lineno}: malformed JSON: {exc}") from exc
    try:
        video_id = obj["video_id"]
        frame = obj["frame"]
        va = obj["va"]
        expr = obj["expr"]
    except (KeyError, TypeError) as exc:
        raise DatasetError(f"line {lineno}: missing field {exc}") from exc
    if not isinstance(video_id, str) or not isinstance(frame, int):
        raise DatasetError(f"line {lineno}: bad video_id/frame types")
    if not (isinstance(va, list) and len(va) == 2):
        raise DatasetError(f"line {lineno}: 'va' must be a 2-element array")
    try:
        return ExprSample(video_id, frame, VAPoint(float(va[0]), float(va[1])), expr)
    except DatasetError as exc:
        raise DatasetError(f"line {lineno}: {exc}") from exc


def load_dataset(path) -> ExpressionDataset:
    """Load a JSONL dataset; errors carry the offending line number."""
    samples: list[ExprSample] = []
    seen: set[tuple[str, int]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            s = _parse_line(line, lineno)
            key = (s.video_id, s.frame_idx)
            if key in seen:
                raise DatasetError(f"line {lineno}: duplicate sample {key}")
            seen.add(key)
            samples.append(s)
    return ExpressionDataset(samples)


def save_dataset(d: ExpressionDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in d.samples:
            fh.write(
                json.dumps(
                    {
                        "video_id": s.video_id,
                        "frame": s.frame_idx,
                        "va": [s.va.valence, s.va.arousal],
                        "expr": list(s.expr),
                    }
                )
                + "\n"
            )


def split_dataset(
    d: ExpressionDataset,
    train_fraction: float,
    seed: int = 0,
    mode: str = "temporal",
) -> tuple[ExpressionDataset, ExpressionDataset]:
    """Split into (train, test).

    mode="temporal": per video_id, the first ceil(fraction * n_video) frames
    (in frame order) go to train.  mode="shuffled": seeded permutation of the
    whole dataset, first ceil(fraction * n) to train.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError(f"train_fraction must be in (0, 1): {train_fraction}")
    if len(d) == 0:
        raise DatasetError("cannot split an empty dataset")
    if mode == "shuffled":
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(d))
        cut = math.ceil(train_fraction * len(d))
        train_idx = sorted(order[:cut])
        test_idx = sorted(order[cut:])
        return (
            ExpressionDataset([d.samples[i] for i in train_idx]),
            ExpressionDataset([d.samples[i] for i in test_idx]),
        )
    if mode != "temporal":
        raise DatasetError(f"unknown split mode: {mode!r}")
    by_video: dict[str, list[ExprSample]] = {}
    for s in d.samples:
        by_video.setdefault(s.video_id, []).append(s)
    train: list[ExprSample] = []
    test: list[ExprSample] = []
    for vid in by_video:
        group = sorted(by_video[vid], key=lambda s: s.frame_idx)
        cut = math.ceil(train_fraction * len(group))
        train.extend(group[:cut])
        test.extend(group[cut:])
    return ExpressionDataset(train), ExpressionDataset(test)


def compute_norm_stats(d: ExpressionDataset) -> NormStats:
    """Population mean/std per coefficient dimension, std floored at 1e-6."""
    if len(d) == 0:
        raise DatasetError("cannot compute stats of an empty dataset")
    E = d.expr_array()
    mean = E.mean(axis=0)
    std = np.maximum(E.std(axis=0), STD_FLOOR)
    return NormStats(mean, std)


class SinusoidOracle:
    """Fixed smooth VA -> 30-D map used as a synthetic ground truth.

    Parameters are drawn from numpy's default_rng(seed) in this exact order:
        amp   = rng.uniform(0.2, 1.0, size=(30, 3))
        freq  = rng.uniform(0.5, 2.5, size=(30, 3, 2))   # [..., 0]=valence, [..., 1]=arousal
        phase = rng.uniform(0.0, 2*pi, size=(30, 3))
    and the map is
        e_j(v, a) = sum_h amp[j,h] * sin(freq[j,h,0]*v + freq[j,h,1]*a + phase[j,h])
    """

    def __init__(self, seed: int):
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.amp = rng.uniform(0.2, 1.0, size=(EXPR_DIM, 3))
        self.freq = rng.uniform(0.5, 2.5, size=(EXPR_DIM, 3, 2))
        self.phase = rng.uniform(0.0, 2.0 * np.pi, size=(EXPR_DIM, 3))

    def __call__(self, va: np.ndarray) -> np.ndarray:
        """va: (..., 2) -> (..., 30)."""
        va = np.asarray(va, dtype=np.float64)
        v = va[..., 0, None, None]
        a = va[..., 1, None, None]
        arg = self.freq[..., 0] * v + self.freq[..., 1] * a + self.phase
        return np.sum(self.amp * np.sin(arg), axis=-1)


def synth_dataset(
    oracle_seed: int, n_samples: int, noise_std: float
) -> ExpressionDataset:
    """Synthetic dataset: VA uniform on the unit disk, expr = oracle(va) + noise.

    Sampling uses default_rng((oracle_seed, 1)); the oracle map itself is
    SinusoidOracle(oracle_seed).  Bit-deterministic per seed.
    """
    if n_samples < 1:
        raise DatasetError("n_samples must be >= 1")
    if noise_std < 0:
        raise DatasetError("noise_std must be >= 0")
    oracle = SinusoidOracle(oracle_seed)
    rng = np.random.default_rng((oracle_seed, 1))
    r = np.sqrt(rng.uniform(0.0, 1.0, n_samples))
    theta = rng.uniform(0.0, 2.0 * np.pi, n_samples)
    va = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    expr = oracle(va)
    if noise_std > 0:
        expr = expr + rng.normal(0.0, noise_std, expr.shape)
    samples = [
        ExprSample("synth", i, VAPoint(float(va[i, 0]), float(va[i, 1])), expr[i])
        for i in range(n_samples)
    ]
    return ExpressionDataset(samples)
