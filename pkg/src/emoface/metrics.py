"""Average pixel distance metrics and the two self-reenactment protocols.

APD is the mean, over frames and pixels, of the L2 distance between RGB
triplets (pixel values on a [0, 255] basis).  Face-APD and Mouth-APD restrict
the mean to mask pixels; frames whose mask is empty are skipped and counted.

Self-reenactment protocols over a synthetic subject:
  type A renders ground-truth coefficients through the pipeline smoothing,
  type B decodes coefficients from ground-truth VA values with the trained
  decoder, then renders.  Both are scored against ground-truth renders on the
  held-out tail of a 70/30 temporal split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import SinusoidOracle
from .decoder import DecoderWeights, decode_track
from .face3d import BlendshapeModel, Frame, MaskFrame, eval_mesh, rasterize_masks, render_preview
from .semantics import smooth_track


class MetricsError(ValueError):
    pass


@dataclass
class MetricsReport:
    apd: float
    face_apd: float
    mouth_apd: float
    frames_evaluated: int
    empty_face_masks: int = 0
    empty_mouth_masks: int = 0

    def to_dict(self) -> dict:
        return {
            "apd": self.apd,
            "face_apd": self.face_apd,
            "mouth_apd": self.mouth_apd,
            "frames_evaluated": self.frames_evaluated,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _frame_arrays(seq) -> list[np.ndarray]:
    out = []
    for f in seq:
        arr = f.rgb if isinstance(f, Frame) else np.asarray(f)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise MetricsError(f"expected (h, w, 3) frames, got {arr.shape}")
        out.append(arr.astype(np.float64))
    return out


def apd(seq_a, seq_b) -> float:
    """Mean over frames and pixels of sqrt(dR^2 + dG^2 + dB^2)."""
    a, b = _frame_arrays(seq_a), _frame_arrays(seq_b)
    if len(a) != len(b) or len(a) == 0:
        raise MetricsError("sequences must be non-empty and equal length")
    total = 0.0
    npix = 0
    for fa, fb in zip(a, b):
        if fa.shape != fb.shape:
            raise MetricsError(f"frame shape mismatch: {fa.shape} vs {fb.shape}")
        d = np.sqrt(np.sum((fa - fb) ** 2, axis=2))
        total += d.sum()
        npix += d.size
    return total / npix


def masked_apd(seq_a, seq_b, masks, which: str) -> float:
    """APD restricted to mask pixels; empty-mask frames are skipped."""
    if which not in ("face", "mouth"):
        raise MetricsError(f"mask selector must be 'face' or 'mouth': {which!r}")
    a, b = _frame_arrays(seq_a), _frame_arrays(seq_b)
    if not len(a) == len(b) == len(masks) or len(a) == 0:
        raise MetricsError("sequences and masks must be non-empty and equal length")
    total = 0.0
    npix = 0
    for fa, fb, mk in zip(a, b, masks):
        if isinstance(mk, MaskFrame):
            sel = mk.face if which == "face" else mk.mouth
        else:
            sel = np.asarray(mk, dtype=bool)
        if fa.shape != fb.shape or sel.shape != fa.shape[:2]:
            raise MetricsError("frame/mask shape mismatch")
        if not sel.any():
            continue
        d = np.sqrt(np.sum((fa - fb) ** 2, axis=2))
        total += d[sel].sum()
        npix += int(sel.sum())
    if npix == 0:
        raise MetricsError("all masks empty across the sequence")
    return total / npix


# ---------------------------------------------------------------------------
# Synthetic subject and self-reenactment


@dataclass
class SyntheticSubject:
    """Per-frame ground-truth VA and coefficients from the sinusoid oracle."""

    va: np.ndarray  # (n, 2)
    coeffs: np.ndarray  # (n, 30)
    oracle_seed: int
    fps: float = 30.0
    video_id: str = "subject"

    @property
    def n_frames(self) -> int:
        return len(self.va)


def make_synthetic_subject(
    oracle_seed: int, n_frames: int, fps: float = 30.0, max_radius: float = 0.8
) -> SyntheticSubject:
    """Smooth VA orbit (harmonic Lissajous inside the disk) + oracle coefficients.

    Frequencies are harmonics of 1/6 Hz, so the orbit is a closed curve with a
    6 s period: any temporal split of a clip longer than one period covers the
    same VA locus in train and test.
    """
    if n_frames < 1:
        raise MetricsError("n_frames must be >= 1")
    f0 = 1.0 / 6.0
    t = np.arange(n_frames) / fps
    v = 0.62 * np.sin(2 * np.pi * f0 * t) + 0.30 * np.sin(2 * np.pi * 2 * f0 * t + 1.3)
    a = 0.62 * np.cos(2 * np.pi * f0 * t) + 0.30 * np.sin(2 * np.pi * 3 * f0 * t + 0.4)
    va = np.stack([v, a], axis=1)
    r = np.linalg.norm(va, axis=1)
    scale = np.where(r > max_radius, max_radius / np.maximum(r, 1e-12), 1.0)
    va = va * scale[:, None]
    coeffs = SinusoidOracle(oracle_seed)(va)
    return SyntheticSubject(va=va, coeffs=coeffs, oracle_seed=oracle_seed, fps=fps)


@dataclass
class SelfReenactResult:
    type_a: MetricsReport
    type_b: MetricsReport
    test_frames: list[int] = field(default_factory=list)


def self_reenact_eval(
    subject: SyntheticSubject,
    weights: DecoderWeights,
    model: BlendshapeModel,
    train_fraction: float = 0.7,
    smoothing_lambda: float = 0.0,
    width: int = 128,
    height: int = 128,
) -> SelfReenactResult:
    """Run both protocols on the held-out 30% tail and report APD triples."""
    n = subject.n_frames
    cut = int(np.ceil(train_fraction * n))
    test = list(range(cut, n))
    if not test:
        raise MetricsError("test split is empty; subject too short")

    gt_coeffs = subject.coeffs
    a_coeffs = smooth_track(gt_coeffs, smoothing_lambda)
    b_coeffs = smooth_track(decode_track(weights, subject.va), smoothing_lambda)

    gt_frames, a_frames, b_frames, masks = [], [], [], []
    for i in test:
        gt_verts = eval_mesh(model, gt_coeffs[i])
        gt_frames.append(render_preview(model, gt_verts, width, height))
        masks.append(rasterize_masks(model, gt_verts, width, height))
        a_frames.append(
            render_preview(model, eval_mesh(model, a_coeffs[i]), width, height)
        )
        b_frames.append(
            render_preview(model, eval_mesh(model, b_coeffs[i]), width, height)
        )

    def report(frames) -> MetricsReport:
        empty_face = sum(1 for m in masks if not m.face.any())
        empty_mouth = sum(1 for m in masks if not m.mouth.any())
        return MetricsReport(
            apd=apd(gt_frames, frames),
            face_apd=masked_apd(gt_frames, frames, masks, "face"),
            mouth_apd=masked_apd(gt_frames, frames, masks, "mouth"),
            frames_evaluated=len(test),
            empty_face_masks=empty_face,
            empty_mouth_masks=empty_mouth,
        )

    return SelfReenactResult(
        type_a=report(a_frames), type_b=report(b_frames), test_frames=test
    )
