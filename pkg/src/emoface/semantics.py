"""Semantic edits to VA trajectories and coefficient tracks.

Maps (emotion label, intensity) to a region of the valence-arousal disk,
samples keypoints there, interpolates them with a clamped cubic B-spline at
one VA pair per frame, cross-fades edit tracks against a baseline over
20-frame ramps, and smooths coefficient tracks with a second-difference
penalized least-squares smoother.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

EMOTION_LABELS = ("neutral", "happy", "sad", "surprise", "fear")
INTENSITIES = ("low", "medium", "high")

DEFAULT_RAMP_FRAMES = 20
DEFAULT_SMOOTHING_LAMBDA = 5.0


class SemanticsError(ValueError):
    pass


@dataclass(frozen=True)
class VARegion:
    """Disk around the origin, or an annular sector.

    Angles are degrees counter-clockwise from the +valence axis.
    """

    kind: str  # "disk" | "sector"
    radius: float = 0.0
    angle_min: float = 0.0
    angle_max: float = 0.0
    radius_min: float = 0.0
    radius_max: float = 0.0

    def __post_init__(self):
        if self.kind == "disk":
            if not 0.0 < self.radius <= 1.0:
                raise SemanticsError(f"disk radius out of (0, 1]: {self.radius}")
        elif self.kind == "sector":
            if not 0.0 <= self.radius_min < self.radius_max <= 1.0:
                raise SemanticsError("sector radii must satisfy 0 <= rmin < rmax <= 1")
            span = self.angle_max - self.angle_min
            if not 0.0 < span < 180.0:
                raise SemanticsError(f"sector angle span out of (0, 180): {span}")
        else:
            raise SemanticsError(f"unknown region kind {self.kind!r}")

    def contains(self, valence: float, arousal: float) -> bool:
        r = math.hypot(valence, arousal)
        if self.kind == "disk":
            return r <= self.radius
        if not self.radius_min <= r <= self.radius_max:
            return False
        ang = math.degrees(math.atan2(arousal, valence)) % 360.0
        lo, hi = self.angle_min % 360.0, self.angle_max % 360.0
        if lo <= hi:
            return lo <= ang <= hi
        return ang >= lo or ang <= hi


# Fig-style circumplex layout: positive valence for happy, high arousal for
# surprise/fear, negative valence + low arousal for sad.  Radius bands encode
# intensity.  This table is configuration, not behavior; see region_table_json.
_INTENSITY_BANDS = {"low": (0.20, 0.40), "medium": (0.40, 0.65), "high": (0.65, 0.90)}
_LABEL_SECTORS = {
    "happy": (10.0, 50.0),
    "surprise": (70.0, 110.0),
    "fear": (110.0, 150.0),
    "sad": (185.0, 225.0),
}
NEUTRAL_RADIUS = 0.15


def default_region_table() -> dict[str, VARegion]:
    table = {"neutral": VARegion("disk", radius=NEUTRAL_RADIUS)}
    for label, (a0, a1) in _LABEL_SECTORS.items():
        for intensity, (r0, r1) in _INTENSITY_BANDS.items():
            table[f"{label}/{intensity}"] = VARegion(
                "sector", angle_min=a0, angle_max=a1, radius_min=r0, radius_max=r1
            )
    return table


def region_table_to_json(table: dict[str, VARegion]) -> str:
    def enc(r: VARegion) -> dict:
        if r.kind == "disk":
            return {"kind": "disk", "radius": r.radius}
        return {
            "kind": "sector",
            "angle_min": r.angle_min,
            "angle_max": r.angle_max,
            "radius_min": r.radius_min,
            "radius_max": r.radius_max,
        }

    return json.dumps({k: enc(v) for k, v in table.items()}, indent=2)


def region_table_from_json(text: str) -> dict[str, VARegion]:
    raw = json.loads(text)
    return {k: VARegion(**v) for k, v in raw.items()}


def region_for(
    label: str, intensity: str | None, table: dict[str, VARegion] | None = None
) -> VARegion:
    """Look up the VA region for a label/intensity pair.

    Neutral takes no intensity; every other label requires one.
    """
    if label not in EMOTION_LABELS:
        raise SemanticsError(f"unknown emotion label {label!r}")
    if label == "neutral":
        if intensity is not None:
            raise SemanticsError("neutral admits no intensity")
        key = "neutral"
    else:
        if intensity is None:
            raise SemanticsError(f"label {label!r} requires an intensity")
        if intensity not in INTENSITIES:
            raise SemanticsError(f"unknown intensity {intensity!r}")
        key = f"{label}/{intensity}"
    table = table if table is not None else default_region_table()
    if key not in table:
        raise SemanticsError(f"region table has no entry for {key!r}")
    return table[key]


def sample_keypoints(region: VARegion, k: int, seed: int) -> np.ndarray:
    """k points uniform in the region via rejection sampling; (k, 2) array."""
    if k < 1:
        raise SemanticsError("k must be >= 1")
    rmax = region.radius if region.kind == "disk" else region.radius_max
    rng = np.random.default_rng(seed)
    pts = np.empty((k, 2))
    got = 0
    while got < k:
        cand = rng.uniform(-rmax, rmax, size=(4 * (k - got) + 16, 2))
        for v, a in cand:
            if region.contains(v, a):
                pts[got] = (v, a)
                got += 1
                if got == k:
                    break
    return pts


# ---------------------------------------------------------------------------
# Clamped interpolating B-spline


def _averaging_knots(params: np.ndarray, degree: int) -> np.ndarray:
    """Clamped knot vector from interpolation sites (de Boor's averaging rule)."""
    m = len(params)
    interior = [params[i + 1 : i + degree + 1].mean() for i in range(m - degree - 1)]
    return np.concatenate(
        [np.full(degree + 1, params[0]), interior, np.full(degree + 1, params[-1])]
    )


def _find_span(knots: np.ndarray, degree: int, n_coeff: int, x: float) -> int:
    # index s with knots[s] <= x < knots[s+1], clamped at the right end
    if x >= knots[n_coeff]:
        return n_coeff - 1
    s = int(np.searchsorted(knots, x, side="right") - 1)
    return max(s, degree)


def deboor(knots: np.ndarray, coeffs: np.ndarray, degree: int, x: float) -> np.ndarray:
    """Evaluate a B-spline by de Boor's recurrence; coeffs is (n, dims)."""
    s = _find_span(knots, degree, len(coeffs), x)
    d = [coeffs[j + s - degree].astype(np.float64) for j in range(degree + 1)]
    for r in range(1, degree + 1):
        for j in range(degree, r - 1, -1):
            i = j + s - degree
            denom = knots[i + degree - r + 1] - knots[i]
            alpha = 0.0 if denom == 0.0 else (x - knots[i]) / denom
            d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j]
    return d[degree]


def _collocation_matrix(knots: np.ndarray, degree: int, m: int, sites) -> np.ndarray:
    A = np.zeros((len(sites), m))
    unit = np.eye(m)
    for j in range(m):
        for i, x in enumerate(sites):
            A[i, j] = deboor(knots, unit[:, j : j + 1], degree, x)[0]
    return A


def interpolating_spline(keypoints: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Control points of the clamped cubic B-spline through keypoints.

    Keypoints sit at equally spaced parameters on [0, 1].  With fewer than 4
    keypoints the degree drops to m - 1.  Returns (knots, control, degree).
    """
    kp = np.atleast_2d(np.asarray(keypoints, dtype=np.float64))
    m = len(kp)
    degree = min(3, m - 1)
    params = np.linspace(0.0, 1.0, m)
    knots = _averaging_knots(params, degree)
    A = _collocation_matrix(knots, degree, m, params)
    control = np.linalg.solve(A, kp)
    return knots, control, degree


def bspline_trajectory(keypoints: np.ndarray, n_frames: int) -> np.ndarray:
    """(n_frames, 2) VA trajectory through the keypoints; clamped endpoints.

    Values are clipped to the unit square, which is a no-op unless the cubic
    overshoots past |1| between keypoints.
    """
    kp = np.atleast_2d(np.asarray(keypoints, dtype=np.float64))
    if n_frames < 1:
        raise SemanticsError("n_frames must be >= 1")
    if len(kp) == 1:
        return np.clip(np.repeat(kp, n_frames, axis=0), -1.0, 1.0)
    knots, control, degree = interpolating_spline(kp)
    ts = np.linspace(0.0, 1.0, n_frames) if n_frames > 1 else np.array([0.0])
    out = np.array([deboor(knots, control, degree, t) for t in ts])
    return np.clip(out, -1.0, 1.0)


# ---------------------------------------------------------------------------
# Ramped blending and smoothing


def ramp_weights(n: int, ramp_frames: int) -> np.ndarray:
    """Blend weight per frame: 0 -> 1 over the first ramp, 1 -> 0 over the last.

    Ramps longer than half the track are shortened to floor(n/2).
    """
    if n == 0:
        return np.zeros(0)
    ramp = min(ramp_frames, n // 2)
    if ramp == 0:
        return np.ones(n)
    i = np.arange(n, dtype=np.float64)
    return np.minimum(1.0, np.minimum(i / ramp, (n - 1 - i) / ramp))


def blend_transition(
    base: np.ndarray, edit: np.ndarray, ramp_frames: int = DEFAULT_RAMP_FRAMES
) -> np.ndarray:
    """Cross-fade edit over base: out[i] = (1-w)*base[i] + w*edit[i]."""
    base = np.asarray(base, dtype=np.float64)
    edit = np.asarray(edit, dtype=np.float64)
    if base.shape != edit.shape:
        raise SemanticsError(f"length mismatch: {base.shape} vs {edit.shape}")
    if ramp_frames < 0:
        raise SemanticsError("ramp_frames must be >= 0")
    w = ramp_weights(len(base), ramp_frames)[:, None]
    return (1.0 - w) * base + w * edit


def smooth_track(track: np.ndarray, lam: float) -> np.ndarray:
    """Penalized least-squares smoother per coefficient dimension.

    Solves (I + lam * D2^T D2) x = y with D2 the second-difference operator,
    a symmetric pentadiagonal system.  lam=0 is the identity; affine inputs
    are fixed points for any lam.
    """
    track = np.asarray(track, dtype=np.float64)
    if lam < 0:
        raise SemanticsError("lambda must be >= 0")
    if not np.all(np.isfinite(track)):
        raise SemanticsError("track must be finite")
    n = len(track)
    if lam == 0.0 or n < 3:
        return track.copy()
    squeeze = track.ndim == 1
    y = track[:, None] if squeeze else track
    # banded upper form of I + lam * D2^T D2
    main = np.ones(n)
    main[0] += lam
    main[-1] += lam
    if n >= 4:
        main[1] += 5.0 * lam
        main[-2] += 5.0 * lam
        main[2:-2] += 6.0 * lam
    else:  # n == 3
        main[1] += 4.0 * lam
    off1 = np.full(n - 1, -4.0 * lam)
    off1[0] = -2.0 * lam
    off1[-1] = -2.0 * lam
    off2 = np.full(n - 2, lam)
    ab = np.zeros((3, n))
    ab[0, 2:] = off2
    ab[1, 1:] = off1
    ab[2, :] = main
    x = solveh_banded(ab, y)
    return x[:, 0] if squeeze else x


def second_difference_energy(track: np.ndarray) -> float:
    track = np.asarray(track, dtype=np.float64)
    if len(track) < 3:
        return 0.0
    d2 = np.diff(track, n=2, axis=0)
    return float(np.sum(d2**2))


# ---------------------------------------------------------------------------
# Edit compilation


@dataclass
class CompileConfig:
    fps: float = 30.0
    keypoints_per_second: float = 1.0
    ramp_frames: int = DEFAULT_RAMP_FRAMES
    smoothing_lambda: float = DEFAULT_SMOOTHING_LAMBDA
    region_table: dict[str, VARegion] | None = None


@dataclass
class EditCompilation:
    track: np.ndarray  # (n_frames, 30)
    trajectory: np.ndarray  # (n_frames, 2)
    keypoints: np.ndarray  # (k, 2)


def compile_edit_detail(
    label: str,
    intensity: str | None,
    n_frames: int,
    seed: int,
    weights,
    cfg: CompileConfig | None = None,
) -> EditCompilation:
    """region -> keypoints -> B-spline trajectory -> decode -> smooth."""
    from .decoder import decode_track

    cfg = cfg or CompileConfig()
    region = region_for(label, intensity, cfg.region_table)
    duration_s = n_frames / cfg.fps
    k = max(2, math.ceil(duration_s * cfg.keypoints_per_second))
    keypoints = sample_keypoints(region, k, seed)
    traj = bspline_trajectory(keypoints, n_frames)
    track = decode_track(weights, traj)
    track = smooth_track(track, cfg.smoothing_lambda)
    return EditCompilation(track=track, trajectory=traj, keypoints=keypoints)


def compile_edit(
    label: str,
    intensity: str | None,
    n_frames: int,
    seed: int,
    weights,
    cfg: CompileConfig | None = None,
) -> np.ndarray:
    return compile_edit_detail(label, intensity, n_frames, seed, weights, cfg).track
