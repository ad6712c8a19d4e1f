"""Timeline project: edits, validation, whole-video compilation, track export.

Project file: JSON with a schema version.  Track export: JSONL with one
{"frame": i, "expr": [30 floats]} object per frame, the handoff an external
neural-renderer stage would consume.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import EXPR_DIM
from .decoder import DecoderWeights
from .semantics import (
    EMOTION_LABELS,
    INTENSITIES,
    CompileConfig,
    blend_transition,
    compile_edit_detail,
)

SCHEMA_VERSION = 1


class ProjectError(ValueError):
    pass


@dataclass
class Edit:
    start_frame: int
    end_frame: int
    label: str
    intensity: str | None = None
    seed: int = 0

    def to_dict(self) -> dict:
        d = {
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "label": self.label,
            "seed": self.seed,
        }
        if self.intensity is not None:
            d["intensity"] = self.intensity
        return d

    @staticmethod
    def from_dict(d: dict) -> "Edit":
        return Edit(
            start_frame=int(d["start_frame"]),
            end_frame=int(d["end_frame"]),
            label=d["label"],
            intensity=d.get("intensity"),
            seed=int(d.get("seed", 0)),
        )


@dataclass
class Project:
    n_frames: int
    fps: float = 30.0
    edits: list[Edit] = field(default_factory=list)
    baseline: np.ndarray | None = None  # (n_frames, 30); None = all-neutral zeros
    model_path: str | None = None
    weights_path: str | None = None

    def baseline_track(self) -> np.ndarray:
        if self.baseline is None:
            return np.zeros((self.n_frames, EXPR_DIM))
        return self.baseline

    def to_dict(self) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "n_frames": self.n_frames,
            "fps": self.fps,
            "edits": [e.to_dict() for e in self.edits],
        }
        if self.model_path is not None:
            d["model_path"] = self.model_path
        if self.weights_path is not None:
            d["weights_path"] = self.weights_path
        if self.baseline is not None:
            d["baseline"] = [list(row) for row in self.baseline]
        return d

    @staticmethod
    def from_dict(d: dict) -> "Project":
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ProjectError(f"unsupported project schema version {version!r}")
        baseline = None
        if "baseline" in d:
            baseline = np.asarray(d["baseline"], dtype=np.float64)
            if baseline.ndim != 2 or baseline.shape[1] != EXPR_DIM:
                raise ProjectError("baseline must be an (n_frames, 30) array")
        return Project(
            n_frames=int(d["n_frames"]),
            fps=float(d.get("fps", 30.0)),
            edits=[Edit.from_dict(e) for e in d.get("edits", [])],
            baseline=baseline,
            model_path=d.get("model_path"),
            weights_path=d.get("weights_path"),
        )


def save_project(p: Project, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(p.to_dict(), fh, indent=2)


def load_project(path) -> Project:
    with open(path, encoding="utf-8") as fh:
        return Project.from_dict(json.load(fh))


@dataclass
class Violation:
    code: str
    message: str
    edits: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "edits": self.edits}


def validate_project(p: Project) -> list[Violation]:
    """Returns findings; an empty list means the project is valid."""
    out: list[Violation] = []
    if p.fps <= 0:
        out.append(Violation("bad_fps", f"fps must be positive: {p.fps}"))
    if p.n_frames < 1:
        out.append(Violation("bad_length", f"n_frames must be >= 1: {p.n_frames}"))
    if p.baseline is not None and len(p.baseline) != p.n_frames:
        out.append(
            Violation(
                "baseline_length",
                f"baseline has {len(p.baseline)} frames, project has {p.n_frames}",
            )
        )
    for i, e in enumerate(p.edits):
        if e.label not in EMOTION_LABELS:
            out.append(Violation("bad_label", f"edit {i}: unknown label {e.label!r}", [i]))
        elif e.label == "neutral" and e.intensity is not None:
            out.append(
                Violation("neutral_intensity", f"edit {i}: neutral admits no intensity", [i])
            )
        elif e.label != "neutral" and e.intensity not in INTENSITIES:
            out.append(
                Violation(
                    "missing_intensity",
                    f"edit {i}: label {e.label!r} requires an intensity",
                    [i],
                )
            )
        if not 0 <= e.start_frame < e.end_frame <= p.n_frames:
            out.append(
                Violation(
                    "bad_interval",
                    f"edit {i}: interval [{e.start_frame}, {e.end_frame}) "
                    f"invalid for {p.n_frames} frames",
                    [i],
                )
            )
    order = sorted(range(len(p.edits)), key=lambda i: p.edits[i].start_frame)
    for a, b in zip(order, order[1:]):
        ea, eb = p.edits[a], p.edits[b]
        if eb.start_frame < ea.end_frame:
            out.append(
                Violation(
                    "overlap",
                    f"edits {a} and {b} overlap: "
                    f"[{ea.start_frame}, {ea.end_frame}) and "
                    f"[{eb.start_frame}, {eb.end_frame})",
                    sorted([a, b]),
                )
            )
    return out


@dataclass
class CompileResult:
    track: np.ndarray  # (n_frames, 30)
    trajectories: dict[int, np.ndarray]  # edit index -> (len, 2) VA samples
    provenance: list[str]  # per frame: "baseline" or "edit:<i>"


def compile_project(
    p: Project, weights: DecoderWeights, cfg: CompileConfig | None = None
) -> CompileResult:
    """Compile every edit, cross-fade against the baseline, splice into the track.

    Frames outside all edits keep the baseline bit-exactly; smoothing happens
    inside each edit's compilation (before blending) so each edit's first and
    last ramp frames still meet the baseline exactly.
    """
    violations = validate_project(p)
    if violations:
        raise ProjectError(
            "invalid project: " + "; ".join(v.message for v in violations)
        )
    cfg = cfg or CompileConfig(fps=p.fps)
    track = p.baseline_track().copy()
    provenance = ["baseline"] * p.n_frames
    trajectories: dict[int, np.ndarray] = {}
    for i, e in enumerate(p.edits):
        n = e.end_frame - e.start_frame
        detail = compile_edit_detail(e.label, e.intensity, n, e.seed, weights, cfg)
        base_slice = track[e.start_frame : e.end_frame]
        track[e.start_frame : e.end_frame] = blend_transition(
            base_slice, detail.track, cfg.ramp_frames
        )
        trajectories[i] = detail.trajectory
        for f in range(e.start_frame, e.end_frame):
            provenance[f] = f"edit:{i}"
    return CompileResult(track=track, trajectories=trajectories, provenance=provenance)


def export_track(track: np.ndarray, path) -> None:
    track = np.asarray(track, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for i, row in enumerate(track):
            fh.write(json.dumps({"frame": i, "expr": list(row)}) + "\n")


def import_track(path) -> np.ndarray:
    """Load a track JSONL; frame indices must be 0..n-1 with no gaps."""
    rows: dict[int, list[float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                frame = int(obj["frame"])
                expr = obj["expr"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ProjectError(f"line {lineno}: malformed track line: {exc}") from exc
            if len(expr) != EXPR_DIM:
                raise ProjectError(
                    f"line {lineno}: expected {EXPR_DIM} coefficients, got {len(expr)}"
                )
            if frame in rows:
                raise ProjectError(f"line {lineno}: duplicate frame {frame}")
            rows[frame] = expr
    if not rows:
        raise ProjectError("empty track file")
    n = max(rows) + 1
    missing = [i for i in range(n) if i not in rows]
    if missing:
        raise ProjectError(f"track file missing frame(s) {missing[:5]}")
    track = np.array([rows[i] for i in range(n)], dtype=np.float64)
    if not np.all(np.isfinite(track)):
        raise ProjectError("track contains non-finite values")
    return track


# The baseline import shares the track schema.
import_baseline = import_track
