"""Local HTTP/JSON API driving the timeline UI.

Single-user, single compile job at a time.  Compiled state is swapped in
atomically when a job finishes, so readers never observe a half-written
result.  Previews are rendered on demand and cached by (track hash, frame).
"""

from __future__ import annotations

import hashlib
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .decoder import DecoderWeights
from .face3d import BlendshapeModel, eval_mesh, ppm_bytes, render_preview
from .metrics import MetricsReport
from .project import CompileResult, Edit, Project, compile_project, validate_project
from .semantics import CompileConfig, default_region_table

PPM_MEDIA_TYPE = "image/x-portable-pixmap"


@dataclass
class JobStatus:
    job_id: str
    state: str  # queued | running | done | failed
    progress: float = 0.0
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "state": self.state,
            "progress": self.progress,
            "message": self.message,
        }


@dataclass
class AppState:
    project: Project
    weights: DecoderWeights
    model: BlendshapeModel
    cfg: CompileConfig = field(default_factory=CompileConfig)
    preview_size: tuple[int, int] = (256, 256)
    metrics: MetricsReport | None = None
    compiled: CompileResult | None = None
    jobs: dict[str, JobStatus] = field(default_factory=dict)
    active_job: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)
    preview_cache: dict[tuple[str, int], bytes] = field(default_factory=dict)
    run_jobs_inline: bool = False  # synchronous compile, for tests


def _error(status: int, code: str, message: str, detail=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


def _track_hash(track: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(track).tobytes()).hexdigest()[:16]


def _render_ppm(state: AppState, track: np.ndarray, frame: int, tag: str) -> bytes:
    key = (f"{tag}:{_track_hash(track)}", frame)
    cached = state.preview_cache.get(key)
    if cached is not None:
        return cached
    w, h = state.preview_size
    verts = eval_mesh(state.model, track[frame])
    data = ppm_bytes(render_preview(state.model, verts, w, h))
    state.preview_cache[key] = data
    return data


def _run_compile(state: AppState, job: JobStatus) -> None:
    try:
        job.state = "running"
        job.progress = 0.1
        result = compile_project(state.project, state.weights, state.cfg)
        with state.lock:
            state.compiled = result
            state.active_job = None
        job.progress = 1.0
        job.state = "done"
        job.message = "compiled"
    except Exception as exc:  # surfaced through the job status
        job.state = "failed"
        job.message = str(exc)
        with state.lock:
            state.active_job = None


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="emoface service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.emoface = state

    @app.get("/api/project")
    def get_project():
        return state.project.to_dict()

    @app.put("/api/edits")
    def put_edits(edits: list[dict]):
        try:
            parsed = [Edit.from_dict(e) for e in edits]
        except (KeyError, TypeError, ValueError) as exc:
            return _error(422, "bad_edit", f"malformed edit: {exc}")
        candidate = Project(
            n_frames=state.project.n_frames,
            fps=state.project.fps,
            edits=parsed,
            baseline=state.project.baseline,
            model_path=state.project.model_path,
            weights_path=state.project.weights_path,
        )
        violations = validate_project(candidate)
        if violations:
            return _error(
                422,
                "invalid_edits",
                "edit list failed validation",
                [v.to_dict() for v in violations],
            )
        with state.lock:
            state.project = candidate
        return {"ok": True, "n_edits": len(parsed)}

    @app.post("/api/compile")
    def post_compile():
        with state.lock:
            if state.active_job is not None:
                return _error(409, "busy", "a compile job is already running")
            job = JobStatus(job_id=uuid.uuid4().hex, state="queued")
            state.jobs[job.job_id] = job
            state.active_job = job.job_id
        if state.run_jobs_inline:
            _run_compile(state, job)
        else:
            threading.Thread(target=_run_compile, args=(state, job), daemon=True).start()
        return job.to_dict()

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            return _error(404, "no_such_job", f"unknown job {job_id}")
        return job.to_dict()

    @app.get("/api/trajectory")
    def get_trajectory():
        with state.lock:
            compiled = state.compiled
        if compiled is None:
            return _error(404, "not_compiled", "no compiled result yet")
        return {
            "edits": [
                {"edit": i, "va": [[float(v), float(a)] for v, a in traj]}
                for i, traj in sorted(compiled.trajectories.items())
            ]
        }

    @app.get("/api/preview/{frame}")
    def get_preview(frame: int):
        with state.lock:
            compiled = state.compiled
        if compiled is None:
            return _error(404, "not_compiled", "no compiled result yet")
        if not 0 <= frame < len(compiled.track):
            return _error(404, "bad_frame", f"frame {frame} out of range")
        return Response(
            content=_render_ppm(state, compiled.track, frame, "compiled"),
            media_type=PPM_MEDIA_TYPE,
        )

    @app.get("/api/baseline-preview/{frame}")
    def get_baseline_preview(frame: int):
        track = state.project.baseline_track()
        if not 0 <= frame < len(track):
            return _error(404, "bad_frame", f"frame {frame} out of range")
        return Response(
            content=_render_ppm(state, track, frame, "baseline"),
            media_type=PPM_MEDIA_TYPE,
        )

    @app.get("/api/metrics")
    def get_metrics():
        if state.metrics is None:
            return _error(404, "no_metrics", "no self-reenactment metrics recorded")
        return state.metrics.to_dict()

    @app.get("/api/labels")
    def get_labels():
        table = state.cfg.region_table or default_region_table()
        out = {}
        for key, region in table.items():
            if region.kind == "disk":
                out[key] = {"kind": "disk", "radius": region.radius}
            else:
                out[key] = {
                    "kind": "sector",
                    "angle_min": region.angle_min,
                    "angle_max": region.angle_max,
                    "radius_min": region.radius_min,
                    "radius_max": region.radius_max,
                }
        return out

    return app
