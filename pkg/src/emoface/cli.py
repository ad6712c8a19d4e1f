"""Command-line front door.

Exit codes: 0 success, 2 usage, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import decoder as dec
from . import face3d
from . import metrics as met
from . import project as prj
from .semantics import CompileConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

PROFILES = {
    "full": dict(layer_widths=dec.FULL_WIDTHS, epochs=1000),
    "desk": dict(layer_widths=dec.DESK_WIDTHS, epochs=300),
}


class CliError(Exception):
    def __init__(self, message: str, exit_code: int = EXIT_DATA):
        super().__init__(message)
        self.exit_code = exit_code


def _subject_from_dataset(d: ds.ExpressionDataset, fps: float) -> met.SyntheticSubject:
    samples = sorted(d.samples, key=lambda s: s.frame_idx)
    va = np.array([[s.va.valence, s.va.arousal] for s in samples])
    coeffs = np.array([s.expr for s in samples])
    return met.SyntheticSubject(va=va, coeffs=coeffs, oracle_seed=-1, fps=fps)


def cmd_synth_subject(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    subject = met.make_synthetic_subject(args.seed, args.frames, fps=args.fps)
    samples = [
        ds.ExprSample(
            "subject", i, ds.VAPoint(float(v), float(a)), subject.coeffs[i]
        )
        for i, (v, a) in enumerate(subject.va)
    ]
    ds.save_dataset(ds.ExpressionDataset(samples), out / "subject.jsonl")
    meta = {
        "n_frames": args.frames,
        "fps": args.fps,
        "oracle_seed": args.seed,
        "dataset": "subject.jsonl",
    }
    (out / "subject.json").write_text(json.dumps(meta, indent=2))
    print(f"wrote {out / 'subject.jsonl'} ({args.frames} frames)")
    return EXIT_OK


def cmd_train(args) -> int:
    try:
        data = ds.load_dataset(args.data)
    except (OSError, ds.DatasetError) as exc:
        raise CliError(f"cannot load dataset: {exc}") from exc
    profile = PROFILES[args.profile]
    cfg = dec.DecoderConfig(
        layer_widths=list(profile["layer_widths"]),
        epochs=args.epochs if args.epochs is not None else profile["epochs"],
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        dropout_rate=args.dropout,
        seed=args.seed,
    )
    train_d, val_d = ds.split_dataset(data, args.train_fraction)
    weights, report = dec.train(train_d, val_d, cfg)
    if report.diverged:
        raise CliError("training diverged (non-finite loss)", EXIT_NUMERIC)
    dec.save_weights(weights, args.out)
    report_path = args.report or str(Path(args.out).with_suffix(".csv"))
    with open(report_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_rmse", "val_rmse"])
        for i, (tr, vl) in enumerate(zip(report.train_loss, report.val_loss)):
            writer.writerow([i, tr, vl])
    final_val = report.val_loss[-1] if report.val_loss else float("nan")
    print(f"wrote {args.out} (final val RMSE {final_val:.5f}, report {report_path})")
    return EXIT_OK


def _load_weights(path) -> dec.DecoderWeights:
    try:
        return dec.load_weights(path)
    except (OSError, dec.DecoderError) as exc:
        raise CliError(f"cannot load weights: {exc}") from exc


def cmd_compile(args) -> int:
    try:
        p = prj.load_project(args.project)
    except (OSError, prj.ProjectError, json.JSONDecodeError, KeyError) as exc:
        raise CliError(f"cannot load project: {exc}") from exc
    weights = _load_weights(args.weights)
    try:
        result = prj.compile_project(p, weights, CompileConfig(fps=p.fps))
    except prj.ProjectError as exc:
        raise CliError(str(exc)) from exc
    prj.export_track(result.track, args.out)
    prov_path = args.provenance or str(Path(args.out).with_suffix(".provenance.json"))
    with open(prov_path, "w") as fh:
        json.dump({"frames": result.provenance}, fh)
    print(f"wrote {args.out} ({len(result.track)} frames, provenance {prov_path})")
    return EXIT_OK


def _load_model(args) -> face3d.BlendshapeModel:
    if args.model:
        try:
            return face3d.load_model(args.model)
        except (OSError, face3d.Face3dError) as exc:
            raise CliError(f"cannot load model: {exc}") from exc
    return face3d.make_synthetic_model(args.model_seed, args.model_vertices)


def cmd_preview(args) -> int:
    try:
        track = prj.import_track(args.track)
    except (OSError, prj.ProjectError) as exc:
        raise CliError(f"cannot load track: {exc}") from exc
    if not 0 <= args.frame < len(track):
        raise CliError(f"frame {args.frame} out of range [0, {len(track)})")
    model = _load_model(args)
    verts = face3d.eval_mesh(model, track[args.frame])
    frame = face3d.render_preview(model, verts, args.width, args.height)
    face3d.write_ppm(frame, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    subject_path = Path(args.subject)
    if subject_path.is_dir():
        subject_path = subject_path / "subject.jsonl"
    try:
        data = ds.load_dataset(subject_path)
    except (OSError, ds.DatasetError) as exc:
        raise CliError(f"cannot load subject: {exc}") from exc
    subject = _subject_from_dataset(data, args.fps)
    weights = _load_weights(args.weights)
    model = _load_model(args)
    result = met.self_reenact_eval(
        subject,
        weights,
        model,
        smoothing_lambda=args.smoothing_lambda,
        width=args.size,
        height=args.size,
    )
    report = {
        "with_gt_expressions": result.type_a.to_dict(),
        "emotion_self_reenactment": result.type_b.to_dict(),
    }
    with open(args.out, "w") as fh:
        json.dump(report, fh, indent=2)
    print(f"{'':28s}{'APD':>10s}{'Face-APD':>12s}{'Mouth-APD':>12s}")
    for name, rep in (
        ("with GT expressions", result.type_a),
        ("emotion self-reenactment", result.type_b),
    ):
        print(f"{name:28s}{rep.apd:10.4f}{rep.face_apd:12.4f}{rep.mouth_apd:12.4f}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import AppState, create_app

    try:
        p = prj.load_project(args.project)
    except (OSError, prj.ProjectError, json.JSONDecodeError, KeyError) as exc:
        raise CliError(f"cannot load project: {exc}") from exc
    weights_path = args.weights or p.weights_path
    if weights_path is None:
        raise CliError("no weights file given (flag --weights or project weights_path)")
    weights = _load_weights(weights_path)
    model = _load_model(args)
    metrics = None
    if args.metrics:
        with open(args.metrics) as fh:
            raw = json.load(fh)
        metrics = met.MetricsReport(**raw)
    state = AppState(
        project=p,
        weights=weights,
        model=model,
        cfg=CompileConfig(fps=p.fps),
        metrics=metrics,
    )
    app = create_app(state)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emoface", description="Emotion-timeline editing engine"
    )
    parser.add_argument(
        "--json", action="store_true", help="emit machine-readable JSON errors"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-subject", help="generate a synthetic subject dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=900)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_subject)

    p = sub.add_parser("train", help="train the expression decoder")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="training report CSV (default: <out>.csv)")
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    p.add_argument("--epochs", type=int, help="override the profile epoch count")
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compile", help="compile a project into a coefficient track")
    p.add_argument("--project", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--provenance", help="provenance JSON (default: <out>.provenance.json)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("preview", help="render one frame of a track to PPM")
    p.add_argument("--track", required=True)
    p.add_argument("--model", help="blendshape model file (default: synthesize)")
    p.add_argument("--model-seed", type=int, default=0)
    p.add_argument("--model-vertices", type=int, default=2500)
    p.add_argument("--frame", type=int, required=True)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preview)

    p = sub.add_parser("eval", help="self-reenactment evaluation (types A and B)")
    p.add_argument("--subject", required=True, help="subject dir or JSONL dataset")
    p.add_argument("--weights", required=True)
    p.add_argument("--model", help="blendshape model file (default: synthesize)")
    p.add_argument("--model-seed", type=int, default=0)
    p.add_argument("--model-vertices", type=int, default=2500)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--smoothing-lambda", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the local HTTP service")
    p.add_argument("--project", required=True)
    p.add_argument("--weights")
    p.add_argument("--model", help="blendshape model file (default: synthesize)")
    p.add_argument("--model-seed", type=int, default=0)
    p.add_argument("--model-vertices", type=int, default=2500)
    p.add_argument("--metrics", help="previously computed metrics JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        if args.json:
            print(json.dumps({"error": str(exc), "exit_code": exc.exit_code}), file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (dec.DivergenceError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
