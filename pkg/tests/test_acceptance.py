"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
summary lines.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from emoface.dataset import synth_dataset, split_dataset
from emoface.decoder import (
    DESK_WIDTHS,
    DecoderConfig,
    backward,
    forward,
    init_weights,
    loss_rmse,
    train,
)
from emoface.face3d import make_synthetic_model
from emoface.metrics import apd, make_synthetic_subject, masked_apd, self_reenact_eval
from emoface.semantics import (
    bspline_trajectory,
    interpolating_spline,
    deboor,
    second_difference_energy,
    smooth_track,
)
from test_decoder import finite_difference_grad
from test_metrics import MaskFrame, full_mask
from test_semantics import oracle_spline_eval


def _report(name, ok, detail=""):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name} failed: {detail}"


def test_gradient_oracle():
    start = time.time()
    rng = np.random.default_rng(4)
    cfg = DecoderConfig(layer_widths=[2, 8, 8, 30], seed=4, dropout_rate=0.0)
    w = init_weights(cfg)
    for i in range(len(w.biases)):
        w.biases[i] = rng.uniform(-0.3, 0.3, w.biases[i].shape)
    X = rng.uniform(-1, 1, (16, 2))
    Y = rng.normal(0, 1, (16, 30))
    gw, gb, _ = backward(w, X, Y)
    analytic = np.concatenate([g.ravel() for g in gw] + [g.ravel() for g in gb])
    numeric = finite_difference_grad(w, X, Y, h=1e-4)
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-8)
    elapsed = time.time() - start
    _report(
        "gradient-oracle",
        rel.max() < 1e-4 and elapsed < 10.0,
        f"(max rel err {rel.max():.2e}, {elapsed:.1f}s)",
    )


def test_decoder_learning():
    start = time.time()
    d = synth_dataset(10, 10_000, 0.01)
    train_d, val_d = split_dataset(d, 0.7)
    cfg = DecoderConfig(layer_widths=list(DESK_WIDTHS), epochs=150, seed=0)
    w, report = train(train_d, val_d, cfg)
    mean_pred = np.tile(train_d.expr_array().mean(axis=0), (len(val_d), 1))
    baseline = float(np.sqrt(np.mean((mean_pred - val_d.expr_array()) ** 2)))
    final = report.val_loss[-1]
    elapsed = time.time() - start
    _report(
        "decoder-learning",
        final < 0.2 * baseline and elapsed < 300.0,
        f"(val RMSE {final:.4f} vs 0.2x baseline {0.2 * baseline:.4f}, {elapsed:.0f}s)",
    )


def test_bspline_oracle():
    rng = np.random.default_rng(8)
    kp = rng.uniform(-0.8, 0.8, (7, 2))
    knots, control, degree = interpolating_spline(kp)
    worst = 0.0
    for x in rng.uniform(0.0, 1.0, 100):
        got = deboor(knots, control, degree, x)
        expected = oracle_spline_eval(knots, control, degree, x)
        worst = max(worst, float(np.max(np.abs(got - expected))))
    traj = bspline_trajectory(kp, 80)
    end_err = max(
        float(np.max(np.abs(traj[0] - kp[0]))), float(np.max(np.abs(traj[-1] - kp[-1])))
    )
    _report(
        "bspline-oracle",
        worst < 1e-9 and end_err < 1e-9,
        f"(max de Boor dev {worst:.1e}, endpoint dev {end_err:.1e})",
    )


def test_smoother():
    rng = np.random.default_rng(17)
    track = rng.normal(0, 1, (50, 30))
    ok_id = np.allclose(smooth_track(track, 0.0), track, atol=1e-9)
    affine = np.linspace(-2, 2, 50)[:, None] * np.arange(1, 31)[None, :] + 0.5
    ok_affine = all(
        np.allclose(smooth_track(affine, lam), affine, atol=1e-8)
        for lam in (0.1, 5.0, 1000.0)
    )
    ok_energy = True
    for _ in range(100):
        n = int(rng.integers(3, 80))
        t = rng.normal(0, 1, (n, 5))
        lam = float(rng.uniform(0, 100))
        out = smooth_track(t, lam)
        if second_difference_energy(out) > second_difference_energy(t) + 1e-12:
            ok_energy = False
            break
    _report(
        "smoother",
        ok_id and ok_affine and ok_energy,
        f"(identity {ok_id}, affine {ok_affine}, energy {ok_energy})",
    )


def test_apd_closed_forms():
    a = [np.full((16, 16, 3), 100, np.uint8)]
    b = [np.full((16, 16, 3), 110, np.uint8)]
    ok_zero = apd(a, a) == 0.0
    ok_shift = abs(apd(a, b) - math.sqrt(300)) < 1e-9
    masks = [full_mask(16, 16, mouth=True)]
    ok_full = masked_apd(a, b, masks, "face") == apd(a, b)
    _report(
        "apd-closed-forms",
        ok_zero and ok_shift and ok_full,
        f"(shift {apd(a, b):.6f} vs {math.sqrt(300):.6f})",
    )


def test_emotion_self_reenactment_trend():
    start = time.time()
    subject = make_synthetic_subject(21, 900)
    cut = int(np.ceil(0.7 * 900))
    from emoface.dataset import ExpressionDataset, ExprSample, VAPoint

    samples = [
        ExprSample("s", i, VAPoint(float(v), float(a)), subject.coeffs[i])
        for i, (v, a) in enumerate(subject.va)
    ]
    train_d = ExpressionDataset(samples[:cut])
    # dropout off: 630 samples on a closed VA curve is a pure fitting problem
    cfg = DecoderConfig(
        layer_widths=list(DESK_WIDTHS), epochs=300, seed=3, dropout_rate=0.0
    )
    w, _ = train(train_d, None, cfg)
    model = make_synthetic_model(0, 2500)
    result = self_reenact_eval(
        subject, w, model, smoothing_lambda=5.0, width=128, height=128
    )
    a_rep, b_rep = result.type_a, result.type_b
    trend_ok = b_rep.face_apd <= 2.0 * a_rep.face_apd + 1.0
    order_ok = b_rep.apd <= b_rep.face_apd <= b_rep.mouth_apd
    elapsed = time.time() - start
    _report(
        "self-reenactment-trend",
        trend_ok and order_ok and elapsed < 600.0,
        f"(A face {a_rep.face_apd:.3f}, B face {b_rep.face_apd:.3f}, "
        f"B triple {b_rep.apd:.3f}/{b_rep.face_apd:.3f}/{b_rep.mouth_apd:.3f}, "
        f"{elapsed:.0f}s)",
    )


def _run_cli(args, cwd):
    proc = subprocess.run(
        [sys.executable, "-m", "emoface.cli", *args],
        cwd=cwd,
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


def _pipeline_once(root):
    root.mkdir()
    _run_cli(
        ["synth-subject", "--seed", "5", "--frames", "240", "--out", str(root / "subj")],
        root,
    )
    _run_cli(
        [
            "train",
            "--data", str(root / "subj" / "subject.jsonl"),
            "--out", str(root / "w.bin"),
            "--profile", "desk",
            "--epochs", "5",
        ],
        root,
    )
    project = root / "p.json"
    from emoface.project import Edit, Project, save_project

    save_project(
        Project(n_frames=240, edits=[Edit(30, 210, "happy", "medium", seed=7)]),
        project,
    )
    _run_cli(
        [
            "compile",
            "--project", str(project),
            "--weights", str(root / "w.bin"),
            "--out", str(root / "t.jsonl"),
        ],
        root,
    )
    _run_cli(
        [
            "preview",
            "--track", str(root / "t.jsonl"),
            "--frame", "120",
            "--model-vertices", "900",
            "--out", str(root / "f.ppm"),
        ],
        root,
    )
    return {
        name: (root / name).read_bytes()
        for name in ("w.bin", "t.jsonl", "f.ppm")
    }


def test_cli_determinism(tmp_path):
    out1 = _pipeline_once(tmp_path / "run1")
    out2 = _pipeline_once(tmp_path / "run2")
    same = {name: out1[name] == out2[name] for name in out1}
    _report("cli-determinism", all(same.values()), f"({same})")


def test_pipeline_boundary():
    d = synth_dataset(2, 400, 0.0)
    w, _ = train(d, None, DecoderConfig(layer_widths=[2, 32, 30], epochs=20, seed=0))
    from emoface.project import Edit, Project, compile_project

    rng = np.random.default_rng(3)
    baseline = rng.normal(0, 0.4, (400, 30))
    edits = [Edit(50, 170, "surprise", "high", seed=1), Edit(230, 350, "sad", "low", seed=2)]
    p = Project(n_frames=400, baseline=baseline, edits=edits)
    result = compile_project(p, w)
    outside = np.r_[0:50, 170:230, 350:400]
    outside_ok = np.array_equal(result.track[outside], baseline[outside])
    starts_ok = np.array_equal(result.track[50], baseline[50]) and np.array_equal(
        result.track[230], baseline[230]
    )
    changed = not np.array_equal(result.track[50:170], baseline[50:170])
    _report(
        "pipeline-boundary",
        outside_ok and starts_ok and changed,
        f"(outside exact {outside_ok}, edit starts exact {starts_ok})",
    )
