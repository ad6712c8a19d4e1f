import json
import math

import numpy as np
import pytest

from emoface.dataset import (
    EXPR_DIM,
    DatasetError,
    ExpressionDataset,
    ExprSample,
    SinusoidOracle,
    VAPoint,
    compute_norm_stats,
    load_dataset,
    save_dataset,
    split_dataset,
    synth_dataset,
)


def _line(video_id="v1", frame=0, va=(0.0, 0.0), expr=None):
    expr = [0.0] * EXPR_DIM if expr is None else expr
    return json.dumps({"video_id": video_id, "frame": frame, "va": list(va), "expr": expr})


def test_load_single_neutral_sample(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text(_line() + "\n")
    d = load_dataset(p)
    assert len(d) == 1
    s = d.samples[0]
    assert s.va == VAPoint(0.0, 0.0)
    assert np.all(s.expr == 0.0)


def test_load_wrong_expr_length_reports_error(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text(_line(expr=[0.0] * 29) + "\n")
    with pytest.raises(DatasetError, match="expected 30 coefficients"):
        load_dataset(p)


def test_load_three_lines_in_order(tmp_path):
    p = tmp_path / "d.jsonl"
    lines = [_line(frame=i, va=(0.1 * i, -0.1 * i)) for i in range(3)]
    p.write_text("\n".join(lines) + "\n")
    d = load_dataset(p)
    assert [s.frame_idx for s in d.samples] == [0, 1, 2]


def test_load_reports_line_number(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text(_line() + "\n" + "{broken\n")
    with pytest.raises(DatasetError, match="line 2"):
        load_dataset(p)


def test_load_rejects_duplicates_and_out_of_range_va(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text(_line(frame=3) + "\n" + _line(frame=3) + "\n")
    with pytest.raises(DatasetError, match="duplicate"):
        load_dataset(p)
    p.write_text(_line(va=(1.5, 0.0)) + "\n")
    with pytest.raises(DatasetError, match="out of range"):
        load_dataset(p)


def test_save_load_round_trip_bit_exact(tmp_path):
    d = synth_dataset(7, 40, 0.05)
    p = tmp_path / "d.jsonl"
    save_dataset(d, p)
    d2 = load_dataset(p)
    assert len(d2) == len(d)
    for a, b in zip(d.samples, d2.samples):
        assert a.va == b.va
        assert np.array_equal(a.expr, b.expr)


def test_split_temporal_prefix():
    samples = [
        ExprSample("v1", i, VAPoint(0.0, 0.0), np.zeros(EXPR_DIM)) for i in range(10)
    ]
    train, test = split_dataset(ExpressionDataset(samples), 0.7)
    assert [s.frame_idx for s in train.samples] == list(range(7))
    assert [s.frame_idx for s in test.samples] == [7, 8, 9]


def test_split_singleton_goes_to_train():
    d = ExpressionDataset([ExprSample("v", 0, VAPoint(0, 0), np.zeros(EXPR_DIM))])
    train, test = split_dataset(d, 0.5)
    assert len(train) == 1 and len(test) == 0


def test_split_shuffled_deterministic_and_partitions():
    d = synth_dataset(3, 23, 0.0)
    a1, b1 = split_dataset(d, 0.6, seed=5, mode="shuffled")
    a2, b2 = split_dataset(d, 0.6, seed=5, mode="shuffled")
    assert [s.frame_idx for s in a1.samples] == [s.frame_idx for s in a2.samples]
    assert [s.frame_idx for s in b1.samples] == [s.frame_idx for s in b2.samples]
    got = sorted(s.frame_idx for s in a1.samples + b1.samples)
    assert got == list(range(23))
    assert len(a1) == math.ceil(0.6 * 23)


def test_split_rejects_bad_fraction():
    d = synth_dataset(1, 3, 0.0)
    for frac in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DatasetError):
            split_dataset(d, frac)


def test_norm_stats_hand_case():
    samples = [
        ExprSample("v", 0, VAPoint(0, 0), np.zeros(EXPR_DIM)),
        ExprSample("v", 1, VAPoint(0, 0), np.full(EXPR_DIM, 2.0)),
    ]
    stats = compute_norm_stats(ExpressionDataset(samples))
    assert np.allclose(stats.expr_mean, 1.0)
    assert np.allclose(stats.expr_std, 1.0)  # population std


def test_norm_stats_floor_on_constant_data():
    samples = [
        ExprSample("v", i, VAPoint(0, 0), np.full(EXPR_DIM, 0.5)) for i in range(3)
    ]
    stats = compute_norm_stats(ExpressionDataset(samples))
    assert np.allclose(stats.expr_mean, 0.5)
    assert np.all(stats.expr_std == 1e-6)


def test_normalize_by_own_stats_is_standard():
    d = synth_dataset(11, 200, 0.1)
    stats = compute_norm_stats(d)
    Z = stats.normalize(d.expr_array())
    assert np.max(np.abs(Z.mean(axis=0))) < 1e-9
    assert np.max(np.abs(Z.std(axis=0) - 1.0)) < 1e-9


def test_synth_dataset_deterministic_and_sized():
    d1 = synth_dataset(42, 5, 0.2)
    d2 = synth_dataset(42, 5, 0.2)
    assert len(d1) == 5
    for a, b in zip(d1.samples, d2.samples):
        assert a.va == b.va
        assert np.array_equal(a.expr, b.expr)


def test_synth_va_on_unit_disk():
    d = synth_dataset(9, 500, 0.0)
    for s in d.samples:
        assert math.hypot(s.va.valence, s.va.arousal) <= 1.0 + 1e-12


def test_oracle_matches_documented_formula():
    # independent reimplementation of the documented sinusoid mixture
    seed = 1234
    rng = np.random.default_rng(seed)
    amp = rng.uniform(0.2, 1.0, size=(EXPR_DIM, 3))
    freq = rng.uniform(0.5, 2.5, size=(EXPR_DIM, 3, 2))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(EXPR_DIM, 3))

    def expected(v, a):
        out = np.zeros(EXPR_DIM)
        for j in range(EXPR_DIM):
            for h in range(3):
                out[j] += amp[j, h] * math.sin(
                    freq[j, h, 0] * v + freq[j, h, 1] * a + phase[j, h]
                )
        return out

    oracle = SinusoidOracle(seed)
    for v, a in [(0.0, 0.0), (0.3, -0.7), (-0.9, 0.1)]:
        assert np.allclose(oracle(np.array([v, a])), expected(v, a), atol=1e-12)


def test_oracle_pure_function():
    oracle = SinusoidOracle(5)
    va = np.array([0.25, -0.5])
    assert np.array_equal(oracle(va), oracle(va))
