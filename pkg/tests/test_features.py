import json

import numpy as np
import pytest

from conftest import GOLDEN, make_segment
from emgdda.dataset import Quadrant, Site
from emgdda.dsp import DwtConfig, compute_baseline
from emgdda.errors import SignalTooShort
from emgdda.features import (
    FEATURE_KINDS,
    FEATURE_NAMES,
    ExtractionConfig,
    FeatureMatrix,
    ThresholdConfig,
    channel_features,
    extract_channel_features,
    extract_corpus,
    extract_feature_vector,
    feature_site,
    read_feature_csv,
    write_feature_csv,
)
from oracles import features as oracle_features

AMPLITUDE = ["IEMG", "MAV", "MMAV1", "MMAV2", "RMS", "SD", "WL", "DASDV"]
COUNTS = ["ZC", "SSC", "WAMP", "MYOP"]


def test_names_are_canonical():
    assert len(FEATURE_NAMES) == 112 == len(set(FEATURE_NAMES))
    assert FEATURE_NAMES[0] == "EyeLeft_IEMG"
    assert FEATURE_NAMES[13] == "EyeLeft_MYOP"
    assert FEATURE_NAMES[14] == "EyeRight_IEMG"
    assert feature_site("MouthRight_MMAV1") is Site.MOUTH_RIGHT


def test_simple_values():
    assert extract_channel_features([1, -1, 2, -2])["MAV"] == 1.5
    assert extract_channel_features([1, 2, 3, 4, 5])["SSC"] == 0
    assert extract_channel_features([0, 1, 0])["WL"] == 2


def test_too_short():
    with pytest.raises(SignalTooShort):
        extract_channel_features([1.0, 2.0])


def test_golden_sixteen_samples():
    g = json.loads((GOLDEN / "features_16.json").read_text())
    t = g["thresholds"]
    got = extract_channel_features(g["signal"], ThresholdConfig(t["zc"], t["ssc"], t["wamp"], t["myop"]))
    assert list(got) == [k.value for k in FEATURE_KINDS]
    for k, v in g["features"].items():
        assert got[k] == pytest.approx(v, abs=1e-9, rel=0), k


def test_matches_oracle_on_random_signals(rng):
    for _ in range(50):
        x = rng.normal(scale=rng.uniform(0.01, 2), size=rng.integers(3, 80))
        got = extract_channel_features(x)
        want = oracle_features(x)
        for k in want:
            assert got[k] == pytest.approx(want[k], rel=1e-9, abs=1e-12), k


def test_multichannel_rows_match_single(rng):
    X = rng.normal(size=(8, 33))
    F = channel_features(X)
    assert F.shape == (8, 14)
    for c in range(8):
        np.testing.assert_array_equal(F[c], channel_features(X[c]))


def test_scale_and_sign_properties(rng):
    th = ThresholdConfig()
    idx = {k.value: i for i, k in enumerate(FEATURE_KINDS)}
    for _ in range(200):
        x = rng.normal(scale=rng.uniform(0.05, 3), size=rng.integers(3, 64))
        c = rng.uniform(0.1, 10)
        f, fc, fneg = channel_features(x, th), channel_features(c * x, th.scaled(c)), channel_features(-x, th)
        for k in AMPLITUDE:
            assert fc[idx[k]] == pytest.approx(c * f[idx[k]], rel=1e-9)
        assert fc[idx["VAR"]] == pytest.approx(c * c * f[idx["VAR"]], rel=1e-9)
        for k in COUNTS:
            assert fc[idx[k]] == f[idx[k]]
        np.testing.assert_allclose(fneg, f, rtol=1e-12)


def test_threshold_monotone(rng):
    idx = {k.value: i for i, k in enumerate(FEATURE_KINDS)}
    x = rng.normal(size=200)
    prev = None
    for t in np.linspace(0, 3, 13):
        f = channel_features(x, ThresholdConfig(t, t, t, t))
        cur = [f[idx[k]] for k in COUNTS]
        if prev is not None:
            assert all(a <= b for a, b in zip(cur, prev))
        prev = cur


def test_all_zero_segment():
    seg = make_segment(fill=0.0)
    fv = extract_feature_vector(seg, compute_baseline(seg), DwtConfig(level=2))
    assert fv.values.shape == (112,)
    d = fv.as_dict()
    for site in Site:
        for k in ("IEMG", "MAV", "RMS", "WL", "VAR", "SD", "DASDV"):
            assert d[f"{site.value}_{k}"] == 0.0


def test_segment_equal_to_baseline_constant():
    base_seg = make_segment(fill=2.5)
    later = make_segment(window_index=1, fill=2.5)
    zero = make_segment(window_index=1, fill=0.0)
    b = compute_baseline(base_seg)
    a = extract_feature_vector(later, b, DwtConfig(level=2))
    z = extract_feature_vector(zero, compute_baseline(make_segment(fill=0.0)), DwtConfig(level=2))
    np.testing.assert_array_equal(a.values, z.values)


def test_label_carried_and_deterministic(rng):
    seg = make_segment(rng=rng, label=(-0.4, 0.3))
    b = compute_baseline(seg)
    f1 = extract_feature_vector(seg, b)
    f2 = extract_feature_vector(seg, b)
    assert f1.label is Quadrant.ENERGETIC_NEGATIVE
    assert f1.values.tobytes() == f2.values.tobytes()
    assert extract_feature_vector(make_segment(label=(0.0, 0.5)), b).label is None


def test_synthetic_ep_mouth_beats_corrugator():
    from emgdda.gamesim import SynthEmgConfig, synth_emg
    seg = synth_emg(SynthEmgConfig(seed=5), Quadrant.ENERGETIC_POSITIVE, sample_rate_hz=200)
    fv = extract_feature_vector(seg, compute_baseline(seg), DwtConfig(level=2)).as_dict()
    for side in ("Left", "Right"):
        assert fv[f"Mouth{side}_RMS"] > fv[f"Corrugator{side}_RMS"]


def test_feature_csv_round_trip(tmp_path):
    from conftest import make_session
    fm = extract_corpus([make_session(3, labels=[(0.5, 0.5), None, (-0.5, -0.2)])],
                        ExtractionConfig(dwt=DwtConfig(level=2)))
    write_feature_csv(fm, tmp_path / "f.csv")
    header = (tmp_path / "f.csv").read_text().splitlines()[0].split(",")
    assert header[:112] == list(FEATURE_NAMES)
    assert header[112:] == ["participant_id", "session_id", "window_index", "quadrant"]
    back = read_feature_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(back.X, fm.X)
    np.testing.assert_array_equal(back.labels, [0, -1, 3])
    assert len(back.labeled()) == 2
