import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_segment, make_session
from emgdda.dataset import (
    CHANNEL_SITES,
    AffectLabel,
    Quadrant,
    SessionLog,
    Site,
    channel_site,
    dataset_summary,
    load_corpus,
    load_sessions,
    save_sessions,
    truncate_label,
)
from emgdda.errors import AmbiguousLabel, ParseError, SchemaError

EP, CP, EN, CN = Quadrant


@pytest.mark.parametrize("v, a, q", [
    (0.5, 0.5, EP), (0.5, -0.5, CP), (-0.3, 0.9, EN), (-0.1, -0.1, CN), (1.0, -1.0, CP),
])
def test_truncate_label(v, a, q):
    assert truncate_label(AffectLabel(v, a)) is q


@pytest.mark.parametrize("v, a", [(0.0, 0.2), (0.4, 0.0), (0.0, 0.0)])
def test_truncate_label_on_axis_is_ambiguous(v, a):
    with pytest.raises(AmbiguousLabel):
        truncate_label(AffectLabel(v, a))


nonzero = st.floats(-1, 1).filter(lambda x: x != 0)


@given(nonzero, nonzero)
def test_truncate_label_symmetry(v, a):
    q = truncate_label(AffectLabel(v, a))
    flip_v = {EP: EN, EN: EP, CP: CN, CN: CP}
    flip_a = {EP: CP, CP: EP, EN: CN, CN: EN}
    assert truncate_label(AffectLabel(-v, a)) is flip_v[q]
    assert truncate_label(AffectLabel(v, -a)) is flip_a[q]


def test_quadrant_canonical_order():
    assert [q.code for q in sorted(Quadrant)] == ["EP", "CP", "EN", "CN"]


def test_channel_sites_are_a_bijection():
    assert len(CHANNEL_SITES) == 8 == len(set(CHANNEL_SITES))
    for i, s in enumerate(CHANNEL_SITES):
        assert channel_site(i) is s and s.index == i
    assert Site.CORRUGATOR_LEFT.group == "corrugator"


def test_label_out_of_range():
    with pytest.raises(SchemaError):
        AffectLabel(1.5, 0.2)


def test_segment_invariants():
    with pytest.raises(SchemaError):
        make_segment(rate=4).__class__("p", "s", "WM", 0, 4, np.zeros((7, 180)))
    with pytest.raises(SchemaError):
        make_segment().__class__("p", "s", "WM", 0, 4, np.zeros((8, 179)))
    bad = np.zeros((8, 180))
    bad[3, 5] = np.nan
    with pytest.raises(SchemaError):
        make_segment().__class__("p", "s", "WM", 0, 4, bad)
    seg = make_segment()
    assert seg.channels.shape == (8, 4 * 45)
    with pytest.raises(ValueError):
        seg.channels[0, 0] = 1.0


def test_session_requires_contiguous_windows():
    s = make_session(3)
    with pytest.raises(SchemaError):
        SessionLog("p01", "s0", "WM", 4, [1, 1], s.segments[:1] + s.segments[2:])
    with pytest.raises(SchemaError):
        SessionLog("p01", "s0", "WM", 4, [1], s.segments)


def test_round_trip(tmp_path):
    sessions = [make_session(5, seed=1), make_session(3, participant="p02", session="s1", seed=2,
                                                     labels=[None, (0.0, 0.3), (-0.2, 0.4)])]
    path = tmp_path / "x.jsonl"
    save_sessions(sessions, path)
    back = load_sessions(path)
    assert back == sessions
    assert len(back[0].segments) == 5


def test_five_window_file_loads(tmp_path):
    path = tmp_path / "s.jsonl"
    save_sessions([make_session(5)], path)
    (s,) = load_sessions(path)
    assert s.n_windows == 5 and [g.window_index for g in s.segments] == list(range(5))


def _rewrite(path, lineno, mutate):
    lines = path.read_text().splitlines()
    rec = json.loads(lines[lineno - 1])
    mutate(rec)
    lines[lineno - 1] = json.dumps(rec)
    path.write_text("\n".join(lines) + "\n")


def test_seven_channels_is_schema_error(tmp_path):
    path = tmp_path / "s.jsonl"
    save_sessions([make_session(2)], path)
    _rewrite(path, 3, lambda r: r["channels"].pop())
    with pytest.raises(SchemaError) as exc:
        load_sessions(path)
    assert exc.value.line == 3


def test_valence_out_of_range_is_schema_error(tmp_path):
    path = tmp_path / "s.jsonl"
    save_sessions([make_session(2)], path)
    _rewrite(path, 2, lambda r: r.update(valence=1.5))
    with pytest.raises(SchemaError):
        load_sessions(path)


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "s.jsonl"
    save_sessions([make_session(2)], path)
    with open(path, "a") as fh:
        fh.write("{not json\n")
    with pytest.raises(ParseError) as exc:
        load_sessions(path)
    assert exc.value.line == 4


def test_segment_before_header(tmp_path):
    path = tmp_path / "s.jsonl"
    path.write_text(json.dumps({"kind": "segment", "window_index": 0, "channels": []}) + "\n")
    with pytest.raises(ParseError):
        load_sessions(path)


def test_load_corpus_directory(tmp_path):
    save_sessions([make_session(2, participant="p02")], tmp_path / "p02.jsonl")
    save_sessions([make_session(2, participant="p01")], tmp_path / "p01.jsonl")
    assert [s.participant_id for s in load_corpus(tmp_path)] == ["p01", "p02"]


def test_summary_all_ep():
    table = dataset_summary([make_session(4)])
    assert table == {"p01": {"EP": 4, "CP": 0, "EN": 0, "CN": 0, "ambiguous": 0}}


def test_summary_unlabeled_is_all_zero():
    table = dataset_summary([make_session(3, labels=[None] * 3)])
    assert table["p01"] == {"EP": 0, "CP": 0, "EN": 0, "CN": 0, "ambiguous": 0}


def test_summary_matches_generator_draws():
    from emgdda.gamesim import SynthEmgConfig, synth_participant
    sessions, draws = synth_participant("p07", SynthEmgConfig(), n_sessions=2, windows=5,
                                        sample_rate_hz=8, seed=3)
    row = dataset_summary(sessions)["p07"]
    for q in Quadrant:
        assert row[q.code] == sum(d is q for d in draws)
    assert row["ambiguous"] == 0
