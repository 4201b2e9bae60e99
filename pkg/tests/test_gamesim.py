import math

import numpy as np
import pytest

from emgdda.dataset import Quadrant, ScoreEvent, Site, Task, load_sessions, save_sessions
from emgdda.dda import PerformanceClass, classify_performance
from emgdda.errors import OutOfRange
from emgdda.gamesim import (
    Mode,
    PlayerModel,
    SynthEmgConfig,
    WmRound,
    em_retrieval_count,
    em_target_count,
    make_em_round,
    make_wm_round,
    player_affect,
    player_perform,
    session_windows,
    simulate_session,
    site_rms,
    synth_emg,
    synth_participant,
    wm_list_length,
)


@pytest.mark.parametrize("d,n", [(1, 2), (10, 12), (5, 6)])
def test_wm_list_length(d, n):
    assert wm_list_length(d) == n


def test_em_counts():
    assert em_target_count(1) == 1 and em_target_count(10) == 8
    assert [em_retrieval_count(n) for n in (1, 4, 8)] == [1, 3, 6]
    with pytest.raises(OutOfRange):
        wm_list_length(0)
    with pytest.raises(OutOfRange):
        em_target_count(11)


def test_rounds(rng):
    for d in range(1, 11):
        w = make_wm_round(d, rng)
        assert w.list_length == wm_list_length(d) == len(set(w.shopping_list))
        e = make_em_round(d, rng)
        assert set(e.retrieval_subset) <= set(e.encode_targets)
        assert len(e.bonus_triple) == 3 and e.bonus_question in ("oldest", "youngest")
        assert len({a for _, a in e.bonus_triple}) == 3


@pytest.mark.parametrize("d,q", [
    (1, Quadrant.CALM_NEGATIVE), (3, Quadrant.CALM_NEGATIVE), (4, Quadrant.CALM_POSITIVE),
    (5, Quadrant.ENERGETIC_POSITIVE), (6, Quadrant.ENERGETIC_POSITIVE),
    (7, Quadrant.ENERGETIC_NEGATIVE), (9, Quadrant.ENERGETIC_NEGATIVE),
])
def test_player_affect(d, q):
    assert player_affect(PlayerModel(5.0), d) is q


def test_perfect_when_far_above_difficulty():
    player = PlayerModel(9.0, error_steepness=1.0, seed=0)
    p_ok = (1 - 1 / (1 + math.exp(8))) ** 2  # two-item round at gap -8
    assert p_ok > 0.99
    rnd = WmRound(1, (3, 7))
    hits = sum(classify_performance(player_perform(player, rnd)) is PerformanceClass.PERFECT_SCORE
               for _ in range(5000))
    assert hits / 5000 > 0.985


def test_negative_majority_when_far_below():
    player = PlayerModel(1.0, seed=3)
    rng = np.random.default_rng(0)
    perfs = [classify_performance(player_perform(player, make_wm_round(10, rng))) for _ in range(200)]
    assert sum(p is PerformanceClass.NEGATIVE_SCORE for p in perfs) > 100


def test_zero_length_round():
    assert player_perform(PlayerModel(5.0), WmRound(1, ())) == ()


def test_player_deterministic():
    rnd = WmRound(8, tuple(range(10)))
    a = [player_perform(PlayerModel(5.0, seed=4), rnd) for _ in range(2)]
    assert a[0] == a[1]


def test_synth_emg_gain_profile():
    seg = synth_emg(SynthEmgConfig(seed=2), Quadrant.ENERGETIC_POSITIVE, 100)
    assert seg.quadrant is Quadrant.ENERGETIC_POSITIVE
    assert site_rms(seg, Site.MOUTH_LEFT) > site_rms(seg, Site.CORRUGATOR_LEFT)
    neg = synth_emg(SynthEmgConfig(seed=2), Quadrant.CALM_NEGATIVE, 100)
    assert site_rms(neg, Site.CORRUGATOR_RIGHT) > site_rms(neg, Site.MOUTH_RIGHT)


def test_synth_emg_zero():
    zero = {q: (0.0,) * 8 for q in Quadrant}
    seg = synth_emg(SynthEmgConfig(gains=zero, noise_sd=0.0), Quadrant.CALM_POSITIVE, 50)
    assert not seg.channels.any()
    assert seg.channels.shape == (8, 50 * 45)


def test_synth_emg_deterministic():
    a = synth_emg(SynthEmgConfig(seed=9), Quadrant.ENERGETIC_NEGATIVE, 100)
    b = synth_emg(SynthEmgConfig(seed=9), Quadrant.ENERGETIC_NEGATIVE, 100)
    np.testing.assert_array_equal(a.channels, b.channels)
    assert a.label == b.label
    with pytest.raises(ValueError):
        SynthEmgConfig(noise_sd=-1)


def test_synth_participant_labels_match_draws():
    sessions, draws = synth_participant("p07", SynthEmgConfig(), n_sessions=3, windows=4,
                                        sample_rate_hz=20, seed=5)
    assert [s.task for s in sessions] == [Task.WM, Task.EM, Task.WM]
    assert [s.difficulty_track[0] for s in sessions] == [1, 5, 10]
    assert [seg.quadrant for s in sessions for seg in s.segments] == draws


@pytest.mark.parametrize("minutes,n", [(7.5, 10), (3.75, 5)])
def test_session_windows(minutes, n):
    assert session_windows(minutes) == n


def test_adaptive_mid_skill_converges():
    res = simulate_session(PlayerModel(5.0, seed=11), Mode.ADAPTIVE, 10, sample_rate_hz=20)
    assert 4 <= res.final_difficulty <= 6
    assert res.difficulties[0] == 1


@pytest.mark.parametrize("skill", [2, 5, 9])
@pytest.mark.parametrize("start", [1, 10])
@pytest.mark.parametrize("seed", range(5))
def test_convergence_into_band(skill, start, seed):
    res = simulate_session(PlayerModel(float(skill), seed=seed), Mode.ADAPTIVE, 10,
                           start_difficulty=start, sample_rate_hz=10)
    track = res.difficulties + [res.final_difficulty]
    inside = [skill - 1 <= d <= skill + 1 for d in track]
    first = inside.index(True)
    assert first <= 10 and all(inside[first:])


def test_nonadaptive_independent_of_player():
    runs = [simulate_session(PlayerModel(float(s), seed=seed), Mode.NON_ADAPTIVE, 10, sample_rate_hz=10)
            for s, seed in ((2, 1), (9, 2), (5, 3))]
    for r in runs:
        assert r.difficulties == list(range(1, 11))
    assert len({tuple(r.next_difficulties) for r in runs}) == 1


def test_em_task_simulation():
    res = simulate_session(PlayerModel(6.0, seed=1), "adaptive", 6, task="EM", sample_rate_hz=10)
    assert res.session.task is Task.EM
    for ev, d in zip(res.session.score_events, res.difficulties):
        assert len(ev) == em_retrieval_count(em_target_count(d)) + 1


def test_session_round_trips(tmp_path):
    res = simulate_session(PlayerModel(4.0, seed=2), Mode.ADAPTIVE, 5, sample_rate_hz=10)
    save_sessions([res.session], tmp_path / "s.jsonl")
    back = load_sessions(tmp_path / "s.jsonl")
    assert back == [res.session]
    assert len(res.trajectory_rows()) == 5
    assert all(isinstance(e, ScoreEvent) for ev in back[0].score_events for e in ev)


def test_classifier_affect_source():
    class Fixed:
        def classify_segment(self, seg, baseline):
            return Quadrant.CALM_NEGATIVE

    res = simulate_session(PlayerModel(5.0, seed=0), Mode.ADAPTIVE, 4, affect_source=Fixed(), sample_rate_hz=10)
    assert res.affects == [Quadrant.CALM_NEGATIVE] * 4
