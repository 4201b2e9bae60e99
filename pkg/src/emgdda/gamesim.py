"""Abstract memory tasks, a synthetic player, synthetic facial EMG and the
closed-loop difficulty simulator."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dataset import (
    CHANNEL_SITES,
    DEFAULT_SAMPLE_RATE,
    MAX_DIFFICULTY,
    MIN_DIFFICULTY,
    N_CHANNELS,
    WINDOW_SECONDS,
    AffectLabel,
    EmgSegment,
    Quadrant,
    ScoreEvent,
    SessionLog,
    Site,
    Task,
)
from .dda import (
    DdaState,
    PerformanceClass,
    classify_performance,
    dda_step,
    schedule_nonadaptive,
)
from .dsp import compute_baseline
from .errors import OutOfRange

PRODUCT_CATALOGUE = 48
MUSEUM_DISPLAYS = 40


def _check_difficulty(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or not MIN_DIFFICULTY <= d <= MAX_DIFFICULTY:
        raise OutOfRange(f"difficulty {d!r} outside [{MIN_DIFFICULTY}, {MAX_DIFFICULTY}]")
    return int(d)


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def wm_list_length(difficulty: int) -> int:
    """Shopping-list length: 2 items at difficulty 1 up to 12 at difficulty 10."""
    d = _check_difficulty(difficulty)
    return _round_half_up(2 + (d - 1) * 10 / 9)


def em_target_count(difficulty: int) -> int:
    """Displays to encode: 1 at difficulty 1 up to 8 at difficulty 10."""
    d = _check_difficulty(difficulty)
    return _round_half_up(1 + (d - 1) * 7 / 9)


def em_retrieval_count(n_targets: int) -> int:
    return max(1, math.ceil(0.75 * n_targets))


@dataclass(frozen=True)
class WmRound:
    difficulty: int
    shopping_list: tuple[int, ...]

    @property
    def list_length(self) -> int:
        return len(self.shopping_list)

    @property
    def n_items(self) -> int:
        return self.list_length


@dataclass(frozen=True)
class EmRound:
    difficulty: int
    encode_targets: tuple[int, ...]
    retrieval_subset: tuple[int, ...]
    bonus_triple: tuple[tuple[int, int], ...]  # (display, age in years)
    bonus_question: str  # "oldest" or "youngest"

    @property
    def n_items(self) -> int:
        # retrieval placements plus the single bonus answer
        return len(self.retrieval_subset) + 1


def make_wm_round(difficulty: int, rng: np.random.Generator) -> WmRound:
    n = wm_list_length(difficulty)
    items = rng.choice(PRODUCT_CATALOGUE, size=n, replace=False)
    return WmRound(difficulty, tuple(int(i) for i in items))


def make_em_round(difficulty: int, rng: np.random.Generator) -> EmRound:
    n = em_target_count(difficulty)
    targets = [int(i) for i in rng.choice(MUSEUM_DISPLAYS, size=n, replace=False)]
    retrieval = sorted(rng.choice(targets, size=em_retrieval_count(n), replace=False).tolist())
    pool = targets if n >= 3 else targets + [d for d in range(MUSEUM_DISPLAYS) if d not in targets]
    triple = [int(d) for d in rng.choice(pool, size=3, replace=False)]
    ages = rng.choice(np.arange(50, 3000), size=3, replace=False)
    question = "oldest" if rng.random() < 0.5 else "youngest"
    return EmRound(difficulty, tuple(targets), tuple(int(r) for r in retrieval),
                   tuple(zip(triple, (int(a) for a in ages))), question)


def make_round(task: Task, difficulty: int, rng: np.random.Generator) -> WmRound | EmRound:
    return make_wm_round(difficulty, rng) if Task(task) is Task.WM else make_em_round(difficulty, rng)


# --- player ----------------------------------------------------------------

@dataclass
class PlayerModel:
    """Synthetic player: per-item error probability is logistic in (difficulty - skill)."""

    skill: float
    error_steepness: float = 3.0
    seed: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.skill <= 10:
            raise ValueError(f"skill {self.skill} outside [1, 10]")
        if self.error_steepness <= 0:
            raise ValueError("error_steepness must be positive")
        self.rng = np.random.default_rng(self.seed)

    def error_probability(self, difficulty: float) -> float:
        return 1.0 / (1.0 + math.exp(-self.error_steepness * (difficulty - self.skill)))


def player_affect(model: PlayerModel, difficulty: float) -> Quadrant:
    """Flow-channel affect: bored well below skill, frustrated well above it."""
    gap = difficulty - model.skill
    if gap <= -2:
        return Quadrant.CALM_NEGATIVE
    if gap < 0:
        return Quadrant.CALM_POSITIVE
    if gap < 2:
        return Quadrant.ENERGETIC_POSITIVE
    return Quadrant.ENERGETIC_NEGATIVE


def player_perform(model: PlayerModel, round_: WmRound | EmRound) -> tuple[ScoreEvent, ...]:
    p = model.error_probability(round_.difficulty)
    misses = model.rng.random(round_.n_items) < p
    return tuple(ScoreEvent.INCORRECT if m else ScoreEvent.CORRECT for m in misses)


# --- synthetic EMG ---------------------------------------------------------

_VALENCE_GAINS = {
    # eye, mouth, brow, corrugator
    True: {"eye": 1.2, "mouth": 2.0, "brow": 0.6, "corrugator": 0.2},
    False: {"eye": 0.8, "mouth": 0.5, "brow": 1.6, "corrugator": 2.0},
}
_AROUSAL_AMPLITUDE = {True: 1.6, False: 0.8}
_AROUSAL_BURST_RATE = {True: 1.5, False: 0.3}


def default_gains() -> dict[Quadrant, tuple[float, ...]]:
    out = {}
    for q in Quadrant:
        g = _VALENCE_GAINS[q.positive_valence]
        amp = _AROUSAL_AMPLITUDE[q.high_arousal]
        out[q] = tuple(amp * g[site.group] for site in CHANNEL_SITES)
    return out


def default_burst_rates() -> dict[Quadrant, float]:
    return {q: _AROUSAL_BURST_RATE[q.high_arousal] for q in Quadrant}


@dataclass(frozen=True)
class SynthEmgConfig:
    """Per-quadrant channel gains and burst rates of the synthetic generator.

    Positive valence raises the mouth channels, negative valence the brow and
    corrugator channels; arousal scales every channel and the burst rate.
    """

    gains: dict = field(default_factory=default_gains)
    burst_rate_hz: dict = field(default_factory=default_burst_rates)
    band_hz: tuple[float, float] = (5.0, 25.0)
    tonic_level: float = 0.4
    burst_seconds: float = 0.4
    noise_sd: float = 0.05
    seed: int = 0

    def __post_init__(self):
        for q, g in self.gains.items():
            if len(g) != N_CHANNELS or min(g) < 0:
                raise ValueError(f"gains for {q} must be {N_CHANNELS} non-negative values")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")


@dataclass(frozen=True, eq=False)
class ParticipantProfile:
    """Individual differences: per-channel gain jitter and electrode DC offsets."""

    gain_scale: np.ndarray
    dc_offset: np.ndarray

    @classmethod
    def neutral(cls) -> "ParticipantProfile":
        return cls(np.ones(N_CHANNELS), np.zeros(N_CHANNELS))

    @classmethod
    def draw(cls, rng: np.random.Generator, gain_sd: float = 0.15, offset_sd: float = 0.5) -> "ParticipantProfile":
        return cls(np.exp(rng.normal(0.0, gain_sd, N_CHANNELS)), rng.normal(0.0, offset_sd, N_CHANNELS))


def _band_noise(rng, n, fs, band) -> np.ndarray:
    coef = np.fft.rfft(rng.standard_normal((N_CHANNELS, n)), axis=-1)
    f = np.fft.rfftfreq(n, 1.0 / fs)
    coef[:, (f < band[0]) | (f > band[1])] = 0
    x = np.fft.irfft(coef, n=n, axis=-1)
    sd = x.std(axis=-1, keepdims=True)
    return x / np.where(sd > 0, sd, 1.0)


def _burst_envelope(rng, n, fs, rate, tonic, burst_s) -> np.ndarray:
    env = np.full((N_CHANNELS, n), tonic)
    width = max(2, int(burst_s * fs))
    hann = np.hanning(width)
    for c in range(N_CHANNELS):
        n_bursts = rng.poisson(rate * n / fs)
        for start in rng.integers(0, max(1, n - width), size=n_bursts):
            env[c, start:start + width] += hann
    return env


def draw_label(quadrant: Quadrant, rng: np.random.Generator) -> AffectLabel:
    """Continuous label uniform over the quadrant's open quarter-square."""
    def side(positive):
        v = 0.0
        while v == 0.0:
            v = rng.uniform(0.0, 1.0)
        return v if positive else -v
    return AffectLabel(side(quadrant.positive_valence), side(quadrant.high_arousal))


def synth_emg(
    config: SynthEmgConfig,
    quadrant: Quadrant,
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE,
    *,
    rng: np.random.Generator | None = None,
    profile: ParticipantProfile | None = None,
    participant_id: str = "synthetic",
    session_id: str = "s0",
    task: Task = Task.WM,
    window_index: int = 0,
    decimals: int | None = None,
) -> EmgSegment:
    """One labeled 45 s segment: gain x burst envelope x band noise, plus white noise."""
    rng = np.random.default_rng(config.seed) if rng is None else rng
    profile = profile or ParticipantProfile.neutral()
    quadrant = Quadrant(quadrant)
    n = sample_rate_hz * WINDOW_SECONDS
    gains = np.asarray(config.gains[quadrant]) * profile.gain_scale
    band = _band_noise(rng, n, sample_rate_hz, config.band_hz)
    env = _burst_envelope(rng, n, sample_rate_hz, config.burst_rate_hz[quadrant],
                          config.tonic_level, config.burst_seconds)
    x = gains[:, None] * env * band + config.noise_sd * rng.standard_normal((N_CHANNELS, n))
    x += profile.dc_offset[:, None]
    if decimals is not None:
        x = np.round(x, decimals)
    return EmgSegment(
        participant_id=participant_id,
        session_id=session_id,
        task=task,
        window_index=window_index,
        sample_rate_hz=sample_rate_hz,
        channels=x,
        label=draw_label(quadrant, rng),
    )


def site_rms(segment: EmgSegment, site: Site) -> float:
    return float(np.sqrt(np.mean(segment.channels[site.index] ** 2)))


# --- corpus ----------------------------------------------------------------

def synth_participant(
    participant_id: str,
    config: SynthEmgConfig,
    n_sessions: int = 2,
    windows: int = 5,
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE,
    seed: int = 0,
    decimals: int | None = 5,
) -> tuple[list[SessionLog], list[Quadrant]]:
    """Labeled sessions for one participant with uniformly drawn quadrants.

    Returns the sessions and the quadrant drawn for every window, in order.
    Sessions alternate WM/EM and cycle through the easy/medium/hard levels.
    """
    rng = np.random.default_rng(seed)
    profile = ParticipantProfile.draw(rng)
    player = PlayerModel(skill=float(rng.uniform(3, 8)), seed=int(rng.integers(2**31)))
    levels = (1, 5, 10)
    sessions, draws = [], []
    for s in range(n_sessions):
        task = Task.WM if s % 2 == 0 else Task.EM
        d = levels[s % len(levels)]
        segs, events = [], []
        for w in range(windows):
            q = Quadrant(int(rng.integers(4)))
            draws.append(q)
            segs.append(synth_emg(config, q, sample_rate_hz, rng=rng, profile=profile,
                                  participant_id=participant_id, session_id=f"s{s}",
                                  task=task, window_index=w, decimals=decimals))
            events.append(player_perform(player, make_round(task, d, rng)))
        sessions.append(SessionLog(participant_id, f"s{s}", task, sample_rate_hz,
                                   [d] * windows, segs, events))
    return sessions, draws


# --- closed loop -----------------------------------------------------------

class Mode(str, Enum):
    ADAPTIVE = "adaptive"
    NON_ADAPTIVE = "nonadaptive"


@dataclass
class SimulationResult:
    session: SessionLog
    difficulties: list[int]  # difficulty each window was played at
    affects: list[Quadrant]  # affect fed to the rule engine
    true_affects: list[Quadrant]
    performances: list[PerformanceClass]
    deltas: list[int]
    next_difficulties: list[int]
    state: DdaState | None

    def trajectory_rows(self) -> list[tuple]:
        return [
            (i, d, a.code, p.name, delta, nd)
            for i, (d, a, p, delta, nd) in enumerate(zip(
                self.difficulties, self.affects, self.performances, self.deltas, self.next_difficulties))
        ]

    @property
    def final_difficulty(self) -> int:
        return self.next_difficulties[-1]

    def time_in_band(self, lo: float, hi: float) -> float:
        return float(np.mean([lo <= d <= hi for d in self.difficulties]))


def session_windows(minutes: float) -> int:
    """Number of whole 45 s windows in a session of the given length."""
    return int(round(minutes * 60)) // WINDOW_SECONDS


def simulate_session(
    player: PlayerModel,
    mode: Mode | str = Mode.ADAPTIVE,
    windows: int = 10,
    task: Task | str = Task.WM,
    affect_source=None,
    start_difficulty: int = 1,
    emg_config: SynthEmgConfig | None = None,
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE,
    participant_id: str = "sim",
    session_id: str = "s0",
) -> SimulationResult:
    """Play ``windows`` 45 s windows against the difficulty controller.

    ``affect_source`` is ``None`` to feed the player's true affect to the
    rules, or a trained pipeline (anything with ``classify_segment``) to
    classify each synthetic window against the session's window-0 baseline.
    """
    if windows < 1:
        raise ValueError("windows must be >= 1")
    mode, task = Mode(mode), Task(task)
    _check_difficulty(start_difficulty)
    emg_config = emg_config or SynthEmgConfig()
    world = np.random.default_rng([player.seed, 1])
    schedule = schedule_nonadaptive(windows, start_difficulty) if mode is Mode.NON_ADAPTIVE else None
    state = DdaState(start_difficulty)
    d = start_difficulty
    out = SimulationResult(None, [], [], [], [], [], [], None)
    segments, events, baseline = [], [], None
    for w in range(windows):
        if schedule is not None:
            d = schedule[w]
        ev = player_perform(player, make_round(task, d, world))
        truth = player_affect(player, d)
        seg = synth_emg(emg_config, truth, sample_rate_hz, rng=world, participant_id=participant_id,
                        session_id=session_id, task=task, window_index=w)
        if baseline is None:
            baseline = compute_baseline(seg)
        affect = truth if affect_source is None else affect_source.classify_segment(seg, baseline)
        perf = classify_performance(ev)
        if schedule is None:
            state = dda_step(state, affect, perf)
            delta, nxt = state.history[-1].delta, state.difficulty
        else:
            nxt = schedule[w + 1] if w + 1 < windows else schedule[w]
            delta = nxt - d
        out.difficulties.append(d)
        out.affects.append(affect)
        out.true_affects.append(truth)
        out.performances.append(perf)
        out.deltas.append(delta)
        out.next_difficulties.append(nxt)
        segments.append(seg)
        events.append(ev)
        d = nxt
    out.session = SessionLog(participant_id, session_id, task, sample_rate_hz,
                             out.difficulties, segments, events)
    out.state = state if schedule is None else None
    return out
