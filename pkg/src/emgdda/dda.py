"""Affect + performance difficulty adjustment on a 1..10 scale."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, NamedTuple, Sequence

from .dataset import MAX_DIFFICULTY, MIN_DIFFICULTY, Quadrant, ScoreEvent

POINTS_CORRECT = 5
POINTS_INCORRECT = -4


class PerformanceClass(IntEnum):
    """Ordered from worst to best."""

    NEGATIVE_SCORE = 0
    IMPERFECT_SCORE = 1
    PERFECT_SCORE = 2


def window_score(events: Iterable[ScoreEvent | str]) -> int:
    events = [ScoreEvent(e) for e in events]
    n_ok = sum(e is ScoreEvent.CORRECT for e in events)
    return POINTS_CORRECT * n_ok + POINTS_INCORRECT * (len(events) - n_ok)


def classify_performance(events: Iterable[ScoreEvent | str]) -> PerformanceClass:
    """Negative net score, else perfect if nothing went wrong, else imperfect.

    An empty window counts as imperfect.
    """
    events = [ScoreEvent(e) for e in events]
    if window_score(events) < 0:
        return PerformanceClass.NEGATIVE_SCORE
    if events and all(e is ScoreEvent.CORRECT for e in events):
        return PerformanceClass.PERFECT_SCORE
    return PerformanceClass.IMPERFECT_SCORE


EN, CN = Quadrant.ENERGETIC_NEGATIVE, Quadrant.CALM_NEGATIVE
NEG, IMP, PERF = PerformanceClass


def rule_delta(affect: Quadrant, perf: PerformanceClass) -> tuple[int, int]:
    """(rule number, delta) of the first matching rule."""
    affect, perf = Quadrant(affect), PerformanceClass(perf)
    if affect is EN and perf is NEG:
        return 1, -2
    if perf is NEG:
        return 2, -1
    if affect is EN and perf is IMP:
        return 3, -1
    if affect is CN and perf is PERF:
        return 4, +2
    if affect is CN and perf is IMP:
        return 5, +1
    if affect.positive_valence and perf is PERF:
        return 6, +1
    if affect.positive_valence and perf is IMP:
        return 7, 0
    # energetic-negative with a perfect score is not covered by the rule list; hold
    return 8, 0


class HistoryEntry(NamedTuple):
    window_index: int
    affect: Quadrant
    performance: PerformanceClass
    delta: int
    difficulty: int


@dataclass(frozen=True)
class DdaState:
    difficulty: int = 1
    history: tuple[HistoryEntry, ...] = ()

    def __post_init__(self):
        if not MIN_DIFFICULTY <= self.difficulty <= MAX_DIFFICULTY:
            raise ValueError(f"difficulty {self.difficulty} outside [1, 10]")


def clamp_difficulty(d: int) -> int:
    return max(MIN_DIFFICULTY, min(MAX_DIFFICULTY, d))


def dda_step(state: DdaState, affect: Quadrant, perf: PerformanceClass) -> DdaState:
    """Apply one window's rule; the logged delta is the un-clamped one."""
    _, delta = rule_delta(affect, perf)
    new = clamp_difficulty(state.difficulty + delta)
    entry = HistoryEntry(len(state.history), Quadrant(affect), PerformanceClass(perf), delta, new)
    return DdaState(new, state.history + (entry,))


def schedule_nonadaptive(windows: int, start: int = 1) -> list[int]:
    """Linear ramp: +1 every ``ceil(windows / 10)`` windows, capped at 10."""
    if windows < 1:
        raise ValueError("windows must be >= 1")
    step = math.ceil(windows / 10)
    return [clamp_difficulty(start + i // step) for i in range(windows)]


TRAJECTORY_HEADER = ("window_index", "difficulty", "affect", "performance", "delta", "next_difficulty")


def write_trajectory_csv(rows: Sequence[Sequence], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        w.writerows(rows)
