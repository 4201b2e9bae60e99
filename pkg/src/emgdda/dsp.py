"""Baseline normalisation and Haar wavelet approximation."""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .dataset import EmgSegment
from .errors import SignalTooShort, WrongWindow, ZeroVariance

SQRT2 = np.sqrt(2.0)


class NormMode(str, Enum):
    SUBTRACT_MEAN = "subtract_mean"
    ZSCORE = "zscore"


@dataclass(frozen=True, eq=False)
class BaselineProfile:
    mean: np.ndarray
    sd: np.ndarray
    source_window_index: int = 0


def compute_baseline(first_segment: EmgSegment) -> BaselineProfile:
    """Per-channel mean and population standard deviation of the first window."""
    if first_segment.window_index != 0:
        raise WrongWindow(
            f"baseline must come from window 0, got window {first_segment.window_index}"
        )
    ch = first_segment.channels
    return BaselineProfile(mean=ch.mean(axis=1), sd=ch.std(axis=1), source_window_index=0)


def normalize(
    segment: EmgSegment,
    baseline: BaselineProfile,
    mode: NormMode | str = NormMode.SUBTRACT_MEAN,
) -> EmgSegment:
    mode = NormMode(mode)
    centred = segment.channels - baseline.mean[:, None]
    if mode is NormMode.ZSCORE:
        if np.any(baseline.sd == 0):
            bad = np.flatnonzero(baseline.sd == 0).tolist()
            raise ZeroVariance(f"baseline sd is zero on channels {bad}")
        centred = centred / baseline.sd[:, None]
    return replace(segment, channels=centred)


@dataclass(frozen=True)
class DwtConfig:
    wavelet: str = "haar"
    level: int = 4

    def __post_init__(self):
        if self.wavelet != "haar":
            raise ValueError(f"unsupported wavelet {self.wavelet!r}")
        if not 1 <= self.level <= 8:
            raise ValueError(f"level must be in [1, 8], got {self.level}")


def _pad_even(x: np.ndarray) -> np.ndarray:
    # odd bands repeat their final sample
    if x.shape[-1] % 2:
        x = np.concatenate([x, x[..., -1:]], axis=-1)
    return x


def haar_step(x) -> tuple[np.ndarray, np.ndarray]:
    """One Haar level along the last axis: (approximation, detail)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise SignalTooShort(f"need at least 2 samples per level, got {x.shape[-1]}")
    x = _pad_even(x)
    even, odd = x[..., 0::2], x[..., 1::2]
    return (even + odd) / SQRT2, (even - odd) / SQRT2


def dwt_haar_approx(signal, config: DwtConfig | int = DwtConfig()) -> np.ndarray:
    """Level-L Haar approximation coefficients along the last axis.

    Accepts a 1-D signal or a (channels, samples) array. Output length is
    ``ceil(n / 2**level)``.
    """
    if isinstance(config, int):
        config = DwtConfig(level=config)
    level = config.level
    x = np.asarray(signal, dtype=float)
    for _ in range(level):
        x, _detail = haar_step(x)
    return x
