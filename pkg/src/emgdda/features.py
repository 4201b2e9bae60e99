"""Time-domain EMG features and the 112-column feature matrix.

Fourteen features per channel, computed on the Haar approximation of the
baseline-normalised signal. The set is a fixed choice from the standard sEMG
time-domain catalogue; swap ``FeatureKind`` and ``channel_features`` together
to try a different one. Windowed MAV variants index samples from 1, so with
``N`` samples the "middle half" is ``0.25 N <= i <= 0.75 N``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .dataset import CHANNEL_SITES, EmgSegment, Quadrant, SessionLog
from .dsp import BaselineProfile, DwtConfig, NormMode, compute_baseline, dwt_haar_approx, normalize
from .errors import SignalTooShort

LOG_EPS = 1e-12


class FeatureKind(Enum):
    IEMG = "IEMG"
    MAV = "MAV"
    MMAV1 = "MMAV1"
    MMAV2 = "MMAV2"
    RMS = "RMS"
    VAR = "VAR"
    SD = "SD"
    WL = "WL"
    ZC = "ZC"
    SSC = "SSC"
    WAMP = "WAMP"
    LOG = "LOG"
    DASDV = "DASDV"
    MYOP = "MYOP"


FEATURE_KINDS: tuple[FeatureKind, ...] = tuple(FeatureKind)
N_KINDS = len(FEATURE_KINDS)
# channel-major, kind-minor
FEATURE_NAMES: tuple[str, ...] = tuple(
    f"{site.value}_{kind.value}" for site in CHANNEL_SITES for kind in FEATURE_KINDS
)
N_FEATURES = len(FEATURE_NAMES)


def feature_site(name: str):
    """Electrode site a feature name was extracted from."""
    return CHANNEL_SITES[FEATURE_NAMES.index(name) // N_KINDS]


@dataclass(frozen=True)
class ThresholdConfig:
    zc_threshold: float = 0.01
    ssc_threshold: float = 0.01
    wamp_threshold: float = 0.01
    myop_threshold: float = 0.016

    def __post_init__(self):
        for k, v in vars(self).items():
            if not v >= 0:
                raise ValueError(f"{k} must be >= 0, got {v}")

    def scaled(self, c: float) -> "ThresholdConfig":
        return ThresholdConfig(*(c * v for v in vars(self).values()))


def _mav_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    i = np.arange(1, n + 1, dtype=float)
    middle = (i >= 0.25 * n) & (i <= 0.75 * n)
    w1 = np.where(middle, 1.0, 0.5)
    w2 = np.where(middle, 1.0, np.where(i < 0.25 * n, 4.0 * i / n, 4.0 * (n - i) / n))
    return w1, w2


def channel_features(x, thresholds: ThresholdConfig = ThresholdConfig()) -> np.ndarray:
    """All 14 features along the last axis; returns shape ``(..., 14)``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if n < 3:
        raise SignalTooShort(f"need at least 3 samples, got {n}")
    ax = np.abs(x)
    d = np.diff(x, axis=-1)
    ad = np.abs(d)
    w1, w2 = _mav_weights(n)

    iemg = ax.sum(axis=-1)
    sq = np.sum(x * x, axis=-1)
    left, right = x[..., 1:-1] - x[..., :-2], x[..., 1:-1] - x[..., 2:]
    ssc = ((left * right > 0)
           & (np.maximum(np.abs(left), np.abs(right)) >= thresholds.ssc_threshold)).sum(axis=-1)
    zc = ((x[..., :-1] * x[..., 1:] < 0) & (ad >= thresholds.zc_threshold)).sum(axis=-1)

    cols = [
        iemg,
        iemg / n,
        (w1 * ax).sum(axis=-1) / n,
        (w2 * ax).sum(axis=-1) / n,
        np.sqrt(sq / n),
        sq / (n - 1),
        x.std(axis=-1, ddof=1),
        ad.sum(axis=-1),
        zc,
        ssc,
        (ad >= thresholds.wamp_threshold).sum(axis=-1),
        np.exp(np.log(ax + LOG_EPS).mean(axis=-1)),
        np.sqrt(np.sum(d * d, axis=-1) / (n - 1)),
        (ax >= thresholds.myop_threshold).sum(axis=-1) / n,
    ]
    return np.stack([np.asarray(c, dtype=float) for c in cols], axis=-1)


def extract_channel_features(signal, thresholds: ThresholdConfig = ThresholdConfig()) -> dict[str, float]:
    vals = channel_features(np.asarray(signal, dtype=float).ravel(), thresholds)
    return {k.value: float(v) for k, v in zip(FEATURE_KINDS, vals)}


@dataclass(frozen=True)
class ExtractionConfig:
    """Front-end settings; ``dwt=None`` skips the wavelet stage."""

    dwt: DwtConfig | None = DwtConfig()
    norm_mode: NormMode = NormMode.SUBTRACT_MEAN
    thresholds: ThresholdConfig = ThresholdConfig()


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    participant_id: str
    session_id: str
    window_index: int
    label: Quadrant | None = None

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist()))


def segment_features(
    segment: EmgSegment,
    baseline: BaselineProfile,
    config: ExtractionConfig = ExtractionConfig(),
) -> np.ndarray:
    x = normalize(segment, baseline, config.norm_mode).channels
    if config.dwt is not None:
        x = dwt_haar_approx(x, config.dwt)
    return channel_features(x, config.thresholds).reshape(-1)


def extract_feature_vector(
    segment: EmgSegment,
    baseline: BaselineProfile,
    dwt: DwtConfig | None = DwtConfig(),
    thresholds: ThresholdConfig = ThresholdConfig(),
    norm_mode: NormMode = NormMode.SUBTRACT_MEAN,
) -> FeatureVector:
    """Normalise, decompose and featurise each channel of ``segment``."""
    cfg = ExtractionConfig(dwt=dwt, norm_mode=NormMode(norm_mode), thresholds=thresholds)
    values = segment_features(segment, baseline, cfg)
    values.setflags(write=False)
    return FeatureVector(
        values=values,
        participant_id=segment.participant_id,
        session_id=segment.session_id,
        window_index=segment.window_index,
        label=segment.quadrant,
    )


@dataclass(eq=False)
class FeatureMatrix:
    """Stacked feature vectors with their provenance.

    ``labels`` holds ``Quadrant`` values as ints, ``-1`` for unlabeled rows.
    """

    X: np.ndarray
    labels: np.ndarray
    participants: np.ndarray
    sessions: np.ndarray
    windows: np.ndarray
    names: tuple[str, ...] = field(default=FEATURE_NAMES)

    def __len__(self):
        return len(self.X)

    @classmethod
    def from_vectors(cls, vectors: Sequence[FeatureVector]) -> "FeatureMatrix":
        if not vectors:
            return cls(np.empty((0, N_FEATURES)), np.empty(0, int), np.empty(0, object),
                       np.empty(0, object), np.empty(0, int))
        return cls(
            X=np.vstack([v.values for v in vectors]),
            labels=np.array([-1 if v.label is None else int(v.label) for v in vectors]),
            participants=np.array([v.participant_id for v in vectors], dtype=object),
            sessions=np.array([v.session_id for v in vectors], dtype=object),
            windows=np.array([v.window_index for v in vectors]),
        )

    def subset(self, mask) -> "FeatureMatrix":
        return FeatureMatrix(self.X[mask], self.labels[mask], self.participants[mask],
                             self.sessions[mask], self.windows[mask], self.names)

    def labeled(self) -> "FeatureMatrix":
        return self.subset(self.labels >= 0)


def extract_corpus(sessions: Iterable[SessionLog], config: ExtractionConfig = ExtractionConfig()) -> FeatureMatrix:
    """Feature matrix for every window; each session is normalised by its own window 0."""
    vectors = []
    for s in sessions:
        if not s.segments:
            continue
        baseline = compute_baseline(s.segments[0])
        for seg in s.segments:
            vectors.append(extract_feature_vector(seg, baseline, config.dwt, config.thresholds, config.norm_mode))
    return FeatureMatrix.from_vectors(vectors)


_META = ("participant_id", "session_id", "window_index", "quadrant")


def write_feature_csv(matrix: FeatureMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(matrix.names) + list(_META))
        for i in range(len(matrix)):
            q = "" if matrix.labels[i] < 0 else Quadrant(matrix.labels[i]).code
            w.writerow([repr(float(v)) for v in matrix.X[i]]
                       + [matrix.participants[i], matrix.sessions[i], int(matrix.windows[i]), q])


def read_feature_csv(path) -> FeatureMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if tuple(header[-len(_META):]) != _META:
        raise ValueError(f"{path}: last columns must be {_META}")
    names = tuple(header[: -len(_META)])
    X = np.array([[float(v) for v in r[: len(names)]] for r in body]).reshape(len(body), len(names))
    return FeatureMatrix(
        X=X,
        labels=np.array([-1 if r[-1] == "" else int(Quadrant.from_code(r[-1])) for r in body], dtype=int),
        participants=np.array([r[-4] for r in body], dtype=object),
        sessions=np.array([r[-3] for r in body], dtype=object),
        windows=np.array([int(r[-2]) for r in body], dtype=int),
        names=names,
    )
