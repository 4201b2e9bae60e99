"""Histogram mutual information and greedy mRMR feature ranking."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyDataset, InsufficientClasses, LengthMismatch

# scores closer than this count as tied; ties go to the lower column index
TIE_TOL = 1e-12


@dataclass(frozen=True)
class MiConfig:
    bins: int = 10
    strategy: str = "equal_width"

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError(f"bins must be >= 2, got {self.bins}")
        if self.strategy != "equal_width":
            raise ValueError(f"unsupported strategy {self.strategy!r}")


@dataclass(frozen=True)
class SelectionResult:
    ranked_ids: tuple[str, ...]
    indices: tuple[int, ...]
    scores: tuple[float, ...]


def discretize(x, bins: int) -> np.ndarray:
    """Equal-width bin index of each sample over ``[min, max]``; constant input maps to bin 0."""
    x = np.asarray(x, dtype=float)
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    idx = np.floor((x - lo) / span * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def _codes(y) -> np.ndarray:
    return np.unique(np.asarray(y), return_inverse=True)[1].reshape(-1)


def discrete_mi(a: np.ndarray, b: np.ndarray) -> float:
    """Mutual information in bits between two integer-coded sequences."""
    a, b = _codes(a), _codes(b)
    na, nb = a.max() + 1, b.max() + 1
    joint = np.bincount(a * nb + b, minlength=na * nb).reshape(na, nb) / a.size
    pa, pb = joint.sum(axis=1), joint.sum(axis=0)
    nz = joint > 0
    mi = np.sum(joint[nz] * np.log2(joint[nz] / np.outer(pa, pb)[nz]))
    return max(float(mi), 0.0)


def mutual_information(x, y, cfg: MiConfig = MiConfig()) -> float:
    """I(x; y) in bits with ``x`` discretised into ``cfg.bins`` equal-width bins."""
    x, y = np.asarray(x, dtype=float), np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise LengthMismatch(f"x has {x.shape[0]} samples, y has {y.shape[0]}")
    if x.shape[0] < 2:
        raise LengthMismatch("need at least 2 samples")
    if np.ptp(x) == 0:
        return 0.0
    return discrete_mi(discretize(x, cfg.bins), y)


def _argmax_canonical(scores: np.ndarray, candidates: np.ndarray) -> int:
    best = scores.max()
    return int(candidates[np.flatnonzero(scores >= best - TIE_TOL)[0]])


def mrmr_select(
    X,
    y,
    k: int = 30,
    cfg: MiConfig = MiConfig(),
    names: Sequence[str] | None = None,
) -> SelectionResult:
    """Greedy forward mRMR with the difference (MID) objective.

    At each step the candidate maximising ``I(f; y) - mean_{s in S} I(f; s)``
    joins ``S``. Columns are assumed to be in canonical order.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDataset("feature matrix is empty")
    if y.shape[0] != X.shape[0]:
        raise LengthMismatch(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if np.unique(y).size < 2:
        raise InsufficientClasses("need at least 2 distinct labels")
    n_feat = X.shape[1]
    if not 1 <= k <= n_feat:
        raise ValueError(f"k must be in [1, {n_feat}], got {k}")
    names = tuple(names) if names is not None else tuple(f"f{i}" for i in range(n_feat))

    B = discretize(X, cfg.bins)
    relevance = np.array([discrete_mi(B[:, j], y) for j in range(n_feat)])
    redundancy_sum = np.zeros(n_feat)

    selected: list[int] = []
    scores: list[float] = []
    remaining = np.ones(n_feat, dtype=bool)
    for step in range(k):
        cand = np.flatnonzero(remaining)
        obj = relevance[cand] - (redundancy_sum[cand] / step if step else 0.0)
        j = _argmax_canonical(obj, cand)
        selected.append(j)
        scores.append(float(obj[np.searchsorted(cand, j)]))
        remaining[j] = False
        for c in np.flatnonzero(remaining):
            redundancy_sum[c] += discrete_mi(B[:, c], B[:, j])
    return SelectionResult(
        ranked_ids=tuple(names[j] for j in selected),
        indices=tuple(selected),
        scores=tuple(scores),
    )


def write_selection_csv(result: SelectionResult, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature", "score"])
        for r, (name, s) in enumerate(zip(result.ranked_ids, result.scores), start=1):
            w.writerow([r, name, repr(s)])
