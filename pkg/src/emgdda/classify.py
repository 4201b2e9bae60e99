"""Quadrant classifiers, leave-one-subject-out evaluation and rank correlation."""
from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import rankdata

from .dataset import Quadrant, SessionLog
from .dsp import BaselineProfile
from .errors import (
    DimensionMismatch,
    EmptyDataset,
    InsufficientClassData,
    InsufficientClasses,
    LengthMismatch,
    SingularCovariance,
    SolverNonConvergence,
    TooFewParticipants,
    ZeroVariance,
)
from .features import FEATURE_NAMES, ExtractionConfig, FeatureMatrix, extract_corpus, segment_features
from .selection import MiConfig, mrmr_select


# --- standardisation -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StandardizationParams:
    mean: np.ndarray
    sd: np.ndarray
    keep: np.ndarray

    @property
    def dropped(self) -> np.ndarray:
        return np.flatnonzero(~self.keep)


def fit_standardizer(X) -> StandardizationParams:
    """Per-feature mean/sd on training rows; constant features are masked out."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDataset("cannot fit a standardizer on an empty set")
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    return StandardizationParams(mean=mean, sd=sd, keep=sd > 0)


def apply_standardizer(params: StandardizationParams, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != params.mean.size:
        raise DimensionMismatch(f"expected {params.mean.size} features, got {X.shape[-1]}")
    k = params.keep
    return (X[..., k] - params.mean[k]) / params.sd[k]


def _as_2d(model_dim: int, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    X2 = X.reshape(1, -1) if X.ndim == 1 else X
    if X2.shape[1] != model_dim:
        raise DimensionMismatch(f"model expects {model_dim} features, got {X2.shape[1]}")
    return X2


# --- kNN -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KnnModel:
    k: int
    X: np.ndarray
    y: np.ndarray


def knn_fit(X, y, k: int = 4) -> KnnModel:
    X, y = np.asarray(X, dtype=float), np.asarray(y)
    if X.shape[0] == 0:
        raise EmptyDataset("no training samples")
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k={k} must be in [1, {X.shape[0]}]")
    return KnnModel(k=k, X=X, y=y)


def _knn_vote(dist: np.ndarray, y: np.ndarray, k: int):
    nearest = np.argsort(dist, kind="stable")[:k]
    labels, d = y[nearest], dist[nearest]
    classes = np.unique(labels)
    votes = np.array([(labels == c).sum() for c in classes])
    tied = classes[votes == votes.max()]
    if tied.size == 1:
        return tied[0]
    mean_d = np.array([d[labels == c].mean() for c in tied])
    # np.unique sorts, so the first minimum is the canonical winner
    return tied[np.argmin(mean_d)]


def knn_predict_many(model: KnnModel, X) -> np.ndarray:
    Q = _as_2d(model.X.shape[1], X)
    dist = np.sqrt(((Q[:, None, :] - model.X[None, :, :]) ** 2).sum(axis=-1))
    return np.array([_knn_vote(row, model.y, model.k) for row in dist])


def knn_predict(model: KnnModel, x):
    """Majority vote of the k nearest training points (Euclidean).

    Vote ties go to the class whose tied neighbours are closer on average,
    then to the smaller label.
    """
    return knn_predict_many(model, x)[0]


# --- LDA -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LdaModel:
    classes: np.ndarray
    means: np.ndarray
    cov: np.ndarray
    priors: np.ndarray
    coef: np.ndarray
    intercept: np.ndarray


def lda_fit(X, y, ridge: float = 1e-6) -> LdaModel:
    """Pooled-covariance LDA with a ridge of ``ridge * trace / dim``."""
    X, y = np.asarray(X, dtype=float), np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise InsufficientClassData("LDA needs at least 2 classes")
    if counts.min() < 2:
        raise InsufficientClassData(f"class {classes[counts.argmin()]} has fewer than 2 samples")
    n, d = X.shape
    means = np.vstack([X[y == c].mean(axis=0) for c in classes])
    scatter = np.zeros((d, d))
    for c, mu in zip(classes, means):
        Z = X[y == c] - mu
        scatter += Z.T @ Z
    pooled = scatter / (n - classes.size)
    cov = pooled + ridge * np.trace(pooled) / d * np.eye(d)
    if not np.isfinite(np.linalg.cond(cov)) or np.linalg.cond(cov) > 1e14:
        raise SingularCovariance("pooled covariance is singular after regularisation")
    coef = np.linalg.solve(cov, means.T).T
    priors = counts / n
    intercept = -0.5 * np.sum(coef * means, axis=1) + np.log(priors)
    return LdaModel(classes, means, cov, priors, coef, intercept)


def lda_decision(model: LdaModel, X) -> np.ndarray:
    X2 = _as_2d(model.means.shape[1], X)
    return X2 @ model.coef.T + model.intercept


def lda_predict_many(model: LdaModel, X) -> np.ndarray:
    return model.classes[np.argmax(lda_decision(model, X), axis=1)]


def lda_predict(model: LdaModel, x):
    return lda_predict_many(model, x)[0]


# --- Gaussian SVM ----------------------------------------------------------

def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass(frozen=True, eq=False)
class BinaryMachine:
    alpha: np.ndarray
    y: np.ndarray
    rho: float
    n_iter: int

    def dual_objective(self, K: np.ndarray) -> float:
        """``sum(alpha) - 0.5 * (alpha*y)^T K (alpha*y)``, to be maximised."""
        ay = self.alpha * self.y
        return float(self.alpha.sum() - 0.5 * ay @ K @ ay)


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
              max_iter: int = 100_000) -> BinaryMachine:
    """Soft-margin dual by SMO with second-order working-set selection.

    Minimises ``0.5 a^T Q a - sum(a)`` with ``Q = yy^T * K``, ``0 <= a <= C``,
    ``y^T a = 0``; stops once the maximal KKT violation drops below ``tol``.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    Q = np.outer(y, y) * K
    diagQ = np.diag(Q).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    tau = 1e-12
    for it in range(max_iter):
        myG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(myG[up])])
        m = myG[i]
        if m - myG[low].min() < tol:
            break
        cand = low & (myG < m)
        b = m - myG[cand]
        a = diagQ[i] + diagQ[cand] - 2.0 * y[i] * y[cand] * Q[i, cand]
        a = np.where(a > 0, a, tau)
        j = int(np.flatnonzero(cand)[np.argmin(-(b * b) / a)])

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(diagQ[i] + diagQ[j] + 2.0 * Q[i, j], tau)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            elif alpha[j] > C:
                alpha[j], alpha[i] = C, C + diff
        else:
            quad = max(diagQ[i] + diagQ[j] - 2.0 * Q[i, j], tau)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
            elif alpha[j] < 0:
                alpha[j], alpha[i] = 0.0, total
            if total > C:
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, total
        G += Q[:, i] * (alpha[i] - ai) + Q[:, j] * (alpha[j] - aj)
    else:
        raise SolverNonConvergence(f"SMO did not reach KKT tolerance {tol} in {max_iter} iterations")

    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        at_ub = alpha >= C
        ub_mask = (at_ub & (y < 0)) | (~at_ub & (y > 0))
        lb_mask = (at_ub & (y > 0)) | (~at_ub & (y < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2)
    return BinaryMachine(alpha=alpha, y=y, rho=rho, n_iter=it)


@dataclass(frozen=True, eq=False)
class SvmModel:
    classes: np.ndarray
    X: np.ndarray
    machines: tuple[BinaryMachine, ...]
    gamma: float
    C: float


def svm_fit(X, y, gamma: float | None = None, C: float = 1.0, tol: float = 1e-3,
            max_iter: int = 100_000) -> SvmModel:
    """One-vs-rest Gaussian-kernel SVM; ``gamma`` defaults to ``1 / dim``."""
    X, y = np.asarray(X, dtype=float), np.asarray(y)
    classes = np.unique(y)
    if classes.size < 2:
        raise InsufficientClasses("SVM needs at least 2 classes")
    gamma = 1.0 / X.shape[1] if gamma is None else gamma
    if gamma <= 0 or C <= 0:
        raise ValueError("gamma and C must be positive")
    K = rbf_kernel(X, X, gamma)
    machines = tuple(smo_solve(K, np.where(y == c, 1.0, -1.0), C, tol, max_iter) for c in classes)
    return SvmModel(classes=classes, X=X, machines=machines, gamma=gamma, C=C)


def svm_decision(model: SvmModel, X) -> np.ndarray:
    Kx = rbf_kernel(_as_2d(model.X.shape[1], X), model.X, model.gamma)
    return np.column_stack([Kx @ (m.alpha * m.y) - m.rho for m in model.machines])


def svm_predict_many(model: SvmModel, X) -> np.ndarray:
    return model.classes[np.argmax(svm_decision(model, X), axis=1)]


def svm_predict(model: SvmModel, x):
    return svm_predict_many(model, x)[0]


# --- fold pipeline ---------------------------------------------------------

CLASSIFIERS = ("knn", "lda", "svm")


@dataclass(frozen=True)
class PipelineConfig:
    classifier: str = "knn"
    knn_k: int = 4
    lda_ridge: float = 1e-6
    svm_gamma: float | None = None
    svm_c: float = 1.0
    n_select: int | None = 30
    mi_bins: int = 10
    extraction: ExtractionConfig = ExtractionConfig()

    def __post_init__(self):
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"unknown classifier {self.classifier!r}")

    @property
    def label(self) -> str:
        return f"knn(k={self.knn_k})" if self.classifier == "knn" else self.classifier


@dataclass(eq=False)
class TrainedPipeline:
    """Standardizer, mRMR subset and classifier fitted on one training set."""

    config: PipelineConfig
    standardizer: StandardizationParams
    selected: np.ndarray  # column indices into the standardised (kept) features
    selected_names: tuple[str, ...]
    model: object

    def predict(self, X) -> np.ndarray:
        Z = apply_standardizer(self.standardizer, np.atleast_2d(X))[:, self.selected]
        if isinstance(self.model, KnnModel):
            return knn_predict_many(self.model, Z)
        if isinstance(self.model, LdaModel):
            return lda_predict_many(self.model, Z)
        return svm_predict_many(self.model, Z)

    def classify_segment(self, segment, baseline: BaselineProfile) -> Quadrant:
        x = segment_features(segment, baseline, self.config.extraction)
        return Quadrant(int(self.predict(x)[0]))


def fit_pipeline(X, y, config: PipelineConfig = PipelineConfig(),
                 names: Sequence[str] = FEATURE_NAMES) -> TrainedPipeline:
    X, y = np.asarray(X, dtype=float), np.asarray(y)
    std = fit_standardizer(X)
    Z = apply_standardizer(std, X)
    kept_names = [n for n, k in zip(names, std.keep) if k]
    if Z.shape[1] == 0:
        raise ZeroVariance("every training feature is constant")
    if config.n_select is None:
        sel = np.arange(Z.shape[1])
    else:
        res = mrmr_select(Z, y, min(config.n_select, Z.shape[1]), MiConfig(bins=config.mi_bins), kept_names)
        sel = np.array(res.indices)
    Zs = Z[:, sel]
    if config.classifier == "knn":
        model = knn_fit(Zs, y, config.knn_k)
    elif config.classifier == "lda":
        model = lda_fit(Zs, y, config.lda_ridge)
    else:
        model = svm_fit(Zs, y, config.svm_gamma, config.svm_c)
    return TrainedPipeline(config, std, sel, tuple(kept_names[i] for i in sel), model)


# --- evaluation ------------------------------------------------------------

TASKS = ("Valence2", "Arousal2", "Quadrant4")
TASK_CLASSES = {
    "Quadrant4": tuple(q.code for q in Quadrant),
    "Valence2": ("positive", "negative"),
    "Arousal2": ("high", "low"),
}


def collapse(quadrants, task: str) -> np.ndarray:
    """Map quadrant ints onto the class indices of ``task``."""
    q = np.asarray(quadrants, dtype=int)
    if task == "Quadrant4":
        return q
    if task == "Valence2":
        return np.where(np.isin(q, [Quadrant.ENERGETIC_POSITIVE, Quadrant.CALM_POSITIVE]), 0, 1)
    if task == "Arousal2":
        return np.where(np.isin(q, [Quadrant.ENERGETIC_POSITIVE, Quadrant.ENERGETIC_NEGATIVE]), 0, 1)
    raise ValueError(f"unknown task {task!r}")


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (np.asarray(y_true, int), np.asarray(y_pred, int)), 1)
    return cm


def macro_f1(cm: np.ndarray) -> float:
    tp = np.diag(cm).astype(float)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    seen = (cm.sum(axis=0) + cm.sum(axis=1)) > 0
    if not seen.any():
        return 0.0
    return float(np.mean(2 * tp[seen] / (2 * tp[seen] + fp[seen] + fn[seen])))


@dataclass
class FoldResult:
    participant: str
    n_test: int
    n_correct: int
    selected: tuple[str, ...] = ()

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n_test if self.n_test else float("nan")


@dataclass
class EvalReport:
    task: str
    classifier: str
    class_names: tuple[str, ...]
    folds: list[FoldResult]
    confusion: np.ndarray
    skipped: list[str] = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        total = self.confusion.sum()
        return float(np.trace(self.confusion) / total) if total else float("nan")

    @property
    def macro_f1(self) -> float:
        return macro_f1(self.confusion)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "classifier": self.classifier,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "class_names": list(self.class_names),
            "confusion": self.confusion.tolist(),
            "folds": [
                {"participant": f.participant, "n_test": f.n_test, "n_correct": f.n_correct,
                 "accuracy": f.accuracy, "selected": list(f.selected)}
                for f in self.folds
            ],
            "skipped": list(self.skipped),
        }


FitFn = Callable[[np.ndarray, np.ndarray], object]


def loso_evaluate(
    data: FeatureMatrix | Sequence[SessionLog],
    config: PipelineConfig = PipelineConfig(),
    fit_fn: FitFn | None = None,
    workers: int = 1,
) -> dict[str, EvalReport]:
    """Leave-one-subject-out evaluation of a 4-class pipeline.

    Each fold fits the standardizer, mRMR subset and classifier on the other
    participants only. Two-class reports collapse the 4-class predictions
    along one axis. Folds whose training set misses a class present in the
    held-out participant are skipped with a warning.
    """
    fm = data if isinstance(data, FeatureMatrix) else extract_corpus(data, config.extraction)
    fm = fm.labeled()
    people = sorted(set(fm.participants.tolist()))
    if len(people) < 2:
        raise TooFewParticipants(f"LOSO needs at least 2 participants, got {len(people)}")
    if fit_fn is None:
        def fit_fn(X, y):
            return fit_pipeline(X, y, config, fm.names)

    def run_fold(p):
        test = fm.participants == p
        y_train, y_test = fm.labels[~test], fm.labels[test]
        missing = set(y_test.tolist()) - set(y_train.tolist())
        if missing or np.unique(y_train).size < 2:
            return p, None
        model = fit_fn(fm.X[~test], y_train)
        return p, (y_test, np.asarray(model.predict(fm.X[test])).astype(int),
                   tuple(getattr(model, "selected_names", ())))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(run_fold, people))
    else:
        outcomes = [run_fold(p) for p in people]

    skipped = [p for p, out in outcomes if out is None]
    for p in skipped:
        warnings.warn(f"LOSO fold for participant {p!r} skipped: training set lacks a test class")
    done = [(p, out) for p, out in outcomes if out is not None]

    reports = {}
    for task in TASKS:
        n_cls = len(TASK_CLASSES[task])
        cm = np.zeros((n_cls, n_cls), dtype=int)
        folds = []
        for p, (yt, yp, sel) in done:
            t, q = collapse(yt, task), collapse(yp, task)
            cm += confusion_matrix(t, q, n_cls)
            folds.append(FoldResult(p, int(t.size), int((t == q).sum()), sel))
        reports[task] = EvalReport(task, config.label, TASK_CLASSES[task], folds, cm, list(skipped))
    return reports


def reports_to_json(results: dict[str, dict[str, EvalReport]]) -> str:
    return json.dumps(
        {clf: {task: r.to_dict() for task, r in reps.items()} for clf, reps in results.items()},
        indent=2,
    )


def render_table(results: dict[str, dict[str, EvalReport]]) -> str:
    """Accuracy table: one row per classifier, columns valence / arousal / 4-class."""
    head = f"{'classifier':<12}{'valence':>10}{'arousal':>10}{'4-class':>10}"
    lines = [head, "-" * len(head)]
    for clf, reps in results.items():
        cells = "".join(f"{100 * reps[t].accuracy:>9.1f}%" for t in ("Valence2", "Arousal2", "Quadrant4"))
        lines.append(f"{clf:<12}{cells}")
    return "\n".join(lines) + "\n"


# --- rank correlation ------------------------------------------------------

def spearman_rho(rank_a, rank_b) -> float:
    """Spearman's rho: Pearson correlation of average ranks."""
    a, b = np.asarray(rank_a, dtype=float), np.asarray(rank_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"shapes {a.shape} and {b.shape} differ")
    if a.size < 2:
        raise LengthMismatch("need at least 2 observations")
    ra, rb = rankdata(a).astype(float), rankdata(b).astype(float)
    ra -= ra.mean()
    rb -= rb.mean()
    den = np.sqrt((ra * ra).sum() * (rb * rb).sum())
    if den == 0:
        raise ZeroVariance("a ranking is constant")
    return float(np.clip((ra * rb).sum() / den, -1.0, 1.0))
