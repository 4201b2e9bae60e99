"""Facial-EMG affect recognition and affect-driven difficulty adjustment."""

__version__ = "0.1.0"

from .dataset import (
    AffectLabel,
    EmgSegment,
    Quadrant,
    ScoreEvent,
    SessionLog,
    Site,
    Task,
    dataset_summary,
    load_corpus,
    load_sessions,
    save_sessions,
    truncate_label,
)
from .dsp import BaselineProfile, DwtConfig, NormMode, compute_baseline, dwt_haar_approx, normalize
from .features import (
    FEATURE_NAMES,
    ExtractionConfig,
    FeatureMatrix,
    ThresholdConfig,
    extract_channel_features,
    extract_corpus,
    extract_feature_vector,
)
from .selection import MiConfig, SelectionResult, mrmr_select, mutual_information
from .classify import (
    PipelineConfig,
    fit_pipeline,
    knn_fit,
    knn_predict,
    lda_fit,
    lda_predict,
    loso_evaluate,
    spearman_rho,
    svm_fit,
    svm_predict,
)
from .dda import DdaState, PerformanceClass, classify_performance, dda_step, schedule_nonadaptive
from .gamesim import (
    Mode,
    PlayerModel,
    SynthEmgConfig,
    player_affect,
    player_perform,
    simulate_session,
    synth_emg,
    synth_participant,
    wm_list_length,
)
