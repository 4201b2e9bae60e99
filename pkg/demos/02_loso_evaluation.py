"""
Leave-one-participant-out evaluation
====================================

Build a small synthetic corpus in memory, extract features and score the
three classifiers with participant-wise cross-validation.
"""
from emgdda import SynthEmgConfig, synth_participant
from emgdda.classify import PipelineConfig, loso_evaluate, render_table
from emgdda.dsp import DwtConfig
from emgdda.features import ExtractionConfig, extract_corpus

# a low sample rate keeps this quick; the defaults use 1000 Hz
emg = SynthEmgConfig(noise_sd=1.0)
sessions = []
for p in range(6):
    s, _ = synth_participant(f"p{p:02d}", emg, n_sessions=2, windows=5, sample_rate_hz=100, seed=p)
    sessions += s

ext = ExtractionConfig(dwt=DwtConfig(level=3))
data = extract_corpus(sessions, ext).labeled()
print(data.X.shape[0], "labeled windows from", len(set(data.participants)), "participants")

results = {}
for clf in ("knn", "lda", "svm"):
    cfg = PipelineConfig(classifier=clf, n_select=30, extraction=ext)
    results[cfg.label] = loso_evaluate(data, cfg)
print(render_table(results))

# %% which features does the first fold pick?
fold = results["knn(k=4)"]["Quadrant4"].folds[0]
print("held out:", fold.participant, "first picks:", list(fold.selected[:5]))
