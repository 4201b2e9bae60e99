"""
Features of one synthetic window
================================

Generate a single 45 s window of synthetic facial EMG, reduce each channel
with the Haar approximation and look at a few of the 14 features.
"""
import numpy as np

from emgdda import Quadrant, Site, SynthEmgConfig, synth_emg
from emgdda.dsp import DwtConfig, compute_baseline, dwt_haar_approx, normalize
from emgdda.features import extract_feature_vector, feature_site

cfg = SynthEmgConfig(seed=7)

# window 0 is the resting baseline; the second window is a smile-heavy one
rest = synth_emg(cfg, Quadrant.CALM_POSITIVE, 250, window_index=0)
happy = synth_emg(cfg, Quadrant.ENERGETIC_POSITIVE, 250, window_index=1)
print("samples per channel:", happy.channels.shape[1])

# %% the Haar approximation halves the length at each level
x = normalize(happy, compute_baseline(rest)).channels[Site.MOUTH_LEFT.index]
for level in range(1, 5):
    a = dwt_haar_approx(x, DwtConfig(level=level))
    print(f"level {level}: {a.size:6d} samples, rms {np.sqrt(np.mean(a ** 2)):.3f}")

# %% 112 named features; mouth channels outweigh the corrugator here
fv = extract_feature_vector(happy, compute_baseline(rest))
d = fv.as_dict()
for name in ("MouthLeft_RMS", "MouthRight_RMS", "CorrugatorLeft_RMS", "CorrugatorRight_RMS"):
    print(f"{name:22s} {d[name]:8.3f}  ({feature_site(name).name})")
