"""
Closed-loop difficulty adjustment
=================================

Three synthetic players of different skill play ten windows each, once
with the affect-driven controller and once on a fixed linear ramp.
"""
from emgdda import PlayerModel
from emgdda.gamesim import Mode, simulate_session

for skill in (2, 5, 9):
    for mode in Mode:
        res = simulate_session(PlayerModel(float(skill), seed=skill), mode, windows=10, sample_rate_hz=20)
        band = res.time_in_band(skill - 1, skill + 1)
        print(f"skill {skill} {mode.value:12s} {res.difficulties}  in band {band:.0%}")

# %% one adaptive trajectory window by window
res = simulate_session(PlayerModel(6.0, seed=1), Mode.ADAPTIVE, windows=10, sample_rate_hz=20)
for row in res.trajectory_rows():
    print(*row, sep="\t")
