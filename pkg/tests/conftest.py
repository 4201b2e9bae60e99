import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from emgdda.dataset import AffectLabel, EmgSegment, SessionLog, WINDOW_SECONDS  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


def make_segment(window_index=0, rate=4, fill=None, rng=None, label=(0.5, 0.5),
                 participant="p01", session="s0", task="WM"):
    n = rate * WINDOW_SECONDS
    if fill is not None:
        ch = np.full((8, n), float(fill))
    else:
        ch = (rng or np.random.default_rng(window_index)).normal(size=(8, n))
    return EmgSegment(participant, session, task, window_index, rate, ch,
                      None if label is None else AffectLabel(*label))


def make_session(n_windows=5, rate=4, labels=None, participant="p01", session="s0", seed=0, fill=None):
    rng = np.random.default_rng(seed)
    labels = labels or [(0.5, 0.5)] * n_windows
    segs = [make_segment(i, rate, fill=fill, rng=rng, label=labels[i], participant=participant, session=session)
            for i in range(n_windows)]
    events = [("correct",) * (i % 3) + ("incorrect",) * (i % 2) for i in range(n_windows)]
    return SessionLog(participant, session, "WM", rate, [1 + i % 10 for i in range(n_windows)], segs, events)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
