import math

import numpy as np
import pytest

from emgdda.errors import EmptyDataset, InsufficientClasses, LengthMismatch
from emgdda.selection import MiConfig, discretize, mrmr_select, mutual_information, write_selection_csv
from oracles import bin_index, greedy_mrmr, mi_discrete


def test_perfect_binary_encoding_is_one_bit():
    y = np.array([0, 1] * 10)
    assert mutual_information(y * 3.0 + 1, y) == pytest.approx(1.0)


def test_constant_feature_has_zero_mi():
    assert mutual_information(np.full(10, 2.0), np.arange(10) % 2) == 0.0


def test_eight_sample_table_by_hand():
    # bins=2 over [0, 1]: x -> [0, 0, 1, 1, 0, 1, 1, 1]
    x = [0.0, 0.2, 0.9, 1.0, 0.1, 0.6, 0.7, 0.8]
    y = [0, 0, 0, 1, 1, 1, 1, 1]
    # joint counts: (0,0)=2 (0,1)=1 (1,0)=1 (1,1)=4 ; p(x)=3/8,5/8 ; p(y)=3/8,5/8
    expected = (2 / 8 * math.log2((2 / 8) / (3 / 8 * 3 / 8)) + 1 / 8 * math.log2((1 / 8) / (3 / 8 * 5 / 8))
                + 1 / 8 * math.log2((1 / 8) / (5 / 8 * 3 / 8)) + 4 / 8 * math.log2((4 / 8) / (5 / 8 * 5 / 8)))
    assert mutual_information(x, y, MiConfig(bins=2)) == pytest.approx(expected, abs=1e-12)
    assert mutual_information(x, y, MiConfig(bins=2)) == pytest.approx(mi_discrete(bin_index(x, 2), y))


def test_mi_errors_and_config():
    with pytest.raises(LengthMismatch):
        mutual_information([1.0, 2.0], [0])
    with pytest.raises(ValueError):
        MiConfig(bins=1)


def test_discretize_matches_oracle(rng):
    x = rng.normal(size=50)
    assert discretize(x, 10).tolist() == bin_index(list(x), 10)


def test_label_copy_selected_first(rng):
    y = rng.integers(0, 4, 60)
    X = rng.normal(size=(60, 5))
    X[:, 3] = y
    assert mrmr_select(X, y, 2).indices[0] == 3


def test_constant_feature_never_beats_positive_relevance(rng):
    y = rng.integers(0, 2, 40)
    X = rng.normal(size=(40, 4))
    X[:, 0] = 1.0
    X[:, 2] += 3 * y
    assert mrmr_select(X, y, 1).indices == (2,)
    res = mrmr_select(X, y, 4)
    pos = res.indices.index(0)
    # the constant scores exactly 0, so it is only picked once no candidate scores above 0
    assert res.scores[pos] == 0.0
    assert all(s >= 0 for s in res.scores[:pos])


def test_exact_duplicate_not_chosen_over_equal_relevance():
    rng = np.random.default_rng(3)
    y = np.repeat([0, 1], 40)
    a = y + rng.normal(scale=0.6, size=80)
    # shuffling within each class keeps the (bin, label) table, hence the relevance
    c = a.copy()
    for k in (0, 1):
        idx = np.flatnonzero(y == k)
        c[idx] = a[rng.permutation(idx)]
    X = np.column_stack([a, a, c])
    assert mutual_information(a, y) == pytest.approx(mutual_information(c, y), abs=1e-12)
    res = mrmr_select(X, y, 3)
    assert res.indices[0] == 0
    assert res.indices[1] == 2


def test_matches_exhaustive_greedy_oracle(rng):
    for _ in range(10):
        X = rng.normal(size=(40, 6))
        y = rng.integers(0, 4, 40)
        X[:, rng.integers(6)] += y
        assert list(mrmr_select(X, y, 6).indices) == greedy_mrmr(X, y, 6)


def test_affine_rescaling_keeps_ranking(rng):
    X = rng.normal(size=(60, 8))
    y = rng.integers(0, 3, 60)
    X[:, 2] += y
    scaled = X * 4.0 + 0.0
    assert mrmr_select(X, y, 8).indices == mrmr_select(scaled, y, 8).indices


def test_deterministic_and_names(rng, tmp_path):
    X = rng.normal(size=(30, 5))
    y = rng.integers(0, 2, 30)
    names = list("abcde")
    r1, r2 = mrmr_select(X, y, 3, names=names), mrmr_select(X, y, 3, names=names)
    assert r1 == r2
    assert set(r1.ranked_ids) <= set(names) and len(set(r1.ranked_ids)) == 3
    write_selection_csv(r1, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "rank,feature,score" and len(lines) == 4


def test_errors(rng):
    with pytest.raises(InsufficientClasses):
        mrmr_select(rng.normal(size=(10, 3)), np.zeros(10), 2)
    with pytest.raises(EmptyDataset):
        mrmr_select(np.empty((0, 3)), np.empty(0), 2)
    with pytest.raises(ValueError):
        mrmr_select(rng.normal(size=(10, 3)), np.arange(10) % 2, 4)
