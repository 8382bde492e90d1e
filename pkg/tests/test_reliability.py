import math
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from shapaudit.exceptions import ConfigError, UsageError
from shapaudit.explain import GlobalImportance
from shapaudit.reliability import (
    MODEL_DEPENDENT,
    MODERATE,
    ROBUST,
    FeatureReliability,
    RankMatrix,
    build_rank_matrix,
    classify,
    family_agreement,
    pairwise_agreement,
    rank_features,
    rank_stats,
    spearman,
    top_k_agreement,
    top_k_set,
)


def _rm(rows, names=None):
    rows = np.asarray(rows, dtype=float)
    M, d = rows.shape
    return RankMatrix(tuple(names or (f"m{i}" for i in range(M))), tuple(f"f{j}" for j in range(d)), rows)


def _gi(values, names=("a", "b", "c")):
    return GlobalImportance(np.asarray(values, dtype=float), tuple(names))


def test_rank_features_examples():
    assert list(rank_features(np.array([0.9, 0.1, 0.5, 0.3]))) == [1, 4, 2, 3]
    assert list(rank_features(np.array([0.5, 0.5, 0.1]))) == [1.5, 1.5, 3]
    assert list(rank_features(np.full(5, 0.2))) == [3.0] * 5


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=12))
def test_rank_features_matches_scipy(values):
    values = np.array(values, dtype=float)
    np.testing.assert_array_equal(rank_features(values), sps.rankdata(-values, method="average"))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 30), min_size=2, max_size=10))
def test_rank_features_monotone_invariance(values):
    # integer inputs keep the transform strictly increasing in floating point
    v = np.array(values, dtype=float)
    assert np.array_equal(rank_features(v), rank_features(np.exp(v / 3.0) + 3.0))
    assert np.array_equal(rank_features(v), rank_features(4.0 * v))


def test_build_rank_matrix():
    rm = build_rank_matrix([("p", _gi([3, 2, 1])), ("q", _gi([3, 2, 1]))])
    assert np.array_equal(rm.ranks[0], rm.ranks[1])
    with pytest.raises(UsageError):
        build_rank_matrix([("p", _gi([3, 2, 1]))])
    with pytest.raises(UsageError):
        build_rank_matrix([("p", _gi([3, 2, 1])), ("q", _gi([3, 2, 1], ("a", "b", "z")))])


def test_rank_stats_examples():
    # two models over four features; only the first two columns are inspected
    s = rank_stats(_rm([[1, 2, 3, 4], [1, 4, 3, 2]]))
    assert (s[0].mean_rank, s[0].std_rank, s[0].label) == (1.0, 0.0, ROBUST)
    assert (s[1].mean_rank, s[1].std_rank) == (3.0, 1.0)


def test_rank_stats_sample_convention():
    s = rank_stats(_rm([[1.0, 2.0], [2.0, 1.0]]), ddof=1)
    assert s[0].std_rank == pytest.approx(math.sqrt(0.5))


def test_classify_table_values():
    labels = [f.label for f in classify([FeatureReliability(n, 2.0, s) for n, s in (("a", 0.0), ("b", 0.526), ("c", 0.921))])]
    assert labels == [ROBUST, MODERATE, MODEL_DEPENDENT]
    with pytest.raises(ConfigError):
        classify([], thresholds=(0.8, 0.2))


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 3), st.floats(0, 3))
def test_classify_monotone(a, b):
    order = {ROBUST: 0, MODERATE: 1, MODEL_DEPENDENT: 2}
    lo, hi = sorted((a, b))
    la, lb = (classify([FeatureReliability("f", 1.0, s)])[0].label for s in (lo, hi))
    assert order[la] <= order[lb]


def test_spearman_examples():
    assert spearman([1, 2, 3, 4], [1, 2, 3, 4]) == 1.0
    assert spearman([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0
    assert spearman([1, 2, 3, 4], [1, 2, 4, 3]) == pytest.approx(0.8, abs=1e-15)
    assert math.isnan(spearman([2.5] * 4, [1, 2, 3, 4]))
    with pytest.raises(UsageError):
        spearman([1], [1])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=2, max_size=10).flatmap(lambda a: st.tuples(st.just(a), st.permutations(a))))
def test_spearman_matches_scipy_with_ties(pair):
    a, b = (sps.rankdata(v) for v in pair)
    ours = spearman(a, b)
    if np.ptp(a) == 0:
        assert math.isnan(ours)
        return
    assert ours == pytest.approx(sps.spearmanr(a, b)[0], abs=1e-12)
    assert ours == spearman(b, a)
    assert -1.0 <= ours <= 1.0


def test_top_k_tie_break_lower_index():
    assert top_k_set([1.5, 1.5, 3, 4], 1) == {0}
    assert top_k_set([2, 1, 3, 4], 2) == {0, 1}


def test_top_k_overlap_two_of_three():
    assert top_k_agreement([1, 2, 3, 4], [1, 2, 4, 3], 3) == pytest.approx(2 / 3)


def test_unanimous_agreement():
    ag = pairwise_agreement(_rm([[1, 3, 2, 4]] * 5))
    assert ag.mean_spearman == 1.0
    assert all(mean == 1.0 and std == 0.0 for mean, std in ag.topk.values())
    assert all(v == 1.0 for v in ag.modal_topk.values())


def test_pairwise_matrix_shape_and_symmetry(rng):
    rows = [rng.permutation(5) + 1 for _ in range(6)]
    ag = pairwise_agreement(_rm(rows), ks=(1, 2, 3, 4, 5))
    P = ag.pairwise_spearman
    assert np.array_equal(P, P.T) and np.all(np.diag(P) == 1.0)
    assert ag.topk[5] == (1.0, 0.0)


def test_undefined_pairs_are_excluded_with_warning():
    with pytest.warns(UserWarning, match="undefined"):
        ag = pairwise_agreement(_rm([[1, 2, 3], [2, 2, 2], [1, 2, 3]]))
    assert ag.n_undefined_pairs == 2
    assert ag.mean_spearman == 1.0


def test_boundary_ties_reported():
    ag = pairwise_agreement(_rm([[1.5, 1.5, 3], [1, 2, 3]]), ks=(1,))
    assert ag.boundary_ties == (("m0", 1),)


def test_invalid_k():
    with pytest.raises(ConfigError):
        pairwise_agreement(_rm([[1, 2], [2, 1]]), ks=(3,))


def test_permuting_models_and_features(rng):
    rows = np.array([rng.permutation(4) + 1 for _ in range(7)], dtype=float)
    base_stats = rank_stats(_rm(rows))
    base_ag = pairwise_agreement(_rm(rows))
    perm = rng.permutation(7)
    assert [(s.mean_rank, s.std_rank) for s in rank_stats(_rm(rows[perm]))] == pytest.approx(
        [(s.mean_rank, s.std_rank) for s in base_stats]
    )
    assert pairwise_agreement(_rm(rows[perm])).mean_spearman == pytest.approx(base_ag.mean_spearman, abs=1e-14)
    fperm = rng.permutation(4)
    permuted = rank_stats(_rm(rows[:, fperm]))
    assert [s.mean_rank for s in permuted] == pytest.approx([base_stats[j].mean_rank for j in fperm])


def test_family_agreement():
    rows = [[1, 2, 3], [1, 2, 3], [3, 2, 1]]
    ag = pairwise_agreement(_rm(rows))
    fam = family_agreement(ag, ["tree", "tree", "linear"])
    assert fam[("tree", "tree")] == 1.0
    assert fam[("linear", "tree")] == -1.0
