"""Sensitive-blind metric and empirical (alpha, gamma) fairness estimation."""

import itertools

import numpy as np
import pytest

import fairsample as fs


def make_ds(X, sensitive_cols=()):
    X = np.asarray(X, dtype=np.float64)
    mask = np.ones(X.shape[1], dtype=bool)
    for c in sensitive_cols:
        mask[c] = False
    return fs.EncodedDataset(
        X=X,
        y=np.zeros(X.shape[0], dtype=np.int64),
        feature_names=tuple(f"f{i}" for i in range(X.shape[1])),
        non_sensitive_mask=mask,
        row_origin=np.arange(X.shape[0]),
        categories={},
    )


def brute_force_alpha(scores, ds, metric, gamma):
    m = len(scores)
    viol = 0
    total = 0
    for i, j in itertools.combinations(range(m), 2):
        total += 1
        if abs(scores[i] - scores[j]) > metric.distance(ds.X[i], ds.X[j]) + gamma:
            viol += 1
    return viol / total


# ---------------------------------------------------------------- metric

def test_metric_identity_of_indiscernibles():
    ds = make_ds(np.array([[0.2, 0.4, 0.8]]))
    metric = fs.build_metric(ds)
    assert metric.distance(ds.X[0], ds.X[0]) == 0.0


def test_metric_blind_to_sensitive_coordinates():
    ds = make_ds(np.array([[0.2, 1.0], [0.2, 0.0]]), sensitive_cols=(1,))
    metric = fs.build_metric(ds)
    assert metric.distance(ds.X[0], ds.X[1]) == 0.0


def test_metric_unit_distance_for_opposite_corners():
    ds = make_ds(np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]))
    metric = fs.build_metric(ds)
    assert metric.distance(ds.X[0], ds.X[1]) == pytest.approx(1.0)


def test_metric_symmetry_and_nonnegativity():
    rng = np.random.default_rng(1)
    ds = make_ds(rng.random((10, 4)), sensitive_cols=(3,))
    metric = fs.build_metric(ds)
    for i in range(10):
        for j in range(10):
            dij = metric.distance(ds.X[i], ds.X[j])
            assert dij >= 0.0
            assert dij == pytest.approx(metric.distance(ds.X[j], ds.X[i]))


def test_metric_requires_non_sensitive_coordinates():
    ds = make_ds(np.array([[1.0, 0.0]]), sensitive_cols=(0, 1))
    with pytest.raises(ValueError, match="sensitive"):
        fs.build_metric(ds)


# ---------------------------------------------------------------- alpha estimation

def test_constant_predictor_never_violates():
    rng = np.random.default_rng(2)
    ds = make_ds(rng.random((12, 3)))
    metric = fs.build_metric(ds)
    est = fs.empirical_metric_fairness(np.full(12, 0.7), ds, metric, gamma=0.0)
    assert est.alpha_hat == 0.0
    assert est.pairs_evaluated == 12 * 11 // 2
    assert est.exhaustive


def test_gamma_of_one_never_violates():
    rng = np.random.default_rng(3)
    ds = make_ds(rng.random((15, 3)))
    metric = fs.build_metric(ds)
    scores = rng.random(15)
    est = fs.empirical_metric_fairness(scores, ds, metric, gamma=1.0)
    assert est.alpha_hat == 0.0


def test_four_point_instance_matches_enumeration():
    X = np.array([
        [0.0, 0.0],
        [0.1, 0.0],
        [0.9, 0.9],
        [0.5, 0.4],
    ])
    scores = np.array([0.05, 0.95, 0.5, 0.52])
    ds = make_ds(X)
    metric = fs.build_metric(ds)
    for gamma in (0.0, 0.1, 0.3, 0.8):
        est = fs.empirical_metric_fairness(scores, ds, metric, gamma)
        assert est.alpha_hat == brute_force_alpha(scores, ds, metric, gamma), gamma
        assert est.pairs_evaluated == 6


def test_exhaustive_matches_enumeration_on_random_instances():
    rng = np.random.default_rng(4)
    for _ in range(10):
        m = int(rng.integers(3, 21))
        ds = make_ds(rng.random((m, 3)), sensitive_cols=(2,))
        metric = fs.build_metric(ds)
        scores = rng.random(m)
        gamma = float(rng.uniform(0, 0.5))
        est = fs.empirical_metric_fairness(scores, ds, metric, gamma)
        assert est.alpha_hat == brute_force_alpha(scores, ds, metric, gamma)


def test_alpha_monotone_in_gamma():
    rng = np.random.default_rng(5)
    for _ in range(20):
        m = int(rng.integers(4, 30))
        ds = make_ds(rng.random((m, 4)))
        metric = fs.build_metric(ds)
        scores = rng.random(m)
        alphas = [
            fs.empirical_metric_fairness(scores, ds, metric, g).alpha_hat
            for g in np.linspace(0, 1, 50)
        ]
        assert all(a >= b for a, b in zip(alphas, alphas[1:]))


def test_alpha_invariant_under_row_permutation():
    rng = np.random.default_rng(6)
    X = rng.random((12, 3))
    scores = rng.random(12)
    perm = rng.permutation(12)
    a = fs.empirical_metric_fairness(scores, make_ds(X), fs.build_metric(make_ds(X)), 0.1)
    ds_p = make_ds(X[perm])
    b = fs.empirical_metric_fairness(scores[perm], ds_p, fs.build_metric(ds_p), 0.1)
    assert a.alpha_hat == b.alpha_hat


def test_sensitive_only_twin_flagged_when_gap_exceeds_gamma():
    # two rows identical except in a sensitive coordinate: distance 0, so the
    # pair violates exactly when the score gap exceeds gamma
    X = np.array([[0.4, 1.0], [0.4, 0.0]])
    ds = make_ds(X, sensitive_cols=(1,))
    metric = fs.build_metric(ds)
    scores = np.array([0.9, 0.2])
    assert fs.empirical_metric_fairness(scores, ds, metric, 0.5).alpha_hat == 1.0
    assert fs.empirical_metric_fairness(scores, ds, metric, 0.71).alpha_hat == 0.0


def test_subsampled_mode_reports_pair_count():
    rng = np.random.default_rng(7)
    ds = make_ds(rng.random((50, 3)))
    metric = fs.build_metric(ds)
    scores = rng.random(50)
    est = fs.empirical_metric_fairness(
        scores, ds, metric, 0.1, exhaustive_cap=10, sample_pairs=500, seed=3
    )
    assert not est.exhaustive
    assert est.pairs_evaluated == 500
    exact = brute_force_alpha(scores, ds, metric, 0.1)
    assert est.alpha_hat == pytest.approx(exact, abs=0.1)


def test_subsample_deterministic_in_seed():
    rng = np.random.default_rng(8)
    ds = make_ds(rng.random((40, 3)))
    metric = fs.build_metric(ds)
    scores = rng.random(40)
    kw = dict(exhaustive_cap=10, sample_pairs=300)
    a = fs.empirical_metric_fairness(scores, ds, metric, 0.1, seed=5, **kw)
    b = fs.empirical_metric_fairness(scores, ds, metric, 0.1, seed=5, **kw)
    assert a.alpha_hat == b.alpha_hat


def test_negative_gamma_rejected():
    ds = make_ds(np.array([[0.0], [1.0]]))
    with pytest.raises(ValueError):
        fs.empirical_metric_fairness(np.array([0.1, 0.2]), ds, fs.build_metric(ds), -0.1)


# ---------------------------------------------------------------- min gamma

def test_min_gamma_alpha_one_is_zero():
    rng = np.random.default_rng(9)
    ds = make_ds(rng.random((8, 3)))
    metric = fs.build_metric(ds)
    assert fs.min_gamma_for_alpha(rng.random(8), ds, metric, 1.0) == 0.0


def test_min_gamma_alpha_zero_is_worst_excess():
    rng = np.random.default_rng(10)
    m = 9
    X = rng.random((m, 3))
    ds = make_ds(X)
    metric = fs.build_metric(ds)
    scores = rng.random(m)
    excesses = [
        abs(scores[i] - scores[j]) - metric.distance(X[i], X[j])
        for i, j in itertools.combinations(range(m), 2)
    ]
    expected = max(0.0, max(excesses))
    assert fs.min_gamma_for_alpha(scores, ds, metric, 0.0) == pytest.approx(expected)


def test_min_gamma_five_points_matches_sort_oracle():
    rng = np.random.default_rng(11)
    X = rng.random((5, 2))
    ds = make_ds(X)
    metric = fs.build_metric(ds)
    scores = rng.random(5)
    excesses = sorted(
        (
            abs(scores[i] - scores[j]) - metric.distance(X[i], X[j])
            for i, j in itertools.combinations(range(5), 2)
        ),
        reverse=True,
    )
    # 10 pairs, alpha 0.2 allows 2 violations: the third largest excess
    expected = max(0.0, excesses[2])
    assert fs.min_gamma_for_alpha(scores, ds, metric, 0.2) == pytest.approx(expected)


def test_min_gamma_consistency_with_alpha_hat():
    rng = np.random.default_rng(12)
    for _ in range(15):
        m = int(rng.integers(4, 16))
        ds = make_ds(rng.random((m, 3)))
        metric = fs.build_metric(ds)
        scores = rng.random(m)
        alpha0 = float(rng.uniform(0, 0.6))
        g = fs.min_gamma_for_alpha(scores, ds, metric, alpha0)
        assert fs.empirical_metric_fairness(scores, ds, metric, g).alpha_hat <= alpha0
        if g > 1e-9:
            smaller = max(0.0, g - 1e-9)
            est = fs.empirical_metric_fairness(scores, ds, metric, smaller)
            assert est.alpha_hat > alpha0
