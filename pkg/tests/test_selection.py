import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hrvfatigue.core import LabeledDataset
from hrvfatigue.errors import (
    AllFullyOverlapping,
    DfOutOfRange,
    DimensionMismatch,
    IdenticalDistributions,
    NonPositiveEntry,
    NonReciprocal,
    TooFewSamples,
    UnsupportedAlpha,
)
from hrvfatigue.selection import (
    GaussianSummary,
    NormalityReport,
    ahp_weights,
    chi_square_critical,
    class_pairs,
    erf_approx,
    feature_weight_matrix,
    final_feature_values,
    gaussian_intersections,
    group_weight_matrix,
    normality_test,
    overlap_area,
    overlap_area_literal,
    pair_overlap,
    rank_features,
    ratio_matrix,
)
from oracles import erf_maclaurin, min_density_overlap, normal_pdf

G = GaussianSummary


# chi-square gate

@pytest.mark.parametrize("df, crit", [(10, 18.307), (3, 7.815), (15, 24.996), (11, 19.675)])
def test_critical_values_standard(df, crit):
    assert chi_square_critical(df, 0.05) == pytest.approx(crit, abs=0.01)


def test_critical_value_errors():
    with pytest.raises(UnsupportedAlpha):
        chi_square_critical(10, 0.2)
    with pytest.raises(DfOutOfRange):
        chi_square_critical(0)
    with pytest.raises(DfOutOfRange):
        chi_square_critical(101)


def test_decision_rule_table_row():
    assert NormalityReport.decide(0.982, 10).is_normal
    assert not NormalityReport.decide(18.307 + 0.01, 10).is_normal


def test_normal_samples_mostly_pass():
    passed = sum(
        normality_test(np.random.default_rng(s).normal(3.0, 2.0, 500)).is_normal for s in range(100)
    )
    assert passed >= 90  # nominal 95 at alpha 0.05


def test_two_point_distribution_fails():
    x = np.tile([0.0, 1.0], 100)
    assert not normality_test(x).is_normal


def test_normality_too_few():
    with pytest.raises(TooFewSamples):
        normality_test(np.arange(7.0))


def test_normality_statistic_matches_scipy_chisquare():
    x = np.random.default_rng(4).normal(size=200)
    rep = normality_test(x, bins=10)
    edges = stats.norm.ppf(np.arange(1, 10) / 10, x.mean(), x.std())
    obs = np.bincount(np.searchsorted(edges, x, side="right"), minlength=10)
    assert rep.df == 7
    assert rep.chi2_stat == pytest.approx(stats.chisquare(obs).statistic, rel=1e-12)


# erf and intersections

def test_erf_fixed_points():
    assert erf_approx(0.0) == 0.0
    assert erf_approx(1.0) == pytest.approx(0.8427008, abs=3.5e-7)
    assert erf_approx(1.0) == pytest.approx(erf_maclaurin(1.0), abs=3.5e-7)
    assert erf_approx(-1.0) == -erf_approx(1.0)


def test_erf_grid_against_math_erf():
    z = np.arange(0, 6.0005, 1e-3)
    err = np.abs(erf_approx(z) - np.array([math.erf(v) for v in z]))
    assert err.max() <= 3.5e-7


def test_intersections_different_sigma():
    p = gaussian_intersections(G(0, 1), G(0, 2))
    root = math.sqrt(8 * math.log(2) / 3)
    assert p == pytest.approx((-root, root), abs=1e-12)
    for x in p:
        assert normal_pdf(x, 0, 1) == pytest.approx(normal_pdf(x, 0, 2), rel=1e-10)


def test_intersection_equal_sigma_midpoint():
    assert gaussian_intersections(G(0, 1), G(4, 1)) == (2.0,)


def test_intersections_identical():
    with pytest.raises(IdenticalDistributions):
        gaussian_intersections(G(1, 2), G(1, 2))


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(0.05, 20), st.floats(-50, 50), st.floats(0.05, 20))
def test_intersections_are_density_crossings(m1, s1, m2, s2):
    if abs(s1 - s2) < 1e-6 * max(s1, s2):
        return
    for x in gaussian_intersections(G(m1, s1), G(m2, s2)):
        a, b = normal_pdf(x, m1, s1), normal_pdf(x, m2, s2)
        assert a == pytest.approx(b, rel=1e-6, abs=1e-300)


# overlap area

def test_overlap_identical_is_one():
    assert overlap_area(G(3, 2), G(3, 2)) == 1.0


def test_overlap_equal_sigma_closed_form():
    assert overlap_area(G(0, 1), G(2, 1)) == pytest.approx(0.31731, abs=1e-4)


def test_overlap_nested_numeric():
    assert overlap_area(G(0, 1), G(0, 2)) == pytest.approx(0.6775, abs=1e-3)
    assert overlap_area(G(0, 1), G(0, 2)) == pytest.approx(min_density_overlap(0, 1, 0, 2), abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.floats(-10, 10), st.floats(0.1, 5), st.floats(-10, 10), st.floats(0.1, 5))
def test_overlap_against_numeric_integral(m1, s1, m2, s2):
    got = overlap_area(G(m1, s1), G(m2, s2))
    assert 0.0 <= got <= 1.0
    assert got == pytest.approx(min_density_overlap(m1, s1, m2, s2, 100_001), abs=1e-3)
    assert overlap_area(G(m2, s2), G(m1, s1)) == got


def test_overlap_translation_and_scale_invariant():
    a = overlap_area(G(0.3, 1.2), G(2.0, 0.7))
    b = overlap_area(G(10 * 0.3 + 5, 12.0), G(10 * 2.0 + 5, 7.0))
    assert b == pytest.approx(a, abs=1e-9)


def _closed_form_roots(m1, s1, m2, s2):
    ln = math.log(s1 / s2)
    disc = (2 * s1**4 * s2**2 * ln + s1**2 * m2**2 * s2**2 + m1**2 * s1**2 * s2**2
            - 2 * s1**2 * s2**4 * ln - 2 * m1 * m2 * s1**2 * s2**2)
    num, den = m2 * s1**2 - m1 * s2**2, s1**2 - s2**2
    return sorted(((num - math.sqrt(disc)) / den, (num + math.sqrt(disc)) / den))


@pytest.mark.parametrize("a, b", [((0, 1), (0, 2)), ((0, 1), (3, 2)), ((7, 3), (-2, 0.5)), ((1e3, 40), (1.1e3, 25))])
def test_stable_roots_match_closed_form(a, b):
    got = gaussian_intersections(G(*a), G(*b))
    assert got == pytest.approx(_closed_form_roots(*a, *b), rel=1e-9)


def test_literal_t_form_diverges_on_negative_arguments():
    # the left crossing lies below the N(0,1) mean, where erf(z) = 1 - t(z) does not hold
    g1, g2 = G(0, 1), G(3, 2)
    assert overlap_area(g1, g2) == pytest.approx(min_density_overlap(0, 1, 3, 2), abs=1e-6)
    assert overlap_area_literal(g1, g2) < overlap_area(g1, g2) - 0.1


# AHP

def test_ahp_all_ones():
    np.testing.assert_allclose(ahp_weights(np.ones((3, 3))), [1, 1, 1])


def test_ahp_worked_2x2():
    w = ahp_weights([[1, 2], [0.5, 1]])
    assert w[0] == 4 / 3 and w[1] == 2 / 3


def test_ahp_consistent_ratios():
    w = ahp_weights(ratio_matrix([3, 2, 1]))
    np.testing.assert_allclose(w / w.sum(), [0.5, 1 / 3, 1 / 6], rtol=1e-12)
    assert w.sum() == pytest.approx(3.0, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=12))
def test_ahp_recovers_generating_ratios(v):
    v = np.asarray(v)
    w = ahp_weights(ratio_matrix(v))
    np.testing.assert_allclose(w / w.sum(), v / v.sum(), rtol=1e-12)


def test_ahp_errors():
    with pytest.raises(DimensionMismatch):
        ahp_weights(np.ones((2, 3)))
    with pytest.raises(NonPositiveEntry):
        ahp_weights([[1, 0], [0, 1]])
    with pytest.raises(NonReciprocal):
        ahp_weights([[1, 2], [2, 1]])


def test_group_weights_pair_sums():
    pairs = class_pairs(5)
    g = [42, 40, 12, 42, 12]
    sums = [g[i] + g[j] for i, j in pairs]
    assert sums[:4] == [82, 54, 84, 54]
    w = group_weight_matrix(g)
    assert w.size == 10
    np.testing.assert_allclose(w / w.sum(), np.array(sums) / sum(sums), rtol=1e-12)


def test_group_weights_uniform_and_single_pair():
    np.testing.assert_allclose(group_weight_matrix([5, 5, 5, 5]), np.ones(6))
    np.testing.assert_allclose(group_weight_matrix([3, 9]), [1.0])


def test_feature_weights_from_areas():
    w = feature_weight_matrix([0.0, 0.5])
    assert w[0] / w[1] == pytest.approx(2.0)
    np.testing.assert_allclose(feature_weight_matrix([0.3, 0.3, 0.3]), np.ones(3))
    with pytest.raises(AllFullyOverlapping):
        feature_weight_matrix([1.0, 1.0])
    assert feature_weight_matrix([1.0, 0.2])[0] == 0.0


def test_final_values_single_pair():
    fw = final_feature_values([7.0], [[2.0, 1.0, 1.0]])
    np.testing.assert_allclose(fw.omega, [0.5, 0.25, 0.25])


def test_final_values_identical_rows_ignore_pair_weights():
    row = [3.0, 1.0, 2.0]
    fw = final_feature_values([0.1, 5.0], [row, row], ["a", "b", "c"], top_k=2)
    np.testing.assert_allclose(fw.omega, np.array(row) / 6.0)
    assert fw.ranking == ("a", "c", "b") and fw.selected == ("a", "c")


def test_final_values_tie_broken_by_index():
    fw = final_feature_values([1.0], [[1.0, 1.0]], ["x", "y"])
    assert fw.ranking == ("x", "y")


def test_pair_overlap_degenerate():
    assert pair_overlap([1.0, 1.0], [1.0, 1.0]) == 1.0
    assert pair_overlap([1.0, 1.0], [2.0, 2.0]) == 0.0
    assert pair_overlap([1.0, 1.0], [0.0, 3.0]) == 0.0


# end to end

def _constructed(seed=0):
    rng = np.random.default_rng(seed)
    y = np.repeat(np.arange(3), 40)
    X = rng.standard_normal((y.size, 4))
    X[:, 2] += 10.0 * y  # f2 separates every pair
    return LabeledDataset(X, y, ("f0", "f1", "f2", "f3"))


def test_rank_features_separable_first():
    res = rank_features(_constructed(), top_k=1)
    assert res.weights.ranking[0] == "f2"
    assert res.weights.selected == ("f2",)
    assert np.all(res.areas[:, 2] < 1e-3)
    rep = res.report()
    assert rep["selected"] == ["f2"] and len(rep["features"]) == 4
    assert rep["pairs"] == [[0, 1], [0, 2], [1, 2]]


def test_rank_features_all_identical():
    X = np.ones((30, 3))
    with pytest.raises(AllFullyOverlapping):
        rank_features(LabeledDataset(X, np.repeat([0, 1, 2], 10), ("a", "b", "c")))


def test_rank_features_exclude_gate():
    ds = _constructed()
    X = ds.X.copy()
    X[:, 0] = np.tile([0.0, 1.0], 60)  # two-point feature fails the test in every class
    res = rank_features(LabeledDataset(X, ds.y, ds.feature_names), normality_gate="exclude")
    assert "f0" in res.excluded
    assert res.weights.omega[0] == 0.0
    res_report = rank_features(LabeledDataset(X, ds.y, ds.feature_names))
    assert "f0" not in res_report.excluded
    assert not res_report.normality[("f0", 0)].is_normal


def test_omega_nonnegative_and_permutation():
    res = rank_features(_constructed(3), top_k=2)
    assert np.all(res.weights.omega >= 0)
    assert sorted(res.weights.ranking) == ["f0", "f1", "f2", "f3"]
    assert res.weights.omega.sum() == pytest.approx(1.0)
