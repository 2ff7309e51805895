import numpy as np
import pytest

from hrvfatigue.core import Zone
from hrvfatigue.errors import RankDeficient
from hrvfatigue.trend import REFERENCE_QUARTIC, TrendModel, eval_trend, fit_trend, trend_zone


def test_reference_constant_term():
    assert eval_trend(TrendModel.from_coefficients(REFERENCE_QUARTIC), 0.0) == 79.54454


def test_zero_polynomial():
    m = TrendModel.from_coefficients([0.0])
    assert eval_trend(m, 1234.5) == 0.0


def test_parabola_recovered():
    t = np.linspace(-3, 7, 9)
    c = np.array([2.0, -1.5, 0.25])
    m = fit_trend(np.column_stack([t, np.polyval(c[::-1], t)]), degree=2)
    np.testing.assert_allclose(m.coefficients, c, rtol=1e-9)
    assert m.residual_rms < 1e-10


def test_reference_quartic_round_trip():
    ref = TrendModel.from_coefficients(REFERENCE_QUARTIC)
    t = np.linspace(0, 9000, 200)
    m = fit_trend(np.column_stack([t, eval_trend(ref, t)]), degree=4)
    np.testing.assert_allclose(m.coefficients, REFERENCE_QUARTIC, rtol=1e-6)
    held_out = 4321.0
    assert eval_trend(m, held_out) == pytest.approx(eval_trend(ref, held_out), rel=1e-9)


def test_horner_matches_polyval():
    ref = TrendModel.from_coefficients(REFERENCE_QUARTIC)
    t = np.array([0.0, 100.0, 5000.0, 9000.0])
    np.testing.assert_allclose(eval_trend(ref, t), np.polyval(REFERENCE_QUARTIC[::-1], t), rtol=1e-12)


def test_rank_deficient():
    pts = [(0, 80), (10, 90), (20, 95)]
    with pytest.raises(RankDeficient):
        fit_trend(pts, degree=4)
    with pytest.raises(RankDeficient):
        fit_trend([(0, 80), (0, 81), (0, 82), (5, 90), (5, 91), (5, 92)], degree=2)


def test_extrapolation_flag_and_zone():
    t = np.linspace(100, 900, 20)
    m = fit_trend(np.column_stack([t, 100 + 0.05 * t]), degree=1)
    assert m.extrapolates(50.0) and not m.extrapolates(500.0)
    assert trend_zone(m, 500.0) is Zone.Moderate  # 125 BPM at age 20
    d = m.to_dict()
    assert d["degree"] == 1 and d["t_range"] == [100.0, 900.0]


def test_noisy_fit_residual():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 3600, 400)
    hr = 80 + 0.01 * t + rng.normal(0, 2, t.size)
    m = fit_trend(np.column_stack([t, hr]), degree=1)
    assert m.coefficients[1] == pytest.approx(0.01, rel=0.05)
    assert m.residual_rms == pytest.approx(2.0, rel=0.15)
