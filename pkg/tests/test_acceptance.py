"""The twelve acceptance criteria at their stated tolerances.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import math
import time

import numpy as np
import pytest

from hrvfatigue.classifiers import NeuralNetwork
from hrvfatigue.cli import main
from hrvfatigue.errors import NoTemplateMatches
from hrvfatigue.core import DEFAULT_CLASS_SPECS, RRSeries, synthesize_feature_dataset, synthesize_window
from hrvfatigue.experiment import run_experiment
from hrvfatigue.frequency import band_powers
from hrvfatigue.nonlinear import apen, dfa, sampen
from hrvfatigue.selection import (
    GaussianSummary,
    NormalityReport,
    ahp_weights,
    chi_square_critical,
    erf_approx,
    overlap_area,
    rank_features,
    ratio_matrix,
)
from hrvfatigue.time_domain import time_domain
from hrvfatigue.trend import REFERENCE_QUARTIC, TrendModel, eval_trend, fit_trend
from oracles import apen_oracle, min_density_overlap, sampen_counts_oracle, time_domain_oracle


def test_c01_time_domain_oracle(criterion):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(50, 1001))
        rr = rng.uniform(300.0, 1500.0, n)
        got = time_domain(rr).as_dict()
        for k, v in time_domain_oracle(rr).items():
            worst = max(worst, abs(got[k] - v) / max(abs(v), 1e-300) if v else abs(got[k]))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5.0
    criterion(1, ok, f"max rel err {worst:.2e} (<=1e-12), {elapsed:.2f}s (<5s)")
    assert ok


def test_c02_erf_fixture(criterion):
    start = time.perf_counter()
    z = np.arange(0, 6001) * 1e-3
    err = np.abs(erf_approx(z) - np.array([math.erf(v) for v in z])).max()
    elapsed = time.perf_counter() - start
    ok = err <= 3.5e-7 and elapsed < 1.0
    criterion(2, ok, f"max |erf_approx - erf| {err:.3e} (<=3.5e-7), {elapsed:.3f}s (<1s)")
    assert ok


def test_c03_overlap_oracle(criterion):
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        m1, m2 = rng.uniform(-10, 10, 2)
        s1, s2 = rng.uniform(0.2, 5, 2)
        got = overlap_area(GaussianSummary(m1, s1), GaussianSummary(m2, s2))
        worst = max(worst, abs(got - min_density_overlap(m1, s1, m2, s2)))
    eq = overlap_area(GaussianSummary(0, 1), GaussianSummary(2, 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-3 and abs(eq - 0.31731) <= 1e-4 and elapsed < 10.0
    criterion(3, ok, f"max |err| {worst:.2e} (<=1e-3), equal-sigma {eq:.6f} vs 0.31731, {elapsed:.2f}s (<10s)")
    assert ok


CHI2_ROWS = [(0.982, 10, 18.307), (0.72, 15, 24.996), (16.64, 11, 19.675), (0.59, 10, 18.307), (1.81, 3, 7.815)]


def test_c04_chi_square_fixtures(criterion):
    crit_err = max(abs(chi_square_critical(df, 0.05) - c) for _, df, c in CHI2_ROWS)
    decisions = [NormalityReport.decide(stat, df, 0.05).is_normal for stat, df, _ in CHI2_ROWS]
    expected = [stat < c for stat, _, c in CHI2_ROWS]
    boundary = NormalityReport.decide(chi_square_critical(10), 10).is_normal
    ok = crit_err <= 0.01 and decisions == expected and all(decisions) and not boundary
    criterion(4, ok, f"max critical err {crit_err:.4f} (<=0.01), fixture rows normal: {decisions}")
    assert ok


def test_c05_ahp_consistency(criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        v = rng.uniform(0.1, 10, int(rng.integers(1, 13)))
        w = ahp_weights(ratio_matrix(v))
        worst = max(worst, np.max(np.abs(w / w.sum() - v / v.sum()) / (v / v.sum())))
    w2 = ahp_weights([[1, 2], [0.5, 1]])
    exact = w2[0] == 4 / 3 and w2[1] == 2 / 3
    ok = worst <= 1e-12 and exact
    criterion(5, ok, f"max rel err {worst:.2e} (<=1e-12), 2x2 example {w2.tolist()}")
    assert ok


def _c6_dataset(seed):
    return synthesize_feature_dataset(seed=seed)


def test_c06_feature_selection(criterion):
    start = time.perf_counter()
    hits, inf_areas, noise_areas = 0, [], []
    for seed in range(20):
        ds, informative = _c6_dataset(seed)
        res = rank_features(ds, top_k=3)
        hits += set(informative) <= set(res.weights.selected)
        idx = [ds.feature_names.index(n) for n in informative]
        rest = [j for j in range(len(ds.feature_names)) if j not in idx]
        inf_areas.append(np.nanmax(res.areas[:, idx]))
        noise_areas.append(np.nanmean(res.areas[:, rest]))
    elapsed = time.perf_counter() - start
    # generator: informative class means 4 sd apart (population overlap <= 2*Phi(-2)), noise identical
    design_ok = 2 * 0.5 * math.erfc(2 / math.sqrt(2)) < 0.2
    ok = hits >= 18 and elapsed < 30.0 and design_ok
    criterion(
        6,
        ok,
        f"{hits}/20 seeds top-3 = informative (>=18), sample overlap informative max "
        f"{np.mean(inf_areas):.3f}, noise mean {np.mean(noise_areas):.3f}, {elapsed:.1f}s (<30s)",
    )
    assert ok


@pytest.mark.slow
def test_c07_experiment_direction(criterion):
    start = time.perf_counter()
    wins, c4_means = 0, []
    for seed in range(20):
        ds, _ = _c6_dataset(seed)
        c3 = run_experiment(ds, 3, seed=seed).mean_accuracy
        c4 = run_experiment(ds, 4, seed=seed).mean_accuracy
        wins += c4 >= c3
        c4_means.append(c4)
    elapsed = time.perf_counter() - start
    ok = wins >= 14 and np.mean(c4_means) >= 90.0 and elapsed < 300.0
    criterion(7, ok, f"case4 >= case3 in {wins}/20 (>=14), case-4 mean {np.mean(c4_means):.2f}% (>=90), {elapsed:.0f}s (<300s)")
    assert ok


@pytest.mark.slow
def test_c08_nonlinear_oracles(criterion):
    rng = np.random.default_rng(8)
    start = time.perf_counter()
    worst, undefined_agree, undefined = 0.0, True, 0
    for _ in range(100):
        n = int(rng.integers(50, 2001))
        x = rng.normal(800, 40, n)
        r = 0.2 * x.std()
        worst = max(worst, abs(apen(x) - apen_oracle(x, 2, r)))
        a, b = sampen_counts_oracle(x, 2, r)
        if a and b:
            worst = max(worst, abs(sampen(x) + math.log(a / b)))
        else:
            # undefined in the reference too: the implementation must refuse
            undefined += 1
            with pytest.raises(NoTemplateMatches):
                sampen(x)
    white = np.mean([dfa(np.random.default_rng(s).standard_normal(10_000))[0] for s in range(50)])
    brown = np.mean([dfa(np.cumsum(np.random.default_rng(1000 + s).standard_normal(10_000)))[0] for s in range(50)])
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and 0.45 <= white <= 0.55 and 1.4 <= brown <= 1.6 and elapsed < 120.0
    criterion(8, ok, f"entropy max |err| {worst:.1e} (<=1e-12, {undefined} sampen undefined in both), alpha1 white {white:.3f} [0.45,0.55], "
                     f"brownian {brown:.3f} [1.4,1.6], {elapsed:.0f}s (<120s)")
    assert ok


def _tone(freq_hz, amp_ms, mean_ms=1000.0, seconds=300.0):
    rr, t = [], 0.0
    while t < seconds * 1000.0:
        v = mean_ms + amp_ms * math.sin(2 * math.pi * freq_hz * t / 1000.0)
        rr.append(v)
        t += v
    return RRSeries(rr)


def test_c09_frequency_identities(criterion):
    rng = np.random.default_rng(9)
    specs = list(DEFAULT_CLASS_SPECS.values())
    worst, valid = 0.0, 0
    for _ in range(500):
        rr = synthesize_window(specs[int(rng.integers(len(specs)))], rng)
        bp = band_powers(RRSeries(rr))
        if math.isfinite(bp.nlf) and math.isfinite(bp.nhf):
            valid += 1
            worst = max(worst, abs(bp.nlf + bp.nhf - 100.0))
    lf = band_powers(_tone(0.1, 50.0))
    hf = band_powers(_tone(0.25, 50.0))
    ok = valid > 0 and worst <= 1e-9 and lf.lf >= 0.95 * lf.tp and hf.hf >= 0.95 * hf.tp
    criterion(9, ok, f"{valid}/500 valid windows, max |nlf+nhf-100| {worst:.1e}; "
                     f"lf/tp {lf.lf / lf.tp:.4f}, hf/tp {hf.hf / hf.tp:.4f} (>=0.95)")
    assert ok


def test_c10_trend_fixture(criterion):
    ref = TrendModel.from_coefficients(REFERENCE_QUARTIC)
    at0 = eval_trend(ref, 0.0)
    t = np.linspace(0.0, 9000.0, 181)
    fit = fit_trend(np.column_stack([t, eval_trend(ref, t)]), degree=4)
    rel = np.max(np.abs(np.array(fit.coefficients) - REFERENCE_QUARTIC) / np.abs(REFERENCE_QUARTIC))
    ok = at0 == 79.54454 and rel <= 1e-6
    criterion(10, ok, f"eval(0) = {at0!r}, max coefficient rel err {rel:.1e} (<=1e-6)")
    assert ok


def test_c11_nn_gradient(criterion):
    rng = np.random.default_rng(11)
    eps, worst = 1e-5, 0.0
    for point in range(20):
        n_in, n_out, h = int(rng.integers(2, 6)), int(rng.integers(2, 6)), int(rng.integers(2, 10))
        X = rng.normal(size=(15, n_in))
        Y = np.eye(n_out)[rng.integers(0, n_out, 15)]
        params = NeuralNetwork(hidden_units=h, seed=point).init_params(n_in, n_out)
        for arr in params.values():
            arr += rng.normal(0, 0.5, arr.shape)  # nonzero biases too
        _, grads = NeuralNetwork.loss_and_grad(params, X, Y)
        for key, arr in params.items():
            for idx in np.ndindex(arr.shape):
                old = arr[idx]
                arr[idx] = old + eps
                lp = NeuralNetwork.loss_and_grad(params, X, Y)[0]
                arr[idx] = old - eps
                lm = NeuralNetwork.loss_and_grad(params, X, Y)[0]
                arr[idx] = old
                num = (lp - lm) / (2 * eps)
                ana = grads[key][idx]
                worst = max(worst, abs(ana - num) / max(abs(ana), abs(num), 1e-6))
    ok = worst <= 1e-4
    criterion(11, ok, f"max rel err {worst:.1e} over 20 parameter points (<=1e-4)")
    assert ok


def _pipeline(workdir):
    workdir.mkdir()
    rr, feats, weights, report = (workdir / n for n in ("rr.csv", "features.csv", "weights.json", "report.json"))
    codes = [
        main(["synth", "-o", str(rr), "--seed", "12"]),
        main(["extract", str(rr), "-o", str(feats)]),
        main(["select", str(feats), "-o", str(weights), "--seed", "12"]),
        main(["eval", str(feats), "--case", "3", "--case", "4", "--seed", "12", "-o", str(report),
              "--table", str(workdir / "table.csv")]),
    ]
    return codes, [p.read_bytes() for p in (feats, weights, report, workdir / "table.csv")]


@pytest.mark.slow
def test_c12_determinism(criterion, tmp_path):
    codes_a, a = _pipeline(tmp_path / "run_a")
    codes_b, b = _pipeline(tmp_path / "run_b")
    same = [x == y for x, y in zip(a, b)]
    ok = codes_a == codes_b == [0, 0, 0, 0] and all(same)
    criterion(12, ok, f"exit codes {codes_a}; identical features/weights/report/table: {same}")
    assert ok
