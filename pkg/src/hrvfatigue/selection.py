"""Feature ranking from pairwise Gaussian overlap areas weighted by AHP.

Pipeline for a labelled dataset with ``n`` classes and ``m`` features:

1. per (feature, class) Gaussian summary, optionally gated by a chi-square
   normality test;
2. for each of the ``q = n(n-1)/2`` class pairs and each feature, the overlap
   area ``A`` of the two class densities (area under their pointwise minimum);
3. AHP weights of the class pairs from summed class sizes, and of the
   features within each pair from separabilities ``1 - A``;
4. final importance ``omega`` = pair-weighted mix of the per-pair feature
   weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy import stats

from .core import LabeledDataset
from .errors import (
    AllFullyOverlapping,
    DfOutOfRange,
    DimensionMismatch,
    EmptyClass,
    IdenticalDistributions,
    NonPositiveEntry,
    NonReciprocal,
    TooFewSamples,
    UnsupportedAlpha,
)

SUPPORTED_ALPHAS = (0.01, 0.05, 0.10)
EQUAL_SIGMA_RTOL = 1e-9

# rational approximation of erf, max abs error 3e-7 on z >= 0
ERF_COEFFS = (
    1.0,
    0.0705230784,
    0.0422820123,
    0.0092705272,
    0.0001520143,
    0.0002765672,
    0.0000430638,
)


# --------------------------------------------------------------------------
# Normality gate


@dataclass(frozen=True)
class NormalityReport:
    chi2_stat: float
    df: int
    alpha: float
    critical: float
    is_normal: bool

    @classmethod
    def decide(cls, chi2_stat: float, df: int, alpha: float = 0.05) -> "NormalityReport":
        critical = chi_square_critical(df, alpha)
        return cls(float(chi2_stat), int(df), alpha, critical, bool(chi2_stat < critical))


def chi_square_critical(df: int, alpha: float = 0.05) -> float:
    """Upper-tail chi-square critical value."""
    if not any(math.isclose(alpha, a) for a in SUPPORTED_ALPHAS):
        raise UnsupportedAlpha(f"alpha must be one of {SUPPORTED_ALPHAS}, got {alpha}")
    if not (1 <= df <= 100) or int(df) != df:
        raise DfOutOfRange(f"df must be an integer in [1, 100], got {df}")
    return float(stats.chi2.ppf(1.0 - alpha, int(df)))


def default_bin_count(n: int) -> int:
    return min(20, max(5, n // 10))


def normality_test(samples, alpha: float = 0.05, bins: int | None = None) -> NormalityReport:
    """Pearson chi-square goodness of fit against the fitted Normal.

    Uses ``bins`` equal-probability bins under N(mean, sd) (default
    ``max(5, n // 10)`` capped at 20) and ``df = bins - 3`` for the two fitted
    parameters. A zero-spread sample is never declared normal.
    """
    x = np.asarray(samples, dtype=float)
    x = x[np.isfinite(x)]
    n = x.size
    if n < 8:
        raise TooFewSamples(f"normality test needs at least 8 samples, got {n}")
    k = default_bin_count(n) if bins is None else int(bins)
    if k < 4:
        raise ValueError("need at least 4 bins (df = bins - 3 >= 1)")
    df = k - 3
    mu, sd = x.mean(), x.std()
    if not sd > 0:
        return NormalityReport(math.inf, df, alpha, chi_square_critical(df, alpha), False)
    edges = mu + sd * stats.norm.ppf(np.arange(1, k) / k)
    observed = np.bincount(np.searchsorted(edges, x, side="right"), minlength=k)
    expected = n / k
    chi2 = float(np.sum((observed - expected) ** 2) / expected)
    return NormalityReport.decide(chi2, df, alpha)


# --------------------------------------------------------------------------
# Gaussian overlap


@dataclass(frozen=True)
class GaussianSummary:
    mu: float
    sigma: float
    n: int = 2
    feature_id: str = ""
    class_id: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @classmethod
    def from_samples(cls, samples, feature_id: str = "", class_id: int = 0) -> "GaussianSummary":
        x = np.asarray(samples, dtype=float)
        x = x[np.isfinite(x)]
        if x.size < 2:
            raise TooFewSamples("a Gaussian summary needs at least 2 samples")
        return cls(float(x.mean()), float(x.std(ddof=1)), int(x.size), feature_id, class_id)


def erf_approx(z):
    """erf via ``1 - 1 / (sum_i a_i z^i)^16``, extended as an odd function."""
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    poly = np.polynomial.polynomial.polyval(a, ERF_COEFFS)
    out = np.sign(z) * (1.0 - poly ** -16.0)
    return float(out) if out.ndim == 0 else out


def _t(z):
    return np.polynomial.polynomial.polyval(z, ERF_COEFFS) ** -16.0


def normal_cdf(p, mu: float, sigma: float):
    """Normal CDF through ``erf_approx``."""
    return 0.5 * (1.0 + erf_approx((np.asarray(p, dtype=float) - mu) / (sigma * math.sqrt(2.0))))


def _is_equal_sigma(s1: float, s2: float) -> bool:
    return abs(s1 - s2) < EQUAL_SIGMA_RTOL * max(s1, s2)


def _ordered(g1: GaussianSummary, g2: GaussianSummary):
    """(narrow, wide); ties broken by mean so the result is order independent."""
    if (g1.sigma, g1.mu) <= (g2.sigma, g2.mu):
        return g1, g2
    return g2, g1


def gaussian_intersections(g1: GaussianSummary, g2: GaussianSummary) -> tuple[float, ...]:
    """Points where the two densities are equal, ascending.

    Two points when the sigmas differ, one midpoint when they are equal.
    Raises ``IdenticalDistributions`` when the densities coincide.
    """
    narrow, wide = _ordered(g1, g2)
    if _is_equal_sigma(narrow.sigma, wide.sigma):
        if narrow.mu == wide.mu:
            raise IdenticalDistributions("densities are identical")
        return (0.5 * (narrow.mu + wide.mu),)

    # standardise on the narrow density: N(0, 1) against N(d, s^2) with s > 1
    d = (wide.mu - narrow.mu) / narrow.sigma
    s = wide.sigma / narrow.sigma
    a = s * s - 1.0
    c = -(d * d + 2.0 * s * s * math.log(s))
    root = s * math.sqrt(d * d + 2.0 * a * math.log(s))
    q = -(d + math.copysign(root, d)) if d != 0 else -root
    u = sorted((q / a, c / q))
    return tuple(narrow.mu + narrow.sigma * ui for ui in u)


def overlap_area(g1: GaussianSummary, g2: GaussianSummary) -> float:
    """Overlapping coefficient: area under min(pdf1, pdf2), in [0, 1].

    Outside the two crossing points the narrower density is the minimum and
    between them the wider one, so the area is assembled from CDF values at
    the crossings.
    """
    narrow, wide = _ordered(g1, g2)
    try:
        points = gaussian_intersections(narrow, wide)
    except IdenticalDistributions:
        return 1.0
    if len(points) == 1:
        z = abs(narrow.mu - wide.mu) / (2.0 * narrow.sigma)
        return float(np.clip(2.0 * normal_cdf(-z, 0.0, 1.0), 0.0, 1.0))
    p1, p2 = points
    area = (
        normal_cdf(p1, narrow.mu, narrow.sigma)
        + normal_cdf(p2, wide.mu, wide.sigma)
        - normal_cdf(p1, wide.mu, wide.sigma)
        + 1.0
        - normal_cdf(p2, narrow.mu, narrow.sigma)
    )
    return float(np.clip(area, 0.0, 1.0))


def overlap_area_literal(g1: GaussianSummary, g2: GaussianSummary) -> float:
    """Debug form: the closed t(z) expression with the unsorted root labels.

    ``p1`` takes the minus sign and ``p2`` the plus sign over
    ``sigma1^2 - sigma2^2``; the approximation ``erf(z) = 1 - t(z)`` is applied
    to every argument, including negative ones, so this drifts from the true
    overlap whenever a crossing lies below a mean.
    """
    m1, s1, m2, s2 = g1.mu, g1.sigma, g2.mu, g2.sigma
    if _is_equal_sigma(s1, s2):
        raise ZeroDivisionError("literal form is singular for equal sigmas")
    ln = math.log(s1 / s2)
    disc = (
        2 * s1**4 * s2**2 * ln
        + s1**2 * m2**2 * s2**2
        + m1**2 * s1**2 * s2**2
        - 2 * s1**2 * s2**4 * ln
        - 2 * m1 * m2 * s1**2 * s2**2
    )
    num = m2 * s1**2 - m1 * s2**2
    den = s1**2 - s2**2
    p1 = (num - math.sqrt(disc)) / den
    p2 = (num + math.sqrt(disc)) / den
    r2 = math.sqrt(2.0)
    return float(
        1.0
        + 0.5
        * (
            _t((p1 - m1) / (s1 * r2))
            + _t((p2 - m2) / (s2 * r2))
            - _t((p1 - m2) / (s2 * r2))
            - _t((p2 - m1) / (s1 * r2))
        )
    )


# --------------------------------------------------------------------------
# AHP weighting


def ahp_weights(matrix) -> np.ndarray:
    """Row sums of the column-normalised comparison matrix (they sum to n)."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"comparison matrix must be square, got {M.shape}")
    if not np.all(M > 0):
        raise NonPositiveEntry("comparison entries must be > 0")
    if not np.allclose(M * M.T, 1.0, rtol=1e-9, atol=0.0):
        raise NonReciprocal("comparison matrix must satisfy a_ij = 1 / a_ji")
    return (M / M.sum(axis=0)).sum(axis=1)


def ratio_matrix(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v[:, None] / v[None, :]


def class_pairs(n_classes: int) -> list[tuple[int, int]]:
    """Canonical pair order (0,1), (0,2), ..., (n-2, n-1)."""
    return list(combinations(range(n_classes), 2))


def group_weight_matrix(class_sizes: Sequence[int]) -> np.ndarray:
    """AHP weights of the class pairs from summed class sizes."""
    g = np.asarray(class_sizes, dtype=float)
    if g.size < 2:
        raise EmptyClass("need at least two classes")
    if not np.all(g > 0):
        raise EmptyClass("every class must have at least one member")
    sums = np.array([g[i] + g[j] for i, j in class_pairs(g.size)])
    return ahp_weights(ratio_matrix(sums))


def feature_weight_matrix(areas: Sequence[float]) -> np.ndarray:
    """AHP weights of the features for one class pair from separabilities 1 - A.

    A fully overlapping feature (A = 1) has zero separability; it gets weight
    0, the limit of the ratio construction, and stays out of the matrix.
    """
    A = np.asarray(areas, dtype=float)
    if np.any((A < 0) | (A > 1)):
        raise ValueError("overlap areas must lie in [0, 1]")
    r = 1.0 - A
    live = r > 0
    if not np.any(live):
        raise AllFullyOverlapping("every feature overlaps completely for this pair")
    w = np.zeros(A.size)
    w[live] = ahp_weights(ratio_matrix(r[live]))
    return w


@dataclass(frozen=True, eq=False)
class FeatureWeights:
    feature_names: tuple[str, ...]
    omega: np.ndarray
    ranking: tuple[str, ...]
    selected: tuple[str, ...]

    def as_dict(self) -> dict[str, float]:
        return {n: float(w) for n, w in zip(self.feature_names, self.omega)}


def final_feature_values(
    pair_weights,
    per_pair_feature_weights,
    feature_names: Sequence[str] | None = None,
    top_k: int = 3,
) -> FeatureWeights:
    """omega_k = sum_u wG_u * w_{k,u}, each weight vector normalised to sum 1."""
    wG = np.asarray(pair_weights, dtype=float)
    W = np.atleast_2d(np.asarray(per_pair_feature_weights, dtype=float))
    if W.shape[0] != wG.size:
        raise DimensionMismatch(f"{wG.size} pair weights but {W.shape[0]} feature-weight rows")
    m = W.shape[1]
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{j}" for j in range(m))
    if len(names) != m:
        raise DimensionMismatch(f"{len(names)} names for {m} features")
    wG_hat = wG / wG.sum()
    W_hat = W / W.sum(axis=1, keepdims=True)
    omega = wG_hat @ W_hat
    order = sorted(range(m), key=lambda j: (-omega[j], j))
    ranking = tuple(names[j] for j in order)
    return FeatureWeights(names, omega, ranking, ranking[: max(0, top_k)])


# --------------------------------------------------------------------------
# End-to-end ranking


@dataclass(eq=False)
class SelectionResult:
    weights: FeatureWeights
    pairs: list[tuple[int, int]]
    classes: tuple[int, ...]
    areas: np.ndarray  # (q, m)
    normality: dict[tuple[str, int], NormalityReport] = field(default_factory=dict)
    excluded: dict[str, str] = field(default_factory=dict)

    def report(self) -> dict:
        """JSON-ready weights report."""
        rank = {n: i + 1 for i, n in enumerate(self.weights.ranking)}
        features = []
        for j, name in enumerate(self.weights.feature_names):
            features.append(
                {
                    "feature": name,
                    "omega": float(self.weights.omega[j]),
                    "rank": rank[name],
                    "selected": name in self.weights.selected,
                    "per_pair_areas": [float(a) if math.isfinite(a) else None for a in self.areas[:, j]],
                }
            )
        return {
            "classes": [int(c) for c in self.classes],
            "pairs": [[int(self.classes[i]), int(self.classes[j])] for i, j in self.pairs],
            "selected": list(self.weights.selected),
            "ranking": list(self.weights.ranking),
            "excluded": dict(sorted(self.excluded.items())),
            "features": features,
        }


def _degenerate_overlap(x1: np.ndarray, x2: np.ndarray) -> float | None:
    """Overlap when a class has zero spread, else ``None``."""
    s1, s2 = x1.std(), x2.std()
    if s1 > 0 and s2 > 0:
        return None
    if s1 == 0 and s2 == 0:
        return 1.0 if x1[0] == x2[0] else 0.0
    # a point mass against a density shares no area
    return 0.0


def pair_overlap(x1, x2) -> float:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    area = _degenerate_overlap(x1, x2)
    if area is not None:
        return area
    return overlap_area(GaussianSummary.from_samples(x1), GaussianSummary.from_samples(x2))


def rank_features(
    dataset: LabeledDataset,
    top_k: int = 3,
    alpha: float = 0.05,
    normality_gate: str = "report",
) -> SelectionResult:
    """Rank every feature of ``dataset`` by its AHP-weighted separability.

    ``normality_gate`` is ``"report"`` (test every (feature, class) and keep
    the results), ``"exclude"`` (drop a feature failing in any class) or
    ``"off"``. Features with fewer than two defined values in some class are
    excluded. Class pairs where every feature overlaps fully carry no
    information and are skipped.
    """
    if normality_gate not in ("report", "exclude", "off"):
        raise ValueError(f"unknown normality_gate {normality_gate!r}")
    classes = tuple(int(c) for c in dataset.classes)
    if len(classes) < 2:
        raise EmptyClass("need at least two classes present")
    per_class = [dataset.X[dataset.y == c] for c in classes]
    sizes = [len(rows) for rows in per_class]

    normality: dict[tuple[str, int], NormalityReport] = {}
    excluded: dict[str, str] = {}
    kept: list[int] = []
    for j, name in enumerate(dataset.feature_names):
        cols = [rows[:, j][np.isfinite(rows[:, j])] for rows in per_class]
        if min(c.size for c in cols) < 2:
            excluded[name] = "fewer than 2 defined values in a class"
            continue
        failed = False
        if normality_gate != "off":
            for c, col in zip(classes, cols):
                try:
                    rep = normality_test(col, alpha)
                except TooFewSamples:
                    continue
                normality[(name, c)] = rep
                failed |= not rep.is_normal
        if failed and normality_gate == "exclude":
            excluded[name] = "failed normality test"
            continue
        kept.append(j)

    names = tuple(dataset.feature_names[j] for j in kept)
    pairs = class_pairs(len(classes))
    areas = np.ones((len(pairs), len(names)))
    for k, (a, b) in enumerate(pairs):
        for jj, j in enumerate(kept):
            x1 = per_class[a][:, j]
            x2 = per_class[b][:, j]
            areas[k, jj] = pair_overlap(x1[np.isfinite(x1)], x2[np.isfinite(x2)])

    wG = group_weight_matrix(sizes)
    rows, live = [], []
    for k in range(len(pairs)):
        try:
            rows.append(feature_weight_matrix(areas[k]))
            live.append(k)
        except AllFullyOverlapping:
            continue
    if not live:
        raise AllFullyOverlapping("no feature separates any class pair")
    weights = final_feature_values(wG[live], np.array(rows), names, top_k)

    full_areas = np.full((len(pairs), len(dataset.feature_names)), np.nan)
    full_areas[:, kept] = areas
    omega = np.zeros(len(dataset.feature_names))
    omega[kept] = weights.omega
    all_names = tuple(dataset.feature_names)
    ranking = weights.ranking + tuple(n for n in all_names if n not in names)
    merged = FeatureWeights(all_names, omega, ranking, weights.selected)
    return SelectionResult(merged, pairs, classes, full_areas, normality, excluded)
