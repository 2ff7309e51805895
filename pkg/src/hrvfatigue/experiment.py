"""Cross-validated comparison of the classifier suite on HRV feature subsets."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .classifiers import DecisionTree, GaussianNB, KNNClassifier, LinearSVM, NeuralNetwork
from .core import (
    FEATURE_NAMES,
    FREQ_FEATURES,
    NONLINEAR_FEATURES,
    TIME_FEATURES,
    LabeledDataset,
)
from .errors import InsufficientClassMembers
from .selection import rank_features

CLASSIFIER_COLUMNS = ("knn1", "knn5", "svm", "nn", "nb", "dt")

# case 0 mirrors the time-domain-only literature baseline; case 4 is filled per fold
CASES = {
    0: TIME_FEATURES,
    1: TIME_FEATURES + NONLINEAR_FEATURES,
    2: FREQ_FEATURES + NONLINEAR_FEATURES,
    3: FEATURE_NAMES,
    4: None,
}


@dataclass(frozen=True)
class ClassifierConfig:
    nn_hidden: int = 16
    nn_epochs: int = 2000
    nn_lr: float = 0.05
    svm_lambda: float = 1e-3
    svm_epochs: int = 200
    svm_lr: float = 0.1
    dt_max_depth: int = 8
    dt_min_leaf: int = 2


def build_classifiers(config: ClassifierConfig, seed: int, n_train: int) -> dict:
    return {
        "knn1": KNNClassifier(min(1, n_train)),
        "knn5": KNNClassifier(min(5, n_train)),
        "svm": LinearSVM(config.svm_epochs, config.svm_lr, config.svm_lambda, seed),
        "nn": NeuralNetwork(config.nn_hidden, config.nn_epochs, config.nn_lr, seed),
        "nb": GaussianNB(),
        "dt": DecisionTree(config.dt_max_depth, config.dt_min_leaf),
    }


def stratified_folds(y, n_folds: int, seed: int = 0) -> list[np.ndarray]:
    """Disjoint test-index folds covering every row.

    Each class is shuffled and dealt round-robin, continuing where the
    previous class stopped, so per-class fold sizes differ by at most one.
    ``n_folds == len(y)`` gives leave-one-out.
    """
    y = np.asarray(y)
    n = y.size
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    if n_folds > n:
        raise InsufficientClassMembers(f"{n_folds} folds for {n} rows")
    rng = np.random.default_rng(seed)
    if n_folds == n:
        return [np.array([i]) for i in rng.permutation(n)]
    classes, counts = np.unique(y, return_counts=True)
    if np.any(counts < n_folds):
        small = classes[counts < n_folds].tolist()
        raise InsufficientClassMembers(f"classes {small} have fewer rows than {n_folds} folds")
    assignment = np.empty(n, dtype=int)
    offset = 0
    for c in classes:
        idx = rng.permutation(np.flatnonzero(y == c))
        assignment[idx] = (offset + np.arange(idx.size)) % n_folds
        offset += idx.size
    return [np.flatnonzero(assignment == f) for f in range(n_folds)]


@dataclass
class EvalReport:
    case: int
    classes: list[int]
    accuracy: dict[str, float]
    confusion: dict[str, list[list[int]]]
    mean_accuracy: float
    n_rows: int
    cv_folds: int
    seed: int
    features: list[list[str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def table_row(self) -> dict:
        row = {"case": self.case}
        row.update({c: self.accuracy[c] for c in CLASSIFIER_COLUMNS})
        row["mean"] = self.mean_accuracy
        return row


def table_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("case",) + CLASSIFIER_COLUMNS + ("mean",))
    for rep in reports:
        row = rep.table_row()
        writer.writerow([row["case"]] + [f"{row[c]:.4f}" for c in CLASSIFIER_COLUMNS + ("mean",)])
    return buf.getvalue()


def run_experiment(
    dataset: LabeledDataset,
    case: int,
    cv_folds: int = 5,
    seed: int = 0,
    config: ClassifierConfig = ClassifierConfig(),
    top_k: int = 3,
    selected: Sequence[str] | None = None,
    normality_gate: str = "report",
) -> EvalReport:
    """Stratified k-fold accuracy of every classifier on one feature case.

    Case 4 ranks features on each training fold and keeps the top ``top_k``
    unless ``selected`` fixes the subset.
    """
    if case not in CASES:
        raise ValueError(f"unknown experiment case {case!r}; expected one of {sorted(CASES)}")
    if case == 4:
        names = tuple(selected) if selected is not None else tuple(dataset.feature_names)
    else:
        names = CASES[case]
    data = dataset.restrict(names)
    classes = [int(c) for c in data.classes]
    cls_index = {c: i for i, c in enumerate(classes)}

    root = np.random.SeedSequence(seed)
    fold_seed, *model_seeds = root.generate_state(cv_folds + 1)
    folds = stratified_folds(data.y, cv_folds, int(fold_seed))

    confusion = {c: np.zeros((len(classes), len(classes)), dtype=int) for c in CLASSIFIER_COLUMNS}
    used = []
    for f, test_idx in enumerate(folds):
        train_mask = np.ones(len(data), dtype=bool)
        train_mask[test_idx] = False
        train = data.subset(train_mask)
        cols = list(range(len(names)))
        if case == 4 and selected is None:
            result = rank_features(train, top_k=top_k, normality_gate=normality_gate)
            chosen = result.weights.selected
            cols = [names.index(n) for n in chosen]
            used.append(list(chosen))
        elif not used:
            used.append(list(names))
        Xtr, ytr = train.X[:, cols], train.y
        Xte, yte = data.X[test_idx][:, cols], data.y[test_idx]
        model_seed = int(model_seeds[f % len(model_seeds)])
        for name, model in build_classifiers(config, model_seed, ytr.size).items():
            pred = model.fit(Xtr, ytr).predict(Xte)
            for t, p in zip(yte, pred):
                confusion[name][cls_index[int(t)], cls_index[int(p)]] += 1

    accuracy = {
        c: float(100.0 * np.trace(m) / m.sum()) for c, m in confusion.items()
    }
    return EvalReport(
        case=case,
        classes=classes,
        accuracy=accuracy,
        confusion={c: m.tolist() for c, m in confusion.items()},
        mean_accuracy=float(np.mean([accuracy[c] for c in CLASSIFIER_COLUMNS])),
        n_rows=len(data),
        cv_folds=cv_folds,
        seed=seed,
        features=used,
    )
