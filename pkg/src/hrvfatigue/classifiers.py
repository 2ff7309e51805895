"""kNN, Gaussian naive Bayes, CART, one-hidden-layer network and linear SVM.

All models take a float matrix ``X`` (rows = windows) and integer labels
``y``. Ties always resolve to the lowest class code, so predictions are
reproducible bit for bit given the data, hyperparameters and seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyTrainingSet, HRVError

MODEL_FORMAT_VERSION = 1
VAR_FLOOR = 1e-9


def _check_train(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim == 1:
        X = X[:, None]
    if y.size == 0:
        raise EmptyTrainingSet("training set is empty")
    if X.shape[0] != y.size:
        raise ValueError(f"{X.shape[0]} rows but {y.size} labels")
    return X, y


def _as_matrix(X):
    X = np.asarray(X, dtype=float)
    return X[None, :] if X.ndim == 1 else X


@dataclass
class Standardizer:
    """Per-column z-scoring; zero-spread columns keep unit scale."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean, scale)

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def to_dict(self):
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["mean"], dtype=float), np.array(d["scale"], dtype=float))


class Classifier:
    kind = "base"
    classes_: np.ndarray
    scaler: Standardizer | None

    def fit(self, X, y) -> "Classifier":
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def score(self, X, y) -> float:
        return float(np.mean(self.predict(X) == np.asarray(y)))

    # persistence
    def _params(self) -> dict:
        raise NotImplementedError

    def _load(self, params: dict):
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "classes": self.classes_.tolist(),
            "standardization": None if self.scaler is None else self.scaler.to_dict(),
            "params": self._params(),
        }


# --------------------------------------------------------------------------


class KNNClassifier(Classifier):
    """Majority vote of the k nearest rows (Euclidean, z-scored features).

    A vote tie goes to the tied class owning the nearest single neighbour.
    """

    kind = "knn"

    def __init__(self, k: int = 1, standardize: bool = True):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.standardize = standardize
        self.scaler = None

    def fit(self, X, y):
        X, y = _check_train(X, y)
        if self.k > y.size:
            raise ValueError(f"k={self.k} exceeds training size {y.size}")
        self.scaler = Standardizer.fit(X) if self.standardize else None
        self.X_ = self.scaler.transform(X) if self.scaler else X
        self.y_ = y
        self.classes_ = np.unique(y)
        return self

    def predict(self, X):
        Q = _as_matrix(X)
        if self.scaler:
            Q = self.scaler.transform(Q)
        d2 = ((Q[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
        order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        out = np.empty(Q.shape[0], dtype=int)
        for i, nbrs in enumerate(order):
            labels = self.y_[nbrs]
            values, counts = np.unique(labels, return_counts=True)
            tied = set(values[counts == counts.max()].tolist())
            # neighbours are ordered nearest first
            out[i] = next(lab for lab in labels if lab in tied)
        return out

    def _params(self):
        return {"k": self.k, "X": self.X_.tolist(), "y": self.y_.tolist()}

    def _load(self, p):
        self.k = p["k"]
        self.X_ = np.array(p["X"], dtype=float)
        self.y_ = np.array(p["y"], dtype=int)


class GaussianNB(Classifier):
    kind = "nb"

    def __init__(self, standardize: bool = True, var_floor: float = VAR_FLOOR):
        self.standardize = standardize
        self.var_floor = var_floor
        self.scaler = None

    def fit(self, X, y):
        X, y = _check_train(X, y)
        self.scaler = Standardizer.fit(X) if self.standardize else None
        Z = self.scaler.transform(X) if self.scaler else X
        self.classes_ = np.unique(y)
        self.prior_ = np.array([np.mean(y == c) for c in self.classes_])
        self.mean_ = np.array([Z[y == c].mean(axis=0) for c in self.classes_])
        var = np.array([Z[y == c].var(axis=0) for c in self.classes_])
        self.var_ = np.maximum(var, self.var_floor)
        return self

    def log_posterior(self, X) -> np.ndarray:
        Z = _as_matrix(X)
        if self.scaler:
            Z = self.scaler.transform(Z)
        ll = -0.5 * (
            np.log(2 * np.pi * self.var_)[None, :, :]
            + (Z[:, None, :] - self.mean_[None, :, :]) ** 2 / self.var_[None, :, :]
        ).sum(axis=2)
        return ll + np.log(self.prior_)[None, :]

    def predict(self, X):
        return self.classes_[np.argmax(self.log_posterior(X), axis=1)]

    def _params(self):
        return {
            "prior": self.prior_.tolist(),
            "mean": self.mean_.tolist(),
            "var": self.var_.tolist(),
        }

    def _load(self, p):
        self.prior_ = np.array(p["prior"])
        self.mean_ = np.array(p["mean"])
        self.var_ = np.array(p["var"])


class DecisionTree(Classifier):
    """CART with Gini impurity and axis-aligned thresholds.

    Thresholds sit halfway between consecutive distinct values. Among equally
    good splits the lowest feature index wins, then the lowest threshold. A
    zero-gain split is still taken while the node is impure (XOR needs it).
    """

    kind = "dt"

    def __init__(self, max_depth: int = 8, min_leaf: int = 2):
        self.max_depth = max_depth
        self.min_leaf = max(1, min_leaf)
        self.scaler = None

    def fit(self, X, y):
        X, y = _check_train(X, y)
        self.classes_ = np.unique(y)
        codes = np.searchsorted(self.classes_, y)
        self.tree_ = self._grow(X, codes, 0)
        return self

    def _leaf(self, codes):
        counts = np.bincount(codes, minlength=self.classes_.size)
        return {"leaf": int(np.argmax(counts))}

    def _best_split(self, X, codes):
        n, p = X.shape
        n_cls = self.classes_.size
        best = None
        best_score = np.inf
        for j in range(p):
            order = np.argsort(X[:, j], kind="stable")
            xs = X[order, j]
            onehot = np.zeros((n, n_cls))
            onehot[np.arange(n), codes[order]] = 1.0
            left = np.cumsum(onehot, axis=0)[:-1]
            right = left[-1] + onehot[-1] - left
            n_left = np.arange(1, n, dtype=float)
            n_right = n - n_left
            valid = (xs[1:] > xs[:-1]) & (n_left >= self.min_leaf) & (n_right >= self.min_leaf)
            if not np.any(valid):
                continue
            gini_l = 1.0 - ((left / n_left[:, None]) ** 2).sum(axis=1)
            gini_r = 1.0 - ((right / n_right[:, None]) ** 2).sum(axis=1)
            score = (n_left * gini_l + n_right * gini_r) / n
            score = np.where(valid, score, np.inf)
            i = int(np.argmin(score))  # first minimum = lowest threshold
            if score[i] < best_score - 1e-12:
                best_score = score[i]
                best = (j, 0.5 * (xs[i] + xs[i + 1]))
        return best

    def _grow(self, X, codes, depth):
        if depth >= self.max_depth or np.unique(codes).size == 1 or codes.size < 2 * self.min_leaf:
            return self._leaf(codes)
        split = self._best_split(X, codes)
        if split is None:
            return self._leaf(codes)
        j, thr = split
        mask = X[:, j] <= thr
        return {
            "feature": int(j),
            "threshold": float(thr),
            "left": self._grow(X[mask], codes[mask], depth + 1),
            "right": self._grow(X[~mask], codes[~mask], depth + 1),
        }

    def depth(self, node=None) -> int:
        node = self.tree_ if node is None else node
        if "leaf" in node:
            return 0
        return 1 + max(self.depth(node["left"]), self.depth(node["right"]))

    def predict(self, X):
        X = _as_matrix(X)
        out = np.empty(X.shape[0], dtype=int)
        for i, row in enumerate(X):
            node = self.tree_
            while "leaf" not in node:
                node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
            out[i] = node["leaf"]
        return self.classes_[out]

    def _params(self):
        return {"max_depth": self.max_depth, "min_leaf": self.min_leaf, "tree": self.tree_}

    def _load(self, p):
        self.max_depth = p["max_depth"]
        self.min_leaf = p["min_leaf"]
        self.tree_ = p["tree"]


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class NeuralNetwork(Classifier):
    """One logistic hidden layer, softmax output, mean cross-entropy loss,
    trained by full-batch gradient descent."""

    kind = "nn"

    def __init__(
        self,
        hidden_units: int = 16,
        epochs: int = 2000,
        learning_rate: float = 0.05,
        seed: int = 0,
        standardize: bool = True,
    ):
        if hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        self.hidden_units = hidden_units
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.seed = seed
        self.standardize = standardize
        self.scaler = None

    def init_params(self, n_in: int, n_out: int) -> dict[str, np.ndarray]:
        rng = np.random.default_rng(self.seed)
        h = self.hidden_units
        return {
            "W1": rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_in, h)),
            "b1": np.zeros(h),
            "W2": rng.normal(0.0, 1.0 / np.sqrt(h), size=(h, n_out)),
            "b2": np.zeros(n_out),
        }

    @staticmethod
    def forward(params, X):
        H = _sigmoid(X @ params["W1"] + params["b1"])
        logits = H @ params["W2"] + params["b2"]
        logits = logits - logits.max(axis=1, keepdims=True)
        P = np.exp(logits)
        P /= P.sum(axis=1, keepdims=True)
        return H, P

    @classmethod
    def loss_and_grad(cls, params, X, Y):
        """Mean cross-entropy and its gradient; ``Y`` is one-hot."""
        n = X.shape[0]
        H, P = cls.forward(params, X)
        loss = -np.sum(Y * np.log(np.clip(P, 1e-300, None))) / n
        dlogits = (P - Y) / n
        dH = dlogits @ params["W2"].T * H * (1.0 - H)
        grads = {
            "W2": H.T @ dlogits,
            "b2": dlogits.sum(axis=0),
            "W1": X.T @ dH,
            "b1": dH.sum(axis=0),
        }
        return float(loss), grads

    def fit(self, X, y):
        X, y = _check_train(X, y)
        self.scaler = Standardizer.fit(X) if self.standardize else None
        Z = self.scaler.transform(X) if self.scaler else X
        self.classes_ = np.unique(y)
        Y = np.eye(self.classes_.size)[np.searchsorted(self.classes_, y)]
        params = self.init_params(Z.shape[1], self.classes_.size)
        loss, _ = self.loss_and_grad(params, Z, Y)
        self.initial_loss_ = loss
        for _ in range(self.epochs):
            loss, grads = self.loss_and_grad(params, Z, Y)
            for key in params:
                params[key] -= self.learning_rate * grads[key]
        self.params_ = params
        self.final_loss_ = self.loss_and_grad(params, Z, Y)[0]
        return self

    def predict_proba(self, X):
        Z = _as_matrix(X)
        if self.scaler:
            Z = self.scaler.transform(Z)
        return self.forward(self.params_, Z)[1]

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def _params(self):
        return {
            "hidden_units": self.hidden_units,
            "weights": {k: v.tolist() for k, v in self.params_.items()},
        }

    def _load(self, p):
        self.hidden_units = p["hidden_units"]
        self.params_ = {k: np.array(v, dtype=float) for k, v in p["weights"].items()}


class LinearSVM(Classifier):
    """One-vs-rest linear hinge-loss classifiers.

    Stochastic subgradient descent with step ``lr / (1 + lr * lambda * t)``
    and a seeded shuffle each epoch. The bias is not regularised.
    """

    kind = "svm"

    def __init__(
        self,
        epochs: int = 200,
        learning_rate: float = 0.1,
        regularization: float = 1e-3,
        seed: int = 0,
        standardize: bool = True,
    ):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.regularization = regularization
        self.seed = seed
        self.standardize = standardize
        self.scaler = None

    def fit(self, X, y):
        X, y = _check_train(X, y)
        self.classes_ = np.unique(y)
        if self.classes_.size < 2:
            raise HRVError("SVM needs at least two classes")
        self.scaler = Standardizer.fit(X) if self.standardize else None
        Z = self.scaler.transform(X) if self.scaler else X
        n, d = Z.shape
        C = self.classes_.size
        targets = np.where(np.searchsorted(self.classes_, y)[:, None] == np.arange(C), 1.0, -1.0)
        W = np.zeros((C, d))
        b = np.zeros(C)
        rng = np.random.default_rng(self.seed)
        lam, lr = self.regularization, self.learning_rate
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                eta = lr / (1.0 + lr * lam * t)
                t += 1
                x, yk = Z[i], targets[i]
                viol = yk * (W @ x + b) < 1.0
                W *= 1.0 - eta * lam
                if viol.any():
                    step = eta * yk[viol]
                    W[viol] += step[:, None] * x
                    b[viol] += step
        self.W_, self.b_ = W, b
        return self

    def decision_function(self, X):
        Z = _as_matrix(X)
        if self.scaler:
            Z = self.scaler.transform(Z)
        return Z @ self.W_.T + self.b_

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]

    def _params(self):
        return {"W": self.W_.tolist(), "b": self.b_.tolist()}

    def _load(self, p):
        self.W_ = np.array(p["W"], dtype=float)
        self.b_ = np.array(p["b"], dtype=float)


MODEL_KINDS = {
    cls.kind: cls for cls in (KNNClassifier, GaussianNB, DecisionTree, NeuralNetwork, LinearSVM)
}


def model_from_dict(d: dict) -> Classifier:
    if d.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {d.get('format_version')!r}")
    model = MODEL_KINDS[d["kind"]].__new__(MODEL_KINDS[d["kind"]])
    model.classes_ = np.array(d["classes"], dtype=int)
    std = d.get("standardization")
    model.scaler = None if std is None else Standardizer.from_dict(std)
    model._load(d["params"])
    return model


def save_model(model: Classifier, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), sort_keys=True) + "\n")


def load_model(path) -> Classifier:
    return model_from_dict(json.loads(Path(path).read_text()))


# thin functional wrappers


def train_predict_knn(X_train, y_train, query, k: int = 1) -> int:
    return int(KNNClassifier(k).fit(X_train, y_train).predict(query)[0])


def train_nb(X, y) -> GaussianNB:
    return GaussianNB().fit(X, y)


def train_dt(X, y, max_depth: int = 8, min_leaf: int = 2) -> DecisionTree:
    return DecisionTree(max_depth, min_leaf).fit(X, y)


def train_nn(X, y, hidden_units=16, epochs=2000, learning_rate=0.05, seed=0) -> NeuralNetwork:
    return NeuralNetwork(hidden_units, epochs, learning_rate, seed).fit(X, y)


def train_svm(X, y, epochs=200, learning_rate=0.1, regularization=1e-3, seed=0) -> LinearSVM:
    return LinearSVM(epochs, learning_rate, regularization, seed).fit(X, y)
