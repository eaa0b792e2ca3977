"""Support vector machines over precomputed quantum Gram matrices.

The binary solver is sequential minimal optimization with maximal-violating-
pair working-set selection: minimize ``0.5 a'Qa - e'a`` over
``0 <= a_i <= C`` and ``y'a = 0`` with ``Q_ij = y_i y_j K_ij``, taking exact
two-variable steps until the KKT gap drops below ``tol``.

Multiclass problems train one binary model per unordered class pair and
vote; the lower class of a pair takes the +1 side, so a positive decision
value votes for it.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils import check_array, check_X_y
from sklearn.utils.validation import check_is_fitted

from . import simulator
from .errors import DegenerateDataError
from .genome import CircuitSpec

SUPPORT_EPS = 1e-12
_TAU = 1e-12
DEFAULT_MAX_ITER = 100_000


@dataclass
class BinaryModel:
    """Dual solution of one binary subproblem.

    ``dual_coefs[k]`` is ``alpha_k * y_k`` for the k-th support vector;
    ``support_indices`` point into the training set the model was fit
    against.
    """

    dual_coefs: np.ndarray
    support_indices: np.ndarray
    bias: float
    regularization: float


@dataclass
class MulticlassModel:
    """One-vs-one ensemble: a binary model per unordered class pair."""

    classes: np.ndarray
    models: dict[tuple[int, int], BinaryModel]


def solve_binary(gram, y, C: float = 1.0, tol: float = 1e-3,
                 max_iter: int = DEFAULT_MAX_ITER) -> BinaryModel:
    """Solve the dual SVM on a precomputed square Gram matrix.

    ``y`` must contain both +1 and -1.  The bias is the mean of
    ``y_i - sum_j dual_j K_ij`` over free support vectors, or the midpoint
    of the feasible interval when every support vector sits on a bound.
    """
    K = np.asarray(gram, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("gram matrix must be square")
    n = K.shape[0]
    if y.shape != (n,):
        raise ValueError("labels must match the gram matrix size")
    if n < 2:
        raise ValueError("need at least two training points")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise DegenerateDataError("training labels contain a single class")
    if C <= 0 or tol <= 0:
        raise ValueError("C and tol must be positive")

    alpha = np.zeros(n)
    grad = np.full(n, -1.0)  # gradient of 0.5 a'Qa - e'a at a = 0
    for _ in range(max_iter):
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        viol = -y * grad
        i = int(np.argmax(np.where(up, viol, -np.inf)))
        j = int(np.argmin(np.where(low, viol, np.inf)))
        if viol[i] - viol[j] < tol:
            break
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = _TAU
        ai_old, aj_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            else:
                if aj > C:
                    aj, ai = C, C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            else:
                if aj < 0:
                    aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            else:
                if ai < 0:
                    ai, aj = 0.0, total
        d_i, d_j = ai - ai_old, aj - aj_old
        grad += (y[i] * K[:, i] * y) * d_i + (y[j] * K[:, j] * y) * d_j
        alpha[i], alpha[j] = ai, aj
    else:
        warnings.warn("SMO hit max_iter before reaching the requested "
                      "tolerance; returning the current iterate",
                      RuntimeWarning)

    bias = _compute_bias(alpha, grad, y, C)
    support = alpha > SUPPORT_EPS
    return BinaryModel(dual_coefs=(alpha * y)[support],
                       support_indices=np.flatnonzero(support),
                       bias=bias, regularization=C)


def _compute_bias(alpha: np.ndarray, grad: np.ndarray, y: np.ndarray,
                  C: float) -> float:
    # y_i * grad_i equals f(x_i) - y_i without the bias term
    errors = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(-errors[free].mean())
    upper = ((alpha >= C) & (y < 0)) | ((alpha <= 0) & (y > 0))
    lower = ((alpha >= C) & (y > 0)) | ((alpha <= 0) & (y < 0))
    hi = errors[upper].min() if upper.any() else np.inf
    lo = errors[lower].max() if lower.any() else -np.inf
    return float(-(hi + lo) / 2.0)


def decision_function(model: BinaryModel, k_row) -> float:
    """Evaluate ``sum_k dual_k K(x_k, x) + b`` for one query point.

    ``k_row`` holds the kernel values of the query against the model's
    support vectors, in ``support_indices`` order.
    """
    k_row = np.asarray(k_row, dtype=np.float64)
    if k_row.shape != model.dual_coefs.shape:
        raise ValueError(
            f"expected {model.dual_coefs.shape[0]} kernel values, "
            f"got {k_row.shape}"
        )
    return float(k_row @ model.dual_coefs + model.bias)


def fit(circuit: CircuitSpec, train_X, train_y, C: float = 1.0,
        tol: float = 1e-3, squared: bool = False) -> MulticlassModel:
    """Train a one-vs-one ensemble on the circuit's kernel.

    The training Gram is simulated once; every pairwise subproblem slices
    it.  A two-class problem degenerates to a single binary model.
    """
    X = np.atleast_2d(np.asarray(train_X, dtype=np.float64))
    y = np.asarray(train_y)
    if y.shape != (X.shape[0],):
        raise ValueError("labels must match the training rows")
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateDataError("training labels contain a single class")
    gram = simulator.gram_matrix(circuit, X, squared=squared)
    models: dict[tuple[int, int], BinaryModel] = {}
    for a in range(classes.size):
        for b in range(a + 1, classes.size):
            idx = np.flatnonzero((y == classes[a]) | (y == classes[b]))
            pair_y = np.where(y[idx] == classes[a], 1.0, -1.0)
            model = solve_binary(gram[np.ix_(idx, idx)], pair_y, C, tol)
            models[(a, b)] = replace(
                model, support_indices=idx[model.support_indices])
    return MulticlassModel(classes=classes, models=models)


def predict(model: MulticlassModel, circuit: CircuitSpec, train_X, query_X,
            squared: bool = False) -> np.ndarray:
    """Vote the pairwise models over the query rows.

    Vote ties are broken by the summed signed decision values of the tied
    classes, then by class order.
    """
    query = np.atleast_2d(np.asarray(query_X, dtype=np.float64))
    if query.shape[0] == 0:
        return np.empty(0, dtype=model.classes.dtype)
    kq = simulator.gram_matrix(circuit, query, train_X, squared=squared)
    n_query = query.shape[0]
    n_classes = model.classes.size
    votes = np.zeros((n_query, n_classes), dtype=int)
    scores = np.zeros((n_query, n_classes))
    for (a, b), binary in model.models.items():
        f = kq[:, binary.support_indices] @ binary.dual_coefs + binary.bias
        positive = f > 0
        votes[positive, a] += 1
        votes[~positive, b] += 1
        scores[:, a] += f
        scores[:, b] -= f
    out = np.empty(n_query, dtype=model.classes.dtype)
    for r in range(n_query):
        tied = np.flatnonzero(votes[r] == votes[r].max())
        out[r] = model.classes[tied[np.argmax(scores[r, tied])]]
    return out


def accuracy(predicted, actual) -> float:
    """Fraction of matching labels."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise ValueError("prediction and label sequences differ in length")
    if predicted.size == 0:
        raise ValueError("cannot score an empty label sequence")
    return float(np.mean(predicted == actual))


def confusion(predicted, actual, classes) -> np.ndarray:
    """Count matrix with true classes on rows, predictions on columns."""
    classes = list(classes)
    if not classes:
        raise ValueError("classes must be nonempty")
    index = {c: k for k, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=int)
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise ValueError("prediction and label sequences differ in length")
    for true, pred in zip(actual.tolist(), predicted.tolist()):
        if true not in index or pred not in index:
            raise ValueError(f"label {true if true not in index else pred!r} "
                             "is not in the class list")
        counts[index[true], index[pred]] += 1
    return counts


class QuantumKernelSVC(BaseEstimator, ClassifierMixin):
    """Classifier over a fixed feature-map circuit's simulated kernel.

    Parameters
    ----------
    circuit : CircuitSpec
        Feature map whose state overlap defines the kernel.
    C : float
        Box constraint of the dual problem.
    tol : float
        KKT stopping tolerance of the SMO solver.
    squared : bool
        Use the squared-magnitude overlap instead of its real part.
    """

    def __init__(self, circuit: CircuitSpec | None = None, C: float = 1.0,
                 tol: float = 1e-3, squared: bool = False):
        self.circuit = circuit
        self.C = C
        self.tol = tol
        self.squared = squared

    def fit(self, X, y):
        if self.circuit is None:
            raise ValueError("a feature-map circuit is required to fit")
        X, y = check_X_y(X, y, dtype=np.float64)
        if X.shape[1] != self.circuit.num_features:
            raise ValueError(
                f"circuit expects {self.circuit.num_features} features, "
                f"data has {X.shape[1]}"
            )
        self.model_ = fit(self.circuit, X, y, C=self.C, tol=self.tol,
                          squared=self.squared)
        self.classes_ = self.model_.classes
        self.X_fit_ = X
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        return predict(self.model_, self.circuit, self.X_fit_, X,
                       squared=self.squared)

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        if self.classes_.size != 2:
            raise ValueError("decision_function is defined for binary "
                             "problems only")
        X = check_array(X, dtype=np.float64)
        binary = self.model_.models[(0, 1)]
        kq = simulator.gram_matrix(self.circuit, X, self.X_fit_,
                                   squared=self.squared)
        return kq[:, binary.support_indices] @ binary.dual_coefs + binary.bias
