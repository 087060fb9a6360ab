"""L2-regularised logistic regression fitted by Newton's method.

The objective is mean log-loss + 0.5 * l2 * ||w||^2 with an unpenalised
intercept. Parameters are packed as theta = (w_1 .. w_d, b).
"""

from typing import List, Tuple

import numpy as np
from scipy.special import expit

from ..models.learner_spec import LabeledDataset, LearnerFamily, LearnerSpec
from .base import BaseModel, register, warn

ARMIJO = 1e-4
MIN_STEP = 1e-12


def _design(X: np.ndarray) -> np.ndarray:
    return np.column_stack([X, np.ones(X.shape[0])])


def _penalty_mask(n_features: int) -> np.ndarray:
    mask = np.ones(n_features + 1)
    mask[-1] = 0.0
    return mask


def penalized_loss(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    z = _design(X) @ theta
    w = theta[:-1]
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * np.dot(w, w))


def loss_gradient(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> np.ndarray:
    A = _design(X)
    p = expit(A @ theta)
    return A.T @ (p - y) / X.shape[0] + l2 * _penalty_mask(X.shape[1]) * theta


def loss_hessian(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> np.ndarray:
    A = _design(X)
    p = expit(A @ theta)
    w = p * (1.0 - p)
    return (A.T * w) @ A / X.shape[0] + l2 * np.diag(_penalty_mask(X.shape[1]))


def newton_direction(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> np.ndarray:
    g = loss_gradient(theta, X, y, l2)
    H = loss_hessian(theta, X, y, l2)
    try:
        return -np.linalg.solve(H, g)
    except np.linalg.LinAlgError:
        return -np.linalg.lstsq(H, g, rcond=None)[0]


def newton_fit(
    X: np.ndarray, y: np.ndarray, l2: float, max_iter: int, tol: float
) -> Tuple[np.ndarray, int, bool]:
    """Damped Newton iterations from theta = 0; returns (theta, iterations, converged)."""
    theta = np.zeros(X.shape[1] + 1)
    loss = penalized_loss(theta, X, y, l2)
    for it in range(max_iter):
        g = loss_gradient(theta, X, y, l2)
        if np.linalg.norm(g) < tol:
            return theta, it, True
        step_dir = newton_direction(theta, X, y, l2)
        slope = float(np.dot(g, step_dir))
        if slope >= 0:
            step_dir, slope = -g, -float(np.dot(g, g))
        g_norm = np.linalg.norm(g)
        step = 1.0
        while step >= MIN_STEP:
            candidate = theta + step * step_dir
            new_loss = penalized_loss(candidate, X, y, l2)
            if new_loss <= loss + ARMIJO * step * slope:
                break
            # near the optimum the loss change drops below rounding; judge by the gradient
            flat = abs(new_loss - loss) <= 1e-12 * max(1.0, abs(loss))
            if flat and np.linalg.norm(loss_gradient(candidate, X, y, l2)) < g_norm:
                break
            step /= 2.0
        else:
            # no decrease possible at machine precision
            return theta, it, np.linalg.norm(g) < tol
        theta, loss = candidate, new_loss
    return theta, max_iter, bool(np.linalg.norm(loss_gradient(theta, X, y, l2)) < tol)


@register
class LogisticRegression(BaseModel):
    family = LearnerFamily.LOGREG

    def __init__(self, spec, n_features, train_fingerprint, weights, intercept, warnings=()):
        super().__init__(spec, n_features, train_fingerprint, warnings)
        self.weights = np.asarray(weights, dtype=float)
        self.intercept = float(intercept)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights + self.intercept

    def _predict(self, X):
        return expit(self.decision_function(X))

    def params_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "intercept": self.intercept}

    @classmethod
    def from_params(cls, spec, n_features, fingerprint, params):
        return cls(spec, n_features, fingerprint, params["weights"], params["intercept"])


def fit_logreg(spec: LearnerSpec, data: LabeledDataset) -> LogisticRegression:
    """Newton fit to gradient-norm `tol`; the best iterate is kept with a warning otherwise."""
    y = data.labels.astype(float)
    theta, iterations, converged = newton_fit(
        data.features, y, spec["l2"], spec["max_iter"], spec["tol"]
    )
    warnings: List[str] = []
    if not converged:
        warn("logreg", f"Newton solver did not converge in {iterations} iterations", warnings)
    return LogisticRegression(
        spec, data.n_features, data.fingerprint(), theta[:-1], theta[-1], warnings
    )
