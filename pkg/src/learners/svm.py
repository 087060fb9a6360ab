"""RBF-kernel support vector machine solved by SMO, with Platt-scaled probabilities."""

import logging
from typing import List, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import expit

from ..models.learner_spec import LabeledDataset, LearnerFamily, LearnerSpec
from .base import BaseModel, register, warn

logger = logging.getLogger(__name__)

TAU = 1e-12
MIN_STEP = 1e-12


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(A, B, "sqeuclidean"))


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float,
    max_passes: int,
    max_iter: int,
) -> Tuple[np.ndarray, float, List[str]]:
    """
    Solve the soft-margin dual by sequential minimal optimisation.

    Each step updates the maximal violating pair. The loop stops once the
    violation gap m - M is at most `tol`, after `max_passes` consecutive steps
    that cannot move alpha, or after `max_iter` steps.

    Args:
        K: Kernel matrix (n x n)
        y: Labels in {-1, +1}
        C: Box constraint
        tol: KKT tolerance
        max_passes: Stalled steps tolerated before giving up
        max_iter: Step budget

    Returns:
        (alpha, b, warnings)
    """
    n = y.size
    alpha = np.zeros(n)
    # E = f(x) - y without the bias
    E = -y.astype(float)
    warnings: List[str] = []
    stalled = 0
    converged = False
    for _ in range(max_iter):
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        score = -E
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        j = int(np.flatnonzero(low)[np.argmin(score[low])])
        if score[i] - score[j] <= tol:
            converged = True
            break

        if y[i] != y[j]:
            L, H = max(0.0, alpha[j] - alpha[i]), min(C, C + alpha[j] - alpha[i])
        else:
            L, H = max(0.0, alpha[i] + alpha[j] - C), min(C, alpha[i] + alpha[j])
        eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], TAU)
        aj = float(np.clip(alpha[j] + y[j] * (E[i] - E[j]) / eta, L, H))
        d_j = aj - alpha[j]
        if abs(d_j) < MIN_STEP:
            stalled += 1
            if stalled >= max_passes:
                break
            continue
        stalled = 0
        d_i = -y[i] * y[j] * d_j
        alpha[i] += d_i
        alpha[j] = aj
        E += y[i] * d_i * K[:, i] + y[j] * d_j * K[:, j]

    if not converged:
        warnings.append("SMO stopped before reaching the KKT tolerance")

    # recompute errors from scratch for the bias
    E = K @ (alpha * y) - y
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b = float(np.mean(-E[free]))
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        m = float(np.max(-E[up])) if up.any() else float(np.min(-E[low]))
        M = float(np.min(-E[low])) if low.any() else m
        b = (m + M) / 2.0
    return alpha, b, warnings


def platt_fit(
    f: np.ndarray, labels: np.ndarray, max_iter: int = 100, sigma: float = 1e-12
) -> Tuple[float, float]:
    """
    Fit P(infected | f) = sigmoid(A * f + B) by regularised Newton steps.

    Targets are smoothed to (n1 + 1) / (n1 + 2) and 1 / (n0 + 2).
    Constant decision values give A = 0 and the smoothed prior.
    """
    f = np.asarray(f, dtype=float)
    n1 = float(labels.sum())
    n0 = float(labels.size - n1)
    target = np.where(labels == 1, (n1 + 1.0) / (n1 + 2.0), 1.0 / (n0 + 2.0))
    center = f.mean()
    spread = f.std()
    if not spread > 1e-9 * max(1.0, abs(center)):
        t = float(target.mean())
        return 0.0, float(np.log(t / (1.0 - t)))
    z = (f - center) / spread

    def loss(a, b):
        m = a * z + b
        return float(np.sum(np.logaddexp(0.0, m) - target * m))

    A, B = 0.0, float(np.log((n1 + 1.0) / (n0 + 1.0)))
    current = loss(A, B)
    for _ in range(max_iter):
        p = expit(A * z + B)
        r = p - target
        g1, g2 = float(np.dot(r, z)), float(r.sum())
        if max(abs(g1), abs(g2)) < 1e-5:
            break
        w = p * (1.0 - p)
        h11 = float(np.dot(w, z * z)) + sigma
        h22 = float(w.sum()) + sigma
        h21 = float(np.dot(w, z))
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        slope = g1 * dA + g2 * dB
        step = 1.0
        while step >= 1e-10:
            candidate = loss(A + step * dA, B + step * dB)
            if candidate < current + 1e-4 * step * slope:
                A, B, current = A + step * dA, B + step * dB, candidate
                break
            step /= 2.0
        else:
            logger.debug("Platt line search stalled")
            break
    return A / spread, B - A * center / spread


@register
class SvmRbf(BaseModel):
    family = LearnerFamily.SVM_RBF

    def __init__(
        self,
        spec,
        n_features,
        train_fingerprint,
        gamma: float,
        support_vectors: np.ndarray,
        dual_coef: np.ndarray,
        bias: float,
        platt: Tuple[float, float],
        warnings=(),
    ):
        super().__init__(spec, n_features, train_fingerprint, warnings)
        self.gamma = float(gamma)
        self.support_vectors = np.asarray(support_vectors, dtype=float).reshape(-1, n_features)
        self.dual_coef = np.asarray(dual_coef, dtype=float)
        self.bias = float(bias)
        self.platt = (float(platt[0]), float(platt[1]))

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.dual_coef.size == 0:
            return np.full(X.shape[0], self.bias)
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.dual_coef + self.bias

    def _predict(self, X):
        a, b = self.platt
        return expit(a * self.decision_function(X) + b)

    def params_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "platt": list(self.platt),
        }

    @classmethod
    def from_params(cls, spec, n_features, fingerprint, params):
        return cls(
            spec,
            n_features,
            fingerprint,
            params["gamma"],
            np.array(params["support_vectors"], dtype=float),
            np.array(params["dual_coef"], dtype=float),
            params["bias"],
            tuple(params["platt"]),
        )


def fit_svm_rbf(spec: LearnerSpec, data: LabeledDataset) -> SvmRbf:
    """Kernel SVM; `alpha` and `bias` follow f(x) = sum(alpha_i y_i k(x_i, x)) + b."""
    X = data.features
    y = np.where(data.labels == 1, 1.0, -1.0)
    gamma = spec["gamma"] if spec["gamma"] is not None else 1.0 / data.n_features
    K = rbf_kernel(X, X, gamma)
    warnings: List[str] = []
    if data.has_both_classes:
        alpha, bias, notes = smo_solve(
            K, y, spec["C"], spec["smo_tol"], spec["max_passes"], spec["max_iter"]
        )
        for note in notes:
            warn("svm_rbf", note, warnings)
    else:
        alpha, bias = np.zeros(data.n_samples), float(y[0])
    support = alpha > 0
    dual_coef = alpha[support] * y[support]
    decision = K[:, support] @ dual_coef + bias
    return SvmRbf(
        spec,
        data.n_features,
        data.fingerprint(),
        gamma,
        X[support],
        dual_coef,
        bias,
        platt_fit(decision, data.labels),
        warnings,
    )
