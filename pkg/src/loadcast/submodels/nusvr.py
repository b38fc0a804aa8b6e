"""nu-SVR with an RBF kernel, solved in the dual by pairwise coordinate
updates (SMO style).

Dual problem over alpha, alpha* in R^N:

    min  1/2 (a - a*)' K (a - a*) - y' (a - a*)
    s.t. sum(a) = sum(a*) = C*nu/2,   0 <= a_i, a*_i <= C/N

Pair updates inside each group preserve both equality constraints; the box
and the group sums are maintained exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import SupervisedWindowSet
from ..errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidHyperparameter,
    NoConvergence,
    NonPositiveDefiniteKernel,
)
from .base import Forecaster

KERNEL_JITTER = 1e-12


@dataclass(frozen=True)
class NusvrModel:
    support_vectors: np.ndarray  # rows with nonzero dual coefficient
    dual_coefs: np.ndarray       # beta = alpha - alpha* on the support rows
    bias: float
    epsilon: float               # solved tube half-width, not a hyperparameter
    gamma: float
    nu: float
    C: float
    n_features: int
    n_iter: int = 0
    kkt_violation: float = 0.0
    alpha: np.ndarray | None = None       # full dual variables, for diagnostics
    alpha_star: np.ndarray | None = None


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


def _scale_gamma(X) -> float:
    var = float(np.asarray(X, dtype=float).var())
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


def _distribute(total, ub, n):
    """Spread `total` over n variables respecting the box, libsvm style."""
    out = np.zeros(n)
    remaining = total
    for i in range(n):
        v = min(ub, remaining)
        out[i] = v
        remaining -= v
        if remaining <= 0:
            break
    return out


def _group_selection(grad, can_decrease, can_increase):
    """Most-violating pair inside one group: i grows, j shrinks."""
    up = np.where(can_increase, grad, np.inf)
    dn = np.where(can_decrease, grad, -np.inf)
    i = int(np.argmin(up))
    j = int(np.argmax(dn))
    return i, j, float(dn[j] - up[i])


def fit_nusvr(
    X,
    y,
    nu: float = 0.1,
    C: float = 1.0,
    gamma: float | None = None,
    tol: float = 1e-6,
    max_iter: int = 200_000,
) -> NusvrModel:
    """Solve the nu-SVR dual until the largest KKT violation drops below tol."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DimensionMismatch(f"X {X.shape} does not pair with y {y.shape}")
    n = y.size
    if n < 2:
        raise EmptyInput("nu-SVR needs at least two samples")
    if not 0.0 < nu <= 1.0:
        raise InvalidHyperparameter(f"nu must be in (0, 1], got {nu}")
    if C <= 0:
        raise InvalidHyperparameter(f"C must be positive, got {C}")
    if gamma is None:
        gamma = _scale_gamma(X)

    K = rbf_kernel(X, X, gamma)
    ub = C / n
    group_sum = C * nu / 2.0
    a = _distribute(group_sum, ub, n)       # alpha
    a_star = a.copy()                       # alpha*
    q = np.zeros(n)                         # K @ (a - a_star), zero at start

    slack = 1e-12 * ub
    it = 0
    violation = np.inf
    for it in range(1, max_iter + 1):
        g_p = q - y          # d W / d alpha
        g_n = y - q          # d W / d alpha*
        i_p, j_p, viol_p = _group_selection(g_p, a > slack, a < ub - slack)
        i_n, j_n, viol_n = _group_selection(g_n, a_star > slack, a_star < ub - slack)
        violation = max(viol_p, viol_n)
        if violation < tol:
            break
        if viol_p >= viol_n:
            i, j, grad, sign = i_p, j_p, g_p, 1.0
            vec, step_cap = a, min(ub - a[i_p], a[j_p])
        else:
            i, j, grad, sign = i_n, j_n, g_n, -1.0
            vec, step_cap = a_star, min(ub - a_star[i_n], a_star[j_n])
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta < -1e-8:
            raise NonPositiveDefiniteKernel(f"pair curvature {eta} < 0")
        delta = (grad[j] - grad[i]) / max(eta, KERNEL_JITTER)
        delta = min(delta, step_cap)
        vec[i] += delta
        vec[j] -= delta
        q += sign * delta * (K[:, i] - K[:, j])
    else:
        raise NoConvergence(
            f"nu-SVR did not reach tol={tol} in {max_iter} iterations "
            f"(violation {violation:.3g})"
        )

    beta = a - a_star

    def multiplier(grad, vec):
        neg_g = -grad
        free = (vec > slack) & (vec < ub - slack)
        if free.any():
            return float(neg_g[free].mean())
        lo = neg_g[vec <= slack].max() if (vec <= slack).any() else None
        hi = neg_g[vec >= ub - slack].min() if (vec >= ub - slack).any() else None
        if lo is None:
            return float(hi)
        if hi is None:
            return float(lo)
        return float(0.5 * (lo + hi))

    lam_p = multiplier(q - y, a)
    lam_n = multiplier(y - q, a_star)
    bias = 0.5 * (lam_p - lam_n)
    epsilon = 0.5 * (lam_p + lam_n)

    support = np.abs(beta) > 0.0
    return NusvrModel(
        support_vectors=X[support],
        dual_coefs=beta[support],
        bias=float(bias),
        epsilon=float(epsilon),
        gamma=float(gamma),
        nu=float(nu),
        C=float(C),
        n_features=X.shape[1],
        n_iter=it,
        kkt_violation=float(violation),
        alpha=a,
        alpha_star=a_star,
    )


def nusvr_predict(model: NusvrModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    if X2.shape[1] != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got {X2.shape[1]}")
    if model.dual_coefs.size == 0:
        out = np.full(X2.shape[0], model.bias)
    else:
        out = rbf_kernel(X2, model.support_vectors, model.gamma) @ model.dual_coefs + model.bias
    return float(out[0]) if single else out


class NusvrForecaster(Forecaster):
    """24 independent scalar regressors on the normalized lookback loads; the
    shared C is picked on a chronological tail slice."""

    def __init__(self, nu=0.1, C_grid=(0.5, 1.0, 5.0), gamma=None, tol=1e-3,
                 validation_fraction=0.1, max_iter=200_000):
        self.nu = nu
        self.C_grid = tuple(C_grid)
        self.gamma = gamma
        self.tol = tol
        self.validation_fraction = validation_fraction
        self.max_iter = max_iter
        self.models: list[NusvrModel] | None = None
        self.normalizer = None

    def fit(self, windows: SupervisedWindowSet) -> "NusvrForecaster":
        self.normalizer = windows.normalizer
        X = windows.features()
        Y = windows.normalized_targets()
        n = X.shape[0]
        n_val = max(1, int(np.floor(self.validation_fraction * n)))
        best_C = self.C_grid[0]
        if len(self.C_grid) > 1 and n - n_val >= 2:
            X_fit, X_val = X[: n - n_val], X[n - n_val :]
            Y_fit, Y_val = Y[: n - n_val], Y[n - n_val :]
            best_mse = np.inf
            for C in self.C_grid:
                models = [
                    fit_nusvr(X_fit, Y_fit[:, h], nu=self.nu, C=C, gamma=self.gamma,
                              tol=self.tol, max_iter=self.max_iter)
                    for h in range(Y.shape[1])
                ]
                preds = np.column_stack([nusvr_predict(m, X_val) for m in models])
                mse = float(np.mean((preds - Y_val) ** 2))
                if mse < best_mse:
                    best_mse = mse
                    best_C = C
        self.models = [
            fit_nusvr(X, Y[:, h], nu=self.nu, C=best_C, gamma=self.gamma,
                      tol=self.tol, max_iter=self.max_iter)
            for h in range(Y.shape[1])
        ]
        return self

    def predict_batch(self, windows: SupervisedWindowSet) -> np.ndarray:
        if self.models is None:
            raise EmptyInput("forecaster is not fitted")
        X = windows.features()
        preds = np.column_stack([nusvr_predict(m, X) for m in self.models])
        return self.normalizer.denormalize(preds)
