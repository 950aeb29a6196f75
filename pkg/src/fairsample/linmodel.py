"""L2-regularized logistic regression with deterministic training and CV.

Training minimizes mean log loss plus (lambda/2)*||w||^2 (intercept
unpenalized) with a damped Newton method: exact Hessian, Armijo
backtracking on the objective, convergence when the full gradient norm
drops below ``tol``.  Everything is deterministic given the inputs, so
repeated runs produce identical models.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, replace

import numpy as np

DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4)

ARMIJO_C1 = 1e-4
MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class TrainConfig:
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    folds: int = 10
    seed: int = 0
    max_iters: int = 10_000
    tol: float = 1e-8
    fit_intercept: bool = True

    def __post_init__(self) -> None:
        if not self.lambda_grid or any(l <= 0 for l in self.lambda_grid):
            raise ValueError("lambda_grid must be non-empty with positive entries")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class TrainedModel:
    w: np.ndarray
    b: float
    lambda_star: float
    converged: bool
    cv_log_loss: float | None = None
    loss_trace: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.w)) or not np.isfinite(self.b):
            raise ValueError("model weights must be finite")

    @property
    def d(self) -> int:
        return int(self.w.size)


@dataclass(frozen=True)
class NormStats:
    """Input radius R = max ||x||_2, weight norm phi = ||w||_2, and m."""

    R: float
    phi: float
    m: int

    def __post_init__(self) -> None:
        if self.R < 0 or self.phi < 0:
            raise ValueError("norms must be non-negative")
        if self.m < 1:
            raise ValueError("m must be >= 1")


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _objective(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, lam: float) -> float:
    # mean log(1 + exp(-s*z)) with s = +-1, computed via logaddexp for stability
    z = X @ w + b
    signed = np.where(y == 1, z, -z)
    return float(np.mean(np.logaddexp(0.0, -signed)) + 0.5 * lam * (w @ w))


def _gradient(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, lam: float, fit_intercept: bool
) -> tuple[np.ndarray, float, np.ndarray]:
    m = X.shape[0]
    p = sigmoid(X @ w + b)
    r = (p - y) / m
    gw = X.T @ r + lam * w
    gb = float(np.sum(r)) if fit_intercept else 0.0
    return gw, gb, p


def regularized_log_loss(X, y, w, b, lam) -> float:
    """Objective value: mean log loss + (lam/2)||w||^2 (intercept unpenalized)."""
    return _objective(np.asarray(X, float), np.asarray(y), np.asarray(w, float), float(b), lam)


def log_loss_gradient(X, y, w, b, lam, fit_intercept: bool = True):
    """Analytic gradient of the objective; returns (grad_w, grad_b)."""
    gw, gb, _ = _gradient(
        np.asarray(X, float), np.asarray(y), np.asarray(w, float), float(b), lam, fit_intercept
    )
    return gw, gb


def train_logistic(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    config: TrainConfig,
    w0: np.ndarray | None = None,
    b0: float = 0.0,
) -> TrainedModel:
    """Fit the regularized logistic objective for a single penalty value.

    Returns the iterate at which the gradient norm fell below ``config.tol``
    (converged=True) or the best iterate at the iteration cap.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a non-empty 2-D matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("y length must match X rows")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise ValueError("non-finite values in training data")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be 0 or 1")
    if lam <= 0:
        raise ValueError("lambda must be positive")

    m, d = X.shape
    w = np.zeros(d) if w0 is None else np.array(w0, dtype=np.float64, copy=True)
    b = float(b0) if config.fit_intercept else 0.0

    loss = _objective(X, y, w, b, lam)
    trace = [loss]
    converged = False

    for _ in range(config.max_iters):
        gw, gb, p = _gradient(X, y, w, b, lam, config.fit_intercept)
        grad_norm = float(np.sqrt(gw @ gw + gb * gb))
        if grad_norm <= config.tol:
            converged = True
            break

        s = p * (1.0 - p) / m
        Xs = X * s[:, None]
        H = X.T @ Xs
        H[np.diag_indices(d)] += lam
        if config.fit_intercept:
            hb = X.T @ s
            hbb = float(np.sum(s))
            full = np.empty((d + 1, d + 1))
            full[:d, :d] = H
            full[:d, d] = hb
            full[d, :d] = hb
            full[d, d] = hbb
            g = np.concatenate([gw, [gb]])
            step = _solve_spd(full, g)
            dw, db = step[:d], float(step[d])
        else:
            dw, db = _solve_spd(H, gw), 0.0

        # Armijo backtracking on the Newton direction
        descent = float(gw @ dw + gb * db)
        if descent <= 0:  # numerically degenerate direction; fall back to gradient
            dw, db = gw, gb
            descent = float(gw @ gw + gb * gb)
        t = 1.0
        new_loss = None
        for _bt in range(MAX_BACKTRACKS):
            cand_w = w - t * dw
            cand_b = b - t * db if config.fit_intercept else 0.0
            cand_loss = _objective(X, y, cand_w, cand_b, lam)
            if cand_loss <= loss - ARMIJO_C1 * t * descent:
                new_loss = cand_loss
                break
            t *= 0.5
        if new_loss is None:
            # no further progress possible at float precision
            break
        w, b, loss = cand_w, (cand_b if config.fit_intercept else 0.0), new_loss
        trace.append(loss)
    else:
        gw, gb, _ = _gradient(X, y, w, b, lam, config.fit_intercept)
        converged = float(np.sqrt(gw @ gw + gb * gb)) <= config.tol

    return TrainedModel(
        w=w, b=b, lambda_star=lam, converged=converged, loss_trace=tuple(trace)
    )


def _solve_spd(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Solve H x = g for symmetric positive (semi-)definite H, with jitter retry."""
    jitter = 0.0
    for _ in range(6):
        try:
            if jitter:
                H = H + jitter * np.eye(H.shape[0])
            c = np.linalg.cholesky(H)
            x = np.linalg.solve(c.T, np.linalg.solve(c, g))
            return x
        except np.linalg.LinAlgError:
            jitter = max(jitter * 100.0, 1e-12)
    return np.linalg.lstsq(H, g, rcond=None)[0]


def _fold_assignment(X: np.ndarray, y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Deterministic stratified fold ids from a seeded content hash.

    Within each label class, rows are ordered by a keyed hash of their
    feature bytes (ties by index, so duplicate rows stay adjacent) and dealt
    round-robin.  Replicating every row p times with p folds therefore puts
    one copy in each fold, and the assignment depends only on (data, seed).
    """
    m = X.shape[0]
    fold_of = np.empty(m, dtype=np.intp)
    key = (seed & (2**64 - 1)).to_bytes(8, "little")
    for label in (0, 1):
        idx = np.flatnonzero(y == label)
        if idx.size == 0:
            continue
        digests = [
            hashlib.blake2b(X[i].tobytes(), key=key, digest_size=8).digest()
            for i in idx
        ]
        order = sorted(range(idx.size), key=lambda j: (digests[j], int(idx[j])))
        for rank, j in enumerate(order):
            fold_of[idx[j]] = rank % folds
    return fold_of


def held_out_log_loss(model: TrainedModel, X: np.ndarray, y: np.ndarray) -> float:
    """Mean log loss of a model on held-out rows."""
    z = np.asarray(X, float) @ model.w + model.b
    signed = np.where(np.asarray(y) == 1, z, -z)
    return float(np.mean(np.logaddexp(0.0, -signed)))


def cross_validate(
    X: np.ndarray, y: np.ndarray, config: TrainConfig
) -> tuple[float, dict[float, float]]:
    """Pick the penalty by k-fold CV; ties break toward the larger penalty.

    Folds are stratified by label and derived deterministically from the
    seed.  Raises if the sample is smaller than the fold count so callers
    can reduce folds explicitly.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    m = X.shape[0]
    if m < config.folds:
        raise ValueError(
            f"sample of {m} rows is smaller than fold count {config.folds}; reduce folds"
        )
    fold_of = _fold_assignment(X, y, config.folds, config.seed)

    mean_losses: dict[float, float] = {}
    grid = sorted(config.lambda_grid)
    warm: dict[int, tuple[np.ndarray, float]] = {}
    for lam in grid:
        fold_losses = []
        for f in range(config.folds):
            test = fold_of == f
            train = ~test
            w0, b0 = warm.get(f, (None, 0.0))
            model = train_logistic(X[train], y[train], lam, config, w0=w0, b0=b0)
            warm[f] = (model.w, model.b)
            fold_losses.append(held_out_log_loss(model, X[test], y[test]))
        mean_losses[lam] = float(np.mean(fold_losses))

    lambda_star = grid[0]
    best = mean_losses[grid[0]]
    for lam in grid[1:]:
        if mean_losses[lam] <= best:
            lambda_star, best = lam, mean_losses[lam]
    return lambda_star, mean_losses


def effective_folds(y: np.ndarray, requested: int) -> int:
    """Largest usable stratified fold count <= requested (min 2).

    Every fold needs at least one row of each label, so the count is capped
    by the rarer label's frequency.  Returns 0 when stratified CV is
    impossible (fewer than 2 rows of some label).
    """
    y = np.asarray(y)
    pos = int(np.sum(y == 1))
    neg = int(np.sum(y == 0))
    cap = min(pos, neg)
    if cap < 2:
        return 0
    return min(requested, cap)


def fit_with_cv(X: np.ndarray, y: np.ndarray, config: TrainConfig) -> TrainedModel:
    """Cross-validate the penalty, then refit on all rows at the winner."""
    folds = effective_folds(y, config.folds)
    if folds == 0:
        raise ValueError("need at least 2 rows of each label for stratified CV")
    if folds != config.folds:
        warnings.warn(
            f"reducing folds from {config.folds} to {folds} (rare label has too few rows)"
        )
        config = replace(config, folds=folds)
    lambda_star, losses = cross_validate(X, y, config)
    model = train_logistic(X, y, lambda_star, config)
    return TrainedModel(
        w=model.w,
        b=model.b,
        lambda_star=lambda_star,
        converged=model.converged,
        cv_log_loss=losses[lambda_star],
        loss_trace=model.loss_trace,
    )


def norm_stats(X: np.ndarray, model: TrainedModel) -> NormStats:
    """R = max row norm of X, phi = ||w||_2 (intercept excluded), m = rows."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a non-empty 2-D matrix")
    if X.shape[1] != model.d:
        raise ValueError(f"dimension mismatch: X has {X.shape[1]} columns, model {model.d}")
    row_norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    return NormStats(
        R=float(row_norms.max()),
        phi=float(np.linalg.norm(model.w)),
        m=int(X.shape[0]),
    )


def predict_scores(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Per-row probabilities sigmoid(w.x + b), all strictly inside (0, 1)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise ValueError(f"dimension mismatch: X has {X.shape[-1]} columns, model {model.d}")
    return sigmoid(X @ model.w + model.b)
