"""Empirical Rademacher complexity and sample-complexity scores.

For the norm-bounded linear class {x -> w.x : ||w||_2 <= phi} the per-draw
supremum has a closed form:

    sup_w (1/m) sum_i sigma_i (w . x_i)  =  (phi/m) || sum_i sigma_i x_i ||_2

so the Monte-Carlo estimate averages that norm over independent sign draws.
The analytic upper bound is R*phi/sqrt(m) with R = max ||x||_2.

The sample-complexity scores evaluate order-of-magnitude bounds with their
leading constant set to C (default 1); only the ordering of scores across
subgroups is meaningful, not the absolute magnitudes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .linmodel import NormStats

_DRAW_CHUNK = 256


@dataclass(frozen=True)
class RademacherResult:
    """Monte-Carlo estimate with error bar, analytic bound, and r = est*sqrt(m)."""

    estimate: float
    std_error: float
    n_draws: int
    analytic_bound: float
    r_coefficient: float

    def __post_init__(self) -> None:
        if self.estimate < 0 or self.std_error < 0:
            raise ValueError("estimate and std_error must be non-negative")
        if self.n_draws < 1:
            raise ValueError("n_draws must be >= 1")
        if self.estimate > self.analytic_bound + 3.0 * self.std_error + 1e-12:
            raise ValueError(
                "Monte-Carlo estimate exceeds the analytic bound by more than "
                "3 standard errors; increase n_draws or check inputs"
            )


@dataclass(frozen=True)
class ComplexityBudget:
    """Failure probability and fairness-parameter tolerances for the scores."""

    delta: float
    eps_alpha: float
    eps_gamma: float
    constant: float = 1.0

    def __post_init__(self) -> None:
        for name in ("delta", "eps_alpha", "eps_gamma"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v}")
        if self.constant <= 0:
            raise ValueError("constant must be positive")


@dataclass(frozen=True)
class CollaborativeBounds:
    """Multi-group PAC sample-complexity bounds for k group distributions."""

    d: int
    k: int
    epsilon: float
    delta: float
    centralized: float
    personalized: float | None
    uniform_lower: float

    def __post_init__(self) -> None:
        if self.uniform_lower < 0:
            raise ValueError("uniform lower bound cannot be negative")
        if self.personalized is not None and self.k >= 3:
            if self.personalized > self.centralized + 1e-9:
                raise ValueError("personalized bound must not exceed centralized for k >= 3")


def estimate_rademacher(
    X: np.ndarray, phi: float, n_draws: int = 1000, seed: int = 0
) -> RademacherResult:
    """Monte-Carlo empirical Rademacher complexity of the phi-ball linear class.

    Sign vectors are drawn from generators seeded by (seed, draw index), so
    the result is identical however draws are scheduled.  The estimate is
    phi times the mean of ||sum_i sigma_i x_i||_2 / m, which makes scaling
    in phi exact: estimate(c*phi) == c*estimate(phi) for binary powers c.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a non-empty 2-D matrix")
    if phi < 0:
        raise ValueError("phi must be non-negative")
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")

    m = X.shape[0]
    root = int(seed) & (2**63 - 1)
    base = np.empty(n_draws, dtype=np.float64)
    for start in range(0, n_draws, _DRAW_CHUNK):
        stop = min(start + _DRAW_CHUNK, n_draws)
        sigma = np.empty((stop - start, m), dtype=np.float64)
        for t in range(start, stop):
            rng = np.random.default_rng([root, t])
            sigma[t - start] = rng.integers(0, 2, size=m) * 2 - 1
        sums = sigma @ X
        base[start:stop] = np.sqrt(np.einsum("ij,ij->i", sums, sums)) / m

    base_mean = float(np.mean(base))
    if n_draws > 1:
        base_se = float(np.std(base, ddof=1) / math.sqrt(n_draws))
    else:
        base_se = 0.0

    row_norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    R = float(row_norms.max())
    return RademacherResult(
        estimate=phi * base_mean,
        std_error=phi * base_se,
        n_draws=n_draws,
        analytic_bound=R * phi / math.sqrt(m),
        r_coefficient=phi * base_mean * math.sqrt(m),
    )


def analytic_rademacher_bound(stats: NormStats) -> float:
    """Closed-form upper bound R*phi/sqrt(m) for the norm-bounded linear class."""
    return stats.R * stats.phi / math.sqrt(stats.m)


def pacf_sample_complexity_from_r(
    r: float, budget: ComplexityBudget, variant: str = "uniform"
) -> float:
    """Metric-fairness sample-complexity score from a Rademacher coefficient r.

    ``uniform`` divides r^2 * ln(1/delta) by eps_alpha^2 * eps_gamma^2 (the
    guarantee holds uniformly over the class); ``erm`` divides by
    min(eps_alpha, eps_gamma)^2 (empirical-minimizer guarantee).
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if variant == "uniform":
        denom = budget.eps_alpha**2 * budget.eps_gamma**2
    elif variant == "erm":
        denom = min(budget.eps_alpha, budget.eps_gamma) ** 2
    else:
        raise ValueError(f"unknown variant {variant!r} (expected 'uniform' or 'erm')")
    return budget.constant * r * r * math.log(1.0 / budget.delta) / denom


def pacf_sample_complexity(
    stats: NormStats, budget: ComplexityBudget, variant: str = "uniform"
) -> float:
    """Sample-complexity score using the analytic coefficient r = R*phi."""
    return pacf_sample_complexity_from_r(stats.R * stats.phi, budget, variant)


def collaborative_bounds(
    d: int, k: int, epsilon: float, delta: float
) -> CollaborativeBounds:
    """Sample-complexity bounds for learning one task across k subgroups.

    centralized: (ln^2 k / eps) * ((d+k) ln(1/eps) + k ln(1/delta)), one
    shared hypothesis for all groups.  personalized: an ln(k) factor
    smaller (undefined for k < 2).  uniform_lower: d*k*(1-delta)/(4*eps),
    stated for eps, delta in (0, 0.1]; values outside that range trigger a
    validity warning.
    """
    if d < 1 or k < 1:
        raise ValueError("d and k must be >= 1")
    if not (0.0 < epsilon < 1.0 and 0.0 < delta < 1.0):
        raise ValueError("epsilon and delta must lie in (0, 1)")
    if epsilon > 0.1 or delta > 0.1:
        warnings.warn(
            "uniform-convergence lower bound is stated for epsilon, delta in (0, 0.1]; "
            "values outside that range are reported but not guaranteed"
        )
    ln_k = math.log(k)
    centralized = (ln_k**2 / epsilon) * (
        (d + k) * math.log(1.0 / epsilon) + k * math.log(1.0 / delta)
    )
    personalized = centralized / ln_k if k >= 2 else None
    uniform_lower = d * k * (1.0 - delta) / (4.0 * epsilon)
    return CollaborativeBounds(
        d=d,
        k=k,
        epsilon=epsilon,
        delta=delta,
        centralized=centralized,
        personalized=personalized,
        uniform_lower=uniform_lower,
    )
