"""Finite-sample overestimators of the per-step privacy cost.

The continuous-case estimator turns m per-sample moment values into a
one-sided confidence bound on their data expectation: with probability at
least 1 - gamma the returned value does not undershoot the true cost.  The
binary companion bounds a Bernoulli mean through the Beta posterior under a
flat prior.  The failure probability gamma is charged to the delta budget by
:func:`delta_budget`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ConfigurationError, DataError, DomainError, VacuousGuaranteeWarning
from .numerics import (
    DEFAULT_TOLERANCE,
    ToleranceConfig,
    beta_inv_cdf,
    student_t_tail_quantile,
)

__all__ = [
    "EstimatorConfig",
    "upper_t_quantile",
    "upper_confidence_log_mean",
    "MomentSampleBatch",
    "estimate_privacy_cost",
    "bernoulli_mean_upper",
    "delta_budget",
]


@dataclass(frozen=True)
class EstimatorConfig:
    """Sample count per step, allowed failure probability, and whether the
    estimate is capped at the worst-case cost when a clip bound exists."""

    m: int
    gamma: float = 1e-15
    clamp_to_ma: bool = True

    def __post_init__(self) -> None:
        if self.m != int(self.m) or int(self.m) < 2:
            raise ConfigurationError(f"m must be an integer >= 2, got {self.m}")
        if not (0.0 < self.gamma < 1.0):
            raise ConfigurationError(f"gamma must lie strictly in (0, 1), got {self.gamma}")


@dataclass(frozen=True)
class MomentSampleBatch:
    """Per-sample log-moment values at one step and one moment order.

    Each value is log max(e^{lam * D_fwd}, e^{lam * D_rev}) for one candidate
    example, hence non-negative (each underlying moment is >= 1).
    """

    values: tuple[float, ...]
    step: int
    lam: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if any(v < 0.0 for v in self.values):
            raise DataError("moment sample values must be non-negative")
        if self.lam < 1:
            raise DataError(f"lambda must be >= 1, got {self.lam}")


@lru_cache(maxsize=512)
def upper_t_quantile(gamma: float, dof: int) -> float:
    """Student-t quantile at probability 1 - gamma, solved in tail space so
    gamma as small as 1e-15 keeps full precision."""
    if gamma == 0.5:
        return 0.0
    if gamma < 0.5:
        return student_t_tail_quantile(gamma, dof)
    return -student_t_tail_quantile(1.0 - gamma, dof)


def upper_confidence_log_mean(values: np.ndarray, t_quantile: float) -> np.ndarray:
    """Log of mean + t_quantile/sqrt(m-1) * population-std over the last axis.

    ``values`` are logs of the samples; the largest one is factored out so
    the linear-domain statistics never overflow.  Round-off can drive the
    variance discriminant slightly negative (all-equal samples); it is
    clamped to zero.  A non-positive bound is floored at log(1) = 0, the
    smallest value any true moment can take.
    """
    values = np.asarray(values, dtype=float)
    m = values.shape[-1]
    top = values.max(axis=-1)
    ratios = np.exp(values - top[..., None])
    mean_r = ratios.mean(axis=-1)
    var_r = np.clip((ratios * ratios).mean(axis=-1) - mean_r * mean_r, 0.0, None)
    inner = mean_r + (t_quantile / math.sqrt(m - 1)) * np.sqrt(var_r)
    bounded = np.where(inner > 0.0, top + np.log(np.maximum(inner, 1e-300)), 0.0)
    return np.maximum(bounded, 0.0)


def estimate_privacy_cost(
    batch: MomentSampleBatch,
    cfg: EstimatorConfig,
    ma_cost: float | None = None,
) -> float:
    """High-confidence overestimate of the per-step privacy cost from m
    sampled moment values (log domain).

    When ``cfg.clamp_to_ma`` is set and a worst-case cost is supplied, the
    result is capped there; the cap is itself a valid upper bound whenever
    the sampled distances are clipped at the worst-case distance, so the
    overestimation guarantee survives.
    """
    if len(batch.values) != cfg.m:
        raise ConfigurationError(
            f"batch carries {len(batch.values)} values but the estimator expects m={cfg.m}"
        )
    quantile = upper_t_quantile(cfg.gamma, cfg.m - 1)
    cost = float(upper_confidence_log_mean(np.array(batch.values), quantile))
    if cfg.clamp_to_ma and ma_cost is not None:
        cost = min(cost, float(ma_cost))
    return cost


def bernoulli_mean_upper(
    n_ones: int,
    n_zeros: int,
    gamma: float,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
) -> float:
    """Upper confidence bound on a Bernoulli mean under a flat prior.

    The posterior after n_ones successes and n_zeros failures is
    Beta(n_ones + 1, n_zeros + 1); the bound is its (1 - gamma)-quantile, so
    the true mean is overestimated with probability at least 1 - gamma.
    gamma = 0 returns 1 (the fully pessimistic estimate), gamma = 1 returns 0.
    """
    if n_ones < 0 or n_zeros < 0:
        raise DomainError(f"counts must be non-negative, got {n_ones}, {n_zeros}")
    if not (0.0 <= gamma <= 1.0):
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    return beta_inv_cdf(1.0 - gamma, n_ones + 1.0, n_zeros + 1.0, tol)


def delta_budget(beta: float, steps: int, gamma: float) -> float:
    """Total failure mass beta + steps * gamma (union bound over the per-step
    estimator failures).  A result >= 1 is returned as-is but flagged with
    :class:`VacuousGuaranteeWarning`, since it guarantees nothing."""
    if beta < 0.0 or gamma < 0.0 or steps < 0:
        raise DomainError("beta, gamma and steps must be non-negative")
    total = beta + steps * gamma
    if total >= 1.0:
        warnings.warn(
            f"delta budget {total} >= 1 provides a vacuous guarantee",
            VacuousGuaranteeWarning,
            stacklevel=2,
        )
    return total
