"""Per-iteration moment terms for the subsampled Gaussian mechanism.

For integer moment order lam, the exponential moment of the Renyi divergence
between the subsampled outcome distribution (a two-component Gaussian
mixture) and its neighbour reduces to a binomial expectation:

    left  = log E_{k ~ B(lam+1, q)} exp((k^2 - k) d^2 / (2 sigma_eff^2))
    right = log E_{k ~ B(lam,   q)} exp((k^2 + k) d^2 / (2 sigma_eff^2))

``left`` is exact for the mixture-vs-pure direction; ``right`` is an upper
bound for the pure-vs-mixture direction (convexity of 1/x).  Both are
evaluated wholly in log space so no exp of a large argument ever
materializes.  :func:`bayesdp.numerics.gauss_mixture_renyi_numeric` is the
independent quadrature cross-check for these sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ConfigurationError, DivergenceUndefinedError, DomainError
from .numerics import log_binomial_coeff

__all__ = [
    "MechanismConfig",
    "DirectionalMoment",
    "renyi_gaussian_shared_var",
    "renyi_gaussian_diag",
    "log_moment_subsampled",
    "log_moment_subsampled_batch",
    "ma_privacy_cost",
]


@dataclass(frozen=True)
class MechanismConfig:
    """Subsampled Gaussian mechanism parameters.

    ``sigma`` is the noise multiplier when a clipping bound is present
    (effective noise standard deviation ``noise_multiplier_factor * clip *
    sigma``) and the absolute noise standard deviation, in gradient-norm
    units, when it is not.  ``q`` is the probability that any one example
    lands in the batch.  ``clip`` is the sensitivity bound; leaving it unset
    means unbounded sensitivity, which the worst-case accountant cannot use.
    """

    sigma: float
    q: float
    clip: float | None = None
    noise_multiplier_factor: float = 1.0

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")
        if not (0.0 <= self.q <= 1.0):
            raise ConfigurationError(f"q must lie in [0, 1], got {self.q}")
        if self.clip is not None and not self.clip > 0.0:
            raise ConfigurationError(f"clip must be positive when set, got {self.clip}")
        if not self.noise_multiplier_factor > 0.0:
            raise ConfigurationError(
                f"noise_multiplier_factor must be positive, got {self.noise_multiplier_factor}"
            )

    @property
    def noise_std(self) -> float:
        """Effective noise standard deviation implied by the configuration."""
        if self.clip is None:
            return self.sigma
        return self.noise_multiplier_factor * self.clip * self.sigma


@dataclass(frozen=True)
class DirectionalMoment:
    """Log-domain moment value for each divergence direction; both >= 0."""

    left: float
    right: float

    @property
    def worst(self) -> float:
        return self.left if self.left >= self.right else self.right


def renyi_gaussian_shared_var(d: float, sigma: float, order: float) -> float:
    """Renyi divergence between N(0, sigma^2) and N(d, sigma^2)."""
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if d < 0.0:
        raise DomainError(f"distance must be non-negative, got {d}")
    if not order > 1.0:
        raise DomainError(f"order must exceed 1, got {order}")
    return order * d * d / (2.0 * sigma * sigma)


def renyi_gaussian_diag(mean_a, var_a, mean_b, var_b, order: float) -> float:
    """Closed-form Renyi divergence between diagonal Gaussians, summed over
    coordinates.

    Requires the order-mixed variance (1-order)*var_a + order*var_b to be
    strictly positive in every coordinate; outside that range the divergence
    is +inf and :class:`DivergenceUndefinedError` is raised.
    """
    if not order > 1.0:
        raise DomainError(f"order must exceed 1, got {order}")
    mean_a = np.atleast_1d(np.asarray(mean_a, dtype=float))
    mean_b = np.atleast_1d(np.asarray(mean_b, dtype=float))
    var_a = np.atleast_1d(np.asarray(var_a, dtype=float))
    var_b = np.atleast_1d(np.asarray(var_b, dtype=float))
    if not (mean_a.shape == mean_b.shape == var_a.shape == var_b.shape):
        raise DomainError("mean/variance vectors must share one shape")
    if np.any(var_a <= 0.0) or np.any(var_b <= 0.0):
        raise DomainError("variances must be strictly positive")
    mixed = (1.0 - order) * var_a + order * var_b
    if np.any(mixed <= 0.0):
        raise DivergenceUndefinedError(
            f"order-mixed variance non-positive at order {order}; divergence is +inf"
        )
    gap = mean_a - mean_b
    mean_term = order * np.sum(gap * gap / (2.0 * mixed))
    var_term = np.sum(
        np.log(mixed) - (1.0 - order) * np.log(var_a) - order * np.log(var_b)
    ) / (2.0 * (1.0 - order))
    return float(mean_term + var_term)


@lru_cache(maxsize=4096)
def _binomial_log_weights(n: int, q: float) -> np.ndarray:
    """log of the B(n, q) pmf over k = 0..n; q = 0 and q = 1 degenerate cleanly."""
    weights = np.full(n + 1, -math.inf)
    if q == 0.0:
        weights[0] = 0.0
    elif q == 1.0:
        weights[n] = 0.0
    else:
        log_q = math.log(q)
        log_1mq = math.log1p(-q)
        for k in range(n + 1):
            weights[k] = log_binomial_coeff(n, k) + k * log_q + (n - k) * log_1mq
    weights.setflags(write=False)
    return weights


def _log_binomial_mgf(n: int, q: float, a_values: np.ndarray, sign: int) -> np.ndarray:
    """log E_{k ~ B(n, q)} exp((k^2 + sign*k) * a) for each a in ``a_values``."""
    log_w = _binomial_log_weights(n, q)
    k = np.arange(n + 1, dtype=float)
    coeff = k * k + sign * k
    out = np.empty(a_values.shape[0])
    chunk = max(1, 2_000_000 // (n + 1))
    for start in range(0, a_values.shape[0], chunk):
        block = a_values[start : start + chunk]
        terms = coeff[:, None] * block[None, :] + log_w[:, None]
        top = terms.max(axis=0)
        out[start : start + block.shape[0]] = top + np.log(
            np.exp(terms - top[None, :]).sum(axis=0)
        )
    # each expectation is >= 1 (the k = 0 term alone contributes weight),
    # so clamp round-off just below zero
    return np.maximum(out, 0.0)


def _validate_lambda(lam: int) -> None:
    if lam != int(lam) or int(lam) < 1:
        raise DomainError(f"moment order lambda must be an integer >= 1, got {lam}")


def log_moment_subsampled_batch(
    d_values: np.ndarray, cfg: MechanismConfig, lam: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`log_moment_subsampled` over many distances.

    Distances are deduplicated before evaluation; clipped streams collapse
    onto few distinct values, which makes this the fast path for long runs.
    """
    _validate_lambda(lam)
    lam = int(lam)
    d_values = np.asarray(d_values, dtype=float)
    if np.any(d_values < 0.0):
        raise DomainError("distances must be non-negative")
    scale = 1.0 / (2.0 * cfg.noise_std ** 2)
    a_unique, inverse = np.unique(d_values * d_values * scale, return_inverse=True)
    left = _log_binomial_mgf(lam + 1, cfg.q, a_unique, -1)[inverse]
    right = _log_binomial_mgf(lam, cfg.q, a_unique, +1)[inverse]
    return left.reshape(d_values.shape), right.reshape(d_values.shape)


def log_moment_subsampled(d: float, cfg: MechanismConfig, lam: int) -> DirectionalMoment:
    """Both directional log-moment terms at distance ``d`` and order ``lam``."""
    left, right = log_moment_subsampled_batch(np.array([float(d)]), cfg, lam)
    return DirectionalMoment(float(left[0]), float(right[0]))


def ma_privacy_cost(cfg: MechanismConfig, lam: int) -> float:
    """Data-independent per-step cost: the moment terms evaluated at the
    worst-case neighbour distance, which equals the clipping bound under
    add/remove adjacency of summed clipped gradients."""
    if cfg.clip is None:
        raise ConfigurationError("worst-case accounting requires a clip bound")
    return log_moment_subsampled(cfg.clip, cfg, lam).worst
