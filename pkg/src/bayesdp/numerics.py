"""Deterministic special functions and log-domain primitives.

Everything here is pure, re-entrant and self-contained (no SciPy): log-gamma
via a Lanczos series, the regularized incomplete beta through a Lentz
continued fraction, quantiles by bracketed bisection refined with Newton
steps, and an interval-doubling Simpson rule for the Renyi divergence
between a two-component Gaussian mixture and a pure Gaussian.  The mixture
quadrature exists as an independent cross-check for the closed-form moment
sums in :mod:`bayesdp.mechanisms` and is deliberately kept free of any code
shared with them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .exceptions import DomainError, NumericsError

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOLERANCE",
    "log_sum_exp",
    "log_binomial_coeff",
    "log_gamma",
    "log_beta",
    "reg_incomplete_beta",
    "beta_inv_cdf",
    "student_t_inv_cdf",
    "student_t_tail_quantile",
    "gauss_mixture_renyi_numeric",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Accuracy/iteration budget shared by the iterative routines."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0):
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if not (self.rel_tol > 0.0):
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")


DEFAULT_TOLERANCE = ToleranceConfig()


def log_sum_exp(terms: Iterable[float]) -> float:
    """Return ``log(sum(exp(t)))`` without overflow; terms may be -inf."""
    values = [float(t) for t in terms]
    if not values:
        raise DomainError("log_sum_exp of an empty sequence")
    top = max(values)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def log_binomial_coeff(n: int, k: int) -> float:
    """Natural log of C(n, k), exact integer arithmetic before the log."""
    if n != int(n) or k != int(k):
        raise DomainError(f"binomial coefficient needs integers, got n={n}, k={k}")
    n, k = int(n), int(k)
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"binomial coefficient undefined for n={n}, k={k}")
    return math.log(math.comb(n, k)) if n > 0 else 0.0


# Lanczos approximation, g = 7, 9 terms; relative error below 1e-13 over the
# positive reals used here.
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(z: float) -> float:
    """Natural log of the gamma function for z > 0."""
    if not z > 0.0:
        raise DomainError(f"log_gamma requires z > 0, got {z}")
    if z < 0.5:
        # reflection keeps the series argument >= 0.5
        return math.log(math.pi / math.sin(math.pi * z)) - log_gamma(1.0 - z)
    z -= 1.0
    series = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        series += _LANCZOS[i] / (z + i)
    t = z + 7.5
    return _HALF_LOG_TWO_PI + (z + 0.5) * math.log(t) - t + math.log(series)


def log_beta(a: float, b: float) -> float:
    """Natural log of the beta function B(a, b)."""
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def _cf_iteration_estimate(a: float, b: float, x: float) -> float:
    """Rough iteration count of the incomplete-beta continued fraction.

    The fraction's elements settle near -x/4, so the terminal phase converges
    geometrically at a rate depending on x alone; before that the elements
    scale with b*x.  The estimate only needs to rank the two equivalent
    evaluations (direct vs complement), not to be sharp.
    """
    if x <= 0.0:
        return 0.0
    s = math.sqrt(max(1.0 - x, 0.0))
    rho = ((1.0 - s) / (1.0 + s)) ** 2
    tail = 40.0 / max(-math.log(rho), 1e-9) if rho > 0.0 else 1.0
    return b * x + tail


def _beta_cont_frac(a: float, b: float, x: float, tol: ToleranceConfig) -> float:
    """Lentz evaluation of the incomplete-beta continued fraction."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    delta = 0.0
    for m in range(1, tol.max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-16:
            return h
    if abs(delta - 1.0) < tol.rel_tol:
        return h
    raise NumericsError(
        f"incomplete beta continued fraction did not converge for "
        f"a={a}, b={b}, x={x} within {tol.max_iter} iterations"
    )


def reg_incomplete_beta(a: float, b: float, x: float, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"shape parameters must be positive, got a={a}, b={b}")
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    # Both I_x(a,b) and 1 - I_{1-x}(b,a) are exact; evaluate whichever
    # continued fraction converges faster.  The Numerical-Recipes threshold
    # misranks extreme parameter ratios (huge a with b ~ 1/2 and x near 1,
    # the Student-t regime), hence the explicit cost estimate.
    if _cf_iteration_estimate(a, b, x) <= _cf_iteration_estimate(b, a, 1.0 - x):
        log_front = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
        value = math.exp(log_front) * _beta_cont_frac(a, b, x, tol) / a
        return min(max(value, 0.0), 1.0)
    y = 1.0 - x
    log_front = b * math.log(y) + a * math.log1p(-y) - log_beta(a, b)
    value = 1.0 - math.exp(log_front) * _beta_cont_frac(b, a, y, tol) / b
    return min(max(value, 0.0), 1.0)


def beta_inv_cdf(p: float, a: float, b: float, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> float:
    """Quantile of the Beta(a, b) distribution: x with I_x(a, b) = p.

    Bracketed bisection on [0, 1] refined with Newton steps through the
    beta density; the bracket guarantees convergence, Newton supplies the
    rate.  Raises :class:`NumericsError` carrying the last bracket if the
    iteration budget is exhausted.
    """
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"shape parameters must be positive, got a={a}, b={b}")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    x = a / (a + b)
    lb = log_beta(a, b)
    # accept once the CDF residual is negligible relative to the nearer tail
    f_tol = tol.rel_tol * min(p, 1.0 - p)
    for _ in range(tol.max_iter):
        try:
            f = reg_incomplete_beta(a, b, x, tol) - p
        except NumericsError as exc:
            raise NumericsError(
                f"beta quantile evaluation failed at x={x} for p={p}, a={a}, b={b}: {exc}",
                bracket=(lo, hi),
            ) from exc
        if abs(f) <= max(f_tol, 1e-300):
            return x
        if f > 0.0:
            hi = x
        else:
            lo = x
        if hi - lo <= 1e-15:
            return 0.5 * (lo + hi)
        log_pdf = (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - lb
        step = 0.5 * (lo + hi)
        if log_pdf < 700.0:
            pdf = math.exp(log_pdf)
            if pdf > 0.0:
                candidate = x - f / pdf
                if lo < candidate < hi:
                    step = candidate
        x = step
    raise NumericsError(
        f"beta quantile iteration exhausted for p={p}, a={a}, b={b}",
        bracket=(lo, hi),
    )


def student_t_tail_quantile(tail: float, dof: int, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> float:
    """Value a Student-t variable with ``dof`` degrees of freedom exceeds
    with probability ``tail`` (0 < tail <= 0.5).

    Solving in survival space keeps full precision for the extreme tails the
    confidence estimator uses (tail down to 1e-15 and below).
    """
    if not (0.0 < tail <= 0.5):
        raise DomainError(f"tail must lie in (0, 0.5], got {tail}")
    _validate_dof(dof)
    x = beta_inv_cdf(2.0 * tail, 0.5 * dof, 0.5, tol)
    if x <= 0.0:
        raise NumericsError(f"tail quantile underflow for tail={tail}, dof={dof}")
    return math.sqrt(dof * (1.0 - x) / x)


def student_t_inv_cdf(p: float, dof: int, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> float:
    """Student-t quantile at probability p, antisymmetric around p = 0.5."""
    _validate_dof(dof)
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie strictly in (0, 1), got {p} (quantile is infinite)")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_tail_quantile(p, dof, tol)
    return student_t_tail_quantile(1.0 - p, dof, tol)


def _validate_dof(dof: int) -> None:
    if dof != int(dof) or int(dof) < 1:
        raise DomainError(f"degrees of freedom must be an integer >= 1, got {dof}")


def _np_log_sum_exp(values: np.ndarray) -> float:
    top = float(np.max(values))
    if top == -math.inf:
        return -math.inf
    return top + math.log(float(np.sum(np.exp(values - top))))


def _log_simpson_doubling(
    log_f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    rel_tol: float,
    max_nodes: int = 1 << 21,
) -> float:
    """log of the integral of exp(log_f) over [lo, hi] by composite Simpson,
    doubling the interval count until the relative change drops below
    ``rel_tol``."""
    n = 64
    previous = None
    while n <= max_nodes:
        xs = np.linspace(lo, hi, n + 1)
        h = (hi - lo) / n
        weights = np.full(n + 1, 2.0)
        weights[1::2] = 4.0
        weights[0] = weights[-1] = 1.0
        log_terms = log_f(xs) + np.log(weights * (h / 3.0))
        current = _np_log_sum_exp(log_terms)
        if previous is not None:
            if current == previous or abs(math.expm1(previous - current)) < rel_tol:
                return current
        previous = current
        n *= 2
    raise NumericsError(f"Simpson refinement did not converge below {rel_tol} relative change")


def gauss_mixture_renyi_numeric(
    d: float,
    sigma: float,
    q: float,
    order: float,
    reverse: bool = False,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
) -> float:
    """Renyi divergence of the stated order, by adaptive quadrature, between
    the mixture (1-q) N(0, sigma^2) + q N(d, sigma^2) and N(0, sigma^2).

    ``reverse=False`` gives D(mixture || pure); ``reverse=True`` gives
    D(pure || mixture).  This is the brute-force oracle against which the
    closed-form moment sums are checked, so it shares no code with them.
    """
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"q must lie in [0, 1], got {q}")
    if not order > 1.0:
        raise DomainError(f"order must exceed 1, got {order}")
    if d < 0.0:
        raise DomainError(f"distance must be non-negative, got {d}")
    if d == 0.0 or q == 0.0:
        return 0.0

    log_norm = -0.5 * math.log(2.0 * math.pi * sigma * sigma)
    inv_two_var = 1.0 / (2.0 * sigma * sigma)

    def log_pure(w: np.ndarray) -> np.ndarray:
        return log_norm - w * w * inv_two_var

    if q == 1.0:

        def log_mix(w: np.ndarray) -> np.ndarray:
            return log_norm - (w - d) * (w - d) * inv_two_var

    else:
        log_one_minus_q = math.log1p(-q)
        log_q = math.log(q)

        def log_mix(w: np.ndarray) -> np.ndarray:
            shifted = w - d
            return np.logaddexp(
                log_one_minus_q + log_norm - w * w * inv_two_var,
                log_q + log_norm - shifted * shifted * inv_two_var,
            )

    log_p, log_q_ = (log_pure, log_mix) if reverse else (log_mix, log_pure)

    def log_integrand(w: np.ndarray) -> np.ndarray:
        return order * log_p(w) + (1.0 - order) * log_q_(w)

    # The integrand of p^order q^(1-order) peaks near +/- order*d depending
    # on direction; 12 sigma beyond the farthest peak leaves < 1e-30 mass out.
    half_width = 12.0 * sigma + (order + 1.0) * d
    log_integral = _log_simpson_doubling(log_integrand, -half_width, half_width, tol.rel_tol)
    return log_integral / (order - 1.0)
