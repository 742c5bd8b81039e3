"""The privacy ledger: per-step costs accumulated over a grid of integer
moment orders, converted to (epsilon, delta) on demand.

Costs add across steps (the exponential moment of the total privacy loss
factorizes), so the ledger stores one running sum per grid order.  For a
fixed delta,

    epsilon = min over lambda of (cum_cost(lambda) - log(delta - gamma_mass)) / lambda

and dually for a fixed epsilon.  ``gamma_mass`` is the accumulated failure
probability of the finite-sample cost estimator (steps * gamma in estimated
mode, zero in worst-case mode); it is spent out of delta before the Chernoff
part.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import (
    BudgetExhaustedError,
    ConfigurationError,
    DataError,
    DomainError,
    ParseError,
)

__all__ = [
    "DEFAULT_LAMBDA_GRID",
    "Ledger",
    "PrivacyReport",
    "compose_basic",
    "group_privacy",
    "attack_success_probability",
]

# Dense low orders where the optimum usually sits, sparse high orders for
# low signal-to-noise regimes whose optimum drifts far out.
DEFAULT_LAMBDA_GRID: tuple[int, ...] = tuple(range(1, 65)) + (96, 128, 192, 256, 384, 512)

MODE_MA = "ma"
MODE_BDP = "bdp"

_LEDGER_SCHEMA_VERSION = 1


def attack_success_probability(epsilon: float) -> float:
    """Upper bound 1 / (1 + e^-epsilon) on a binary membership attacker's
    success probability under a flat prior."""
    if epsilon < 0.0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon}")
    return 1.0 / (1.0 + math.exp(-epsilon))


@dataclass(frozen=True)
class PrivacyReport:
    """A single (epsilon, delta) statement with its optimizing grid order,
    the implied attacker success probability, and the accounting mode."""

    epsilon: float
    delta: float
    lambda_star: int
    attack_success: float
    mode: str

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "lambda_star": self.lambda_star,
            "attack_success": self.attack_success,
            "mode": self.mode,
        }


class Ledger:
    """Running per-order cost sums for one accounting mode.

    Mutation is single-writer (:meth:`record_step`); the conversion queries
    are pure reads and safe to run concurrently with each other.

    In estimated mode each recorded step normally charges one unit of the
    estimator failure probability.  A step whose recorded costs saturated at
    the worst-case cap at every order carries a deterministic upper bound
    (the estimate was not consulted), cannot undershoot the true cost, and
    is recorded with ``estimated=False`` so it charges nothing; this keeps a
    run whose every step saturates exactly equivalent to the worst-case
    ledger.
    """

    def __init__(
        self,
        lambda_grid: Sequence[int] = DEFAULT_LAMBDA_GRID,
        mode: str = MODE_BDP,
        gamma: float | None = None,
    ):
        grid = tuple(int(l) for l in lambda_grid)
        if not grid:
            raise ConfigurationError("lambda grid must be non-empty")
        if any(l < 1 for l in grid):
            raise ConfigurationError("lambda grid entries must be positive integers")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigurationError("lambda grid must be strictly ascending")
        if mode not in (MODE_MA, MODE_BDP):
            raise ConfigurationError(f"mode must be '{MODE_MA}' or '{MODE_BDP}', got {mode!r}")
        if gamma is None:
            gamma = 1e-15 if mode == MODE_BDP else 0.0
        if mode == MODE_MA and gamma != 0.0:
            raise ConfigurationError("worst-case mode carries no estimator failure mass")
        if not (0.0 <= gamma < 1.0):
            raise ConfigurationError(f"gamma must lie in [0, 1), got {gamma}")
        self.lambda_grid = grid
        self.mode = mode
        self.gamma = float(gamma)
        self.cum_cost = np.zeros(len(grid))
        self.steps = 0
        self.estimated_steps = 0

    @property
    def gamma_mass(self) -> float:
        """Total estimator failure probability charged so far."""
        return self.estimated_steps * self.gamma if self.mode == MODE_BDP else 0.0

    def record_step(self, costs: Sequence[float], estimated: bool | None = None) -> "Ledger":
        """Add one step's per-order costs; returns self for chaining.

        ``estimated`` marks whether the costs came from the finite-sample
        estimator (charging its failure probability) or are deterministic
        upper bounds; it defaults to True in estimated mode.
        """
        arr = np.asarray(costs, dtype=float)
        if arr.shape != (len(self.lambda_grid),):
            raise ConfigurationError(
                f"costs carry {arr.shape} entries, grid has {len(self.lambda_grid)}"
            )
        if not np.all(np.isfinite(arr)):
            raise DataError("per-step costs must be finite")
        if np.any(arr < 0.0):
            raise DataError("per-step costs must be non-negative")
        self.cum_cost += arr
        self.steps += 1
        if estimated is None:
            estimated = self.mode == MODE_BDP
        if estimated and self.mode == MODE_BDP:
            self.estimated_steps += 1
        return self

    def epsilon_profile(self, delta: float) -> np.ndarray:
        """Per-order epsilon bound (cum_cost - log(delta - gamma_mass)) / lambda."""
        feasible = delta - self.gamma_mass
        if feasible <= 0.0:
            raise BudgetExhaustedError(
                f"delta={delta} does not exceed the accumulated estimator failure "
                f"mass {self.gamma_mass}; the smallest feasible delta is any value "
                f"above {self.gamma_mass}",
                min_delta=self.gamma_mass,
            )
        grid = np.asarray(self.lambda_grid, dtype=float)
        return (self.cum_cost - math.log(feasible)) / grid

    def epsilon_at(self, delta: float) -> PrivacyReport:
        """Tightest epsilon over the grid at total failure budget ``delta``.

        Ties break toward the smaller order for reproducibility.  The bound
        is floored at zero (delta >= 1 would otherwise drive it negative).
        """
        profile = self.epsilon_profile(delta)
        idx = int(np.argmin(profile))
        epsilon = max(float(profile[idx]), 0.0)
        return PrivacyReport(
            epsilon=epsilon,
            delta=delta,
            lambda_star=self.lambda_grid[idx],
            attack_success=attack_success_probability(epsilon),
            mode=self.mode,
        )

    def delta_at(self, epsilon: float) -> PrivacyReport:
        """Tightest delta over the grid at fixed ``epsilon``, capped at 1."""
        if epsilon < 0.0:
            raise DomainError(f"epsilon must be non-negative, got {epsilon}")
        grid = np.asarray(self.lambda_grid, dtype=float)
        exponents = self.cum_cost - grid * epsilon
        idx = int(np.argmin(exponents))
        best = float(exponents[idx])
        delta = 1.0 if best >= 0.0 else math.exp(best)
        delta = min(delta + self.gamma_mass, 1.0)
        return PrivacyReport(
            epsilon=epsilon,
            delta=delta,
            lambda_star=self.lambda_grid[idx],
            attack_success=attack_success_probability(epsilon),
            mode=self.mode,
        )

    # ------------------------------------------------------------------
    # serialization: versioned JSON, floats at 17 significant digits so a
    # round trip is bit-exact
    # ------------------------------------------------------------------

    def to_json(self) -> str:
        grid = ", ".join(str(l) for l in self.lambda_grid)
        costs = ", ".join(format(c, ".17g") for c in self.cum_cost)
        return (
            f'{{"version": {_LEDGER_SCHEMA_VERSION}, "mode": "{self.mode}", '
            f'"gamma": {format(self.gamma, ".17g")}, "lambda_grid": [{grid}], '
            f'"cum_cost": [{costs}], "steps": {self.steps}, '
            f'"estimated_steps": {self.estimated_steps}}}'
        )

    @classmethod
    def from_json(cls, text: str) -> "Ledger":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"ledger document is not valid JSON: {exc}", line=exc.lineno) from exc
        if not isinstance(payload, dict):
            raise ParseError("ledger document must be a JSON object")
        version = payload.get("version")
        if version != _LEDGER_SCHEMA_VERSION:
            raise ParseError(f"unsupported ledger version {version!r}")
        try:
            ledger = cls(
                lambda_grid=payload["lambda_grid"],
                mode=payload["mode"],
                gamma=float(payload["gamma"]),
            )
            costs = np.asarray(payload["cum_cost"], dtype=float)
            steps = int(payload["steps"])
        except KeyError as exc:
            raise ParseError(f"ledger document misses field {exc.args[0]!r}") from exc
        # absent in older documents: assume every step consulted the estimator
        estimated = int(payload.get("estimated_steps", steps))
        if costs.shape != (len(ledger.lambda_grid),):
            raise ParseError("cum_cost length does not match lambda_grid")
        if np.any(costs < 0.0) or not np.all(np.isfinite(costs)):
            raise DataError("serialized costs must be finite and non-negative")
        if steps < 0 or not (0 <= estimated <= steps):
            raise DataError("step counters must satisfy 0 <= estimated_steps <= steps")
        ledger.cum_cost = costs
        ledger.steps = steps
        ledger.estimated_steps = estimated if ledger.mode == MODE_BDP else 0
        return ledger

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.to_json())
            handle.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Ledger":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json(handle.read())


def _validate_pair(epsilon: float, delta: float, k: int) -> None:
    if epsilon < 0.0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon}")
    if not (0.0 <= delta <= 1.0):
        raise DomainError(f"delta must lie in [0, 1], got {delta}")
    if k != int(k) or int(k) < 0:
        raise DomainError(f"k must be a non-negative integer, got {k}")


def compose_basic(epsilon: float, delta: float, k: int) -> tuple[float, float]:
    """Naive k-fold composition: (k * epsilon, k * delta)."""
    _validate_pair(epsilon, delta, k)
    return k * epsilon, k * delta


def group_privacy(epsilon: float, delta: float, k: int) -> tuple[float, float]:
    """Guarantee for neighbours differing in k points: (k * epsilon, k * delta)."""
    _validate_pair(epsilon, delta, k)
    return k * epsilon, k * delta
