"""Synthetic and desk-scale workloads driving the two accountants in parallel.

A :class:`SimulationPlan` fixes a gradient-distance model, clipping/noise
policies, estimator settings and a seed; :func:`run_simulation` replays it
step by step, feeding the estimated ledger with sampled pairwise distances
and the worst-case ledger with the clip bound, and records both epsilon
trajectories.  :func:`run_logreg_dpsgd` does the same around an actual
noisy-SGD logistic regression on a tabular CSV.

Randomness contract: one root seed, per-purpose child streams derived
through ``SeedSequence`` spawn keys, so adding a consumer never perturbs the
draws of another.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import os
from dataclasses import dataclass, field
from importlib.resources import files as _resource_files
from pathlib import Path
from typing import Sequence

import numpy as np

from .accountant import DEFAULT_LAMBDA_GRID, Ledger, MODE_BDP, MODE_MA
from .estimator import EstimatorConfig, upper_confidence_log_mean, upper_t_quantile
from .exceptions import ConfigurationError, DataError, DomainError, ParseError
from .mechanisms import MechanismConfig, log_moment_subsampled_batch

__all__ = [
    "GradientModel",
    "ClipPolicy",
    "NoisePolicy",
    "SimulationPlan",
    "PrivacyTrace",
    "TrainingResult",
    "derive_rng",
    "sample_pair_distances",
    "quantile_of_norms",
    "step_costs_for_distances",
    "run_simulation",
    "run_logreg_dpsgd",
    "run_logreg_baseline",
    "leave_one_out_distances",
    "load_tabular_dataset",
    "make_synthetic_dataset",
    "bundled_dataset_path",
    "PRESET_NAMES",
    "preset_plans",
]

# purpose indices for derived random streams
_STREAM_DISTANCES = 0
_STREAM_NOISE = 1
_STREAM_SUBSAMPLING = 2
_STREAM_DATA_SPLIT = 3
_STREAM_CALIBRATION = 4
_STREAM_ESTIMATOR = 5

TRACE_HEADER = "step,epsilon_dp,epsilon_bdp,delta,lambda_star_dp,lambda_star_bdp"


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Child generator for (seed, key); splittable and collision-free."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _derive_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class GradientModel:
    """Distribution of pairwise gradient distances (and of gradient norms for
    quantile-based policies).

    ``kind`` is one of ``weibull`` (shape/scale), ``lognormal`` (shape is the
    log standard deviation, scale is exp of the log mean), ``constant``
    (always ``scale``) or ``empirical`` (resamples ``values``).
    """

    kind: str
    shape: float = 0.5
    scale: float = 1.0
    values: tuple[float, ...] | None = None
    calibration_draws: int = 10**6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("weibull", "lognormal", "constant", "empirical"):
            raise ConfigurationError(f"unknown gradient model kind {self.kind!r}")
        if not self.shape > 0.0:
            raise ConfigurationError(f"shape must be positive, got {self.shape}")
        if not self.scale > 0.0:
            raise ConfigurationError(f"scale must be positive, got {self.scale}")
        if self.kind == "empirical":
            if not self.values:
                raise ConfigurationError("empirical model needs recorded values")
            vals = tuple(float(v) for v in self.values)
            if any(v < 0.0 for v in vals):
                raise DataError("recorded distances must be non-negative")
            object.__setattr__(self, "values", vals)
        if self.calibration_draws < 1:
            raise ConfigurationError("calibration_draws must be >= 1")


def _draw_distances(model: GradientModel, rng: np.random.Generator, size) -> np.ndarray:
    if model.kind == "weibull":
        return model.scale * rng.weibull(model.shape, size=size)
    if model.kind == "lognormal":
        return rng.lognormal(mean=math.log(model.scale), sigma=model.shape, size=size)
    if model.kind == "constant":
        return np.full(size, model.scale, dtype=float)
    return rng.choice(np.asarray(model.values, dtype=float), size=size, replace=True)


def sample_pair_distances(model: GradientModel, m: int, rng_stream: np.random.Generator) -> np.ndarray:
    """Draw m non-negative pairwise distances; deterministic given the stream."""
    if m < 2:
        raise DomainError(f"m must be >= 2, got {m}")
    return _draw_distances(model, rng_stream, m)


def _nearest_rank(sorted_values: np.ndarray, p: float) -> float:
    rank = max(1, math.ceil(p * len(sorted_values)))
    return float(sorted_values[rank - 1])


def quantile_of_norms(model: GradientModel, p: float) -> float:
    """p-quantile of the modelled norm distribution; closed form where one
    exists, else the nearest-rank empirical quantile over calibration draws."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"quantile level must lie in (0, 1), got {p}")
    if model.kind == "weibull":
        return model.scale * (-math.log1p(-p)) ** (1.0 / model.shape)
    if model.kind == "constant":
        return model.scale
    if model.kind == "empirical":
        return _nearest_rank(np.sort(np.asarray(model.values, dtype=float)), p)
    rng = derive_rng(model.seed, _STREAM_CALIBRATION)
    draws = np.sort(_draw_distances(model, rng, model.calibration_draws))
    return _nearest_rank(draws, p)


@dataclass(frozen=True)
class ClipPolicy:
    """How the sensitivity bound is chosen: not at all, at a norm quantile,
    or at an absolute value."""

    kind: str
    value: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "quantile", "absolute"):
            raise ConfigurationError(f"unknown clip policy {self.kind!r}")
        if self.kind == "quantile" and not (self.value is not None and 0.0 < self.value < 1.0):
            raise ConfigurationError(f"quantile clip level must lie in (0, 1), got {self.value}")
        if self.kind == "absolute" and not (self.value is not None and self.value > 0.0):
            raise ConfigurationError(f"absolute clip bound must be positive, got {self.value}")

    @classmethod
    def none(cls) -> "ClipPolicy":
        return cls("none")

    @classmethod
    def quantile(cls, p: float) -> "ClipPolicy":
        return cls("quantile", p)

    @classmethod
    def absolute(cls, c: float) -> "ClipPolicy":
        return cls("absolute", c)


@dataclass(frozen=True)
class NoisePolicy:
    """How the noise scale is chosen: pinned to a norm quantile (times the
    mechanism's multiplier and factor) or taken from the mechanism config;
    an explicit absolute value overrides both."""

    kind: str
    value: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("quantile", "absolute"):
            raise ConfigurationError(f"unknown noise policy {self.kind!r}")
        if self.kind == "quantile" and not (self.value is not None and 0.0 < self.value < 1.0):
            raise ConfigurationError(f"quantile noise level must lie in (0, 1), got {self.value}")
        if self.kind == "absolute" and self.value is not None and not self.value > 0.0:
            raise ConfigurationError(f"absolute noise scale must be positive, got {self.value}")

    @classmethod
    def quantile(cls, p: float) -> "NoisePolicy":
        return cls("quantile", p)

    @classmethod
    def absolute(cls, value: float | None = None) -> "NoisePolicy":
        return cls("absolute", value)


@dataclass(frozen=True)
class SimulationPlan:
    """Everything a reproducible accounting run needs."""

    model: GradientModel
    steps: int
    mechanism: MechanismConfig
    estimator: EstimatorConfig
    clip_policy: ClipPolicy = field(default_factory=ClipPolicy.none)
    noise_policy: NoisePolicy = field(default_factory=NoisePolicy.absolute)
    delta: float = 1e-5
    lambda_grid: tuple[int, ...] | None = None
    seed: int = 0
    gradient_aggregation: str = "mean"
    name: str = "custom"

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {self.steps}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigurationError(f"delta must lie in (0, 1), got {self.delta}")
        if self.gradient_aggregation not in ("mean", "sum"):
            raise ConfigurationError(
                f"gradient_aggregation must be 'mean' or 'sum', got {self.gradient_aggregation!r}"
            )
        if self.lambda_grid is not None:
            object.__setattr__(self, "lambda_grid", tuple(int(l) for l in self.lambda_grid))

    def grid(self) -> tuple[int, ...]:
        return self.lambda_grid if self.lambda_grid is not None else DEFAULT_LAMBDA_GRID

    def as_dict(self) -> dict:
        payload = dataclasses.asdict(self)
        return payload


@dataclass(frozen=True)
class ResolvedMechanism:
    """Concrete noise scale and clip bounds after policy resolution."""

    noise_std: float
    clip_bdp: float | None
    clip_ma: float
    q: float


def _resolve_plan(plan: SimulationPlan) -> ResolvedMechanism:
    mech = plan.mechanism
    clip: float | None
    if plan.clip_policy.kind == "quantile":
        clip = quantile_of_norms(plan.model, plan.clip_policy.value)
    elif plan.clip_policy.kind == "absolute":
        clip = plan.clip_policy.value
    else:
        clip = None

    if plan.noise_policy.kind == "quantile":
        reference = quantile_of_norms(plan.model, plan.noise_policy.value)
        noise_std = mech.noise_multiplier_factor * mech.sigma * reference
        clip_ma = clip if clip is not None else reference
    else:
        base = clip if clip is not None else mech.clip
        if plan.noise_policy.value is not None:
            noise_std = plan.noise_policy.value
        elif base is not None:
            noise_std = mech.noise_multiplier_factor * mech.sigma * base
        else:
            noise_std = mech.sigma
        clip_ma = base
        if clip_ma is None:
            raise ConfigurationError(
                "the worst-case ledger needs a clip bound: set a clip policy, a "
                "mechanism clip, or a quantile noise policy"
            )
    return ResolvedMechanism(noise_std=noise_std, clip_bdp=clip, clip_ma=clip_ma, q=mech.q)


@dataclass
class PrivacyTrace:
    """Per-step epsilon evolution for both accountants plus run metadata."""

    step: np.ndarray
    epsilon_dp: np.ndarray
    epsilon_bdp: np.ndarray
    delta: float
    lambda_star_dp: np.ndarray
    lambda_star_bdp: np.ndarray
    metadata: dict
    ledger_dp: Ledger | None = None
    ledger_bdp: Ledger | None = None

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(TRACE_HEADER + "\n")
            for i in range(len(self.step)):
                handle.write(
                    f"{int(self.step[i])},{self.epsilon_dp[i]:.10g},"
                    f"{self.epsilon_bdp[i]:.10g},{self.delta:.10g},"
                    f"{int(self.lambda_star_dp[i])},{int(self.lambda_star_bdp[i])}\n"
                )


def step_costs_for_distances(
    distances: Sequence[float],
    cfg: MechanismConfig,
    grid: Sequence[int],
    estimator_cfg: EstimatorConfig,
    ma_costs: np.ndarray | None = None,
) -> np.ndarray:
    """Per-order estimated costs for one step's sampled pairwise distances.

    ``ma_costs`` caps each entry at the worst-case cost when the estimator
    is configured to clamp (valid whenever recording respected the clip
    bound)."""
    arr = np.asarray(distances, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != estimator_cfg.m:
        raise ConfigurationError(
            f"expected {estimator_cfg.m} distances per step, got shape {arr.shape}"
        )
    if np.any(arr < 0.0):
        raise DataError("distances must be non-negative")
    quantile = upper_t_quantile(estimator_cfg.gamma, estimator_cfg.m - 1)
    out = np.empty(len(grid))
    for j, lam in enumerate(grid):
        left, right = log_moment_subsampled_batch(arr, cfg, lam)
        cost = float(upper_confidence_log_mean(np.maximum(left, right), quantile))
        if estimator_cfg.clamp_to_ma and ma_costs is not None:
            cost = min(cost, float(ma_costs[j]))
        out[j] = cost
    return out


def _ma_cost_vector(cfg: MechanismConfig, d_worst: float, grid: Sequence[int]) -> np.ndarray:
    worst = np.array([d_worst])
    out = np.empty(len(grid))
    for j, lam in enumerate(grid):
        left, right = log_moment_subsampled_batch(worst, cfg, lam)
        out[j] = max(float(left[0]), float(right[0]))
    return out


def _trace_from_cost_tables(
    bdp_costs: np.ndarray,
    ma_costs: np.ndarray,
    grid: Sequence[int],
    delta: float,
    gamma: float,
    metadata: dict,
    estimated_flags: np.ndarray | None = None,
) -> PrivacyTrace:
    steps = bdp_costs.shape[0]
    ledger_bdp = Ledger(grid, mode=MODE_BDP, gamma=gamma)
    ledger_dp = Ledger(grid, mode=MODE_MA, gamma=0.0)
    eps_dp = np.empty(steps)
    eps_bdp = np.empty(steps)
    lam_dp = np.empty(steps, dtype=int)
    lam_bdp = np.empty(steps, dtype=int)
    for t in range(steps):
        ledger_dp.record_step(ma_costs)
        estimated = True if estimated_flags is None else bool(estimated_flags[t])
        ledger_bdp.record_step(bdp_costs[t], estimated=estimated)
        report_dp = ledger_dp.epsilon_at(delta)
        report_bdp = ledger_bdp.epsilon_at(delta)
        eps_dp[t] = report_dp.epsilon
        eps_bdp[t] = report_bdp.epsilon
        lam_dp[t] = report_dp.lambda_star
        lam_bdp[t] = report_bdp.lambda_star
    return PrivacyTrace(
        step=np.arange(1, steps + 1),
        epsilon_dp=eps_dp,
        epsilon_bdp=eps_bdp,
        delta=delta,
        lambda_star_dp=lam_dp,
        lambda_star_bdp=lam_bdp,
        metadata=metadata,
        ledger_dp=ledger_dp,
        ledger_bdp=ledger_bdp,
    )


def run_simulation(plan: SimulationPlan) -> PrivacyTrace:
    """Replay the plan: per step, draw m distances, cap them under the clip
    policy, estimate the per-order cost for the estimated ledger, charge the
    worst case to the other, and record both epsilon trajectories."""
    grid = plan.grid()
    resolved = _resolve_plan(plan)
    accounting_cfg = MechanismConfig(sigma=resolved.noise_std, q=resolved.q)
    steps, m = plan.steps, plan.estimator.m

    rng = derive_rng(plan.seed, _STREAM_DISTANCES)
    distances = _draw_distances(plan.model, rng, (steps, m))
    if resolved.clip_bdp is not None:
        np.minimum(distances, resolved.clip_bdp, out=distances)

    clamp = plan.estimator.clamp_to_ma and resolved.clip_bdp is not None
    quantile = upper_t_quantile(plan.estimator.gamma, m - 1)
    flat = distances.ravel()
    bdp_costs = np.empty((steps, len(grid)))
    ma_costs = _ma_cost_vector(accounting_cfg, resolved.clip_ma, grid)
    for j, lam in enumerate(grid):
        left, right = log_moment_subsampled_batch(flat, accounting_cfg, lam)
        values = np.maximum(left, right).reshape(steps, m)
        cost = upper_confidence_log_mean(values, quantile)
        if clamp:
            np.minimum(cost, ma_costs[j], out=cost)
        bdp_costs[:, j] = cost
    # a step saturated at the cap at every order is a deterministic bound
    # and charges no estimator failure mass
    estimated_flags = np.any(bdp_costs < ma_costs[None, :], axis=1) if clamp else None

    metadata = {
        "plan": plan.as_dict(),
        "resolved": {
            "noise_std": resolved.noise_std,
            "clip": resolved.clip_bdp,
            "clip_ma": resolved.clip_ma,
            "q": resolved.q,
            "lambda_grid": list(grid),
        },
        "seed": plan.seed,
    }
    return _trace_from_cost_tables(
        bdp_costs, ma_costs, grid, plan.delta, plan.estimator.gamma, metadata, estimated_flags
    )


# ----------------------------------------------------------------------
# presets reproducing the synthetic studies
# ----------------------------------------------------------------------

PRESET_NAMES = ("fig1a", "fig1b", "fig1c", "fig2a", "fig2b", "fig2c", "fig3", "fig6")

_SIGMA_SWEEP = (0.5, 1.0, 2.0, 4.0)
_PRESET_Q = 64.0 / 60000.0
_PRESET_DELTA = 1e-5
_PRESET_GAMMA = 1e-15
_PRESET_M = 16


def preset_plans(name: str, seed: int = 0, steps: int = 10_000) -> list[tuple[str, SimulationPlan]]:
    """Expand a preset into its (variant label, plan) grid points.

    ``fig1*``: clipping for both accountants at a norm quantile, noise scale
    swept as a multiplier of the clip bound (Weibull scale normalized so the
    clip lands at 1).  ``fig2*``: same sweep with the estimated side left
    unclipped and the worst-case side clipped at the noise quantile.
    ``fig3``: noise pinned at a quantile of the norms (scale equal to the
    clip), one trace per quantile.  ``fig6``: fixed distance equal to the
    clip bound, absolute unit noise, one run per clip value.
    """
    if name not in PRESET_NAMES:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        )
    estimator = EstimatorConfig(m=_PRESET_M, gamma=_PRESET_GAMMA)
    plans: list[tuple[str, SimulationPlan]] = []

    if name.startswith("fig1"):
        level = {"fig1a": 0.01, "fig1b": 0.50, "fig1c": 0.99}[name]
        # normalize the scale so the clip quantile sits at 1
        scale = (-math.log1p(-level)) ** -2.0
        model = GradientModel("weibull", shape=0.5, scale=scale, seed=seed)
        for i, sigma in enumerate(_SIGMA_SWEEP):
            plan = SimulationPlan(
                model=model,
                steps=steps,
                mechanism=MechanismConfig(sigma=sigma, q=_PRESET_Q, noise_multiplier_factor=2.0),
                estimator=estimator,
                clip_policy=ClipPolicy.quantile(level),
                noise_policy=NoisePolicy.absolute(),
                delta=_PRESET_DELTA,
                seed=_derive_seed(seed, i),
                name=f"{name}-sigma{sigma:g}",
            )
            plans.append((f"sigma{sigma:g}", plan))
        return plans

    if name.startswith("fig2"):
        level = {"fig2a": 0.05, "fig2b": 0.50, "fig2c": 0.95}[name]
        model = GradientModel("weibull", shape=0.5, scale=1.0, seed=seed)
        for i, sigma in enumerate(_SIGMA_SWEEP):
            plan = SimulationPlan(
                model=model,
                steps=steps,
                mechanism=MechanismConfig(sigma=sigma, q=_PRESET_Q, noise_multiplier_factor=2.0),
                estimator=estimator,
                clip_policy=ClipPolicy.none(),
                noise_policy=NoisePolicy.quantile(level),
                delta=_PRESET_DELTA,
                seed=_derive_seed(seed, i),
                name=f"{name}-sigma{sigma:g}",
            )
            plans.append((f"sigma{sigma:g}", plan))
        return plans

    if name == "fig3":
        model = GradientModel("weibull", shape=0.5, scale=1.0, seed=seed)
        for i, level in enumerate((0.05, 0.25, 0.75, 0.95)):
            plan = SimulationPlan(
                model=model,
                steps=steps,
                mechanism=MechanismConfig(sigma=1.0, q=_PRESET_Q),
                estimator=estimator,
                clip_policy=ClipPolicy.none(),
                noise_policy=NoisePolicy.quantile(level),
                delta=_PRESET_DELTA,
                seed=_derive_seed(seed, i),
                name=f"fig3-q{level:g}",
            )
            plans.append((f"quantile{level:g}", plan))
        return plans

    # fig6: epsilon as a function of the moment order for two clip bounds
    for i, clip in enumerate((0.1, 1.0)):
        plan = SimulationPlan(
            model=GradientModel("constant", scale=clip, seed=seed),
            steps=steps,
            mechanism=MechanismConfig(sigma=1.0, q=_PRESET_Q),
            estimator=estimator,
            clip_policy=ClipPolicy.absolute(clip),
            noise_policy=NoisePolicy.absolute(1.0),
            delta=_PRESET_DELTA,
            seed=_derive_seed(seed, i),
            name=f"fig6-C{clip:g}",
        )
        plans.append((f"C{clip:g}", plan))
    return plans


# ----------------------------------------------------------------------
# desk-scale DP-SGD logistic regression
# ----------------------------------------------------------------------


@dataclass
class TrainingResult:
    """Privacy trace of a training run plus per-epoch accuracy history."""

    trace: PrivacyTrace | None
    train_accuracy: list[float]
    test_accuracy: list[float]


def load_tabular_dataset(path: str | os.PathLike, label_col: str) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Numeric feature matrix and binary {0,1} label vector from a CSV with
    a header row."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("dataset is empty", line=1) from None
        if label_col not in header:
            raise DataError(f"label column {label_col!r} not found in header {header}")
        label_idx = header.index(label_col)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]
        rows: list[list[float]] = []
        labels: list[float] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"row has {len(row)} fields, header has {len(header)}", line=line_no
                )
            parsed: list[float] = []
            for i, cell in enumerate(row):
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(
                        f"non-numeric value {cell!r}", line=line_no, column=header[i]
                    ) from None
                if i == label_idx:
                    labels.append(value)
                else:
                    parsed.append(value)
            rows.append(parsed)
    if len(rows) < 100:
        raise DataError(f"dataset carries {len(rows)} rows; at least 100 required")
    y = np.asarray(labels)
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise DataError(f"label column {label_col!r} must be binary 0/1")
    return np.asarray(rows), y, feature_names


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def _accuracy(features: np.ndarray, labels: np.ndarray, weights: np.ndarray) -> float:
    predictions = features @ weights > 0.0
    return float(np.mean(predictions == (labels > 0.5)))


def _prepare_split(path, label_col, seed, test_fraction=0.2):
    features, labels, _ = load_tabular_dataset(path, label_col)
    order = derive_rng(seed, _STREAM_DATA_SPLIT).permutation(len(labels))
    n_test = max(1, int(round(test_fraction * len(labels))))
    test_idx, train_idx = order[:n_test], order[n_test:]
    mu = features[train_idx].mean(axis=0)
    sd = features[train_idx].std(axis=0)
    sd[sd == 0.0] = 1.0
    standardized = (features - mu) / sd
    design = np.hstack([standardized, np.ones((len(labels), 1))])
    return design[train_idx], labels[train_idx], design[test_idx], labels[test_idx]


def _per_example_gradients(features, labels, weights):
    residual = _sigmoid(features @ weights) - labels
    return residual[:, None] * features


def leave_one_out_distances(
    clipped_grads: np.ndarray, picked: np.ndarray, aggregation: str
) -> np.ndarray:
    """Distance between the batch aggregate with and without one example,
    expressed in the same units as the mechanism noise (the summed-gradient
    level).

    Under ``mean`` the batch aggregate is the average, so the raw distance
    ||mean(B) - mean(B minus i)|| = ||g_i - gbar|| / (|B| - 1) is rescaled by
    |B| to noise units; under ``sum`` the distance is the clipped
    per-example norm itself.
    """
    if aggregation == "mean":
        batch = clipped_grads.shape[0]
        centroid = clipped_grads.mean(axis=0)
        return np.linalg.norm(clipped_grads[picked] - centroid, axis=1) * (
            batch / (batch - 1.0)
        )
    return np.linalg.norm(clipped_grads[picked], axis=1)


def run_logreg_baseline(
    dataset: str | os.PathLike,
    plan: SimulationPlan,
    label_col: str = "label",
    learning_rate: float = 0.5,
) -> TrainingResult:
    """Noise-free, unclipped twin of :func:`run_logreg_dpsgd`; same batches,
    same step count, no accounting."""
    return _train_logreg(dataset, plan, label_col, learning_rate, private=False)


def run_logreg_dpsgd(
    dataset: str | os.PathLike,
    plan: SimulationPlan,
    label_col: str = "label",
    learning_rate: float = 0.5,
) -> TrainingResult:
    """Minibatch SGD with per-example clipping and Gaussian noise, accounted
    in parallel by both ledgers.

    The batch gradient convention is ``plan.gradient_aggregation``; under
    ``mean`` the leave-one-out distance between batch means is rescaled into
    noise units (factor batch/(batch-1)) and the worst case is
    2*clip*batch/(batch-1); under ``sum`` the distance is the clipped
    per-example norm and the worst case is the clip bound itself.  One
    convention governs both ledgers for the whole run.
    """
    return _train_logreg(dataset, plan, label_col, learning_rate, private=True)


def _train_logreg(dataset, plan, label_col, learning_rate, private):
    mech = plan.mechanism
    if private and mech.clip is None:
        raise ConfigurationError("noisy training requires a clip bound on the mechanism")
    x_train, y_train, x_test, y_test = _prepare_split(dataset, label_col, plan.seed)
    n_train, dim = x_train.shape
    batch = int(round(mech.q * n_train))
    if batch < 2:
        raise ConfigurationError(
            f"q={mech.q} with {n_train} training rows gives batch size {batch} < 2"
        )
    m = min(plan.estimator.m, batch)
    grid = plan.grid()
    noise_std = mech.noise_std

    rng_batch = derive_rng(plan.seed, _STREAM_SUBSAMPLING)
    rng_noise = derive_rng(plan.seed, _STREAM_NOISE)
    rng_pick = derive_rng(plan.seed, _STREAM_ESTIMATOR)
    quantile = upper_t_quantile(plan.estimator.gamma, m - 1)

    if private:
        clip = mech.clip
        if plan.gradient_aggregation == "mean":
            d_worst = 2.0 * clip * batch / (batch - 1.0)
        else:
            d_worst = clip
        accounting_cfg = MechanismConfig(sigma=noise_std, q=mech.q)
        ma_costs = _ma_cost_vector(accounting_cfg, d_worst, grid)
        bdp_costs = np.empty((plan.steps, len(grid)))

    weights = np.zeros(dim)
    steps_per_epoch = max(1, n_train // batch)
    train_acc: list[float] = []
    test_acc: list[float] = []
    for t in range(plan.steps):
        idx = rng_batch.choice(n_train, size=batch, replace=False)
        grads = _per_example_gradients(x_train[idx], y_train[idx], weights)
        if private:
            norms = np.linalg.norm(grads, axis=1)
            scale = np.where(norms > 0.0, np.minimum(1.0, clip / np.maximum(norms, 1e-300)), 1.0)
            clipped = grads * scale[:, None]
            update = clipped.sum(axis=0) + rng_noise.normal(0.0, noise_std, size=dim)
            weights = weights - learning_rate * update / batch

            picked = rng_pick.choice(batch, size=m, replace=False)
            dvals = leave_one_out_distances(clipped, picked, plan.gradient_aggregation)
            for j, lam in enumerate(grid):
                left, right = log_moment_subsampled_batch(dvals, accounting_cfg, lam)
                cost = float(
                    upper_confidence_log_mean(np.maximum(left, right), quantile)
                )
                if plan.estimator.clamp_to_ma:
                    cost = min(cost, float(ma_costs[j]))
                bdp_costs[t, j] = cost
        else:
            weights = weights - learning_rate * grads.mean(axis=0)
        if (t + 1) % steps_per_epoch == 0 or t + 1 == plan.steps:
            train_acc.append(_accuracy(x_train, y_train, weights))
            test_acc.append(_accuracy(x_test, y_test, weights))

    if not private:
        return TrainingResult(trace=None, train_accuracy=train_acc, test_accuracy=test_acc)

    metadata = {
        "plan": plan.as_dict(),
        "resolved": {
            "noise_std": noise_std,
            "clip": mech.clip,
            "d_worst": d_worst,
            "q": mech.q,
            "batch": batch,
            "m": m,
            "lambda_grid": list(grid),
            "aggregation": plan.gradient_aggregation,
        },
        "seed": plan.seed,
    }
    estimated_flags = None
    if plan.estimator.clamp_to_ma:
        estimated_flags = np.any(bdp_costs < ma_costs[None, :], axis=1)
    trace = _trace_from_cost_tables(
        bdp_costs, ma_costs, grid, plan.delta, plan.estimator.gamma, metadata, estimated_flags
    )
    return TrainingResult(trace=trace, train_accuracy=train_acc, test_accuracy=test_acc)


# ----------------------------------------------------------------------
# bundled synthetic dataset
# ----------------------------------------------------------------------


def make_synthetic_dataset(
    path: str | os.PathLike,
    rows: int = 1000,
    informative_offset: float = 1.4,
    n_features: int = 6,
    seed: int = 7,
) -> None:
    """Two-blob binary classification CSV: two informative coordinates
    shifted by +/- ``informative_offset``, the rest pure noise."""
    rng = derive_rng(seed, _STREAM_DATA_SPLIT)
    labels = rng.integers(0, 2, size=rows)
    features = rng.normal(size=(rows, n_features))
    shift = np.where(labels[:, None] == 1, informative_offset, -informative_offset)
    features[:, :2] += shift
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(f"f{i}" for i in range(n_features)) + ",label\n")
        for i in range(rows):
            cells = ",".join(f"{features[i, j]:.6f}" for j in range(n_features))
            handle.write(f"{cells},{int(labels[i])}\n")


def bundled_dataset_path() -> Path:
    """Path of the packaged 1000-row synthetic binary dataset."""
    return Path(str(_resource_files("bayesdp.data").joinpath("synth_binary_1000.csv")))
