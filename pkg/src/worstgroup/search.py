"""Expected improvement and the three search strategies over the lattice.

All strategies minimize oriented metric values (smaller is worse), never
evaluate the same subgroup twice, and record an identical trace format so
the harness can aggregate them interchangeably.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import PoolExhaustedError, UndefinedMetricError
from .gp import GpModel, HyperGrid, KernelParams, fit, optimize_hypers, posterior_batch
from .oracle import (
    EvaluationLedger,
    LabeledDataset,
    MetricSpec,
    oriented_value,
    supported_subgroups,
)
from .subgroups import AttributeSchema, Subgroup, encode_many

#: Candidates whose EI is within this of the maximum count as tied.
EI_TIE_TOL = 1e-12

#: Used while there are too few observations to select hyperparameters.
_EARLY_PARAMS = KernelParams()


def expected_improvement(mean: float, variance: float, f_best: float) -> float:
    """Closed-form EI for minimization, E[max(f_best - X, 0)], X ~ N(mean, variance).

    With sigma = sqrt(variance) > 0 and z = (f_best - mean) / sigma this is
    (f_best - mean) Phi(z) + sigma phi(z); at sigma = 0 it degenerates to
    max(f_best - mean, 0).
    """
    if not all(map(math.isfinite, (mean, variance, f_best))):
        raise ValueError(
            f"EI inputs must be finite, got mean={mean!r} "
            f"variance={variance!r} f_best={f_best!r}"
        )
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance!r}")
    sigma = math.sqrt(variance)
    diff = f_best - mean
    if sigma == 0.0:
        return max(diff, 0.0)
    z = diff / sigma
    return float(diff * norm.cdf(z) + sigma * norm.pdf(z))


def expected_improvement_batch(
    means: np.ndarray, variances: np.ndarray, f_best: float
) -> np.ndarray:
    """Vectorized :func:`expected_improvement` over candidate arrays."""
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    if not (
        np.isfinite(means).all()
        and np.isfinite(variances).all()
        and math.isfinite(f_best)
    ):
        raise ValueError("EI inputs must be finite")
    if (variances < 0).any():
        raise ValueError("variances must be non-negative")
    sigma = np.sqrt(variances)
    diff = f_best - means
    out = np.maximum(diff, 0.0)
    positive = sigma > 0.0
    if positive.any():
        z = diff[positive] / sigma[positive]
        out[positive] = diff[positive] * norm.cdf(z) + sigma[positive] * norm.pdf(z)
    return np.maximum(out, 0.0)


def _argmax_ei(
    means: np.ndarray,
    variances: np.ndarray,
    f_best: float,
    rng: np.random.Generator,
) -> int:
    """Index of the EI maximizer; ties broken uniformly from the seeded stream."""
    ei = expected_improvement_batch(means, variances, f_best)
    tied = np.flatnonzero(ei >= ei.max() - EI_TIE_TOL)
    if len(tied) == 1:
        return int(tied[0])
    return int(rng.choice(tied))


def suggest_next(
    model: GpModel,
    schema: AttributeSchema,
    candidates: list[Subgroup],
    f_best: float,
    rng: np.random.Generator,
) -> Subgroup:
    """The candidate maximizing EI under the model's posterior."""
    if not candidates:
        raise PoolExhaustedError("no candidates left to suggest")
    encoded = encode_many(schema, candidates)
    means, variances = posterior_batch(model, encoded)
    return candidates[_argmax_ei(means, variances, f_best, rng)]


@dataclass(frozen=True)
class BoConfig:
    """Budgeted BO run settings.

    ``budget`` counts every evaluation including the ``initial_design``
    seeded-uniform subgroups evaluated before the surrogate loop starts.
    """

    budget: int
    seed: int
    initial_design: int = 10
    refit_every: int = 1
    hyper_grid: HyperGrid = HyperGrid()

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if not 0 <= self.initial_design <= self.budget:
            raise ValueError("initial_design must lie in [0, budget]")
        if self.refit_every < 1:
            raise ValueError("refit_every must be at least 1")


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    subgroup: Subgroup
    raw_value: float
    oriented_value: float
    best_so_far_oriented: float
    best_so_far_raw: float


@dataclass
class SearchTrace:
    """Ordered record of one search run.

    ``incumbent`` is the first evaluated subgroup achieving the final
    best-so-far oriented value; ``termination`` is "budget" or
    "pool-exhausted".
    """

    steps: list[TraceStep] = field(default_factory=list)
    incumbent: Subgroup | None = None
    termination: str = "budget"

    @property
    def best_oriented(self) -> float:
        return self.steps[-1].best_so_far_oriented if self.steps else math.inf

    @property
    def best_raw(self) -> float:
        return self.steps[-1].best_so_far_raw if self.steps else math.nan

    def record(self, subgroup: Subgroup, raw: float, oriented: float) -> None:
        if self.steps and oriented >= self.steps[-1].best_so_far_oriented:
            best_oriented = self.steps[-1].best_so_far_oriented
            best_raw = self.steps[-1].best_so_far_raw
        else:
            best_oriented = oriented
            best_raw = raw
            self.incumbent = subgroup
        self.steps.append(
            TraceStep(
                iteration=len(self.steps) + 1,
                subgroup=subgroup,
                raw_value=raw,
                oriented_value=oriented,
                best_so_far_oriented=best_oriented,
                best_so_far_raw=best_raw,
            )
        )


def _evaluate_into(
    trace: SearchTrace,
    ledger: EvaluationLedger,
    dataset: LabeledDataset,
    metric: MetricSpec,
    subgroup: Subgroup,
) -> bool:
    """Evaluate one subgroup into the trace.

    Returns False when the metric turns out to be undefined on the subgroup,
    which excludes it without spending budget (predictions are free; only
    labels are metered).
    """
    try:
        raw, _ = ledger.evaluate(dataset, subgroup, metric)
    except UndefinedMetricError:
        return False
    trace.record(subgroup, raw, oriented_value(raw, metric))
    return True


def _sequential_run(
    dataset: LabeledDataset,
    metric: MetricSpec,
    pool: list[Subgroup],
    order: np.ndarray,
    budget: int,
    support_threshold: int,
) -> SearchTrace:
    ledger = EvaluationLedger(budget, support_threshold)
    trace = SearchTrace()
    for i in order:
        if ledger.remaining == 0:
            break
        _evaluate_into(trace, ledger, dataset, metric, pool[int(i)])
    trace.termination = "budget" if ledger.remaining == 0 else "pool-exhausted"
    return trace


def _require_pool(
    dataset: LabeledDataset, metric: MetricSpec, support_threshold: int
) -> list[Subgroup]:
    pool = supported_subgroups(dataset, metric, support_threshold)
    if not pool:
        raise PoolExhaustedError("no supported subgroups in the lattice")
    return pool


def run_random_search(
    dataset: LabeledDataset,
    metric: MetricSpec,
    budget: int,
    seed: int,
    *,
    support_threshold: int = 1,
) -> SearchTrace:
    """Uniform draws without replacement from the supported pool."""
    rng = np.random.default_rng(seed)
    pool = _require_pool(dataset, metric, support_threshold)
    order = rng.permutation(len(pool))
    return _sequential_run(dataset, metric, pool, order, budget, support_threshold)


def run_exhaustive_search(
    dataset: LabeledDataset,
    metric: MetricSpec,
    budget: int,
    *,
    support_threshold: int = 1,
) -> SearchTrace:
    """Supported subgroups in lexicographic enumeration order until the budget ends."""
    pool = _require_pool(dataset, metric, support_threshold)
    order = np.arange(len(pool))
    return _sequential_run(dataset, metric, pool, order, budget, support_threshold)


def run_bo(
    dataset: LabeledDataset,
    metric: MetricSpec,
    config: BoConfig,
    *,
    support_threshold: int = 1,
) -> SearchTrace:
    """GP + EI search: seeded initial design, then acquire/evaluate/refit.

    Hyperparameters are re-selected by grid search every ``refit_every``
    evaluations once at least two observations exist; the posterior itself
    is refreshed with all data every iteration.
    """
    rng = np.random.default_rng(config.seed)
    pool = _require_pool(dataset, metric, support_threshold)
    encoded = encode_many(dataset.schema, pool)
    ledger = EvaluationLedger(config.budget, support_threshold)
    trace = SearchTrace()

    evaluated_idx: list[int] = []
    oriented: list[float] = []
    excluded: set[int] = set()

    def evaluate(i: int) -> None:
        if _evaluate_into(trace, ledger, dataset, metric, pool[i]):
            evaluated_idx.append(i)
            oriented.append(trace.steps[-1].oriented_value)
        else:
            excluded.add(i)

    n_initial = min(config.initial_design, config.budget, len(pool))
    for i in rng.choice(len(pool), size=n_initial, replace=False):
        evaluate(int(i))

    params: KernelParams | None = None
    last_refit_at = -1
    while ledger.remaining > 0:
        taken = set(evaluated_idx) | excluded
        candidate_idx = [i for i in range(len(pool)) if i not in taken]
        if not candidate_idx:
            break
        if len(evaluated_idx) < 2:
            params = _EARLY_PARAMS
        elif (
            last_refit_at < 0
            or len(evaluated_idx) - last_refit_at >= config.refit_every
        ):
            params = optimize_hypers(
                encoded[evaluated_idx], np.asarray(oriented), config.hyper_grid
            )
            last_refit_at = len(evaluated_idx)
        model = fit(encoded[evaluated_idx], np.asarray(oriented), params)
        f_best = min(oriented) if oriented else 0.0
        means, variances = posterior_batch(model, encoded[candidate_idx])
        evaluate(candidate_idx[_argmax_ei(means, variances, f_best, rng)])

    trace.termination = "budget" if ledger.remaining == 0 else "pool-exhausted"
    return trace
