"""Experiment driver: repeated seeded trials, aggregation, file outputs.

For every selected strategy the harness runs ``trials`` independent searches
(seed = base_seed + trial), merges the traces into one CSV, and writes a
summary JSON with per-iteration mean and standard error of the best-so-far
raw metric, the exhaustively computed true worst subgroup when the pool is
small enough, and the iteration at which each trial first pinned it down.
Outputs carry no timestamps, so identical configs reproduce identical bytes.
"""

from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .errors import NumericalFailureError, UndefinedMetricError
from .oracle import (
    DatasetSpec,
    LabeledDataset,
    MetricSpec,
    build_schema,
    load_dataset,
    oriented_value,
    subgroup_metric,
    supported_subgroups,
)
from .search import BoConfig, SearchTrace, run_bo, run_exhaustive_search, run_random_search
from .subgroups import AttributeSchema, Subgroup

TRACE_COLUMNS = (
    "method",
    "trial",
    "iteration",
    "subgroup_id",
    "subgroup_label",
    "raw_value",
    "oriented_value",
    "best_so_far_raw",
)


def find_true_worst(
    dataset: LabeledDataset,
    metric: MetricSpec,
    support_threshold: int = 1,
) -> tuple[Subgroup, float]:
    """Unmetered exhaustive pass over all supported subgroups.

    Ground truth for reports and tests; ties go to the first subgroup in
    enumeration order.  Returns the subgroup and its raw metric value.
    """
    best: tuple[Subgroup, float] | None = None
    best_oriented = np.inf
    for s in supported_subgroups(dataset, metric, support_threshold):
        try:
            raw = subgroup_metric(dataset, s, metric, support_threshold)
        except UndefinedMetricError:
            continue
        o = oriented_value(raw, metric)
        if o < best_oriented:
            best_oriented = o
            best = (s, raw)
    if best is None:
        raise UndefinedMetricError("no supported subgroup has a defined metric")
    return best


def aggregate(traces: list[SearchTrace]) -> dict:
    """Per-iteration mean and standard error of best-so-far raw values.

    Shorter traces (pool exhausted early) carry their final value forward so
    every trial contributes at every iteration.  Standard error is the
    sample standard deviation over trials divided by sqrt(trials); a single
    trial reports zero.
    """
    if not traces:
        raise ValueError("nothing to aggregate")
    max_len = max(len(t.steps) for t in traces)
    if max_len == 0:
        raise ValueError("cannot aggregate empty traces")
    curves = np.empty((len(traces), max_len))
    for r, t in enumerate(traces):
        values = [s.best_so_far_raw for s in t.steps]
        values += [values[-1]] * (max_len - len(values))
        curves[r] = values
    mean = curves.mean(axis=0)
    if len(traces) > 1:
        stderr = curves.std(axis=0, ddof=1) / np.sqrt(len(traces))
    else:
        stderr = np.zeros(max_len)
    return {"mean": mean.tolist(), "stderr": stderr.tolist()}


def iterations_to_find(trace: SearchTrace, target: Subgroup) -> int | None:
    """First iteration at which the running incumbent equals ``target``."""
    best = np.inf
    for step in trace.steps:
        if step.oriented_value < best:
            best = step.oriented_value
            if step.subgroup == target:
                return step.iteration
    return None


def _run_one(
    dataset: LabeledDataset,
    config: ExperimentConfig,
    strategy: str,
    seed: int,
) -> SearchTrace:
    metric = config.metric
    if strategy == "bo":
        bo = BoConfig(
            budget=config.budget,
            seed=seed,
            initial_design=config.initial_design,
            refit_every=config.refit_every,
            hyper_grid=config.hyper_grid,
        )
        return run_bo(
            dataset, metric, bo, support_threshold=config.support_threshold
        )
    if strategy == "rs":
        return run_random_search(
            dataset,
            metric,
            config.budget,
            seed,
            support_threshold=config.support_threshold,
        )
    if strategy == "es":
        return run_exhaustive_search(
            dataset,
            metric,
            config.budget,
            support_threshold=config.support_threshold,
        )
    raise ValueError(f"unknown strategy {strategy!r}")


_WORKER_STATE: dict = {}


def _worker_init(config: ExperimentConfig, schema: AttributeSchema) -> None:
    _WORKER_STATE["config"] = config
    _WORKER_STATE["schema"] = schema
    _WORKER_STATE["datasets"] = {}


def _worker_run(job: tuple[str, int]) -> tuple[str, int, SearchTrace | None, str]:
    strategy, trial = job
    config: ExperimentConfig = _WORKER_STATE["config"]
    schema: AttributeSchema = _WORKER_STATE["schema"]
    datasets: dict = _WORKER_STATE["datasets"]
    path = config.path_for_trial(trial)
    if path not in datasets:
        datasets[path] = load_dataset(path, config.dataset_spec, schema)
    try:
        trace = _run_one(datasets[path], config, strategy, config.base_seed + trial)
    except NumericalFailureError as exc:
        return strategy, trial, None, str(exc)
    return strategy, trial, trace, ""


@dataclass
class ExperimentResult:
    schema: AttributeSchema
    traces: dict[str, dict[int, SearchTrace]]
    failed: dict[str, dict[int, str]]
    summary: dict
    trace_path: Path
    summary_path: Path


def _distinct_paths(config: ExperimentConfig) -> list[Path]:
    seen: list[Path] = []
    for t in range(config.trials):
        p = config.path_for_trial(t)
        if p not in seen:
            seen.append(p)
    return seen


def _true_worst_section(
    config: ExperimentConfig,
    schema: AttributeSchema,
    datasets: dict[Path, LabeledDataset],
) -> tuple[dict | None, dict[Path, tuple[Subgroup, float]]]:
    pool_sizes = [
        len(supported_subgroups(d, config.metric, config.support_threshold))
        for d in datasets.values()
    ]
    if max(pool_sizes) > config.true_worst_max_pool:
        return None, {}
    per_path = {
        path: find_true_worst(d, config.metric, config.support_threshold)
        for path, d in datasets.items()
    }
    per_trial = [
        per_path[config.path_for_trial(t)] for t in range(config.trials)
    ]
    labels = [schema.label(s) for s, _ in per_trial]
    values = [v for _, v in per_trial]
    modal = max(set(labels), key=labels.count)
    section = {
        "subgroup_label": modal,
        "raw_value": float(np.mean(values)),
        "per_trial": [
            {"subgroup_label": lab, "raw_value": val}
            for lab, val in zip(labels, values)
        ],
    }
    return section, per_path


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run all configured strategies and trials; write trace.csv and summary.json.

    A trial that fails numerically is recorded, warned about and excluded
    from aggregation; the run only raises when every trial fails.
    """
    schema = build_schema(config.dataset_spec, _distinct_paths(config))
    datasets = {
        p: load_dataset(p, config.dataset_spec, schema)
        for p in _distinct_paths(config)
    }

    jobs = [(s, t) for s in config.strategies for t in range(config.trials)]
    traces: dict[str, dict[int, SearchTrace]] = {s: {} for s in config.strategies}
    failed: dict[str, dict[int, str]] = {s: {} for s in config.strategies}

    if config.workers > 1:
        with ProcessPoolExecutor(
            max_workers=config.workers,
            initializer=_worker_init,
            initargs=(config, schema),
        ) as pool:
            results = list(pool.map(_worker_run, jobs))
        for strategy, trial, trace, error in results:
            if trace is None:
                failed[strategy][trial] = error
            else:
                traces[strategy][trial] = trace
    else:
        for strategy, trial in jobs:
            dataset = datasets[config.path_for_trial(trial)]
            try:
                traces[strategy][trial] = _run_one(
                    dataset, config, strategy, config.base_seed + trial
                )
            except NumericalFailureError as exc:
                failed[strategy][trial] = str(exc)

    n_failed = sum(len(f) for f in failed.values())
    if n_failed:
        warnings.warn(
            f"{n_failed} of {len(jobs)} trials failed numerically and were "
            "excluded from aggregation"
        )
    if n_failed == len(jobs):
        raise NumericalFailureError("all trials failed numerically")

    true_worst, per_path_worst = _true_worst_section(config, schema, datasets)

    strategy_sections = {}
    for strategy in config.strategies:
        ok = [traces[strategy][t] for t in sorted(traces[strategy])]
        if not ok:
            strategy_sections[strategy] = {
                "mean": [],
                "stderr": [],
                "failed_trials": sorted(failed[strategy]),
            }
            continue
        section = aggregate(ok)
        if true_worst is not None:
            finds = []
            for t in sorted(traces[strategy]):
                target = per_path_worst[config.path_for_trial(t)][0]
                finds.append(iterations_to_find(traces[strategy][t], target))
            section["iterations_to_find"] = finds
        section["failed_trials"] = sorted(failed[strategy])
        strategy_sections[strategy] = section

    pool_sizes = {
        str(p): len(supported_subgroups(d, config.metric, config.support_threshold))
        for p, d in datasets.items()
    }
    summary = {
        "metric": {
            "kind": config.metric.kind,
            "orientation": config.metric.orientation,
        },
        "trials": config.trials,
        "budget": config.budget,
        "lattice_size": schema.lattice_size,
        "pool_sizes": pool_sizes,
        "strategies": strategy_sections,
        "true_worst": true_worst,
    }

    config.output_dir.mkdir(parents=True, exist_ok=True)
    trace_path = config.output_dir / "trace.csv"
    summary_path = config.output_dir / "summary.json"
    _write_trace(trace_path, schema, traces, config.strategies)
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")

    return ExperimentResult(
        schema=schema,
        traces=traces,
        failed=failed,
        summary=summary,
        trace_path=trace_path,
        summary_path=summary_path,
    )


def _write_trace(
    path: Path,
    schema: AttributeSchema,
    traces: dict[str, dict[int, SearchTrace]],
    strategies: tuple[str, ...],
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for strategy in strategies:
            for trial in sorted(traces[strategy]):
                for step in traces[strategy][trial].steps:
                    writer.writerow(
                        (
                            strategy,
                            trial,
                            step.iteration,
                            schema.subgroup_id(step.subgroup),
                            schema.label(step.subgroup),
                            repr(step.raw_value),
                            repr(step.oriented_value),
                            repr(step.best_so_far_raw),
                        )
                    )
