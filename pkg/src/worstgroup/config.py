"""Experiment configuration: one TOML file describing data, metric and search.

Paths in the file are resolved relative to the file's own directory so a
config can travel with its data.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError
from .gp import HyperGrid
from .oracle import AttributeSpec, DatasetSpec, MetricSpec

STRATEGY_NAMES = ("bo", "rs", "es")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs, already validated."""

    dataset_paths: tuple[Path, ...]
    dataset_spec: DatasetSpec
    strategies: tuple[str, ...]
    trials: int
    budget: int
    initial_design: int
    base_seed: int
    refit_every: int
    support_threshold: int
    output_dir: Path
    workers: int = 1
    true_worst_max_pool: int = 10000
    hyper_grid: HyperGrid = HyperGrid()

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.budget < 1:
            raise ConfigError("budget must be at least 1")
        if not 0 <= self.initial_design <= self.budget:
            raise ConfigError("initial_design must lie in [0, budget]")
        if self.refit_every < 1:
            raise ConfigError("refit_every must be at least 1")
        if self.support_threshold < 1:
            raise ConfigError("support_threshold must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not self.strategies:
            raise ConfigError("strategies must be non-empty")
        unknown = [s for s in self.strategies if s not in STRATEGY_NAMES]
        if unknown:
            raise ConfigError(
                f"unknown strategies {unknown}; expected a subset of {STRATEGY_NAMES}"
            )
        if len(self.dataset_paths) == 0:
            raise ConfigError("at least one dataset path is required")
        if len(self.dataset_paths) not in (1,) and len(self.dataset_paths) < self.trials:
            raise ConfigError(
                f"{len(self.dataset_paths)} dataset paths cannot cover "
                f"{self.trials} trials; give one shared file or one per trial"
            )

    def path_for_trial(self, trial: int) -> Path:
        if len(self.dataset_paths) == 1:
            return self.dataset_paths[0]
        return self.dataset_paths[trial]

    @property
    def metric(self) -> MetricSpec:
        return self.dataset_spec.metric


def _require(table: dict, key: str, context: str):
    if key not in table:
        raise ConfigError(f"missing required key {key!r} in [{context}]")
    return table[key]


def _as_str_tuple(value, context: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{context} must be a list of strings")
    return tuple(value)


def _parse_attribute(table: dict, position: int) -> AttributeSpec:
    context = f"dataset.attributes[{position}]"
    name = _require(table, "name", context)
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{context}: name must be a non-empty string")
    levels = table.get("levels")
    bin_edges = table.get("bin_edges")
    value_map = table.get("value_map")
    if levels is not None:
        levels = _as_str_tuple(levels, f"{context}.levels")
    if bin_edges is not None:
        if not isinstance(bin_edges, list) or not all(
            isinstance(e, (int, float)) and not isinstance(e, bool)
            for e in bin_edges
        ):
            raise ConfigError(f"{context}.bin_edges must be a list of numbers")
        bin_edges = tuple(float(e) for e in bin_edges)
    if value_map is not None:
        if not isinstance(value_map, dict) or not all(
            isinstance(k, str) and isinstance(v, str)
            for k, v in value_map.items()
        ):
            raise ConfigError(
                f"{context}.value_map must map raw values to bin labels"
            )
    column = table.get("column")
    if column is not None and not isinstance(column, str):
        raise ConfigError(f"{context}.column must be a string")
    try:
        return AttributeSpec(
            name=name,
            column=column,
            levels=levels,
            bin_edges=bin_edges,
            value_map=value_map,
        )
    except Exception as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _parse_metric(table: dict) -> MetricSpec:
    kind = _require(table, "kind", "metric")
    try:
        return MetricSpec(
            kind=kind,
            orientation=table.get("orientation"),
            positive_label=table.get("positive_label"),
        )
    except ValueError as exc:
        raise ConfigError(f"[metric]: {exc}") from exc


def _parse_hyper_grid(table: dict) -> HyperGrid:
    kwargs = {}
    for key in ("lengthscales", "signal_variances", "noise_variances"):
        if key in table:
            values = table[key]
            if not isinstance(values, list) or not values:
                raise ConfigError(f"search.hyper_grid.{key} must be a non-empty list")
            kwargs[key] = tuple(float(v) for v in values)
    try:
        return HyperGrid(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[search.hyper_grid]: {exc}") from exc


def _int(table: dict, key: str, default: int, context: str) -> int:
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{context}.{key} must be an integer")
    return value


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate an experiment TOML file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc

    base = path.resolve().parent
    dataset = raw.get("dataset")
    if not isinstance(dataset, dict):
        raise ConfigError("missing [dataset] table")
    if "paths" in dataset:
        paths = tuple(base / p for p in _as_str_tuple(dataset["paths"], "dataset.paths"))
    elif "path" in dataset:
        if not isinstance(dataset["path"], str):
            raise ConfigError("dataset.path must be a string")
        paths = (base / dataset["path"],)
    else:
        raise ConfigError("dataset needs either 'path' or 'paths'")

    attr_tables = dataset.get("attributes")
    if not isinstance(attr_tables, list) or not attr_tables:
        raise ConfigError("dataset needs at least one [[dataset.attributes]] entry")
    attributes = tuple(
        _parse_attribute(t, i) for i, t in enumerate(attr_tables)
    )

    metric = _parse_metric(raw.get("metric") or {})
    truth_column = _require(dataset, "truth_column", "dataset")
    prediction_column = _require(dataset, "prediction_column", "dataset")
    dataset_spec = DatasetSpec(
        attributes=attributes,
        truth_column=truth_column,
        prediction_column=prediction_column,
        metric=metric,
    )

    search = raw.get("search") or {}
    strategies = search.get("strategies", list(STRATEGY_NAMES))
    strategies = _as_str_tuple(strategies, "search.strategies")

    output = raw.get("output") or {}
    out_dir = output.get("dir", "results")
    if not isinstance(out_dir, str):
        raise ConfigError("output.dir must be a string")

    hyper_grid = _parse_hyper_grid(search.get("hyper_grid") or {})

    budget = _require(search, "budget", "search")
    if isinstance(budget, bool) or not isinstance(budget, int):
        raise ConfigError("search.budget must be an integer")

    try:
        return ExperimentConfig(
            dataset_paths=paths,
            dataset_spec=dataset_spec,
            strategies=strategies,
            trials=_int(search, "trials", 20, "search"),
            budget=budget,
            initial_design=_int(search, "initial_design", 10, "search"),
            base_seed=_int(search, "base_seed", 0, "search"),
            refit_every=_int(search, "refit_every", 1, "search"),
            support_threshold=_int(search, "support_threshold", 1, "search"),
            output_dir=base / out_dir,
            workers=_int(search, "workers", 1, "search"),
            true_worst_max_pool=_int(search, "true_worst_max_pool", 10000, "search"),
            hyper_grid=hyper_grid,
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc)) from exc


def apply_overrides(
    config: ExperimentConfig,
    *,
    trials: int | None = None,
    budget: int | None = None,
    seed: int | None = None,
    strategies: tuple[str, ...] | None = None,
) -> ExperimentConfig:
    """Command-line overrides on top of a loaded config."""
    changes = {}
    if trials is not None:
        changes["trials"] = trials
    if budget is not None:
        changes["budget"] = budget
        if config.initial_design > budget:
            changes["initial_design"] = budget
    if seed is not None:
        changes["base_seed"] = seed
    if strategies:
        changes["strategies"] = strategies
    return replace(config, **changes) if changes else config
