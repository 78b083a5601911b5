"""Dataset ingestion, subgroup-restricted metrics, and the labeling budget.

The oracle answers "how well does the monitored system do on subgroup s" by
restricting a labeled evaluation set (ground truth plus the system's
predictions) to the rows matching s and computing the configured metric.
Every fresh subgroup evaluation costs one unit of the labeling budget;
repeat queries are served from the cache for free.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BudgetExhaustedError,
    EmptyDatasetError,
    IngestionError,
    SchemaError,
    UndefinedMetricError,
    UnsupportedSubgroupError,
)
from .subgroups import (
    Attribute,
    AttributeSchema,
    Subgroup,
    bin_labels,
    bin_numeric,
    enumerate_subgroups,
)

CLASS_METRIC_KINDS = ("accuracy", "precision", "recall")
METRIC_KINDS = CLASS_METRIC_KINDS + ("mse",)

LOWER_IS_WORSE = "lower-is-worse"
HIGHER_IS_WORSE = "higher-is-worse"

_DEFAULT_ORIENTATION = {
    "accuracy": LOWER_IS_WORSE,
    "precision": LOWER_IS_WORSE,
    "recall": LOWER_IS_WORSE,
    "mse": HIGHER_IS_WORSE,
}

#: Cell values (case-insensitive, after stripping) treated as missing.
MISSING_TOKENS = frozenset({"", "?", "na", "n/a", "nan", "null", "none"})


@dataclass(frozen=True)
class MetricSpec:
    """Performance metric plus the direction in which it gets worse."""

    kind: str
    orientation: str | None = None
    positive_label: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in METRIC_KINDS:
            raise ValueError(
                f"unknown metric kind {self.kind!r}; expected one of {METRIC_KINDS}"
            )
        if self.orientation is None:
            object.__setattr__(
                self, "orientation", _DEFAULT_ORIENTATION[self.kind]
            )
        elif self.orientation not in (LOWER_IS_WORSE, HIGHER_IS_WORSE):
            raise ValueError(f"unknown orientation {self.orientation!r}")
        if self.kind in ("precision", "recall") and self.positive_label is None:
            raise ValueError(f"{self.kind} requires positive_label")

    @property
    def is_class_metric(self) -> bool:
        return self.kind in CLASS_METRIC_KINDS


@dataclass(frozen=True)
class AttributeSpec:
    """How one dataset column becomes a schema attribute.

    Exactly one of ``levels`` (fixed label set), ``bin_edges`` (numeric
    binning) or ``value_map`` (explicit raw-value to bin-label table) may be
    given; with none, levels are inferred as the sorted distinct values
    observed in the data.  Loading is idempotent: a cell already equal to a
    level label is accepted as-is, so files holding raw values and files
    holding binned labels load under the same schema.
    """

    name: str
    column: str | None = None
    levels: tuple[str, ...] | None = None
    bin_edges: tuple[float, ...] | None = None
    value_map: dict[str, str] | None = None

    def __post_init__(self) -> None:
        modes = [
            m
            for m in (self.levels, self.bin_edges, self.value_map)
            if m is not None
        ]
        if len(modes) > 1:
            raise SchemaError(
                f"attribute {self.name!r}: levels, bin_edges and value_map "
                "are mutually exclusive"
            )
        if self.bin_edges is not None and not all(
            a < b for a, b in zip(self.bin_edges, self.bin_edges[1:])
        ):
            raise SchemaError(
                f"attribute {self.name!r}: bin_edges must be strictly increasing"
            )

    @property
    def source_column(self) -> str:
        return self.column if self.column is not None else self.name


@dataclass(frozen=True)
class DatasetSpec:
    """Columns and parsing rules for one predictions CSV."""

    attributes: tuple[AttributeSpec, ...]
    truth_column: str
    prediction_column: str
    metric: MetricSpec

    def __post_init__(self) -> None:
        if len(self.attributes) == 0:
            raise SchemaError("dataset spec must declare at least one attribute")


@dataclass
class LabeledDataset:
    """Immutable evaluation set with a subgroup row index.

    ``subgroup_rows[r]`` holds the level index of every schema attribute for
    row ``r``; ``truths``/``predictions`` are label strings for class metrics
    and floats for mse.
    """

    schema: AttributeSchema
    subgroup_rows: np.ndarray
    truths: np.ndarray
    predictions: np.ndarray
    dropped_rows: int = 0
    index: dict[Subgroup, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.subgroup_rows = np.asarray(self.subgroup_rows)
        if self.subgroup_rows.ndim != 2 or (
            self.subgroup_rows.shape[1] != self.schema.n_attributes
            and self.subgroup_rows.size > 0
        ):
            raise SchemaError(
                "subgroup_rows must be (n_rows, n_attributes), got "
                f"{self.subgroup_rows.shape}"
            )
        n = self.subgroup_rows.shape[0]
        if len(self.truths) != n or len(self.predictions) != n:
            raise SchemaError("truths/predictions length mismatch with rows")
        cards = np.asarray(self.schema.cardinalities)
        if n and (
            self.subgroup_rows.min() < 0
            or (self.subgroup_rows >= cards).any()
        ):
            raise SchemaError("row level indices out of schema range")
        groups: dict[Subgroup, list[int]] = {}
        for r in range(n):
            key = Subgroup(tuple(int(v) for v in self.subgroup_rows[r]))
            groups.setdefault(key, []).append(r)
        self.index = {s: np.asarray(rows) for s, rows in groups.items()}

    @property
    def n_rows(self) -> int:
        return self.subgroup_rows.shape[0]

    def rows_for(self, subgroup: Subgroup) -> np.ndarray:
        self.schema.validate_subgroup(subgroup)
        return self.index.get(subgroup, np.empty(0, dtype=int))

    def support(self, subgroup: Subgroup) -> int:
        return len(self.rows_for(subgroup))


def _is_missing(cell: str | None) -> bool:
    return cell is None or cell.strip().lower() in MISSING_TOKENS


def _parse_real(cell: str, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise IngestionError(
            f"column {column!r}: cannot parse {cell!r} as a real number"
        ) from None
    if math.isinf(value):
        raise IngestionError(f"column {column!r}: non-finite value {cell!r}")
    return value


def _normalize_key(cell: str) -> str:
    cell = cell.strip()
    try:
        f = float(cell)
    except ValueError:
        return cell
    if f.is_integer():
        return str(int(f))
    return cell


def _level_index(spec: AttributeSpec, attribute: Attribute, cell: str) -> int | None:
    """Level index for a raw cell, or None when the value is unknown.

    Cells equal to a level label pass through; otherwise the attribute's
    binning rule is applied.
    """
    cell = cell.strip()
    if cell in attribute.levels:
        return attribute.levels.index(cell)
    if spec.bin_edges is not None:
        try:
            value = float(cell)
        except ValueError:
            return None
        if math.isnan(value):
            return None
        return bin_numeric(value, spec.bin_edges)
    if spec.value_map is not None:
        label = spec.value_map.get(_normalize_key(cell))
        if label is None:
            return None
        return attribute.levels.index(label)
    return None


def _value_map_labels(value_map: dict[str, str]) -> tuple[str, ...]:
    seen: list[str] = []
    for label in value_map.values():
        if label not in seen:
            seen.append(label)
    return tuple(seen)


def _read_rows(path: Path, columns: list[str]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing configured columns {missing}")
        return list(reader)


def build_schema(spec: DatasetSpec, paths: list[Path]) -> AttributeSchema:
    """Construct the attribute schema, inferring levels from data when needed.

    Inferred attributes take the sorted union of distinct values across all
    given files, so per-trial files share one stable schema.
    """
    inferred: dict[str, set[str]] = {
        a.name: set()
        for a in spec.attributes
        if a.levels is None and a.bin_edges is None and a.value_map is None
    }
    if inferred:
        for path in paths:
            for row in _read_rows(
                path, [a.source_column for a in spec.attributes]
            ):
                for a in spec.attributes:
                    if a.name not in inferred:
                        continue
                    cell = row.get(a.source_column)
                    if not _is_missing(cell):
                        inferred[a.name].add(cell.strip())
    attributes = []
    for a in spec.attributes:
        if a.levels is not None:
            levels = a.levels
        elif a.bin_edges is not None:
            levels = bin_labels(a.bin_edges)
        elif a.value_map is not None:
            levels = _value_map_labels(a.value_map)
        else:
            observed = inferred[a.name]
            if not observed:
                raise SchemaError(
                    f"attribute {a.name!r}: no observed values to infer levels"
                )
            levels = tuple(sorted(observed))
        attributes.append(Attribute(a.name, levels))
    return AttributeSchema(tuple(attributes))


def load_dataset(
    path: str | Path,
    spec: DatasetSpec,
    schema: AttributeSchema | None = None,
) -> LabeledDataset:
    """Load one predictions CSV into a :class:`LabeledDataset`.

    Rows with a missing or unknown subgroup value, missing ground truth or
    missing prediction are dropped and counted in ``dropped_rows``.
    """
    path = Path(path)
    columns = [a.source_column for a in spec.attributes]
    columns += [spec.truth_column, spec.prediction_column]
    rows = _read_rows(path, columns)
    if schema is None:
        schema = build_schema(spec, [path])

    numeric_payload = spec.metric.kind == "mse"
    level_rows: list[tuple[int, ...]] = []
    truths: list = []
    preds: list = []
    dropped = 0
    for row in rows:
        truth_cell = row.get(spec.truth_column)
        pred_cell = row.get(spec.prediction_column)
        cells = [row.get(a.source_column) for a in spec.attributes]
        if (
            _is_missing(truth_cell)
            or _is_missing(pred_cell)
            or any(_is_missing(c) for c in cells)
        ):
            dropped += 1
            continue
        indices = []
        for a, attribute, cell in zip(spec.attributes, schema.attributes, cells):
            idx = _level_index(a, attribute, cell)
            if idx is None:
                break
            indices.append(idx)
        if len(indices) != len(spec.attributes):
            dropped += 1
            continue
        if numeric_payload:
            truths.append(_parse_real(truth_cell, spec.truth_column))
            preds.append(_parse_real(pred_cell, spec.prediction_column))
        else:
            truths.append(truth_cell.strip())
            preds.append(pred_cell.strip())
        level_rows.append(tuple(indices))

    if not level_rows:
        raise EmptyDatasetError(f"{path}: no usable rows after filtering")
    dtype = float if numeric_payload else object
    return LabeledDataset(
        schema=schema,
        subgroup_rows=np.asarray(level_rows, dtype=int),
        truths=np.asarray(truths, dtype=dtype),
        predictions=np.asarray(preds, dtype=dtype),
        dropped_rows=dropped,
    )


def _compute_metric(metric: MetricSpec, truths: np.ndarray, preds: np.ndarray) -> float:
    if metric.kind == "accuracy":
        return float(np.mean(truths == preds))
    if metric.kind == "mse":
        t = np.asarray(truths, dtype=float)
        p = np.asarray(preds, dtype=float)
        return float(np.mean((p - t) ** 2))
    if metric.kind == "precision":
        predicted_pos = preds == metric.positive_label
        if not predicted_pos.any():
            raise UndefinedMetricError(
                "precision undefined: no predicted positives in selection"
            )
        tp = np.logical_and(predicted_pos, truths == metric.positive_label)
        return float(tp.sum() / predicted_pos.sum())
    if metric.kind == "recall":
        actual_pos = truths == metric.positive_label
        if not actual_pos.any():
            raise UndefinedMetricError(
                "recall undefined: no positive ground-truth rows in selection"
            )
        tp = np.logical_and(actual_pos, preds == metric.positive_label)
        return float(tp.sum() / actual_pos.sum())
    raise ValueError(f"unknown metric kind {metric.kind!r}")


def subgroup_metric(
    dataset: LabeledDataset,
    subgroup: Subgroup,
    metric: MetricSpec,
    support_threshold: int = 1,
) -> float:
    """Metric over exactly the rows whose subgroup values equal ``subgroup``."""
    rows = dataset.rows_for(subgroup)
    threshold = max(support_threshold, 1)
    if len(rows) < threshold:
        raise UnsupportedSubgroupError(
            f"subgroup {dataset.schema.label(subgroup)!r} has {len(rows)} rows, "
            f"support threshold is {threshold}"
        )
    return _compute_metric(metric, dataset.truths[rows], dataset.predictions[rows])


def global_metric(dataset: LabeledDataset, metric: MetricSpec) -> float:
    """Metric over all rows; reporting context only."""
    if dataset.n_rows == 0:
        raise EmptyDatasetError("dataset has no rows")
    return _compute_metric(metric, dataset.truths, dataset.predictions)


def oriented_value(value: float, metric: MetricSpec) -> float:
    """Transform a raw metric value so that smaller always means worse.

    The search minimizes oriented values uniformly; reports keep raw values.
    """
    if not math.isfinite(value):
        raise ValueError(f"metric value must be finite, got {value!r}")
    if metric.orientation == HIGHER_IS_WORSE:
        return -value
    return value


def supported_subgroups(
    dataset: LabeledDataset,
    metric: MetricSpec,
    support_threshold: int = 1,
) -> list[Subgroup]:
    """Candidate pool in enumeration order.

    A subgroup is supported when it has at least ``support_threshold`` rows;
    for precision it must also contain a predicted positive, which is known
    without spending labels since predictions are free.
    """
    threshold = max(support_threshold, 1)
    pool = []
    for s in enumerate_subgroups(dataset.schema):
        rows = dataset.rows_for(s)
        if len(rows) < threshold:
            continue
        if metric.kind == "precision":
            if not (dataset.predictions[rows] == metric.positive_label).any():
                continue
        pool.append(s)
    return pool


@dataclass
class EvaluationLedger:
    """Meters the labeling budget and caches observed subgroup values."""

    budget_total: int
    support_threshold: int = 1
    spent: int = 0
    cache: dict[Subgroup, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.budget_total < 1:
            raise ValueError("budget_total must be at least 1")

    @property
    def remaining(self) -> int:
        return self.budget_total - self.spent

    def evaluate(
        self,
        dataset: LabeledDataset,
        subgroup: Subgroup,
        metric: MetricSpec,
    ) -> tuple[float, bool]:
        """Observed metric value for a subgroup plus a cache-hit flag.

        Fresh evaluations cost one budget unit; cached ones are free.  A
        failed evaluation (unsupported subgroup, undefined metric) spends
        nothing.
        """
        if subgroup in self.cache:
            return self.cache[subgroup], True
        if self.spent >= self.budget_total:
            raise BudgetExhaustedError(
                f"budget of {self.budget_total} evaluations is spent"
            )
        value = subgroup_metric(dataset, subgroup, metric, self.support_threshold)
        self.cache[subgroup] = value
        self.spent += 1
        return value, False
