"""Budget-limited search for the worst-performing data subgroup of an ML system."""

from .config import ExperimentConfig, load_config
from .gp import GpModel, HyperGrid, KernelParams, Posterior, fit, optimize_hypers, posterior_at
from .harness import aggregate, find_true_worst, run_experiment
from .oracle import (
    AttributeSpec,
    DatasetSpec,
    EvaluationLedger,
    LabeledDataset,
    MetricSpec,
    global_metric,
    load_dataset,
    oriented_value,
    subgroup_metric,
    supported_subgroups,
)
from .search import (
    BoConfig,
    SearchTrace,
    expected_improvement,
    run_bo,
    run_exhaustive_search,
    run_random_search,
    suggest_next,
)
from .subgroups import (
    Attribute,
    AttributeSchema,
    Subgroup,
    bin_numeric,
    decode,
    encode,
    enumerate_subgroups,
)

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "AttributeSchema",
    "AttributeSpec",
    "BoConfig",
    "DatasetSpec",
    "EvaluationLedger",
    "ExperimentConfig",
    "GpModel",
    "HyperGrid",
    "KernelParams",
    "LabeledDataset",
    "MetricSpec",
    "Posterior",
    "SearchTrace",
    "Subgroup",
    "aggregate",
    "bin_numeric",
    "decode",
    "encode",
    "enumerate_subgroups",
    "expected_improvement",
    "find_true_worst",
    "fit",
    "global_metric",
    "load_config",
    "load_dataset",
    "optimize_hypers",
    "oriented_value",
    "posterior_at",
    "run_bo",
    "run_exhaustive_search",
    "run_experiment",
    "run_random_search",
    "subgroup_metric",
    "suggest_next",
    "supported_subgroups",
]
