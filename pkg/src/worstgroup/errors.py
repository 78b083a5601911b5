"""Exception types shared across the package."""


class WorstgroupError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(WorstgroupError):
    """Invalid or inconsistent experiment configuration."""


class DataError(WorstgroupError):
    """Problem ingesting or interpreting a dataset."""


class SchemaError(DataError):
    """Dataset or schema declaration is structurally invalid."""


class IngestionError(DataError):
    """A cell value cannot be converted during loading."""


class EmptyDatasetError(DataError):
    """No usable rows remain after filtering."""


class InvalidSubgroupError(WorstgroupError):
    """A subgroup is inconsistent with its attribute schema."""


class UnsupportedSubgroupError(WorstgroupError):
    """A subgroup has fewer rows than the support threshold."""


class UndefinedMetricError(WorstgroupError):
    """The metric has no defined value on the selected rows."""


class BudgetExhaustedError(WorstgroupError):
    """The evaluation budget is spent and the subgroup is not cached."""


class NumericalFailureError(WorstgroupError):
    """Linear algebra failed beyond recoverable jitter escalation."""


class PoolExhaustedError(WorstgroupError):
    """No candidate subgroups remain to evaluate."""
