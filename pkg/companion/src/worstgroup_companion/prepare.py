"""Turn raw dataset files into canonical CSVs for the harness.

A canonical file has one header row, the subgroup columns already binned to
the labels declared in the shared config, the truth column, and every other
input column kept as a model feature.  Rows with missing values in any
retained column are dropped and counted.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from .config import SharedConfig

#: Column layout of the raw UCI census files (.data/.test, no header).
ADULT_COLUMNS = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education_num",
    "marital_status",
    "occupation",
    "relationship",
    "race",
    "gender",
    "capital_gain",
    "capital_loss",
    "hours_per_week",
    "native_country",
    "income",
]

#: Raw bike-rental columns that leak or index the target and are not features.
BIKE_DROP = ["instant", "dteday", "casual", "registered"]


@dataclass
class PrepareReport:
    rows_in: int
    rows_out: int
    dropped: int


def _read_adult(paths: list[Path]) -> pd.DataFrame:
    frames = []
    for path in paths:
        frame = pd.read_csv(
            path,
            header=None,
            names=ADULT_COLUMNS,
            skipinitialspace=True,
            skiprows=1 if path.suffix == ".test" else 0,
            na_values=["?"],
        )
        frames.append(frame)
    merged = pd.concat(frames, ignore_index=True)
    # The .test split suffixes labels with a period.
    merged["income"] = merged["income"].astype(str).str.rstrip(".")
    return merged


def _read_bike(paths: list[Path]) -> pd.DataFrame:
    frames = [pd.read_csv(path) for path in paths]
    merged = pd.concat(frames, ignore_index=True)
    return merged.drop(columns=[c for c in BIKE_DROP if c in merged.columns])


def _read_generic(paths: list[Path]) -> pd.DataFrame:
    return pd.concat([pd.read_csv(p) for p in paths], ignore_index=True)


READERS = {"adult": _read_adult, "bike": _read_bike, "csv": _read_generic}


def prepare_dataset(
    fmt: str,
    raw_paths: list[Path],
    shared: SharedConfig,
    out_path: Path,
) -> PrepareReport:
    """Read raw files, bin the subgroup columns, write the canonical CSV."""
    if fmt not in READERS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {sorted(READERS)}")
    frame = READERS[fmt](raw_paths)
    rows_in = len(frame)

    missing = [c for c in shared.subgroup_columns + [shared.truth_column] if c not in frame.columns]
    if missing:
        raise ValueError(f"raw data lacks configured columns {missing}")

    frame = frame.dropna(subset=shared.subgroup_columns + [shared.truth_column])
    for attr in shared.attributes:
        if attr.bin_edges is not None or attr.value_map is not None:
            binned = frame[attr.column].map(attr.bin_label)
            frame = frame[binned.notna()].assign(**{attr.column: binned[binned.notna()]})
    frame = frame.reset_index(drop=True)

    out_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_path, index=False)
    return PrepareReport(
        rows_in=rows_in, rows_out=len(frame), dropped=rows_in - len(frame)
    )
