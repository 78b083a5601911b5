"""Read the shared experiment TOML for column names and binning tables.

The harness owns the config format; this module reads just enough of it to
keep dataset preparation consistent with how the harness will load the
files (same columns, same binning tables, same bin labels).  It works from
the file alone and does not import the harness.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib


@dataclass(frozen=True)
class SharedAttribute:
    name: str
    column: str
    levels: tuple[str, ...] | None
    bin_edges: tuple[float, ...] | None
    value_map: dict[str, str] | None

    def bin_label(self, raw) -> str | None:
        """Binned label for a raw cell, or None when no table applies."""
        if self.bin_edges is not None:
            value = float(raw)
            labels = edge_labels(self.bin_edges)
            index = sum(value >= e for e in self.bin_edges)
            return labels[index]
        if self.value_map is not None:
            return self.value_map.get(normalize_key(raw))
        return None


@dataclass(frozen=True)
class SharedConfig:
    attributes: tuple[SharedAttribute, ...]
    truth_column: str
    prediction_column: str
    metric_kind: str

    @property
    def subgroup_columns(self) -> list[str]:
        return [a.column for a in self.attributes]


def edge_labels(bin_edges: tuple[float, ...]) -> tuple[str, ...]:
    """Bin labels exactly as the harness synthesizes them."""
    edges = [f"{e:g}" for e in bin_edges]
    inner = [f"{a}-{b}" for a, b in zip(edges, edges[1:])]
    return tuple([f"<{edges[0]}", *inner, f">={edges[-1]}"])


def normalize_key(raw) -> str:
    cell = str(raw).strip()
    try:
        f = float(cell)
    except ValueError:
        return cell
    if f.is_integer():
        return str(int(f))
    return cell


def read_shared_config(path: str | Path) -> SharedConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    dataset = raw["dataset"]
    attributes = []
    for table in dataset["attributes"]:
        attributes.append(
            SharedAttribute(
                name=table["name"],
                column=table.get("column", table["name"]),
                levels=tuple(table["levels"]) if "levels" in table else None,
                bin_edges=(
                    tuple(float(e) for e in table["bin_edges"])
                    if "bin_edges" in table
                    else None
                ),
                value_map=table.get("value_map"),
            )
        )
    return SharedConfig(
        attributes=tuple(attributes),
        truth_column=dataset["truth_column"],
        prediction_column=dataset["prediction_column"],
        metric_kind=raw.get("metric", {}).get("kind", "accuracy"),
    )
