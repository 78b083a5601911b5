"""Categorical subgroup lattice: schema, enumeration, one-hot encoding, binning.

A subgroup is one level per monitored attribute.  The lattice is the cross
product of all attribute levels; its enumeration order (attribute 0 slowest)
is the canonical order used everywhere downstream, so subgroup ids are stable
across runs.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import IngestionError, InvalidSubgroupError, SchemaError


@dataclass(frozen=True)
class Attribute:
    """One categorical attribute with its ordered level labels."""

    name: str
    levels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("attribute name must be non-empty")
        if len(self.levels) == 0:
            raise SchemaError(f"attribute {self.name!r} has no levels")
        if len(set(self.levels)) != len(self.levels):
            raise SchemaError(f"attribute {self.name!r} has duplicate levels")

    @property
    def cardinality(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered attributes defining the lattice and the one-hot block layout."""

    attributes: tuple[Attribute, ...]

    def __post_init__(self) -> None:
        if len(self.attributes) == 0:
            raise SchemaError("schema must declare at least one attribute")
        names = [a.name for a in self.attributes]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise SchemaError(f"duplicate attribute names: {sorted(dupes)}")

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(a.cardinality for a in self.attributes)

    @property
    def lattice_size(self) -> int:
        return math.prod(self.cardinalities)

    @property
    def encoded_dim(self) -> int:
        return sum(self.cardinalities)

    def validate_subgroup(self, subgroup: Subgroup) -> None:
        idx = subgroup.level_indices
        if len(idx) != self.n_attributes:
            raise InvalidSubgroupError(
                f"subgroup has {len(idx)} indices, schema has "
                f"{self.n_attributes} attributes"
            )
        for attr, i in zip(self.attributes, idx):
            if not 0 <= i < attr.cardinality:
                raise InvalidSubgroupError(
                    f"level index {i} out of range for attribute "
                    f"{attr.name!r} (cardinality {attr.cardinality})"
                )

    def subgroup_id(self, subgroup: Subgroup) -> int:
        """Rank of the subgroup in enumeration order (attribute 0 slowest)."""
        self.validate_subgroup(subgroup)
        sid = 0
        for m, i in zip(self.cardinalities, subgroup.level_indices):
            sid = sid * m + i
        return sid

    def subgroup_from_id(self, sid: int) -> Subgroup:
        if not 0 <= sid < self.lattice_size:
            raise InvalidSubgroupError(f"subgroup id {sid} out of range")
        rev = []
        for m in reversed(self.cardinalities):
            sid, i = divmod(sid, m)
            rev.append(i)
        return Subgroup(tuple(reversed(rev)))

    def label(self, subgroup: Subgroup) -> str:
        """Human-readable "name=level|..." identifier for reports."""
        self.validate_subgroup(subgroup)
        return "|".join(
            f"{a.name}={a.levels[i]}"
            for a, i in zip(self.attributes, subgroup.level_indices)
        )


@dataclass(frozen=True)
class Subgroup:
    """A point in the lattice: one level index per schema attribute."""

    level_indices: tuple[int, ...]


def enumerate_subgroups(schema: AttributeSchema) -> list[Subgroup]:
    """All lattice points in lexicographic order of level indices.

    Attribute 0 varies slowest; the result has exactly
    ``schema.lattice_size`` distinct elements.
    """
    ranges = [range(m) for m in schema.cardinalities]
    return [Subgroup(ix) for ix in itertools.product(*ranges)]


def encode(schema: AttributeSchema, subgroup: Subgroup) -> np.ndarray:
    """One-hot encode a subgroup as a float vector of length sum(m_i).

    Exactly one entry per attribute block is 1, so the squared Euclidean
    distance between two encodings is twice the number of attributes on
    which they differ.
    """
    schema.validate_subgroup(subgroup)
    out = np.zeros(schema.encoded_dim)
    offset = 0
    for m, i in zip(schema.cardinalities, subgroup.level_indices):
        out[offset + i] = 1.0
        offset += m
    return out


def encode_many(schema: AttributeSchema, subgroups: list[Subgroup]) -> np.ndarray:
    """Stack one-hot encodings into an (n, sum(m_i)) matrix."""
    out = np.zeros((len(subgroups), schema.encoded_dim))
    offsets = np.concatenate(([0], np.cumsum(schema.cardinalities)[:-1]))
    for r, s in enumerate(subgroups):
        schema.validate_subgroup(s)
        out[r, offsets + np.asarray(s.level_indices)] = 1.0
    return out


def decode(schema: AttributeSchema, values: np.ndarray) -> Subgroup:
    """Invert :func:`encode`; rejects vectors that are not valid one-hot blocks."""
    values = np.asarray(values)
    if values.shape != (schema.encoded_dim,):
        raise InvalidSubgroupError(
            f"encoded vector has shape {values.shape}, "
            f"expected ({schema.encoded_dim},)"
        )
    indices = []
    offset = 0
    for attr in schema.attributes:
        block = values[offset : offset + attr.cardinality]
        ones = np.flatnonzero(block == 1.0)
        if len(ones) != 1 or np.count_nonzero(block) != 1:
            raise InvalidSubgroupError(
                f"block for attribute {attr.name!r} is not one-hot"
            )
        indices.append(int(ones[0]))
        offset += attr.cardinality
    return Subgroup(tuple(indices))


def bin_numeric(value: float, bin_edges: tuple[float, ...]) -> int:
    """Map a real value to its half-open bin index.

    ``k`` strictly increasing edges define ``k + 1`` bins
    (-inf, e1), [e1, e2), ..., [ek, +inf); values equal to an edge fall in
    the bin to its right.
    """
    if not all(a < b for a, b in zip(bin_edges, bin_edges[1:])):
        raise ValueError(f"bin edges must be strictly increasing: {bin_edges}")
    if not math.isfinite(value):
        raise IngestionError(f"cannot bin non-finite value {value!r}")
    return bisect_right(bin_edges, value)


def bin_labels(bin_edges: tuple[float, ...]) -> tuple[str, ...]:
    """Default level labels for the bins of :func:`bin_numeric`."""
    if len(bin_edges) == 0:
        raise SchemaError("bin_edges must contain at least one edge")
    edges = [f"{e:g}" for e in bin_edges]
    inner = [f"{a}-{b}" for a, b in zip(edges, edges[1:])]
    return tuple([f"<{edges[0]}", *inner, f">={edges[-1]}"])
