"""Weighted 1D datasets and cumulative-sum tables for O(1) range statistics.

Points are sorted at construction and exact duplicate values are merged by
summing their weights, so downstream code can rely on strictly increasing
values. Range queries use three cumulative tables (weight, weighted value,
weighted generator image) with the convention that entry 0 is 0, giving any
contiguous range sum as a difference of two entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DomainViolation,
    EmptyInput,
    IndexOutOfRange,
    NonFiniteValue,
    NonPositiveWeight,
    ParseError,
)


@dataclass(frozen=True)
class WeightedPoint:
    """A scalar observation with a positive multiplicity weight."""

    value: float
    weight: float = 1.0


@dataclass(frozen=True)
class SortedDataset:
    """Strictly increasing values with positive weights.

    ``values[i]`` and ``weights[i]`` describe the (i+1)-th point; public
    range operations use 1-based inclusive indices to match the delimiter
    encoding used in results.
    """

    values: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def points(self) -> list[WeightedPoint]:
        return [WeightedPoint(float(v), float(w)) for v, w in zip(self.values, self.weights)]

    def slice_arrays(self, first: int, last: int) -> tuple[np.ndarray, np.ndarray]:
        """Views of values/weights for the 1-based inclusive range [first, last]."""
        check_range(self.n, first, last)
        return self.values[first - 1 : last], self.weights[first - 1 : last]


@dataclass(frozen=True)
class PrefixTables:
    """Cumulative sums of w, w*x and w*F(x), each of length n+1 with entry 0 = 0."""

    cum_w: np.ndarray
    cum_wx: np.ndarray
    cum_wf: np.ndarray
    generator_id: str = "squared"

    @property
    def n(self) -> int:
        return int(self.cum_w.shape[0]) - 1


def check_range(n: int, first: int, last: int) -> None:
    """Validate a 1-based inclusive range against a dataset of n points."""
    if not (1 <= first <= last <= n):
        raise IndexOutOfRange(f"need 1 <= first <= last <= {n}, got ({first}, {last})")


def _coerce_records(raw) -> tuple[np.ndarray, np.ndarray]:
    values: list[float] = []
    weights: list[float] = []
    for rec in raw:
        if isinstance(rec, WeightedPoint):
            values.append(rec.value)
            weights.append(rec.weight)
        elif np.isscalar(rec):
            values.append(float(rec))
            weights.append(1.0)
        else:
            rec = tuple(rec)
            if len(rec) == 1:
                values.append(float(rec[0]))
                weights.append(1.0)
            elif len(rec) == 2:
                values.append(float(rec[0]))
                weights.append(1.0 if rec[1] is None else float(rec[1]))
            else:
                raise ParseError(f"record must be a scalar or (value[, weight]), got {rec!r}")
    return np.asarray(values, dtype=np.float64), np.asarray(weights, dtype=np.float64)


def build_dataset(raw: Iterable) -> SortedDataset:
    """Sort, validate, and duplicate-coalesce raw (value[, weight]) records.

    Accepts scalars, (value,) / (value, weight) pairs, WeightedPoint objects,
    or an existing SortedDataset (returned re-validated, which makes the
    construction idempotent). Duplicate values are merged by summing weights,
    so total weight is preserved and output values are strictly increasing.
    """
    if isinstance(raw, SortedDataset):
        values, weights = np.asarray(raw.values), np.asarray(raw.weights)
    else:
        values, weights = _coerce_records(raw)
    if values.size == 0:
        raise EmptyInput("cannot build a dataset from zero records")
    if not np.all(np.isfinite(values)):
        bad = values[~np.isfinite(values)][0]
        raise NonFiniteValue(f"non-finite value in input: {bad!r}")
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
        raise NonPositiveWeight("all weights must be finite and > 0")

    order = np.argsort(values, kind="stable")
    values = values[order]
    weights = weights[order]

    # Merge exact duplicates: same value, summed weight.
    keep = np.empty(values.size, dtype=bool)
    keep[0] = True
    keep[1:] = values[1:] != values[:-1]
    if not keep.all():
        group = np.cumsum(keep) - 1
        merged_w = np.zeros(int(group[-1]) + 1)
        np.add.at(merged_w, group, weights)
        values = values[keep]
        weights = merged_w

    values.setflags(write=False)
    weights.setflags(write=False)
    return SortedDataset(values=values, weights=weights)


def build_prefix_tables(ds: SortedDataset, generator) -> PrefixTables:
    """Build the three cumulative tables for ``ds`` under a Bregman generator.

    Raises DomainViolation if any value falls outside the generator's open
    domain (e.g. x <= 0 for the Itakura-Saito generator).
    """
    lo, hi = generator.domain
    if np.any(ds.values <= lo) or np.any(ds.values >= hi):
        raise DomainViolation(
            f"dataset values must lie in the open interval ({lo}, {hi}) "
            f"for generator {generator.name!r}"
        )
    fx = generator.F(ds.values)
    zero = np.zeros(1)
    return PrefixTables(
        cum_w=np.concatenate([zero, np.cumsum(ds.weights)]),
        cum_wx=np.concatenate([zero, np.cumsum(ds.weights * ds.values)]),
        cum_wf=np.concatenate([zero, np.cumsum(ds.weights * fx)]),
        generator_id=generator.name,
    )


def range_sums(pt: PrefixTables, first: int, last: int) -> tuple[float, float, float]:
    """O(1) sums (total weight, weighted values, weighted F images) of [first, last]."""
    check_range(pt.n, first, last)
    w = pt.cum_w[last] - pt.cum_w[first - 1]
    wx = pt.cum_wx[last] - pt.cum_wx[first - 1]
    wf = pt.cum_wf[last] - pt.cum_wf[first - 1]
    return float(w), float(wx), float(wf)


def read_points_file(path: str | Path) -> list[tuple[float, float]]:
    """Parse a points file: one `value` or `value,weight` record per line.

    Comma or whitespace separated; lines starting with `#` and blank lines
    are skipped. Histogram files (`value,count`) use the same grammar, the
    count simply acting as the weight.
    """
    records: list[tuple[float, float]] = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.replace(",", " ").split()
        try:
            if len(tokens) == 1:
                records.append((float(tokens[0]), 1.0))
            elif len(tokens) == 2:
                records.append((float(tokens[0]), float(tokens[1])))
            else:
                raise ValueError("too many fields")
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: cannot parse record {line!r}") from exc
    if not records:
        raise EmptyInput(f"{path}: no data records found")
    return records


def dataset_from_file(path: str | Path) -> SortedDataset:
    return build_dataset(read_points_file(path))


def random_dataset(
    n: int,
    rng: np.random.Generator,
    low: float = 0.2,
    high: float = 10.0,
    weighted: bool = False,
) -> SortedDataset:
    """Seeded uniform dataset used by benchmarks and the verify command."""
    values = rng.uniform(low, high, size=n)
    weights: Sequence[float] | np.ndarray
    if weighted:
        weights = rng.uniform(0.5, 2.0, size=n)
    else:
        weights = np.ones(n)
    return build_dataset(zip(values.tolist(), np.asarray(weights).tolist()))
