"""Independent verification and timing: exhaustive search, Lloyd, scaling probe.

The exhaustive enumerator walks every contiguous partition, so it checks the
solver's search (the recurrence and backtracking) through a path that shares
none of it. Per-cluster costs come from the direct-summation evaluator.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .costs import Combine, CostModel, cluster_cost_direct
from .data import SortedDataset, random_dataset
from .errors import InfeasibleConstraints, KTooLarge, SearchSpaceTooLarge
from .solver import SizeConstraints, solve

_PARTITION_CAP = 10**6


@dataclass(frozen=True)
class OracleResult:
    best_cost: float
    best_delimiters: tuple[int, ...]
    partitions_examined: int


def _canonical_delimiters(pair_costs, n, k, lower, upper, use_max):
    """The delimiter vector the solver's backtracking selects among optima.

    Backtracking walks right to left, at each level taking the smallest
    start index whose prefix can be clustered at the minimal prefix value.
    For sum combines the optimum is generically unique, but max combines tie
    whenever a boundary moves without touching the widest cluster, so the
    selection rule has to be replicated, not just the optimal value. Prefix
    optima are computed here from the oracle's own direct pair costs.
    """
    best = np.full((k + 1, n + 1), np.inf)
    best[0, 0] = 0.0
    cum_lower = 0
    windows = []
    for m in range(1, k + 1):
        jlo_fixed = max(m, 1 + cum_lower)
        cum_lower += lower[m - 1]
        windows.append((jlo_fixed, lower[m - 1], upper[m - 1]))
        for i in range(m, n + 1):
            jlo = max(windows[-1][0], i + 1 - windows[-1][2])
            jhi = min(i, i + 1 - windows[-1][1])
            value = np.inf
            for j in range(jlo, jhi + 1):
                prev = best[m - 1, j - 1]
                if prev == np.inf:
                    continue
                c = pair_costs[j, i]
                v = max(prev, c) if use_max else prev + c
                if v < value:
                    value = v
            best[m, i] = value
    if not np.isfinite(best[k, n]):
        return None
    delimiters = [0] * k
    i = n
    for m in range(k, 0, -1):
        jlo_fixed, low_m, up_m = windows[m - 1]
        jlo = max(jlo_fixed, i + 1 - up_m)
        jhi = min(i, i + 1 - low_m)
        target = best[m, i]
        for j in range(jlo, jhi + 1):
            prev = best[m - 1, j - 1]
            if prev == np.inf:
                continue
            v = max(prev, pair_costs[j, i]) if use_max else prev + pair_costs[j, i]
            if v == target:
                delimiters[m - 1] = j
                break
        i = delimiters[m - 1] - 1
    return tuple(delimiters)


def brute_force(
    ds: SortedDataset,
    model: CostModel,
    k: int,
    constraints: SizeConstraints | None = None,
) -> OracleResult:
    """Global minimum over all C(n-1, k-1) contiguous partitions.

    The optimal value is established by full enumeration with per-cluster
    costs from the direct-summation evaluator. The reported delimiters are
    the canonical (smallest-start-index) selection among optima, and the
    reported cost is recomputed over those clusters exactly like a solver
    report, so agreement checks can compare both fields exactly.
    """
    n = ds.n
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise KTooLarge(f"k = {k} exceeds n = {n}")
    if constraints is not None:
        constraints.validate(n, k)
        lower, upper = constraints.lower, constraints.upper
    else:
        lower, upper = (1,) * k, (n,) * k
    total_partitions = math.comb(n - 1, k - 1)
    if total_partitions > _PARTITION_CAP:
        raise SearchSpaceTooLarge(
            f"{total_partitions} partitions exceed the cap of {_PARTITION_CAP}"
        )

    pair_costs = np.full((n + 1, n + 1), np.nan)
    for j in range(1, n + 1):
        for i in range(j, n + 1):
            pair_costs[j, i] = cluster_cost_direct(model, ds, j, i).cost

    use_max = model.combine == Combine.MAX
    best_enum = math.inf
    examined = 0
    feasible = False
    for inner in combinations(range(2, n + 1), k - 1):
        examined += 1
        delims = (1,) + inner
        rights = inner + (n + 1,)
        sizes = tuple(r - l for l, r in zip(delims, rights))
        if any(not (lo <= s <= up) for s, lo, up in zip(sizes, lower, upper)):
            continue
        feasible = True
        per_cluster = [pair_costs[l, r - 1] for l, r in zip(delims, rights)]
        cost = max(per_cluster) if use_max else math.fsum(per_cluster)
        if cost < best_enum:
            best_enum = cost
    if not feasible:
        raise InfeasibleConstraints("no contiguous partition satisfies the size bounds")

    delimiters = _canonical_delimiters(pair_costs, n, k, lower, upper, use_max)
    assert delimiters is not None
    rights = delimiters[1:] + (n + 1,)
    per_cluster = [pair_costs[l, r - 1] for l, r in zip(delimiters, rights)]
    best_cost = max(per_cluster) if use_max else math.fsum(per_cluster)
    assert abs(best_cost - best_enum) <= 1e-12 * max(1.0, abs(best_enum)), (
        "canonical selection disagrees with enumeration"
    )
    return OracleResult(
        best_cost=float(best_cost),
        best_delimiters=delimiters,
        partitions_examined=examined,
    )


def lloyd_baseline(
    ds: SortedDataset,
    k: int,
    seed: int = 0,
    restarts: int = 1,
    max_iters: int = 300,
) -> tuple[float, np.ndarray]:
    """Batched Lloyd k-means from random data-point initializations.

    Returns the best (cost, labels) over ``restarts`` seeded runs. A local
    heuristic: its cost can never beat the solver's global optimum, and on
    unlucky initializations it is strictly worse.
    """
    if k > ds.n:
        raise KTooLarge(f"k = {k} exceeds n = {ds.n}")
    rng = np.random.default_rng(seed)
    x = ds.values
    w = ds.weights
    best_cost = math.inf
    best_labels = np.zeros(ds.n, dtype=np.int64)
    for _ in range(max(1, restarts)):
        centers = np.sort(rng.choice(x, size=k, replace=False))
        labels = None
        for _ in range(max_iters):
            dist = np.square(x[:, None] - centers[None, :])
            new_labels = np.argmin(dist, axis=1)
            # Revive empty clusters at the worst-served point.
            for m in range(k):
                if not np.any(new_labels == m):
                    contrib = w * dist[np.arange(ds.n), new_labels]
                    far = int(np.argmax(contrib))
                    new_labels[far] = m
                    centers[m] = x[far]
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for m in range(k):
                sel = labels == m
                centers[m] = np.average(x[sel], weights=w[sel])
        dist = np.square(x[:, None] - centers[None, :])
        cost = float(np.sum(w * dist[np.arange(ds.n), labels]))
        if cost < best_cost:
            best_cost = cost
            best_labels = labels
    return best_cost, best_labels


@dataclass(frozen=True)
class ProbeRow:
    n: int
    k: int
    mode: str
    median_seconds: float


def scaling_probe(
    model: CostModel,
    sizes: Sequence[int],
    k: int,
    seed: int = 0,
    repetitions: int = 5,
    mode: str | None = None,
) -> list[ProbeRow]:
    """Median wall time of ``solve`` on seeded uniform-random data per size.

    A small warmup solve runs first so one-time compilation never lands in a
    timed repetition. Consecutive ratios near 4 for doubling n indicate the
    expected quadratic growth at fixed k.
    """
    if sorted(sizes) != list(sizes):
        raise ValueError("sizes must be ascending")
    low, high = 0.2, 10.0
    warm = random_dataset(64, np.random.default_rng([seed, 64]), low, high)
    _, warm_tables = solve(warm, model, min(k, warm.n), mode=mode)
    rows = []
    for n in sizes:
        ds = random_dataset(n, np.random.default_rng([seed, n]), low, high)
        samples = []
        for _ in range(max(1, repetitions)):
            t0 = time.perf_counter()
            solve(ds, model, k, mode=mode)
            samples.append(time.perf_counter() - t0)
        samples.sort()
        rows.append(
            ProbeRow(
                n=n,
                k=k,
                mode=warm_tables.mode,
                median_seconds=samples[len(samples) // 2],
            )
        )
    return rows


def consecutive_ratios(rows: Sequence[ProbeRow]) -> list[float]:
    return [
        rows[i + 1].median_seconds / rows[i].median_seconds for i in range(len(rows) - 1)
    ]
