"""Optimal interval clustering by dynamic programming.

Write e(i, m) for the optimal cost of grouping the first i points into m
contiguous clusters. With cost(j, i) the single-cluster cost of the range
[j, i] and (+) the model's combine operator,

    e(i, m) = min over j of  e(j-1, m-1) (+) cost(j, i),

where j is the left index of the m-th cluster. Cluster-size bounds shrink
the admissible j-window. Columns are filled for m = 1..k in one ascending
pass; each column depends only on the previous one, so one pass serves both
a single solve and a whole sweep over cluster counts. Cells within a column
are mutually independent and are evaluated in parallel; evaluation order
cannot change any value, so results are identical for any thread count.

Ties in the argmin always resolve to the smallest j, making outputs
deterministic across modes and platforms. Unreachable or bound-infeasible
cells hold +inf. Backtracking recovers the k left delimiters in O(k).

Two evaluation modes trade time for memory: ``on-demand`` recomputes each
range cost inside the recurrence (O(n^2 k) time, O(nk) memory for the
closed-form models), while ``lut`` precomputes the full cost matrix once
(O(n^2) memory) so that models with expensive range costs pay for each
range only once. Both modes obtain every cost value from the same kernel,
so their tables agree bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numba as nb
import numpy as np

from .costs import (
    Combine,
    CostModel,
    ModelKind,
    QueryComplexity,
    _seg_cost_center,
    _seg_cost_median,
    _seg_cost_tables,
    cluster_cost,
    cluster_cost_direct,
    model_dissimilarity,
)
from .data import PrefixTables, SortedDataset, build_prefix_tables
from .errors import InfeasibleConstraints, KTooLarge, UnsupportedCombination

MODES = ("auto", "on-demand", "lut")


def set_threads(count: int) -> None:
    """Set the worker count for the parallel column fillers.

    Clamped to the threads available to this process. Cells within a column
    are independent, so the worker count never changes any computed value.
    """
    nb.set_num_threads(min(max(1, int(count)), nb.config.NUMBA_NUM_THREADS))


@dataclass(frozen=True)
class SizeConstraints:
    """Per-cluster lower/upper size bounds, index-aligned with cluster order."""

    lower: tuple[int, ...]
    upper: tuple[int, ...]

    @staticmethod
    def dummy(n: int, k: int) -> "SizeConstraints":
        """The no-op bounds: every cluster nonempty, none forced large."""
        return SizeConstraints(lower=(1,) * k, upper=(n - k + 1,) * k)

    @staticmethod
    def balanced(n: int, k: int, factor: int = 1) -> "SizeConstraints":
        """Bounds forcing near-equal sizes: n/(factor*k) <= size <= factor*n/k."""
        if factor < 1:
            raise ValueError("factor must be >= 1")
        lower = max(1, n // (factor * k))
        upper = -(-factor * n // k)
        return SizeConstraints(lower=(lower,) * k, upper=(upper,) * k)

    def validate(self, n: int, k: int) -> None:
        if len(self.lower) != k or len(self.upper) != k:
            raise InfeasibleConstraints(f"need exactly {k} lower and upper bounds")
        for lo, up in zip(self.lower, self.upper):
            if not (1 <= lo <= up):
                raise InfeasibleConstraints(f"need 1 <= lower <= upper, got ({lo}, {up})")
        if sum(self.lower) > n:
            raise InfeasibleConstraints(
                f"lower bounds sum to {sum(self.lower)} > n = {n}"
            )
        if sum(self.upper) < n:
            raise InfeasibleConstraints(
                f"upper bounds sum to {sum(self.upper)} < n = {n}"
            )


@dataclass(frozen=True)
class DpTables:
    """Filled recurrence tables: costs[i-1, m-1] = e(i, m), splits = argmin j."""

    costs: np.ndarray
    splits: np.ndarray
    mode: str
    lut: np.ndarray | None = None


@dataclass(frozen=True)
class Clustering:
    """An interval clustering encoded by its k left delimiters (1-based).

    Cluster j covers point indices [delimiters[j], delimiters[j+1] - 1]
    (the last cluster ends at n). Per-cluster costs are recomputed by
    direct summation over each cluster, so reported values do not inherit
    cancellation error from the table differences used inside the solver.
    """

    n: int
    k: int
    method: str
    mode: str
    delimiters: tuple[int, ...]
    cluster_sizes: tuple[int, ...]
    prototypes: tuple[float, ...]
    cluster_costs: tuple[float, ...]
    total_cost: float

    def labels(self) -> np.ndarray:
        """Per-point cluster indices, 0-based, aligned with the sorted dataset."""
        return np.repeat(np.arange(self.k), self.cluster_sizes)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "method": self.method,
            "mode": self.mode,
            "total_cost": self.total_cost,
            "delimiters": list(self.delimiters),
            "clusters": [
                {
                    "left": int(l),
                    "right": int(l + s - 1),
                    "size": int(s),
                    "prototype": p,
                    "cost": c,
                }
                for l, s, p, c in zip(
                    self.delimiters, self.cluster_sizes, self.prototypes, self.cluster_costs
                )
            ],
        }


def clustering_from_dict(payload: dict) -> Clustering:
    clusters = payload["clusters"]
    return Clustering(
        n=int(payload["n"]),
        k=int(payload["k"]),
        method=payload["method"],
        mode=payload["mode"],
        delimiters=tuple(int(d) for d in payload["delimiters"]),
        cluster_sizes=tuple(int(c["size"]) for c in clusters),
        prototypes=tuple(float(c["prototype"]) for c in clusters),
        cluster_costs=tuple(float(c["cost"]) for c in clusters),
        total_cost=float(payload["total_cost"]),
    )


# ---------------------------------------------------------------------------
# Compiled table fillers. All of them implement the same recurrence; they
# differ only in where the range cost comes from.
# ---------------------------------------------------------------------------


@nb.njit(cache=True, parallel=True)
def _fill_all_tables(E, S, k, lower, upper, cum_lower, cum_w, cum_wx, cum_wf, code):
    n = E.shape[1] - 1
    for m in range(1, k + 1):
        jlo_fixed = max(m, 1 + cum_lower[m - 1])
        low_m = lower[m - 1]
        up_m = upper[m - 1]
        for i in nb.prange(m, n + 1):
            jlo = max(jlo_fixed, i + 1 - up_m)
            jhi = min(i, i + 1 - low_m)
            best = np.inf
            bestj = 0
            for j in range(jlo, jhi + 1):
                prev = E[m - 1, j - 1]
                if prev == np.inf:
                    continue
                v = prev + _seg_cost_tables(j, i, cum_w, cum_wx, cum_wf, code)
                if v < best:
                    best = v
                    bestj = j
            E[m, i] = best
            S[m, i] = bestj


@nb.njit(cache=True, parallel=True)
def _fill_all_median(E, S, k, lower, upper, cum_lower, cum_w, cum_wx, values):
    n = E.shape[1] - 1
    for m in range(1, k + 1):
        jlo_fixed = max(m, 1 + cum_lower[m - 1])
        low_m = lower[m - 1]
        up_m = upper[m - 1]
        for i in nb.prange(m, n + 1):
            jlo = max(jlo_fixed, i + 1 - up_m)
            jhi = min(i, i + 1 - low_m)
            best = np.inf
            bestj = 0
            for j in range(jlo, jhi + 1):
                prev = E[m - 1, j - 1]
                if prev == np.inf:
                    continue
                v = prev + _seg_cost_median(j, i, cum_w, cum_wx, values)
                if v < best:
                    best = v
                    bestj = j
            E[m, i] = best
            S[m, i] = bestj


@nb.njit(cache=True, parallel=True)
def _fill_all_center(E, S, k, lower, upper, cum_lower, values, expo):
    n = E.shape[1] - 1
    for m in range(1, k + 1):
        jlo_fixed = max(m, 1 + cum_lower[m - 1])
        low_m = lower[m - 1]
        up_m = upper[m - 1]
        for i in nb.prange(m, n + 1):
            jlo = max(jlo_fixed, i + 1 - up_m)
            jhi = min(i, i + 1 - low_m)
            best = np.inf
            bestj = 0
            for j in range(jlo, jhi + 1):
                prev = E[m - 1, j - 1]
                if prev == np.inf:
                    continue
                c = _seg_cost_center(j, i, values, expo)
                v = prev if prev > c else c
                if v < best:
                    best = v
                    bestj = j
            E[m, i] = best
            S[m, i] = bestj


@nb.njit(cache=True, parallel=True)
def _fill_all_lut(E, S, k, lower, upper, cum_lower, lut, use_max):
    n = E.shape[1] - 1
    for m in range(1, k + 1):
        jlo_fixed = max(m, 1 + cum_lower[m - 1])
        low_m = lower[m - 1]
        up_m = upper[m - 1]
        for i in nb.prange(m, n + 1):
            jlo = max(jlo_fixed, i + 1 - up_m)
            jhi = min(i, i + 1 - low_m)
            best = np.inf
            bestj = 0
            for j in range(jlo, jhi + 1):
                prev = E[m - 1, j - 1]
                if prev == np.inf:
                    continue
                c = lut[j, i]
                if use_max:
                    v = prev if prev > c else c
                else:
                    v = prev + c
                if v < best:
                    best = v
                    bestj = j
            E[m, i] = best
            S[m, i] = bestj


@nb.njit(cache=True, parallel=True)
def _build_lut_tables(lut, cum_w, cum_wx, cum_wf, code):
    n = lut.shape[0] - 1
    for i in nb.prange(1, n + 1):
        for j in range(1, i + 1):
            lut[j, i] = _seg_cost_tables(j, i, cum_w, cum_wx, cum_wf, code)


@nb.njit(cache=True, parallel=True)
def _build_lut_median(lut, cum_w, cum_wx, values):
    n = lut.shape[0] - 1
    for i in nb.prange(1, n + 1):
        for j in range(1, i + 1):
            lut[j, i] = _seg_cost_median(j, i, cum_w, cum_wx, values)


@nb.njit(cache=True, parallel=True)
def _build_lut_center(lut, values, expo):
    n = lut.shape[0] - 1
    for i in nb.prange(1, n + 1):
        for j in range(1, i + 1):
            lut[j, i] = _seg_cost_center(j, i, values, expo)


def _fill_all_generic(E, S, k, lower, upper, cum_lower, seg_costs_for_m, use_max):
    """Pure-python fill for cost sources without a compiled kernel.

    ``seg_costs_for_m(m)`` returns the vectorized range-cost function used in
    column m, which is how index-dependent costs (the mixture learner's
    weight terms) enter the recurrence.
    """
    n = E.shape[1] - 1
    for m in range(1, k + 1):
        jlo_fixed = max(m, 1 + int(cum_lower[m - 1]))
        low_m = int(lower[m - 1])
        up_m = int(upper[m - 1])
        seg_costs = seg_costs_for_m(m)
        for i in range(m, n + 1):
            jlo = max(jlo_fixed, i + 1 - up_m)
            jhi = min(i, i + 1 - low_m)
            if jhi < jlo:
                continue
            js = np.arange(jlo, jhi + 1)
            prev = E[m - 1, jlo - 1 : jhi]
            c = seg_costs(js, i)
            vals = np.maximum(prev, c) if use_max else prev + c
            a = int(np.argmin(vals))
            if vals[a] < np.inf:
                E[m, i] = vals[a]
                S[m, i] = jlo + a


# ---------------------------------------------------------------------------
# Cost evaluators: bind a model to one dataset and expose range costs.
# ---------------------------------------------------------------------------


class _CostEval:
    """Single source of range-cost values for one (model, dataset) pair."""

    def __init__(self, model: CostModel, ds: SortedDataset, pt: PrefixTables):
        self.model = model
        self.ds = ds
        self.pt = pt
        self.fast = None  # ("tables"|"median"|"center", args) when compiled kernels apply
        kind = model.kind
        if kind in (ModelKind.KMEANS, ModelKind.BREGMAN) and model.r_exponent == 1.0:
            gen = model.table_generator
            if gen.code >= 0:
                self.fast = ("tables", (pt.cum_w, pt.cum_wx, pt.cum_wf, gen.code))
        elif kind == ModelKind.KMEDIAN:
            self.fast = ("median", (pt.cum_w, pt.cum_wx, ds.values))
        elif kind == ModelKind.KCENTER and (
            model.generator is None or model.generator.name == "squared"
        ):
            expo = model.r_exponent if model.generator is None else 2.0 * model.r_exponent
            self.fast = ("center", (ds.values, expo))

    def seg_costs(self, js: np.ndarray, i: int) -> np.ndarray:
        """Vectorized range costs cost(j, i) for each j in ``js``."""
        model, ds, pt = self.model, self.ds, self.pt
        kind = model.kind
        if kind in (ModelKind.KMEANS, ModelKind.BREGMAN) and model.r_exponent == 1.0:
            gen = model.table_generator
            w = pt.cum_w[i] - pt.cum_w[js - 1]
            wx = pt.cum_wx[i] - pt.cum_wx[js - 1]
            wf = pt.cum_wf[i] - pt.cum_wf[js - 1]
            p = wx / w
            fp = gen.Fprime(p)
            c = w * (p * fp - gen.F(p)) + wf - fp * wx
            # Singleton ranges are exactly zero, matching the compiled kernel.
            return np.where(js == i, 0.0, np.maximum(c, 0.0))
        # Iterative / discrete models: one full query per start index.
        return np.array([cluster_cost(model, ds, pt, int(j), i).cost for j in js])

    def fill_all(self, E, S, k, lower, upper, cum_lower) -> None:
        if self.fast is not None:
            tag, args = self.fast
            if tag == "tables":
                _fill_all_tables(E, S, k, lower, upper, cum_lower, *args)
            elif tag == "median":
                _fill_all_median(E, S, k, lower, upper, cum_lower, *args)
            else:
                _fill_all_center(E, S, k, lower, upper, cum_lower, *args)
            return
        use_max = self.model.combine == Combine.MAX
        _fill_all_generic(
            E, S, k, lower, upper, cum_lower, lambda m: self.seg_costs, use_max
        )

    def build_lut(self) -> np.ndarray:
        """Padded (n+1, n+1) cost matrix; entry [j, i] = cost(j, i), inf for j > i."""
        n = self.ds.n
        lut = np.full((n + 1, n + 1), np.inf)
        if self.fast is not None:
            tag, args = self.fast
            if tag == "tables":
                _build_lut_tables(lut, *args)
            elif tag == "median":
                _build_lut_median(lut, *args)
            else:
                _build_lut_center(lut, *args)
        else:
            for i in range(1, n + 1):
                js = np.arange(1, i + 1)
                lut[1 : i + 1, i] = self.seg_costs(js, i)
        return lut


def _resolve_mode(model: CostModel, mode: str | None) -> str:
    if mode is None or mode == "auto":
        return "on-demand" if model.query_complexity == QueryComplexity.CONSTANT else "lut"
    if mode not in ("on-demand", "lut"):
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def _prepare_fill(evaluator: "_CostEval", mode: str):
    """Pick the table filler for the mode; returns (fill_all, padded lut or None)."""
    if mode == "lut":
        lut = evaluator.build_lut()
        use_max = evaluator.model.combine == Combine.MAX

        def fill_all(E, S, k, lower, upper, cum_lower):
            _fill_all_lut(E, S, k, lower, upper, cum_lower, lut, use_max)

        return fill_all, lut
    return evaluator.fill_all, None


def _public_tables(E, S, mode: str, lut) -> DpTables:
    return DpTables(
        costs=E[1:, 1:].T.copy(),
        splits=S[1:, 1:].T.copy(),
        mode=mode,
        lut=None if lut is None else lut[1:, 1:].copy(),
    )


def _dp_fill(
    n: int,
    k: int,
    lower: Sequence[int],
    upper: Sequence[int],
    fill_all: Callable,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the recurrence over all k columns and return the padded tables."""
    E = np.full((k + 1, n + 1), np.inf)
    E[0, 0] = 0.0
    S = np.zeros((k + 1, n + 1), dtype=np.int64)
    lower_arr = np.asarray(lower, dtype=np.int64)
    upper_arr = np.asarray(upper, dtype=np.int64)
    cum_lower = np.concatenate([[0], np.cumsum(lower_arr)[:-1]]).astype(np.int64)
    fill_all(E, S, k, lower_arr, upper_arr, cum_lower)
    return E, S


def _backtrack(S: np.ndarray, k: int, n: int) -> list[int]:
    delimiters = [0] * k
    i = n
    for m in range(k, 0, -1):
        j = int(S[m][i])
        if j <= 0:
            raise InfeasibleConstraints("no feasible clustering reaches this cell")
        delimiters[m - 1] = j
        i = j - 1
    return delimiters


def _clustering_from_delimiters(
    ds: SortedDataset, model: CostModel, delimiters: Sequence[int], mode: str
) -> Clustering:
    k = len(delimiters)
    rights = [delimiters[j + 1] - 1 for j in range(k - 1)] + [ds.n]
    prototypes = []
    costs = []
    for left, right in zip(delimiters, rights):
        res = cluster_cost_direct(model, ds, left, right)
        prototypes.append(res.prototype)
        costs.append(res.cost)
    if model.combine == Combine.MAX:
        total = max(costs)
    else:
        total = math.fsum(costs)
    return Clustering(
        n=ds.n,
        k=k,
        method=model.method_string,
        mode=mode,
        delimiters=tuple(int(d) for d in delimiters),
        cluster_sizes=tuple(r - l + 1 for l, r in zip(delimiters, rights)),
        prototypes=tuple(float(p) for p in prototypes),
        cluster_costs=tuple(float(c) for c in costs),
        total_cost=float(total),
    )


def _check_solvable(ds: SortedDataset, model: CostModel, k: int) -> None:
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > ds.n:
        raise KTooLarge(f"k = {k} exceeds the number of distinct points n = {ds.n}")
    if model.combine == Combine.MAX and not np.all(ds.weights == 1.0):
        raise UnsupportedCombination(
            "max-combine models (k-center) are defined for unit weights only"
        )


def solve(
    ds: SortedDataset,
    model: CostModel,
    k: int,
    constraints: SizeConstraints | None = None,
    mode: str | None = None,
) -> tuple[Clustering, DpTables]:
    """Globally optimal k-cluster interval clustering of ``ds`` under ``model``.

    Optimality is over all C(n-1, k-1) contiguous partitions, intersected
    with the size bounds when ``constraints`` is given. Ties resolve to the
    smallest left index at every recurrence cell.
    """
    _check_solvable(ds, model, k)
    n = ds.n
    if constraints is not None:
        constraints.validate(n, k)
        lower, upper = constraints.lower, constraints.upper
    else:
        lower, upper = (1,) * k, (n,) * k

    pt = build_prefix_tables(ds, model.table_generator)
    mode = _resolve_mode(model, mode)
    fill_all, lut = _prepare_fill(_CostEval(model, ds, pt), mode)

    E, S = _dp_fill(n, k, lower, upper, fill_all)
    if not np.isfinite(E[k, n]):
        raise InfeasibleConstraints("size bounds admit no contiguous partition")

    delimiters = _backtrack(S, k, n)
    clustering = _clustering_from_delimiters(ds, model, delimiters, mode)
    return clustering, _public_tables(E, S, mode, lut)


def precompute_lut(ds: SortedDataset, model: CostModel) -> np.ndarray:
    """The full range-cost matrix: entry [j-1, i-1] = cost of range [j, i].

    Entries with j > i are +inf. Mainly useful for models whose range cost
    is not O(1), where it caps total cost evaluation work at O(n^2) queries.
    """
    pt = build_prefix_tables(ds, model.table_generator)
    if model.combine == Combine.MAX and not np.all(ds.weights == 1.0):
        raise UnsupportedCombination(
            "max-combine models (k-center) are defined for unit weights only"
        )
    return _CostEval(model, ds, pt).build_lut()[1:, 1:].copy()


# ---------------------------------------------------------------------------
# Model selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    k: int
    cost: float
    ratio: float
    regularized: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    best_k: int
    best_clustering: Clustering
    tables: DpTables


def _penalty_fn(penalty, k_max: int) -> Callable[[int], float]:
    if penalty is None:
        return lambda k: 0.0
    if np.isscalar(penalty):
        lam = float(penalty)
        return lambda k: lam * k
    table = [float(v) for v in penalty]
    if len(table) < k_max:
        raise ValueError(f"penalty table has {len(table)} entries, need {k_max}")
    return lambda k: table[k - 1]


def sweep_k(
    ds: SortedDataset,
    model: CostModel,
    k_max: int,
    penalty=None,
    mode: str | None = None,
) -> SweepResult:
    """Optimal cost for every cluster count 1..k_max from one table fill.

    Reports the cost ratio against the single-cluster cost and the penalized
    cost, and picks the cluster count minimizing the penalized cost (the
    smallest such count on ties). ``penalty`` is None, a scalar lambda for a
    linear lambda*k penalty, or a per-k table of penalty values.
    """
    _check_solvable(ds, model, k_max)
    n = ds.n
    f = _penalty_fn(penalty, k_max)

    pt = build_prefix_tables(ds, model.table_generator)
    mode = _resolve_mode(model, mode)
    fill_all, lut = _prepare_fill(_CostEval(model, ds, pt), mode)

    E, S = _dp_fill(n, k_max, (1,) * k_max, (n,) * k_max, fill_all)

    base = float(E[1, n])
    rows = []
    best_k = 1
    best_reg = math.inf
    for k in range(1, k_max + 1):
        cost = float(E[k, n])
        ratio = cost / base if base > 0.0 else 1.0
        reg = cost + f(k)
        rows.append(SweepRow(k=k, cost=cost, ratio=ratio, regularized=reg))
        if reg < best_reg:
            best_reg = reg
            best_k = k

    delimiters = _backtrack(S, best_k, n)
    clustering = _clustering_from_delimiters(ds, model, delimiters, mode)
    return SweepResult(
        rows=tuple(rows),
        best_k=best_k,
        best_clustering=clustering,
        tables=_public_tables(E, S, mode, lut),
    )


# ---------------------------------------------------------------------------
# Voronoi-consistency diagnostic
# ---------------------------------------------------------------------------

_VORONOI_SLACK = 1e-12  # absorbs roundoff when a point sits on a bisector


def voronoi_consistency(
    ds: SortedDataset, model: CostModel, clustering: Clustering
) -> tuple[bool, list[int]]:
    """Check that every point is closest (in the model's d^r) to its own prototype.

    Returns (ok, violators) where violators are 1-based point indices whose
    dissimilarity to some other prototype is smaller than to their own by
    more than an absolute slack of 1e-12. Connected (interval) Voronoi cells
    for all prototype choices are what make the recurrence globally optimal,
    so a violation flags a model without that guarantee.
    """
    if clustering.n != ds.n:
        raise ValueError("clustering does not match the dataset")
    labels = clustering.labels()
    diss = np.column_stack(
        [model_dissimilarity(model, ds.values, p) for p in clustering.prototypes]
    )
    own = diss[np.arange(ds.n), labels]
    ok = own <= diss.min(axis=1) + _VORONOI_SLACK
    violators = [int(i) + 1 for i in np.nonzero(~ok)[0]]
    return len(violators) == 0, violators


# ---------------------------------------------------------------------------
# Index-aware assignment hook for the mixture learner
# ---------------------------------------------------------------------------


def dp_assign(
    n: int,
    k: int,
    seg_costs_for_m: Callable[[int], Callable[[np.ndarray, int], np.ndarray]],
    lower: Sequence[int] | None = None,
    upper: Sequence[int] | None = None,
) -> list[int]:
    """Optimal interval assignment for a cost that may depend on the cluster index.

    ``seg_costs_for_m(m)`` returns the vectorized range-cost function used for
    the m-th cluster; sum combine. Returns the k left delimiters.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise KTooLarge(f"k = {k} exceeds n = {n}")
    lower = (1,) * k if lower is None else lower
    upper = (n,) * k if upper is None else upper

    def fill_all(E, S, k_, lower_, upper_, cum_lower_):
        _fill_all_generic(E, S, k_, lower_, upper_, cum_lower_, seg_costs_for_m, False)

    E, S = _dp_fill(n, k, lower, upper, fill_all)
    if not np.isfinite(E[k, n]):
        raise InfeasibleConstraints("no feasible assignment")
    return _backtrack(S, k, n)
