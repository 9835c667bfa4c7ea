"""Intra-cluster cost models and the combine operator that aggregates them.

A cost model answers one question: what is the optimal single-cluster cost
of the contiguous range [first, last], and which prototype achieves it?
Supported families:

* ``kmeans``       weighted sum of squared deviations from the mean,
* ``kmedian``      weighted sum of absolute deviations from the median,
* ``kcenter``      smallest enclosing radius (max combine, unit weights),
* ``kmedoid``      like kmeans/kmedian but the prototype must be a data point,
* ``bregman``      weighted sum of Bregman divergences B_F(x : p)^r.

Sum-form Bregman costs with r=1 have a closed form in three range sums
(weight, weighted value, weighted generator image), so a single query costs
O(1) after the cumulative tables are built. The same three-sum expression is
compiled once as a numba kernel and reused verbatim by the solver's table
fillers and look-up-table builders, keeping every evaluation path bitwise
consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numba as nb
import numpy as np

from .data import PrefixTables, SortedDataset, check_range, range_sums
from .errors import (
    DomainViolation,
    NoConvergence,
    ParseError,
    UnsupportedCombination,
)


class Combine(str, Enum):
    """Inter-cluster aggregation: add per-cluster costs, or take their max."""

    SUM = "sum"
    MAX = "max"

    @property
    def identity(self) -> float:
        # 0 is the identity for SUM and a valid identity for MAX because
        # every cluster cost in this package is nonnegative.
        return 0.0


class ModelKind(str, Enum):
    KMEANS = "kmeans"
    KMEDIAN = "kmedian"
    KCENTER = "kcenter"
    KMEDOID = "kmedoid"
    BREGMAN = "bregman"


class QueryComplexity(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"


@dataclass(frozen=True)
class BregmanGenerator:
    """A strictly convex differentiable function F with its derivative.

    ``F`` and ``Fprime`` must accept numpy arrays elementwise. ``domain`` is
    the open interval on which F is defined. ``code`` selects a compiled
    kernel and is set only by the built-in factories; user-built generators
    keep -1 and run on the vectorized numpy path with their own callables.
    """

    name: str
    F: Callable
    Fprime: Callable
    domain: tuple[float, float] = (-math.inf, math.inf)
    code: int = -1

    def check_domain(self, x) -> None:
        lo, hi = self.domain
        arr = np.asarray(x, dtype=np.float64)
        if np.any(arr <= lo) or np.any(arr >= hi):
            raise DomainViolation(
                f"value outside open domain ({lo}, {hi}) of generator {self.name!r}"
            )


def squared_generator() -> BregmanGenerator:
    return BregmanGenerator("squared", lambda x: np.square(x), lambda x: 2.0 * x, code=0)


def kl_generator() -> BregmanGenerator:
    return BregmanGenerator(
        "kl", lambda x: x * np.log(x), lambda x: np.log(x) + 1.0, (0.0, math.inf), code=1
    )


def itakura_saito_generator() -> BregmanGenerator:
    return BregmanGenerator(
        "itakura-saito", lambda x: -np.log(x), lambda x: -1.0 / x, (0.0, math.inf), code=2
    )


def exp_generator() -> BregmanGenerator:
    return BregmanGenerator("exp", lambda x: np.exp(x), lambda x: np.exp(x), code=3)


GENERATORS: dict[str, Callable[[], BregmanGenerator]] = {
    "squared": squared_generator,
    "kl": kl_generator,
    "itakura-saito": itakura_saito_generator,
    "exp": exp_generator,
}


def generator_by_name(name: str) -> BregmanGenerator:
    try:
        return GENERATORS[name]()
    except KeyError:
        raise ParseError(
            f"unknown generator {name!r}; choose from {sorted(GENERATORS)}"
        ) from None


def check_generator(gen: BregmanGenerator, samples: int = 64) -> None:
    """Verify strict convexity and derivative consistency on sampled points.

    Intended for user-supplied generators; raises ValueError on failure.
    """
    lo, hi = gen.domain
    a = max(lo, -10.0) + 1e-3
    b = min(hi, 10.0) - 1e-3
    xs = np.linspace(a, b, samples)
    mids = 0.5 * (xs[:-1] + xs[1:])
    if not np.all(gen.F(mids) < 0.5 * (gen.F(xs[:-1]) + gen.F(xs[1:]))):
        raise ValueError(f"generator {gen.name!r} is not strictly convex on samples")
    h = 1e-6 * max(1.0, b - a)
    fd = (gen.F(mids + h) - gen.F(mids - h)) / (2 * h)
    scale = np.maximum(np.abs(fd), 1.0)
    if not np.all(np.abs(gen.Fprime(mids) - fd) <= 1e-6 * scale):
        raise ValueError(f"generator {gen.name!r}: Fprime disagrees with finite differences")


@dataclass(frozen=True)
class ClusterCostResult:
    cost: float
    prototype: float


@dataclass(frozen=True)
class CostModel:
    """A fully specified intra-cluster cost plus its combine operator.

    ``r_exponent`` raises the per-point dissimilarity to the r-th power
    (sum models) and may be ``inf`` for Bregman models, which turns the
    objective into the Bregman min-max radius (max combine).
    """

    kind: ModelKind
    generator: BregmanGenerator | None = None
    r_exponent: float = 1.0
    tol: float = 1e-10
    max_iterations: int = 200

    def __post_init__(self):
        if self.kind == ModelKind.BREGMAN and self.generator is None:
            raise ValueError("bregman models require a generator")
        if self.r_exponent < 1.0:
            raise ValueError("r_exponent must be >= 1")
        if self.kind == ModelKind.KMEDOID and self.r_exponent != 1.0:
            raise UnsupportedCombination("kmedoid supports r_exponent = 1 only")

    @property
    def discrete_prototype(self) -> bool:
        return self.kind == ModelKind.KMEDOID

    @property
    def combine(self) -> Combine:
        if self.kind == ModelKind.KCENTER or math.isinf(self.r_exponent):
            return Combine.MAX
        return Combine.SUM

    @property
    def table_generator(self) -> BregmanGenerator:
        """Generator whose image feeds the third cumulative table."""
        return self.generator if self.generator is not None else squared_generator()

    @property
    def query_complexity(self) -> QueryComplexity:
        if self.kind in (ModelKind.KMEANS, ModelKind.KMEDIAN):
            return QueryComplexity.CONSTANT
        if self.kind == ModelKind.KCENTER:
            closed = self.generator is None or self.generator.name == "squared"
            return QueryComplexity.CONSTANT if closed else QueryComplexity.LINEAR
        if self.kind == ModelKind.BREGMAN and self.r_exponent == 1.0:
            return QueryComplexity.CONSTANT
        return QueryComplexity.LINEAR

    @property
    def method_string(self) -> str:
        if self.kind != ModelKind.BREGMAN:
            return self.kind.value
        name = f"bregman:{self.generator.name}"
        if self.r_exponent != 1.0:
            r = "inf" if math.isinf(self.r_exponent) else f"{self.r_exponent:g}"
            name += f":r={r}"
        return name


def kmeans_model() -> CostModel:
    return CostModel(ModelKind.KMEANS, generator=squared_generator())


def kmedian_model() -> CostModel:
    return CostModel(ModelKind.KMEDIAN)


def kcenter_model(generator: BregmanGenerator | None = None, r: float = 1.0) -> CostModel:
    return CostModel(ModelKind.KCENTER, generator=generator, r_exponent=r)


def kmedoid_model(generator: BregmanGenerator | None = None) -> CostModel:
    if generator is None:
        generator = squared_generator()
    return CostModel(ModelKind.KMEDOID, generator=generator)


def kmedoid_median_model() -> CostModel:
    """Discrete k-median: absolute deviation with a data-point prototype."""
    return CostModel(ModelKind.KMEDOID)


def bregman_model(generator: BregmanGenerator, r: float = 1.0) -> CostModel:
    return CostModel(ModelKind.BREGMAN, generator=generator, r_exponent=r)


def parse_method(spec: str) -> CostModel:
    """Parse a method string: kmeans | kmedian | kcenter | kmedoid | bregman:<gen>[:r=<r>]."""
    parts = spec.strip().lower().split(":")
    head = parts[0]
    if head == "kmeans" and len(parts) == 1:
        return kmeans_model()
    if head == "kmedian" and len(parts) == 1:
        return kmedian_model()
    if head == "kcenter" and len(parts) == 1:
        return kcenter_model()
    if head == "kmedoid":
        if len(parts) == 1:
            return kmedoid_model()
        if len(parts) == 2:
            if parts[1] == "median":
                return kmedoid_median_model()
            return kmedoid_model(generator_by_name(parts[1]))
    if head == "bregman" and len(parts) in (2, 3):
        gen = generator_by_name(parts[1])
        r = 1.0
        if len(parts) == 3:
            if not parts[2].startswith("r="):
                raise ParseError(f"expected r=<value> in method {spec!r}")
            raw = parts[2][2:]
            r = math.inf if raw in ("inf", "infinity") else float(raw)
        return bregman_model(gen, r)
    raise ParseError(
        f"unknown method {spec!r}; expected kmeans, kmedian, kcenter, "
        "kmedoid[:median|:<generator>] or bregman:<generator>[:r=<r>]"
    )


# ---------------------------------------------------------------------------
# Compiled scalar kernels. One implementation per model family, shared by the
# on-demand solver fillers and the LUT builders.
# ---------------------------------------------------------------------------


@nb.njit(cache=True, inline="always")
def _gen_f(code: int, x: float) -> float:
    if code == 0:
        return x * x
    elif code == 1:
        return x * np.log(x)
    elif code == 2:
        return -np.log(x)
    return np.exp(x)


@nb.njit(cache=True, inline="always")
def _gen_fp(code: int, x: float) -> float:
    if code == 0:
        return 2.0 * x
    elif code == 1:
        return np.log(x) + 1.0
    elif code == 2:
        return -1.0 / x
    return np.exp(x)


@nb.njit(cache=True, inline="always")
def _seg_cost_tables(j, i, cum_w, cum_wx, cum_wf, code):
    """Bregman information of range [j, i] from the three cumulative tables."""
    if j == i:
        return 0.0
    w = cum_w[i] - cum_w[j - 1]
    if w <= 0.0:
        return np.inf
    wx = cum_wx[i] - cum_wx[j - 1]
    wf = cum_wf[i] - cum_wf[j - 1]
    p = wx / w
    fp = _gen_fp(code, p)
    c = w * (p * fp - _gen_f(code, p)) + wf - fp * wx
    return c if c > 0.0 else 0.0


@nb.njit(cache=True, inline="always")
def _seg_cost_median(j, i, cum_w, cum_wx, values):
    """Weighted absolute deviation of range [j, i] about its lower weighted median."""
    if j == i:
        return 0.0
    w = cum_w[i] - cum_w[j - 1]
    target = cum_w[j - 1] + 0.5 * w
    t = np.searchsorted(cum_w, target, side="left")
    med = values[t - 1]
    wl = cum_w[t] - cum_w[j - 1]
    sl = cum_wx[t] - cum_wx[j - 1]
    wr = cum_w[i] - cum_w[t]
    sr = cum_wx[i] - cum_wx[t]
    c = med * wl - sl + sr - med * wr
    return c if c > 0.0 else 0.0


@nb.njit(cache=True, inline="always")
def _seg_cost_center(j, i, values, expo):
    """Enclosing radius of range [j, i], raised to ``expo``."""
    return (0.5 * (values[i - 1] - values[j - 1])) ** expo


@nb.njit(cache=True, inline="always")
def _seg_median_index(j, i, cum_w):
    w = cum_w[i] - cum_w[j - 1]
    target = cum_w[j - 1] + 0.5 * w
    return np.searchsorted(cum_w, target, side="left")


# ---------------------------------------------------------------------------
# Divergences and closed-form range costs
# ---------------------------------------------------------------------------


def bregman_divergence(gen: BregmanGenerator, p, q):
    """B_F(p : q) = F(p) - F(q) - (p - q) F'(q); nonnegative, zero iff p = q."""
    gen.check_domain(p)
    gen.check_domain(q)
    out = gen.F(p) - gen.F(q) - (np.asarray(p, dtype=np.float64) - q) * gen.Fprime(q)
    if np.ndim(out) == 0:
        return float(out)
    return out


def _information_from_sums(gen: BregmanGenerator, w: float, wx: float, wf: float) -> ClusterCostResult:
    p = wx / w
    lo, hi = gen.domain
    # p is a convex combination of in-domain values; only roundoff could move it.
    assert lo < p < hi, "prototype escaped the generator domain"
    fp = float(gen.Fprime(p))
    cost = w * (p * fp - float(gen.F(p))) + wf - fp * wx
    return ClusterCostResult(cost=max(cost, 0.0), prototype=p)


def bregman_information(gen: BregmanGenerator, pt: PrefixTables, first: int, last: int) -> ClusterCostResult:
    """Minimal intra-range sum of Bregman divergences, in O(1) from the tables.

    The minimizer is the weighted arithmetic mean p = (sum w x) / (sum w) and
    the minimum expands into the three range sums:
    cost = W (p F'(p) - F(p)) + sum(w F(x)) - F'(p) sum(w x).
    Singleton ranges cost exactly zero.
    """
    if pt.generator_id != gen.name:
        raise ValueError(
            f"tables were built for generator {pt.generator_id!r}, not {gen.name!r}"
        )
    w, wx, wf = range_sums(pt, first, last)
    if first == last:
        return ClusterCostResult(cost=0.0, prototype=wx / w)
    return _information_from_sums(gen, w, wx, wf)


def bregman_center_cost(
    gen: BregmanGenerator,
    ds: SortedDataset,
    first: int,
    last: int,
    tol: float = 1e-10,
    max_iterations: int = 200,
) -> ClusterCostResult:
    """Min over p of max_l B_F(x_l : p) on the range, by bisection.

    B_F(x : p) is convex in x, so the max over the range sits at an endpoint;
    B_F(x_first : p) increases and B_F(x_last : p) decreases as p moves right,
    so the optimum is where they cross.
    """
    check_range(ds.n, first, last)
    if tol <= 0:
        raise ValueError("tol must be positive")
    xl = float(ds.values[first - 1])
    xr = float(ds.values[last - 1])
    if first == last:
        return ClusterCostResult(cost=0.0, prototype=xl)
    gen.check_domain(xl)
    gen.check_domain(xr)
    a, b = xl, xr
    for _ in range(max_iterations):
        if b - a <= tol:
            break
        mid = 0.5 * (a + b)
        if bregman_divergence(gen, xl, mid) < bregman_divergence(gen, xr, mid):
            a = mid
        else:
            b = mid
    else:
        raise NoConvergence(f"bisection did not reach tol={tol} in {max_iterations} iterations")
    p = 0.5 * (a + b)
    cost = max(bregman_divergence(gen, xl, p), bregman_divergence(gen, xr, p))
    return ClusterCostResult(cost=cost, prototype=p)


def _lr_objective(gen, values, weights, r):
    def phi(p: float) -> float:
        div = gen.F(values) - gen.F(p) - (values - p) * gen.Fprime(p)
        np.maximum(div, 0.0, out=div)
        return float(np.sum(weights * div**r))

    return phi


def bregman_lr_cost(
    gen: BregmanGenerator,
    ds: SortedDataset,
    first: int,
    last: int,
    r: float,
    tol: float = 1e-10,
    max_iterations: int = 200,
) -> ClusterCostResult:
    """Minimize sum of w B_F(x : p)^r over p in [x_first, x_last].

    r = 1 uses the closed-form minimizer (weighted mean); r > 1 falls back to
    a 64-point grid scan that brackets the minimum, refined by golden-section
    search. Each per-point term is unimodal in p with its minimum inside the
    range, so the endpoints bracket the global minimizer.
    """
    check_range(ds.n, first, last)
    if not (r >= 1.0 and math.isfinite(r)):
        raise ValueError("r must be finite and >= 1")
    values, weights = ds.slice_arrays(first, last)
    gen.check_domain(values)
    if first == last:
        return ClusterCostResult(cost=0.0, prototype=float(values[0]))
    if r == 1.0:
        w = float(np.sum(weights))
        wx = float(np.sum(weights * values))
        wf = float(np.sum(weights * gen.F(values)))
        return _information_from_sums(gen, w, wx, wf)

    phi = _lr_objective(gen, values, weights, r)
    grid = np.linspace(values[0], values[-1], 64)
    grid_vals = np.array([phi(p) for p in grid])
    g = int(np.argmin(grid_vals))
    a = float(grid[max(g - 1, 0)])
    b = float(grid[min(g + 1, len(grid) - 1)])

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(max_iterations):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = phi(d)
    else:
        raise NoConvergence(f"golden-section did not reach tol={tol} in {max_iterations} iterations")
    p = 0.5 * (a + b)
    best = min((phi(p), p), (float(grid_vals[g]), float(grid[g])))
    return ClusterCostResult(cost=best[0], prototype=best[1])


# ---------------------------------------------------------------------------
# The intra-cluster cost dispatcher
# ---------------------------------------------------------------------------


def _require_unit_weights(weights: np.ndarray, what: str) -> None:
    if not np.all(weights == 1.0):
        raise UnsupportedCombination(f"{what} is defined for unit weights only")


def _median_cost_from_tables(pt: PrefixTables, values: np.ndarray, first: int, last: int) -> ClusterCostResult:
    t = int(_seg_median_index(first, last, pt.cum_w))
    cost = float(_seg_cost_median(first, last, pt.cum_w, pt.cum_wx, values))
    return ClusterCostResult(cost=cost, prototype=float(values[t - 1]))


def _medoid_cost(model: CostModel, ds: SortedDataset, pt: PrefixTables, first: int, last: int) -> ClusterCostResult:
    if first == last:
        return ClusterCostResult(cost=0.0, prototype=float(ds.values[first - 1]))
    cand = ds.values[first - 1 : last]
    if model.generator is not None:
        gen = model.generator
        w, wx, wf = range_sums(pt, first, last)
        costs = wf - w * gen.F(cand) - gen.Fprime(cand) * (wx - w * cand)
    else:
        # Absolute deviation about each candidate; split index of x_t is t.
        idx = np.arange(first, last + 1)
        wl = pt.cum_w[idx] - pt.cum_w[first - 1]
        sl = pt.cum_wx[idx] - pt.cum_wx[first - 1]
        wr = pt.cum_w[last] - pt.cum_w[idx]
        sr = pt.cum_wx[last] - pt.cum_wx[idx]
        costs = cand * wl - sl + sr - cand * wr
    t = int(np.argmin(costs))
    return ClusterCostResult(cost=max(float(costs[t]), 0.0), prototype=float(cand[t]))


def _clamp_prototype(res: ClusterCostResult, ds: SortedDataset, first: int, last: int) -> ClusterCostResult:
    # The true minimizer always lies inside the range; only floating-point
    # cancellation in table differences can nudge it out, so clamp.
    xl = float(ds.values[first - 1])
    xr = float(ds.values[last - 1])
    if not xl <= res.prototype <= xr:
        res = replace(res, prototype=min(max(res.prototype, xl), xr))
    return res


def cluster_cost(
    model: CostModel,
    ds: SortedDataset,
    pt: PrefixTables,
    first: int,
    last: int,
) -> ClusterCostResult:
    """Optimal single-cluster cost of [first, last] and the achieving prototype.

    O(1) for kmeans/bregman r=1 (three-sum closed form) and for kcenter with
    the plain or squared distance; O(log n) for kmedian; O(range) for kmedoid;
    iterative for Bregman centers and finite r > 1.
    """
    check_range(ds.n, first, last)
    return _clamp_prototype(_cluster_cost_dispatch(model, ds, pt, first, last), ds, first, last)


def _cluster_cost_dispatch(
    model: CostModel,
    ds: SortedDataset,
    pt: PrefixTables,
    first: int,
    last: int,
) -> ClusterCostResult:
    kind = model.kind
    if model.combine == Combine.MAX:
        _require_unit_weights(ds.weights[first - 1 : last], "max-combine clustering")

    if kind == ModelKind.KMEANS:
        return bregman_information(squared_generator(), pt, first, last)
    if kind == ModelKind.KMEDIAN:
        return _median_cost_from_tables(pt, ds.values, first, last)
    if kind == ModelKind.KCENTER:
        gen = model.generator
        if gen is None or gen.name == "squared":
            xl = float(ds.values[first - 1])
            xr = float(ds.values[last - 1])
            radius = 0.5 * (xr - xl)
            expo = model.r_exponent if gen is None else 2.0 * model.r_exponent
            return ClusterCostResult(cost=radius**expo, prototype=0.5 * (xl + xr))
        res = bregman_center_cost(gen, ds, first, last, model.tol, model.max_iterations)
        if model.r_exponent != 1.0:
            res = replace(res, cost=res.cost**model.r_exponent)
        return res
    if kind == ModelKind.KMEDOID:
        return _medoid_cost(model, ds, pt, first, last)

    # Bregman family
    gen = model.generator
    if math.isinf(model.r_exponent):
        return bregman_center_cost(gen, ds, first, last, model.tol, model.max_iterations)
    if model.r_exponent == 1.0:
        return bregman_information(gen, pt, first, last)
    return bregman_lr_cost(gen, ds, first, last, model.r_exponent, model.tol, model.max_iterations)


def cluster_cost_direct(model: CostModel, ds: SortedDataset, first: int, last: int) -> ClusterCostResult:
    """Like cluster_cost but by direct summation over the range.

    Used for reported per-cluster costs (no cancellation from table
    differences) and by the exhaustive-enumeration checker.
    """
    check_range(ds.n, first, last)
    return _clamp_prototype(
        _cluster_cost_direct_dispatch(model, ds, first, last), ds, first, last
    )


def _cluster_cost_direct_dispatch(
    model: CostModel, ds: SortedDataset, first: int, last: int
) -> ClusterCostResult:
    values, weights = ds.slice_arrays(first, last)
    kind = model.kind
    if model.combine == Combine.MAX:
        _require_unit_weights(weights, "max-combine clustering")

    if kind in (ModelKind.KMEANS, ModelKind.BREGMAN) and model.r_exponent == 1.0:
        gen = squared_generator() if kind == ModelKind.KMEANS else model.generator
        gen.check_domain(values)
        p = float(np.average(values, weights=weights))
        div = gen.F(values) - gen.F(p) - (values - p) * gen.Fprime(p)
        np.maximum(div, 0.0, out=div)
        return ClusterCostResult(cost=float(np.sum(weights * div)), prototype=p)
    if kind == ModelKind.KMEDIAN:
        cum = np.cumsum(weights)
        t = int(np.searchsorted(cum, 0.5 * cum[-1], side="left"))
        med = float(values[t])
        return ClusterCostResult(
            cost=float(np.sum(weights * np.abs(values - med))), prototype=med
        )
    if kind == ModelKind.KCENTER:
        gen = model.generator
        if gen is None or gen.name == "squared":
            radius = 0.5 * float(values[-1] - values[0])
            expo = model.r_exponent if gen is None else 2.0 * model.r_exponent
            return ClusterCostResult(cost=radius**expo, prototype=0.5 * float(values[0] + values[-1]))
        res = bregman_center_cost(gen, ds, first, last, model.tol, model.max_iterations)
        if model.r_exponent != 1.0:
            res = replace(res, cost=res.cost**model.r_exponent)
        return res
    if kind == ModelKind.KMEDOID:
        if model.generator is not None:
            gen = model.generator
            gen.check_domain(values)
            div = (
                gen.F(values)[:, None]
                - gen.F(values)[None, :]
                - (values[:, None] - values[None, :]) * gen.Fprime(values)[None, :]
            )
            np.maximum(div, 0.0, out=div)
            costs = weights @ div
        else:
            costs = weights @ np.abs(values[:, None] - values[None, :])
        t = int(np.argmin(costs))
        return ClusterCostResult(cost=float(costs[t]), prototype=float(values[t]))

    # Bregman, r != 1
    if math.isinf(model.r_exponent):
        return bregman_center_cost(model.generator, ds, first, last, model.tol, model.max_iterations)
    return bregman_lr_cost(
        model.generator, ds, first, last, model.r_exponent, model.tol, model.max_iterations
    )


def model_dissimilarity(model: CostModel, x, prototype):
    """Per-point dissimilarity d^r(x, prototype) under the model.

    This is the quantity whose per-cluster aggregation the model minimizes;
    it drives the Voronoi-consistency diagnostic and out-of-sample assignment.
    """
    arr = np.asarray(x, dtype=np.float64)
    kind = model.kind
    if kind == ModelKind.KMEANS:
        out = np.square(arr - prototype)
    elif kind == ModelKind.KMEDIAN:
        out = np.abs(arr - prototype)
    elif kind in (ModelKind.KCENTER, ModelKind.KMEDOID, ModelKind.BREGMAN):
        gen = model.generator
        if gen is None:
            out = np.abs(arr - prototype)
        else:
            gen.check_domain(arr)
            out = gen.F(arr) - gen.F(prototype) - (arr - prototype) * gen.Fprime(prototype)
            out = np.maximum(out, 0.0)
        if kind == ModelKind.BREGMAN and math.isfinite(model.r_exponent) and model.r_exponent != 1.0:
            out = out**model.r_exponent
        elif kind == ModelKind.KCENTER and model.r_exponent != 1.0:
            out = out**model.r_exponent
    else:  # pragma: no cover
        raise ValueError(f"unknown model kind {kind}")
    if np.ndim(x) == 0:
        return float(out)
    return out
