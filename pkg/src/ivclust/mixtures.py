"""Mixture learning by maximizing the complete likelihood with hard labels.

For a mixture with weights alpha and component parameters theta, the joint
likelihood of data and labels factorizes per point, so maximizing it is a
clustering problem for the per-point cost

    d(x, (alpha_m, theta_m)) = -log p(x; theta_m) - log alpha_m.

For a fixed alpha, the best labeling with the best per-cluster theta is
found exactly by the interval DP solver whenever the family's density
graphs pairwise cross at most once on the support (after reparameterizing
by the sufficient statistic where needed); the per-cluster theta minimizer
has a closed form for every supported family, so each range cost is O(1)
from a handful of cumulative tables. The weights then update to the cluster
proportions and the assignment repeats; each step can only increase the
complete log-likelihood.

Supported families (all univariate, parameters per component in braces):
gaussian_fixed_sigma {mu}, gaussian_free_sigma {mu, sigma2},
gaussian_zero_mean {sigma2}, poisson {lam}, rayleigh {sigma2},
exponential {rate}, laplace_fixed_scale {mu}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .costs import kmeans_model
from .data import SortedDataset, build_dataset
from .errors import (
    DegenerateClusterWarning,
    KTooLarge,
    SupportViolation,
    TooFewSamples,
)
from .solver import dp_assign, solve

_TINY = 1e-12  # parameter floor for all-zero clusters (rate/mean parameters)

FAMILY_IDS = (
    "gaussian_fixed_sigma",
    "gaussian_free_sigma",
    "gaussian_zero_mean",
    "poisson",
    "rayleigh",
    "exponential",
    "laplace_fixed_scale",
)


@dataclass(frozen=True)
class FamilySpec:
    """A single-parameter-family description sufficient for hard-mixture fitting.

    ``order`` is the number of scalar parameters per component. ``transform``
    is the sufficient-statistic reparameterization applied before clustering
    (None means the identity). ``contiguity_guaranteed`` records whether the
    reparameterized densities pairwise cross at most once, which is what
    makes the assignment step globally optimal.
    """

    family_id: str
    order: int
    contiguity_guaranteed: bool
    sigma: float | None = None
    scale: float | None = None
    transform: Callable[[np.ndarray], np.ndarray] | None = None

    def sufficient_statistic(self, x):
        return x if self.transform is None else self.transform(x)

    @property
    def label(self) -> str:
        if self.family_id == "gaussian_fixed_sigma":
            return f"gaussian_fixed_sigma:{self.sigma:g}"
        if self.family_id == "laplace_fixed_scale":
            return f"laplace_fixed_scale:{self.scale:g}"
        return self.family_id


def family(name: str, sigma: float | None = None, scale: float | None = None) -> FamilySpec:
    """Build a FamilySpec by id; fixed-parameter families take their constant here."""
    if name == "gaussian_fixed_sigma":
        if sigma is None or sigma <= 0:
            raise ValueError("gaussian_fixed_sigma requires sigma > 0")
        return FamilySpec(name, order=1, contiguity_guaranteed=True, sigma=float(sigma))
    if name == "gaussian_free_sigma":
        return FamilySpec(name, order=2, contiguity_guaranteed=False)
    if name == "gaussian_zero_mean":
        return FamilySpec(name, order=1, contiguity_guaranteed=True, transform=np.square)
    if name in ("poisson", "rayleigh", "exponential"):
        return FamilySpec(name, order=1, contiguity_guaranteed=True)
    if name == "laplace_fixed_scale":
        if scale is None or scale <= 0:
            raise ValueError("laplace_fixed_scale requires scale > 0")
        return FamilySpec(name, order=1, contiguity_guaranteed=True, scale=float(scale))
    raise ValueError(f"unknown family {name!r}; choose from {FAMILY_IDS}")


def parse_family(spec: str) -> FamilySpec:
    """Parse 'name' or 'name:param' into a FamilySpec (param = sigma or scale)."""
    name, _, param = spec.partition(":")
    value = float(param) if param else None
    if name == "gaussian_fixed_sigma":
        return family(name, sigma=value)
    if name == "laplace_fixed_scale":
        return family(name, scale=value)
    return family(name)


def check_support(fam: FamilySpec, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=np.float64)
    fid = fam.family_id
    if fid == "poisson":
        if np.any(values < 0) or np.any(values != np.floor(values)):
            raise SupportViolation("poisson requires nonnegative integer observations")
    elif fid == "rayleigh":
        if np.any(values <= 0):
            raise SupportViolation("rayleigh requires strictly positive observations")
    elif fid == "exponential":
        if np.any(values < 0):
            raise SupportViolation("exponential requires nonnegative observations")


def _nll_array(fam: FamilySpec, x: np.ndarray, theta: dict) -> np.ndarray:
    """Exact -log p(x; theta) elementwise; assumes support already checked."""
    fid = fam.family_id
    if fid == "gaussian_fixed_sigma":
        var = fam.sigma**2
        return 0.5 * np.log(2.0 * np.pi * var) + np.square(x - theta["mu"]) / (2.0 * var)
    if fid == "gaussian_free_sigma":
        var = theta["sigma2"]
        return 0.5 * np.log(2.0 * np.pi * var) + np.square(x - theta["mu"]) / (2.0 * var)
    if fid == "gaussian_zero_mean":
        var = theta["sigma2"]
        return 0.5 * np.log(2.0 * np.pi * var) + np.square(x) / (2.0 * var)
    if fid == "poisson":
        lam = theta["lam"]
        return lam - x * np.log(lam) + gammaln(x + 1.0)
    if fid == "rayleigh":
        var = theta["sigma2"]
        with np.errstate(divide="ignore"):
            logx = np.log(x)
        return -logx + np.log(var) + np.square(x) / (2.0 * var)
    if fid == "exponential":
        rate = theta["rate"]
        return -np.log(rate) + rate * x
    if fid == "laplace_fixed_scale":
        b = fam.scale
        return np.log(2.0 * b) + np.abs(x - theta["mu"]) / b
    raise ValueError(f"unknown family {fid!r}")  # pragma: no cover


def neg_log_density(fam: FamilySpec, x: float, theta: dict) -> float:
    """-log p(x; theta), raising SupportViolation outside the support."""
    arr = np.asarray([x], dtype=np.float64)
    check_support(fam, arr)
    return float(_nll_array(fam, arr, theta)[0])


def _weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    cum = np.cumsum(weights)
    t = int(np.searchsorted(cum, 0.5 * cum[-1], side="left"))
    return float(values[t])


def mle_update(
    fam: FamilySpec,
    values: np.ndarray,
    weights: np.ndarray | None = None,
    variance_floor: float = _TINY,
) -> dict:
    """Closed-form weighted maximum-likelihood parameters of one cluster.

    When a scale-like parameter collapses to zero (single point, identical
    points, or an all-zero cluster), it is clamped to ``variance_floor`` and
    a DegenerateClusterWarning is emitted.
    """
    values = np.asarray(values, dtype=np.float64)
    if weights is None:
        weights = np.ones_like(values)
    weights = np.asarray(weights, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cluster must be nonempty")
    check_support(fam, values)
    w = float(np.sum(weights))
    fid = fam.family_id

    def floored(raw: float, what: str) -> float:
        if raw < variance_floor:
            warnings.warn(
                f"{fid}: {what} floored at {variance_floor:g} on a degenerate cluster",
                DegenerateClusterWarning,
            )
            return variance_floor
        return raw

    if fid == "gaussian_fixed_sigma":
        return {"mu": float(np.average(values, weights=weights))}
    if fid == "gaussian_free_sigma":
        mu = float(np.average(values, weights=weights))
        var = float(np.sum(weights * np.square(values - mu)) / w)
        return {"mu": mu, "sigma2": floored(var, "variance")}
    if fid == "gaussian_zero_mean":
        var = float(np.sum(weights * np.square(values)) / w)
        return {"sigma2": floored(var, "variance")}
    if fid == "poisson":
        return {"lam": floored(float(np.average(values, weights=weights)), "rate")}
    if fid == "rayleigh":
        return {"sigma2": floored(float(np.sum(weights * np.square(values)) / (2.0 * w)), "scale")}
    if fid == "exponential":
        mean = floored(float(np.average(values, weights=weights)), "mean")
        return {"rate": 1.0 / mean}
    if fid == "laplace_fixed_scale":
        return {"mu": _weighted_median(values, weights)}
    raise ValueError(f"unknown family {fid!r}")  # pragma: no cover


@dataclass(frozen=True)
class MixtureModel:
    k: int
    alphas: tuple[float, ...]
    thetas: tuple[dict, ...]
    family: FamilySpec

    def __post_init__(self):
        if abs(sum(self.alphas) - 1.0) > 1e-12 or any(a <= 0 for a in self.alphas):
            raise ValueError("alphas must be positive and sum to 1")


@dataclass(frozen=True)
class FitReport:
    """Everything one hard-mixture fit produced, including its likelihood trace."""

    model: MixtureModel
    labels: np.ndarray
    complete_loglik: float
    avg_complete_loglik: float
    loglik_trace: tuple[float, ...]
    iterations: int
    converged: bool
    aic: float | None
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "family": self.model.family.label,
            "k": self.model.k,
            "alphas": list(self.model.alphas),
            "thetas": [dict(t) for t in self.model.thetas],
            "complete_loglik": self.complete_loglik,
            "avg_complete_loglik": self.avg_complete_loglik,
            "aic": self.aic,
            "iterations": self.iterations,
            "converged": self.converged,
            "warnings": list(self.warnings),
        }


def free_parameter_count(fam: FamilySpec, k: int) -> int:
    """Number of free scalars of a k-component mixture: k*(order+1) - 1."""
    return k * (fam.order + 1) - 1


def aic_value(loglik: float, k_param: int, n: int) -> float:
    """Small-sample-corrected Akaike criterion for a model with k_param scalars."""
    if n - k_param - 1 <= 0:
        raise TooFewSamples(f"need n > k_param + 1, got n = {n}, k_param = {k_param}")
    return -2.0 * loglik + 2.0 * k_param + 2.0 * k_param * (k_param + 1) / (n - k_param - 1)


def aic(report: FitReport, n: int, k_param: int | None = None) -> float:
    """AIC of a fit; ``k_param`` defaults to the mixture's free-parameter count."""
    if k_param is None:
        k_param = free_parameter_count(report.model.family, report.model.k)
    return aic_value(report.complete_loglik, k_param, n)


# ---------------------------------------------------------------------------
# Per-family range costs: optimal weighted NLL of any contiguous range in O(1)
# ---------------------------------------------------------------------------


class _FamilyEvaluator:
    """Cumulative tables over the (reparameterized) dataset for range NLLs."""

    def __init__(self, fam: FamilySpec, cds: SortedDataset, variance_floor: float):
        self.fam = fam
        self.cds = cds
        self.floor = variance_floor
        x = cds.values
        w = cds.weights
        zero = np.zeros(1)
        self.cw = np.concatenate([zero, np.cumsum(w)])
        self.cwx = np.concatenate([zero, np.cumsum(w * x)])
        fid = fam.family_id
        if fid in ("gaussian_fixed_sigma", "gaussian_free_sigma"):
            self.cwx2 = np.concatenate([zero, np.cumsum(w * x * x)])
        elif fid == "poisson":
            self.cwlg = np.concatenate([zero, np.cumsum(w * gammaln(x + 1.0))])
        elif fid == "rayleigh":
            self.cwx2 = np.concatenate([zero, np.cumsum(w * x * x)])
            self.cwlogx = np.concatenate([zero, np.cumsum(w * np.log(x))])

    def weight(self, js: np.ndarray, i: int) -> np.ndarray:
        return self.cw[i] - self.cw[js - 1]

    def nll(self, js: np.ndarray, i: int) -> np.ndarray:
        """min over theta of the weighted NLL of ranges [j, i], vectorized over j."""
        fam = self.fam
        fid = fam.family_id
        w = self.cw[i] - self.cw[js - 1]
        sx = self.cwx[i] - self.cwx[js - 1]
        if fid == "gaussian_fixed_sigma":
            var = fam.sigma**2
            sse = np.maximum(self.cwx2[i] - self.cwx2[js - 1] - sx * sx / w, 0.0)
            return 0.5 * np.log(2.0 * np.pi * var) * w + sse / (2.0 * var)
        if fid == "gaussian_free_sigma":
            sse = np.maximum(self.cwx2[i] - self.cwx2[js - 1] - sx * sx / w, 0.0)
            var = np.maximum(sse / w, self.floor)
            return 0.5 * w * np.log(2.0 * np.pi * var) + sse / (2.0 * var)
        if fid == "gaussian_zero_mean":
            # Operates on y = x^2, so the range mean of y is the variance MLE.
            var = np.maximum(sx / w, self.floor)
            return 0.5 * w * np.log(2.0 * np.pi * var) + sx / (2.0 * var)
        if fid == "poisson":
            lam = np.maximum(sx / w, _TINY)
            slg = self.cwlg[i] - self.cwlg[js - 1]
            return w * lam - sx * np.log(lam) + slg
        if fid == "rayleigh":
            sx2 = self.cwx2[i] - self.cwx2[js - 1]
            var = np.maximum(sx2 / (2.0 * w), _TINY)
            slogx = self.cwlogx[i] - self.cwlogx[js - 1]
            return -slogx + w * np.log(var) + sx2 / (2.0 * var)
        if fid == "exponential":
            mean = np.maximum(sx / w, _TINY)
            return w * np.log(mean) + sx / mean
        if fid == "laplace_fixed_scale":
            targets = self.cw[js - 1] + 0.5 * w
            t = np.searchsorted(self.cw, targets, side="left")
            med = self.cds.values[t - 1]
            wl = self.cw[t] - self.cw[js - 1]
            sl = self.cwx[t] - self.cwx[js - 1]
            absdev = np.maximum(med * wl - sl + (sx - sl) - med * (w - wl), 0.0)
            b = fam.scale
            return w * np.log(2.0 * b) + absdev / b
        raise ValueError(f"unknown family {fid!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# The outer fitting loop
# ---------------------------------------------------------------------------


def _complete_loglik(
    fam: FamilySpec,
    values: np.ndarray,
    weights: np.ndarray,
    labels: np.ndarray,
    alphas: np.ndarray,
    thetas: Sequence[dict],
) -> float:
    total = 0.0
    for m, theta in enumerate(thetas):
        sel = labels == m
        if not np.any(sel):
            continue
        nll = _nll_array(fam, values[sel], theta)
        total += float(np.sum(weights[sel] * (np.log(alphas[m]) - nll)))
    return total


def fit_hard_mixture(
    ds: SortedDataset,
    fam: FamilySpec,
    k: int,
    max_iters: int = 100,
    tol: float = 1e-8,
    variance_floor_scale: float = 1e-6,
) -> FitReport:
    """Fit a k-component mixture by alternating optimal assignment and MLE.

    Starts from uniform weights. Each round solves the interval assignment
    under the additively-weighted NLL cost (exactly optimal for families with
    the contiguity guarantee), then re-estimates weights as cluster
    proportions and parameters as per-cluster MLEs. Stops when the labels
    repeat, the complete log-likelihood improves by less than ``tol``, or
    ``max_iters`` rounds have run. Components are reported left to right in
    the clustered coordinate.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    values = ds.values
    weights = ds.weights
    check_support(fam, values)

    if fam.transform is None:
        cds = ds
        to_c = np.arange(ds.n)
    else:
        y = fam.sufficient_statistic(values)
        cds = build_dataset(zip(y.tolist(), weights.tolist()))
        to_c = np.searchsorted(cds.values, y)
    if k > cds.n:
        raise KTooLarge(
            f"k = {k} exceeds the {cds.n} distinct points available after "
            "sufficient-statistic reparameterization"
        )

    data_range = float(values[-1] - values[0])
    floor = max((variance_floor_scale * data_range) ** 2, _TINY)
    evaluator = _FamilyEvaluator(fam, cds, floor)

    alphas = np.full(k, 1.0 / k)
    total_w = float(np.sum(weights))
    labels_prev: np.ndarray | None = None
    labels = np.zeros(ds.n, dtype=np.int64)
    thetas: list[dict] = []
    trace: list[float] = []
    converged = False
    caught: list[str] = []

    for _ in range(max_iters):
        neglog_alpha = -np.log(alphas)

        def seg_costs_for_m(m, _nla=neglog_alpha):
            return lambda js, i: evaluator.nll(js, i) + _nla[m - 1] * evaluator.weight(js, i)

        delims = dp_assign(cds.n, k, seg_costs_for_m)
        sizes = [
            (delims[m + 1] if m + 1 < k else cds.n + 1) - delims[m] for m in range(k)
        ]
        c_labels = np.repeat(np.arange(k), sizes)
        new_labels = c_labels[to_c]
        if labels_prev is not None and np.array_equal(new_labels, labels_prev):
            converged = True
            break
        labels = new_labels
        labels_prev = labels

        cluster_w = np.bincount(labels, weights=weights, minlength=k)
        alphas = cluster_w / total_w
        thetas = []
        with warnings.catch_warnings(record=True) as caught_now:
            warnings.simplefilter("always", DegenerateClusterWarning)
            for m in range(k):
                sel = labels == m
                thetas.append(mle_update(fam, values[sel], weights[sel], floor))
        caught.extend(str(c.message) for c in caught_now)

        lc = _complete_loglik(fam, values, weights, labels, alphas, thetas)
        trace.append(lc)
        if len(trace) >= 2 and trace[-1] - trace[-2] < tol:
            converged = True
            break

    report_warnings = list(dict.fromkeys(caught))
    if not fam.contiguity_guaranteed:
        report_warnings.append(
            f"{fam.family_id}: densities may cross twice, so the assignment step "
            "is optimal over interval clusterings only"
        )

    model = MixtureModel(
        k=k, alphas=tuple(float(a) for a in alphas), thetas=tuple(thetas), family=fam
    )
    lc = trace[-1]
    try:
        aic_default = aic_value(lc, free_parameter_count(fam, k), ds.n)
    except TooFewSamples:
        aic_default = None
        report_warnings.append("aic unavailable: too few samples for the correction term")
    return FitReport(
        model=model,
        labels=labels,
        complete_loglik=lc,
        avg_complete_loglik=lc / total_w,
        loglik_trace=tuple(trace),
        iterations=len(trace),
        converged=converged,
        aic=aic_default,
        warnings=tuple(report_warnings),
    )


def gmm_comparison(
    ds: SortedDataset, k: int, max_iters: int = 100, tol: float = 1e-8
) -> tuple[FitReport, FitReport]:
    """Two Gaussian mixture fits for side-by-side likelihood comparison.

    The first comes from a single optimal squared-error clustering pass
    (clustering as if all components shared one standard deviation), with
    free per-cluster (mu, sigma) estimated afterwards. The second iterates
    the hard-mixture fit with free standard deviations throughout. Both
    report the average complete log-likelihood for comparison.
    """
    fam = family("gaussian_free_sigma")
    clustering, _ = solve(ds, kmeans_model(), k)
    labels = clustering.labels()
    weights = ds.weights
    total_w = float(np.sum(weights))
    alphas = np.bincount(labels, weights=weights, minlength=k) / total_w
    data_range = float(ds.values[-1] - ds.values[0])
    floor = max((1e-6 * data_range) ** 2, _TINY)
    thetas = []
    report_warnings: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateClusterWarning)
        for m in range(k):
            sel = labels == m
            thetas.append(mle_update(fam, ds.values[sel], weights[sel], floor))
    report_warnings.extend(str(c.message) for c in caught)
    lc = _complete_loglik(fam, ds.values, weights, labels, alphas, thetas)
    try:
        aic_default = aic_value(lc, free_parameter_count(fam, k), ds.n)
    except TooFewSamples:
        aic_default = None
        report_warnings.append("aic unavailable: too few samples for the correction term")
    gmm1 = FitReport(
        model=MixtureModel(
            k=k, alphas=tuple(float(a) for a in alphas), thetas=tuple(thetas), family=fam
        ),
        labels=labels,
        complete_loglik=lc,
        avg_complete_loglik=lc / total_w,
        loglik_trace=(lc,),
        iterations=1,
        converged=True,
        aic=aic_default,
        warnings=tuple(report_warnings),
    )
    gmm2 = fit_hard_mixture(ds, fam, k, max_iters=max_iters, tol=tol)
    return gmm1, gmm2


def density_for_plot(fam: FamilySpec, xs: np.ndarray, theta: dict) -> np.ndarray:
    """Component density on a grid; zero outside the support.

    The Poisson mass function is extended continuously through the gamma
    function so that it plots as a smooth curve.
    """
    xs = np.asarray(xs, dtype=np.float64)
    out = np.zeros_like(xs)
    fid = fam.family_id
    if fid in ("gaussian_fixed_sigma", "gaussian_free_sigma", "gaussian_zero_mean",
               "laplace_fixed_scale"):
        return np.exp(-_nll_array(fam, xs, theta))
    if fid == "poisson":
        ok = xs >= 0
        lam = theta["lam"]
        out[ok] = np.exp(-(lam - xs[ok] * np.log(lam) + gammaln(xs[ok] + 1.0)))
        return out
    if fid == "rayleigh":
        ok = xs > 0
        out[ok] = np.exp(-_nll_array(fam, xs[ok], theta))
        return out
    if fid == "exponential":
        ok = xs >= 0
        out[ok] = np.exp(-_nll_array(fam, xs[ok], theta))
        return out
    raise ValueError(f"unknown family {fid!r}")  # pragma: no cover


def density_samples(model: MixtureModel, x_min: float, x_max: float, count: int) -> np.ndarray:
    """Table of shape (count, k+2): grid x, each weighted component, and their sum."""
    if count < 2:
        raise ValueError("count must be >= 2")
    if not x_min < x_max:
        raise ValueError("need x_min < x_max")
    xs = np.linspace(x_min, x_max, count)
    cols = [xs]
    for alpha, theta in zip(model.alphas, model.thetas):
        cols.append(alpha * density_for_plot(model.family, xs, theta))
    table = np.column_stack(cols)
    total = table[:, 1:].sum(axis=1)
    return np.column_stack([table, total])
