"""scikit-learn style estimators wrapping the exact solver and mixture fitter.

Both estimators accept 1D arrays or single-column 2D arrays and an optional
``sample_weight``. Fitted attributes follow sklearn conventions (trailing
underscore); ``get_params``/``set_params``/``clone`` work as usual.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator, ClusterMixin, DensityMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .costs import model_dissimilarity, parse_method
from .data import build_dataset
from .mixtures import _nll_array, check_support, fit_hard_mixture, parse_family
from .solver import SizeConstraints, solve


def validate_series(X, name: str = "X") -> np.ndarray:
    """Coerce input to a finite 1D float array; (n, 1) columns are squeezed."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1D or a single column, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return arr


def validate_sample_weight(sample_weight, n: int) -> np.ndarray:
    if sample_weight is None:
        return np.ones(n)
    w = np.asarray(sample_weight, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError(f"sample_weight must have shape ({n},), got {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("sample_weight entries must be finite and > 0")
    return w


class IntervalCluster1D(ClusterMixin, TransformerMixin, BaseEstimator):
    """Provably optimal 1D clustering into contiguous intervals.

    Parameters
    ----------
    n_clusters : int, default=2
        Number of clusters.
    method : str, default="kmeans"
        Cost model: ``kmeans``, ``kmedian``, ``kcenter``, ``kmedoid``,
        ``kmedoid:median``, ``kmedoid:<generator>`` or
        ``bregman:<generator>[:r=<r>]`` with generator one of
        ``squared``, ``kl``, ``itakura-saito``, ``exp``.
    size_lower, size_upper : sequence of int or None, default=None
        Optional per-cluster size bounds, both of length ``n_clusters``.
    mode : {"auto", "on-demand", "lut"}, default="auto"
        Table-filling mode; ``auto`` picks on-demand for O(1)-cost models
        and a precomputed cost matrix otherwise.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
        Cluster index of each training sample.
    cluster_centers_ : ndarray of shape (n_clusters, 1)
        Model prototypes, left to right.
    inertia_ : float
        Total clustering cost under the chosen model.
    delimiters_ : tuple of int
        1-based left index of each cluster in the sorted, deduplicated data.
    clustering_ : Clustering
        The full solver result.
    """

    def __init__(self, n_clusters=2, method="kmeans", size_lower=None, size_upper=None,
                 mode="auto"):
        self.n_clusters = n_clusters
        self.method = method
        self.size_lower = size_lower
        self.size_upper = size_upper
        self.mode = mode

    def fit(self, X, y=None, sample_weight=None):
        x = validate_series(X)
        w = validate_sample_weight(sample_weight, x.size)
        ds = build_dataset(zip(x.tolist(), w.tolist()))
        model = parse_method(self.method)
        constraints = None
        if self.size_lower is not None or self.size_upper is not None:
            if self.size_lower is None or self.size_upper is None:
                raise ValueError("size_lower and size_upper must be given together")
            constraints = SizeConstraints(
                lower=tuple(int(v) for v in self.size_lower),
                upper=tuple(int(v) for v in self.size_upper),
            )
        clustering, tables = solve(ds, model, int(self.n_clusters), constraints, self.mode)

        self.model_ = model
        self.dataset_ = ds
        self.clustering_ = clustering
        self.dp_tables_ = tables
        self.delimiters_ = clustering.delimiters
        self.cluster_centers_ = np.asarray(clustering.prototypes).reshape(-1, 1)
        self.inertia_ = clustering.total_cost
        sorted_labels = clustering.labels()
        self.labels_ = sorted_labels[np.searchsorted(ds.values, x)]
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        """Model dissimilarity of each sample to each prototype, shape (n, k)."""
        check_is_fitted(self, "clustering_")
        x = validate_series(X)
        return np.column_stack(
            [model_dissimilarity(self.model_, x, p) for p in self.clustering_.prototypes]
        )

    def predict(self, X):
        """Index of the nearest prototype under the model's dissimilarity."""
        return np.argmin(self.transform(X), axis=1)


class HardMixture1D(DensityMixin, BaseEstimator):
    """Univariate mixture fit by iterated optimal hard clustering.

    Parameters
    ----------
    n_components : int, default=2
        Number of mixture components.
    family : str, default="gaussian_free_sigma"
        One of ``gaussian_fixed_sigma:<sigma>``, ``gaussian_free_sigma``,
        ``gaussian_zero_mean``, ``poisson``, ``rayleigh``, ``exponential``,
        ``laplace_fixed_scale:<scale>``.
    max_iter : int, default=100
        Cap on assignment/update rounds.
    tol : float, default=1e-8
        Stop once the complete log-likelihood improves by less than this.

    Attributes
    ----------
    weights_ : ndarray of shape (n_components,)
    thetas_ : tuple of dict
        Per-component parameters, components ordered left to right.
    labels_ : ndarray of shape (n_samples,)
    complete_loglik_ : float
    aic_ : float or None
    n_iter_ : int
    converged_ : bool
    report_ : FitReport
    """

    def __init__(self, n_components=2, family="gaussian_free_sigma", max_iter=100,
                 tol=1e-8):
        self.n_components = n_components
        self.family = family
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None, sample_weight=None):
        x = validate_series(X)
        w = validate_sample_weight(sample_weight, x.size)
        ds = build_dataset(zip(x.tolist(), w.tolist()))
        fam = parse_family(self.family)
        report = fit_hard_mixture(
            ds, fam, int(self.n_components), max_iters=int(self.max_iter), tol=self.tol
        )
        self.family_ = fam
        self.dataset_ = ds
        self.report_ = report
        self.weights_ = np.asarray(report.model.alphas)
        self.thetas_ = report.model.thetas
        self.labels_ = report.labels[np.searchsorted(ds.values, x)]
        self.complete_loglik_ = report.complete_loglik
        self.aic_ = report.aic
        self.n_iter_ = report.iterations
        self.converged_ = report.converged
        self.n_features_in_ = 1
        return self

    def _joint_log_density(self, x: np.ndarray) -> np.ndarray:
        """log(alpha_m p(x; theta_m)) for each sample and component, shape (n, k)."""
        cols = []
        for alpha, theta in zip(self.weights_, self.thetas_):
            cols.append(np.log(alpha) - _nll_array(self.family_, x, theta))
        return np.column_stack(cols)

    def predict(self, X):
        """Most likely component for each sample under the fitted mixture."""
        check_is_fitted(self, "report_")
        x = validate_series(X)
        check_support(self.family_, x)
        return np.argmax(self._joint_log_density(x), axis=1)

    def score_samples(self, X):
        """Log mixture density of each sample."""
        check_is_fitted(self, "report_")
        x = validate_series(X)
        check_support(self.family_, x)
        return logsumexp(self._joint_log_density(x), axis=1)

    def score(self, X, y=None):
        """Mean log mixture density of the samples."""
        return float(np.mean(self.score_samples(X)))
