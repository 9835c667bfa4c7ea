"""Provably optimal 1D interval clustering and hard-mixture learning.

The solver finds the globally optimal partition of sorted scalars into k
contiguous clusters for a family of cost models (squared error, absolute
deviation, enclosing radius, medoid variants, and Bregman-divergence costs),
supports per-cluster size bounds and model selection over k, and powers a
complete-likelihood mixture learner for univariate exponential-family and
location-family components.

Typical use::

    from ivclust import IntervalCluster1D
    est = IntervalCluster1D(n_clusters=3, method="kmeans").fit(x)
    est.labels_, est.cluster_centers_, est.inertia_

or, functionally::

    from ivclust import build_dataset, kmeans_model, solve
    clustering, tables = solve(build_dataset(x), kmeans_model(), k=3)
"""

from .data import (
    PrefixTables,
    SortedDataset,
    WeightedPoint,
    build_dataset,
    build_prefix_tables,
    dataset_from_file,
    range_sums,
    read_points_file,
)
from .costs import (
    BregmanGenerator,
    ClusterCostResult,
    Combine,
    CostModel,
    ModelKind,
    QueryComplexity,
    bregman_center_cost,
    bregman_divergence,
    bregman_information,
    bregman_lr_cost,
    bregman_model,
    check_generator,
    cluster_cost,
    cluster_cost_direct,
    exp_generator,
    generator_by_name,
    itakura_saito_generator,
    kcenter_model,
    kl_generator,
    kmeans_model,
    kmedian_model,
    kmedoid_median_model,
    kmedoid_model,
    model_dissimilarity,
    parse_method,
    squared_generator,
)
from .solver import (
    Clustering,
    DpTables,
    SizeConstraints,
    SweepResult,
    SweepRow,
    clustering_from_dict,
    precompute_lut,
    set_threads,
    solve,
    sweep_k,
    voronoi_consistency,
)
from .mixtures import (
    FamilySpec,
    FitReport,
    MixtureModel,
    aic,
    aic_value,
    density_samples,
    family,
    fit_hard_mixture,
    free_parameter_count,
    gmm_comparison,
    mle_update,
    neg_log_density,
    parse_family,
)
from .oracle import (
    OracleResult,
    ProbeRow,
    brute_force,
    consecutive_ratios,
    lloyd_baseline,
    scaling_probe,
)
from .estimators import HardMixture1D, IntervalCluster1D
from . import errors

__version__ = "0.1.0"

__all__ = [
    "BregmanGenerator",
    "Clustering",
    "ClusterCostResult",
    "Combine",
    "CostModel",
    "DpTables",
    "FamilySpec",
    "FitReport",
    "HardMixture1D",
    "IntervalCluster1D",
    "MixtureModel",
    "ModelKind",
    "OracleResult",
    "PrefixTables",
    "ProbeRow",
    "QueryComplexity",
    "SizeConstraints",
    "SortedDataset",
    "SweepResult",
    "SweepRow",
    "WeightedPoint",
    "aic",
    "aic_value",
    "bregman_center_cost",
    "bregman_divergence",
    "bregman_information",
    "bregman_lr_cost",
    "bregman_model",
    "brute_force",
    "build_dataset",
    "build_prefix_tables",
    "check_generator",
    "cluster_cost",
    "cluster_cost_direct",
    "clustering_from_dict",
    "consecutive_ratios",
    "dataset_from_file",
    "density_samples",
    "errors",
    "exp_generator",
    "family",
    "fit_hard_mixture",
    "free_parameter_count",
    "generator_by_name",
    "gmm_comparison",
    "itakura_saito_generator",
    "kcenter_model",
    "kl_generator",
    "kmeans_model",
    "kmedian_model",
    "kmedoid_median_model",
    "kmedoid_model",
    "lloyd_baseline",
    "mle_update",
    "model_dissimilarity",
    "neg_log_density",
    "parse_family",
    "parse_method",
    "precompute_lut",
    "range_sums",
    "read_points_file",
    "scaling_probe",
    "set_threads",
    "solve",
    "squared_generator",
    "sweep_k",
    "voronoi_consistency",
]
