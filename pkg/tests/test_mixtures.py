"""Hard-mixture fitting: densities, MLEs, the outer loop, and model choice."""

import math

import zlib

import numpy as np
import numpy.testing as npt
import pytest

from ivclust.data import build_dataset
from ivclust.errors import (
    DegenerateClusterWarning,
    KTooLarge,
    SupportViolation,
    TooFewSamples,
)
from ivclust.mixtures import (
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
from ivclust.solver import solve
from ivclust.costs import kmeans_model


def seeded_two_group(rng, sampler_a, sampler_b, size=120):
    xs = np.concatenate([sampler_a(rng, size // 2), sampler_b(rng, size // 2)])
    return build_dataset(xs.tolist())


FAMILY_DATASETS = [
    (
        "gaussian_fixed_sigma",
        {"sigma": 1.0},
        lambda rng, n: rng.normal(-5.0, 1.0, n),
        lambda rng, n: rng.normal(5.0, 1.0, n),
    ),
    (
        "gaussian_free_sigma",
        {},
        lambda rng, n: rng.normal(0.0, 5.0, n),
        lambda rng, n: rng.normal(12.0, 1.0, n),
    ),
    (
        "gaussian_zero_mean",
        {},
        lambda rng, n: rng.normal(0.0, 1.0, n),
        lambda rng, n: rng.normal(0.0, 7.0, n),
    ),
    (
        "poisson",
        {},
        lambda rng, n: rng.poisson(2.0, n).astype(float),
        lambda rng, n: rng.poisson(20.0, n).astype(float),
    ),
    (
        "rayleigh",
        {},
        lambda rng, n: rng.rayleigh(1.0, n),
        lambda rng, n: rng.rayleigh(8.0, n),
    ),
    (
        "exponential",
        {},
        lambda rng, n: rng.exponential(0.5, n),
        lambda rng, n: rng.exponential(20.0, n),
    ),
    (
        "laplace_fixed_scale",
        {"scale": 1.0},
        lambda rng, n: rng.laplace(-6.0, 1.0, n),
        lambda rng, n: rng.laplace(6.0, 1.0, n),
    ),
]


class TestDensities:
    def test_gaussian_peak(self):
        fam = family("gaussian_fixed_sigma", sigma=1.0)
        assert neg_log_density(fam, 0.0, {"mu": 0.0}) == pytest.approx(
            0.5 * math.log(2 * math.pi)
        )

    def test_poisson_at_zero(self):
        assert neg_log_density(family("poisson"), 0.0, {"lam": 2.0}) == pytest.approx(2.0)

    def test_rayleigh_unit(self):
        assert neg_log_density(family("rayleigh"), 1.0, {"sigma2": 1.0}) == pytest.approx(0.5)

    @pytest.mark.parametrize(
        "fam_name,kwargs,x",
        [
            ("poisson", {}, -1.0),
            ("poisson", {}, 2.5),
            ("rayleigh", {}, -0.5),
            ("exponential", {}, -2.0),
        ],
    )
    def test_support_violations(self, fam_name, kwargs, x):
        fam = family(fam_name, **kwargs)
        with pytest.raises(SupportViolation):
            neg_log_density(fam, x, {"lam": 1.0, "sigma2": 1.0, "rate": 1.0})

    def test_laplace(self):
        fam = family("laplace_fixed_scale", scale=2.0)
        assert neg_log_density(fam, 3.0, {"mu": 1.0}) == pytest.approx(
            math.log(4.0) + 1.0
        )


class TestMle:
    def test_poisson_mean(self):
        assert mle_update(family("poisson"), [1, 2, 3]) == {"lam": 2.0}

    def test_gaussian_free_two_points(self):
        theta = mle_update(family("gaussian_free_sigma"), [0, 2])
        assert theta == {"mu": 1.0, "sigma2": 1.0}

    def test_rayleigh(self):
        theta = mle_update(family("rayleigh"), [1, 2])
        assert theta == {"sigma2": 1.25}

    def test_exponential_weighted(self):
        theta = mle_update(family("exponential"), [1.0, 4.0], [3.0, 1.0])
        assert theta["rate"] == pytest.approx(1.0 / 1.75)

    def test_laplace_weighted_median(self):
        theta = mle_update(family("laplace_fixed_scale", scale=1.0), [1, 2, 9], [1, 1, 1])
        assert theta == {"mu": 2.0}

    def test_degenerate_variance_floored_with_warning(self):
        with pytest.warns(DegenerateClusterWarning):
            theta = mle_update(family("gaussian_free_sigma"), [3.0], variance_floor=1e-8)
        assert theta["sigma2"] == 1e-8

    def test_zero_mean_uses_second_moment(self):
        theta = mle_update(family("gaussian_zero_mean"), [-2.0, 2.0])
        assert theta == {"sigma2": 4.0}


class TestAic:
    def test_formula_value(self):
        assert aic_value(0.0, 1, 10) == pytest.approx(2.5)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            aic_value(0.0, 3, 4)
        with pytest.raises(TooFewSamples):
            aic_value(0.0, 3, 3)

    def test_matches_hand_formula_on_random_triples(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            loglik = float(rng.normal(0, 50))
            k_param = int(rng.integers(1, 10))
            n = int(rng.integers(k_param + 2, 500))
            expected = -2.0 * loglik + 2.0 * k_param + 2.0 * k_param * (k_param + 1) / (
                n - k_param - 1
            )
            assert aic_value(loglik, k_param, n) == expected

    def test_report_level_default_uses_free_parameters(self):
        rng = np.random.default_rng(53)
        ds = build_dataset(rng.normal(0, 1, 40).tolist())
        report = fit_hard_mixture(ds, family("gaussian_free_sigma"), 2)
        g = free_parameter_count(family("gaussian_free_sigma"), 2)
        assert g == 5
        assert aic(report, ds.n) == pytest.approx(aic_value(report.complete_loglik, 5, ds.n))
        assert aic(report, ds.n, k_param=2) == pytest.approx(
            aic_value(report.complete_loglik, 2, ds.n)
        )


class TestFitExamples:
    def test_k_one_converges_immediately(self):
        rng = np.random.default_rng(55)
        vals = rng.normal(3.0, 1.0, 30)
        wts = rng.uniform(0.5, 2.0, 30)
        ds = build_dataset(zip(vals.tolist(), wts.tolist()))
        report = fit_hard_mixture(ds, family("gaussian_fixed_sigma", sigma=1.0), 1)
        assert report.model.alphas == (1.0,)
        assert report.iterations == 1
        assert report.converged
        assert report.model.thetas[0]["mu"] == pytest.approx(
            np.average(ds.values, weights=ds.weights)
        )

    def test_symmetric_pairs_split_at_zero(self):
        ds = build_dataset([-5.1, -4.9, 4.9, 5.1])
        report = fit_hard_mixture(ds, family("gaussian_fixed_sigma", sigma=1.0), 2)
        npt.assert_array_equal(report.labels, [0, 0, 1, 1])
        assert report.model.alphas == (0.5, 0.5)
        assert report.model.thetas[0]["mu"] == pytest.approx(-5.0)
        assert report.model.thetas[1]["mu"] == pytest.approx(5.0)

    def test_poisson_mixture_recovery(self):
        rng = np.random.default_rng(42)
        xs = np.concatenate([rng.poisson(2.0, 100), rng.poisson(20.0, 100)])
        ds = build_dataset(xs.astype(float).tolist())
        report = fit_hard_mixture(ds, family("poisson"), 2)
        lam = [t["lam"] for t in report.model.thetas]
        assert abs(lam[0] - 2.0) <= 0.3
        assert abs(lam[1] - 20.0) <= 3.0
        # The planted split is recovered away from the decision boundary.
        planted_high = xs >= 12
        fitted_high = report.labels[np.searchsorted(ds.values, xs)] == 1
        assert np.mean(planted_high == fitted_high) > 0.95

    def test_k_too_large_after_transform(self):
        ds = build_dataset([-1.0, 1.0, 2.0])  # x^2 collapses -1 and 1
        with pytest.raises(KTooLarge):
            fit_hard_mixture(ds, family("gaussian_zero_mean"), 3)

    def test_histogram_weights_equal_expanded_data(self):
        expanded = build_dataset([0.0, 0.0, 1.0, 5.0, 5.0, 5.0])
        histogram = build_dataset([(0.0, 2), (1.0, 1), (5.0, 3)])
        fam = family("gaussian_fixed_sigma", sigma=1.0)
        a = fit_hard_mixture(expanded, fam, 2)
        b = fit_hard_mixture(histogram, fam, 2)
        assert a.complete_loglik == pytest.approx(b.complete_loglik, rel=1e-12)
        assert a.model.alphas == b.model.alphas
        assert a.model.thetas == b.model.thetas


class TestMonotoneLikelihood:
    @pytest.mark.parametrize("fam_name,kwargs,sampler_a,sampler_b", FAMILY_DATASETS)
    @pytest.mark.parametrize("k", [2, 3])
    def test_trace_never_decreases(self, fam_name, kwargs, sampler_a, sampler_b, k):
        rng = np.random.default_rng(zlib.crc32(f"{fam_name}:{k}".encode()))
        ds = seeded_two_group(rng, sampler_a, sampler_b)
        report = fit_hard_mixture(ds, family(fam_name, **kwargs), k)
        trace = report.loglik_trace
        assert len(trace) >= 1
        for previous, current in zip(trace, trace[1:]):
            assert current >= previous - 1e-9

    def test_alphas_stay_on_simplex(self):
        rng = np.random.default_rng(57)
        ds = seeded_two_group(
            rng, lambda r, n: r.normal(-4, 1, n), lambda r, n: r.normal(4, 1, n)
        )
        report = fit_hard_mixture(ds, family("gaussian_fixed_sigma", sigma=1.0), 3)
        assert sum(report.model.alphas) == pytest.approx(1.0, abs=1e-12)
        assert all(a > 0 for a in report.model.alphas)


class TestEquivalences:
    def test_fixed_sigma_assignment_equals_euclidean_clustering(self):
        """With sigma^2 = 1/2 and uniform weights the per-point cost is squared
        distance plus constants, so the first assignment must match the exact
        squared-error clustering."""
        rng = np.random.default_rng(59)
        ds = build_dataset(rng.uniform(0, 20, 40).tolist())
        fam = family("gaussian_fixed_sigma", sigma=1.0 / math.sqrt(2.0))
        report = fit_hard_mixture(ds, fam, 3, max_iters=1)
        clustering, _ = solve(ds, kmeans_model(), 3)
        npt.assert_array_equal(report.labels, clustering.labels())

    def test_zero_mean_matches_direct_mle_per_cluster(self):
        rng = np.random.default_rng(61)
        xs = np.concatenate([rng.normal(0, 1, 80), rng.normal(0, 6, 80)])
        ds = build_dataset(xs.tolist())
        report = fit_hard_mixture(ds, family("gaussian_zero_mean"), 2)
        for m, theta in enumerate(report.model.thetas):
            sel = report.labels == m
            direct = np.average(
                np.square(ds.values[sel]), weights=ds.weights[sel]
            )
            assert theta["sigma2"] == pytest.approx(direct, rel=1e-9)

    def test_zero_mean_clusters_by_magnitude(self):
        ds = build_dataset([-8.0, -0.5, 0.4, 7.5])
        report = fit_hard_mixture(ds, family("gaussian_zero_mean"), 2)
        npt.assert_array_equal(report.labels, [1, 0, 0, 1])


class TestGmmComparison:
    def test_heteroscedastic_ordering(self):
        rng = np.random.default_rng(7)
        xs = np.concatenate([rng.normal(0.0, 5.0, 200), rng.normal(8.0, 1.0, 200)])
        ds = build_dataset(xs.tolist())
        gmm1, gmm2 = gmm_comparison(ds, 2)
        assert gmm2.avg_complete_loglik >= gmm1.avg_complete_loglik
        assert gmm1.iterations == 1 and gmm1.converged
        for payload in (gmm1.to_dict(), gmm2.to_dict()):
            assert "avg_complete_loglik" in payload
            assert payload["family"] == "gaussian_free_sigma"

    def test_well_separated_equal_variance_agrees(self):
        rng = np.random.default_rng(63)
        xs = np.concatenate([rng.normal(-30, 1, 50), rng.normal(30, 1, 50)])
        ds = build_dataset(xs.tolist())
        gmm1, gmm2 = gmm_comparison(ds, 2)
        npt.assert_array_equal(gmm1.labels, gmm2.labels)

    def test_k_one_identical(self):
        rng = np.random.default_rng(65)
        ds = build_dataset(rng.normal(0, 2, 40).tolist())
        gmm1, gmm2 = gmm_comparison(ds, 1)
        assert gmm1.complete_loglik == pytest.approx(gmm2.complete_loglik, rel=1e-12)

    def test_free_sigma_carries_no_guarantee_marker(self):
        rng = np.random.default_rng(67)
        ds = build_dataset(rng.normal(0, 2, 30).tolist())
        report = fit_hard_mixture(ds, family("gaussian_free_sigma"), 2)
        assert any("interval clusterings only" in w for w in report.warnings)


class TestDensitySamples:
    def unit_gaussian_model(self):
        fam = family("gaussian_fixed_sigma", sigma=1.0)
        return MixtureModel(k=1, alphas=(1.0,), thetas=({"mu": 0.0},), family=fam)

    def test_integrates_to_one(self):
        table = density_samples(self.unit_gaussian_model(), -4.0, 4.0, 2001)
        integral = np.trapezoid(table[:, -1], table[:, 0])
        assert integral == pytest.approx(1.0, abs=1e-3)

    def test_total_is_sum_of_components(self):
        rng = np.random.default_rng(69)
        ds = build_dataset(rng.normal(0, 3, 60).tolist())
        report = fit_hard_mixture(ds, family("gaussian_free_sigma"), 3)
        table = density_samples(report.model, -10, 10, 101)
        npt.assert_allclose(table[:, -1], table[:, 1:-1].sum(axis=1), rtol=1e-12)

    def test_count_two_gives_endpoints(self):
        table = density_samples(self.unit_gaussian_model(), -1.0, 1.0, 2)
        npt.assert_array_equal(table[:, 0], [-1.0, 1.0])

    def test_poisson_grid_is_continuous_extension(self):
        fam = family("poisson")
        model = MixtureModel(k=1, alphas=(1.0,), thetas=({"lam": 3.0},), family=fam)
        table = density_samples(model, -1.0, 6.0, 8)
        assert table[0, 1] == 0.0  # outside the support
        assert table[-1, 1] == pytest.approx(math.exp(-3.0) * 3.0**6 / math.factorial(6))


class TestParseFamily:
    def test_with_parameter(self):
        fam = parse_family("gaussian_fixed_sigma:2.5")
        assert fam.sigma == 2.5
        assert fam.label == "gaussian_fixed_sigma:2.5"

    def test_bare(self):
        assert parse_family("poisson").family_id == "poisson"

    def test_missing_parameter(self):
        with pytest.raises(ValueError):
            parse_family("gaussian_fixed_sigma")

    def test_unknown(self):
        with pytest.raises(ValueError):
            parse_family("cauchy")
