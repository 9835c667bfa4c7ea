"""Dataset construction, cumulative tables, and range queries."""

import numpy as np
import numpy.testing as npt
import pytest

from ivclust.data import (
    build_dataset,
    build_prefix_tables,
    dataset_from_file,
    range_sums,
    read_points_file,
)
from ivclust.costs import itakura_saito_generator, squared_generator
from ivclust.errors import (
    DomainViolation,
    EmptyInput,
    IndexOutOfRange,
    NonFiniteValue,
    NonPositiveWeight,
    ParseError,
)


class TestBuildDataset:
    def test_single_point_default_weight(self):
        ds = build_dataset([5])
        assert ds.n == 1
        npt.assert_array_equal(ds.values, [5.0])
        npt.assert_array_equal(ds.weights, [1.0])

    def test_duplicates_coalesce_by_summing_weights(self):
        ds = build_dataset([(2, 1), (1, 1), (2, 1)])
        npt.assert_array_equal(ds.values, [1.0, 2.0])
        npt.assert_array_equal(ds.weights, [1.0, 2.0])

    def test_sorting_with_explicit_weights(self):
        ds = build_dataset([(7, 0.5), (6, 2)])
        npt.assert_array_equal(ds.values, [6.0, 7.0])
        npt.assert_array_equal(ds.weights, [2.0, 0.5])

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            build_dataset([])

    @pytest.mark.parametrize("weight", [0.0, -1.0, np.nan])
    def test_bad_weight(self, weight):
        with pytest.raises(NonPositiveWeight):
            build_dataset([(1.0, weight)])

    @pytest.mark.parametrize("value", [np.nan, np.inf, -np.inf])
    def test_bad_value(self, value):
        with pytest.raises(NonFiniteValue):
            build_dataset([value, 1.0])

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        raw = list(zip(rng.integers(0, 20, 50).tolist(), rng.uniform(0.1, 3, 50).tolist()))
        once = build_dataset(raw)
        twice = build_dataset(once)
        npt.assert_array_equal(once.values, twice.values)
        npt.assert_array_equal(once.weights, twice.weights)

    def test_total_weight_preserved_by_coalescing(self):
        rng = np.random.default_rng(2)
        vals = rng.integers(0, 10, 200).astype(float)
        wts = rng.uniform(0.1, 2.0, 200)
        ds = build_dataset(zip(vals.tolist(), wts.tolist()))
        assert ds.n < 200
        npt.assert_allclose(ds.total_weight, wts.sum(), rtol=1e-12)

    def test_values_strictly_increasing(self):
        rng = np.random.default_rng(3)
        ds = build_dataset(rng.integers(0, 50, 300).tolist())
        assert np.all(np.diff(ds.values) > 0)


class TestPrefixTables:
    def test_squared_generator_tables(self):
        ds = build_dataset([1, 2, 6, 7])
        pt = build_prefix_tables(ds, squared_generator())
        npt.assert_array_equal(pt.cum_w, [0, 1, 2, 3, 4])
        npt.assert_array_equal(pt.cum_wx, [0, 1, 3, 9, 16])
        npt.assert_array_equal(pt.cum_wf, [0, 1, 5, 41, 90])

    def test_single_weighted_point(self):
        ds = build_dataset([(5, 2)])
        pt = build_prefix_tables(ds, squared_generator())
        npt.assert_array_equal(pt.cum_w, [0, 2])
        npt.assert_array_equal(pt.cum_wx, [0, 10])
        npt.assert_array_equal(pt.cum_wf, [0, 50])

    def test_domain_violation(self):
        ds = build_dataset([-1, 1])
        with pytest.raises(DomainViolation):
            build_prefix_tables(ds, itakura_saito_generator())


class TestRangeSums:
    def setup_method(self):
        self.ds = build_dataset([1, 2, 6, 7])
        self.pt = build_prefix_tables(self.ds, squared_generator())

    def test_middle_range(self):
        assert range_sums(self.pt, 2, 3) == (2.0, 8.0, 40.0)

    def test_full_range_equals_last_entries(self):
        w, wx, wf = range_sums(self.pt, 1, 4)
        assert (w, wx, wf) == (4.0, 16.0, 90.0)

    def test_singleton(self):
        assert range_sums(self.pt, 3, 3) == (1.0, 6.0, 36.0)

    @pytest.mark.parametrize("first,last", [(0, 1), (1, 5), (3, 2), (5, 5)])
    def test_index_out_of_range(self, first, last):
        with pytest.raises(IndexOutOfRange):
            range_sums(self.pt, first, last)

    def test_matches_direct_summation_on_random_ranges(self):
        """1000 random (first, last) pairs agree with direct sums to 1e-12."""
        rng = np.random.default_rng(7)
        for _ in range(5):
            n = int(rng.integers(5, 120))
            vals = rng.normal(0, 10, n)
            wts = rng.uniform(0.1, 4.0, n)
            ds = build_dataset(zip(vals.tolist(), wts.tolist()))
            pt = build_prefix_tables(ds, squared_generator())
            for _ in range(200):
                first = int(rng.integers(1, ds.n + 1))
                last = int(rng.integers(first, ds.n + 1))
                v, w = ds.slice_arrays(first, last)
                expected = (w.sum(), (w * v).sum(), (w * v * v).sum())
                got = range_sums(pt, first, last)
                npt.assert_allclose(got, expected, rtol=1e-12, atol=1e-12)


class TestPointsFile:
    def test_mixed_separators_and_comments(self, tmp_path):
        path = tmp_path / "pts.txt"
        path.write_text("# header\n1\n2,0.5\n3 2\n\n# trailing\n")
        assert read_points_file(path) == [(1.0, 1.0), (2.0, 0.5), (3.0, 2.0)]

    def test_histogram_rows_become_weights(self, tmp_path):
        path = tmp_path / "hist.txt"
        path.write_text("0,10\n1,25\n2,3\n")
        ds = dataset_from_file(path)
        npt.assert_array_equal(ds.values, [0, 1, 2])
        npt.assert_array_equal(ds.weights, [10, 25, 3])

    def test_garbage_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1\nfoo\n")
        with pytest.raises(ParseError):
            read_points_file(path)

    def test_three_fields(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1,2,3\n")
        with pytest.raises(ParseError):
            read_points_file(path)

    def test_only_comments(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("# nothing\n")
        with pytest.raises(EmptyInput):
            read_points_file(path)
