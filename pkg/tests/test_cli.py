"""End-to-end CLI behavior: outputs, exit codes, and determinism."""

import json
import math

import numpy as np
import pytest

from ivclust.cli import main
from ivclust.costs import cluster_cost_direct, parse_method
from ivclust.data import dataset_from_file
from ivclust.solver import clustering_from_dict


@pytest.fixture
def pairs_file(tmp_path):
    path = tmp_path / "pairs.txt"
    path.write_text("1\n2\n6\n7\n")
    return path


@pytest.fixture
def groups_file(tmp_path):
    rng = np.random.default_rng(5)
    xs = np.concatenate([rng.normal(0, 1, 40), rng.normal(50, 1, 40), rng.normal(100, 1, 40)])
    path = tmp_path / "groups.txt"
    path.write_text("\n".join(repr(float(v)) for v in xs) + "\n")
    return path


def run(*argv) -> int:
    return main([str(a) for a in argv])


class TestCluster:
    def test_json_payload(self, pairs_file, tmp_path, capsys):
        out = tmp_path / "out.json"
        code = run("cluster", "--input", pairs_file, "--method", "kmeans", "--k", "2",
                   "--output", out)
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["total_cost"] == 1.0
        assert payload["delimiters"] == [1, 3]
        assert payload["method"] == "kmeans"

    def test_round_trip_totals(self, pairs_file, tmp_path):
        out = tmp_path / "out.json"
        run("cluster", "--input", pairs_file, "--method", "bregman:kl", "--k", "2",
            "--output", out)
        payload = json.loads(out.read_text())
        clustering = clustering_from_dict(payload)
        ds = dataset_from_file(pairs_file)
        model = parse_method(payload["method"])
        recomputed = math.fsum(
            cluster_cost_direct(model, ds, c["left"], c["right"]).cost
            for c in payload["clusters"]
        )
        assert abs(recomputed - clustering.total_cost) <= 1e-12

    def test_constrained_and_infeasible_exit_codes(self, pairs_file, tmp_path):
        out = tmp_path / "out.json"
        code = run("cluster", "--input", pairs_file, "--k", "2",
                   "--lower", "3,1", "--upper", "4,4", "--output", out)
        assert code == 0
        assert json.loads(out.read_text())["total_cost"] == 14.0
        code = run("cluster", "--input", pairs_file, "--k", "2",
                   "--lower", "3,3", "--upper", "4,4", "--output", out)
        assert code == 2

    def test_parse_and_domain_errors(self, tmp_path, pairs_file):
        bad = tmp_path / "bad.txt"
        bad.write_text("1\nnot-a-number\n")
        assert run("cluster", "--input", bad, "--k", "2") == 3
        neg = tmp_path / "neg.txt"
        neg.write_text("-1\n2\n3\n")
        assert run("cluster", "--input", neg, "--method", "bregman:kl", "--k", "2") == 3
        assert run("cluster", "--input", pairs_file, "--method", "nope", "--k", "2") == 3
        assert run("cluster", "--input", pairs_file, "--k", "9") == 3


class TestSweep:
    def test_csv_schema_and_monotone_ratio(self, groups_file, tmp_path):
        out = tmp_path / "sweep.csv"
        code = run("sweep", "--input", groups_file, "--method", "kmeans",
                   "--kmax", "8", "--output", out)
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "k,e_k,m_k,regularized"
        rows = [line.split(",") for line in lines[1:]]
        assert [int(r[0]) for r in rows] == list(range(1, 9))
        ratios = [float(r[2]) for r in rows]
        assert ratios[0] == 1.0
        assert all(b <= a for a, b in zip(ratios, ratios[1:]))

    def test_linear_penalty_selects_three_groups(self, groups_file, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = run("sweep", "--input", groups_file, "--kmax", "6",
                   "--penalty", "linear:50", "--output", out)
        assert code == 0
        assert "best k = 3" in capsys.readouterr().err

    def test_bad_penalty(self, groups_file):
        assert run("sweep", "--input", groups_file, "--kmax", "3",
                   "--penalty", "quadratic:2") == 3


class TestFit:
    def test_fit_json_and_density_csv(self, groups_file, tmp_path):
        out = tmp_path / "fit.json"
        dens = tmp_path / "dens.csv"
        code = run("fit", "--input", groups_file, "--family", "gaussian_fixed_sigma:1.0",
                   "--k", "3", "--output", out, "--density-out", dens,
                   "--density-range=-5,105", "--density-count", "64")
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["k"] == 3
        assert payload["converged"] is True
        assert len(payload["alphas"]) == 3
        mus = sorted(t["mu"] for t in payload["thetas"])
        assert abs(mus[0] - 0) < 1 and abs(mus[1] - 50) < 1 and abs(mus[2] - 100) < 1
        lines = dens.read_text().strip().splitlines()
        assert lines[0] == "x,comp_1,comp_2,comp_3,total"
        assert len(lines) == 65

    def test_aic_k_clusters_flag(self, groups_file, tmp_path):
        out_p = tmp_path / "p.json"
        out_c = tmp_path / "c.json"
        run("fit", "--input", groups_file, "--family", "gaussian_free_sigma", "--k", "2",
            "--output", out_p)
        run("fit", "--input", groups_file, "--family", "gaussian_free_sigma", "--k", "2",
            "--output", out_c, "--aic-k", "clusters")
        aic_params = json.loads(out_p.read_text())["aic"]
        aic_clusters = json.loads(out_c.read_text())["aic"]
        assert aic_params != aic_clusters

    def test_support_violation_exit(self, tmp_path):
        path = tmp_path / "neg.txt"
        path.write_text("-3\n1\n2\n")
        assert run("fit", "--input", path, "--family", "poisson", "--k", "2") == 3


class TestGmmCompare:
    def test_payload(self, tmp_path):
        rng = np.random.default_rng(7)
        xs = np.concatenate([rng.normal(0, 5, 100), rng.normal(8, 1, 100)])
        data = tmp_path / "hetero.txt"
        data.write_text("\n".join(repr(float(v)) for v in xs) + "\n")
        out = tmp_path / "cmp.json"
        code = run("gmm-compare", "--input", data, "--k", "2", "--output", out)
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["delta_avg_complete_loglik"] >= 0
        assert payload["gmm1"]["iterations"] == 1
        assert payload["gmm2"]["family"] == "gaussian_free_sigma"


class TestBench:
    def test_csv_schema(self, tmp_path):
        out = tmp_path / "bench.csv"
        code = run("bench", "--sizes", "64,128", "--k", "3", "--repetitions", "1",
                   "--output", out)
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "n,k,mode,median_seconds"
        assert len(lines) == 3
        n0, k0, mode0, sec0 = lines[1].split(",")
        assert (int(n0), int(k0), mode0) == (64, 3, "on-demand")
        assert float(sec0) > 0


class TestVerify:
    def test_pass_and_determinism(self, capsys):
        code = run("verify", "--n", "9", "--k", "3", "--trials", "20", "--seed", "7")
        first = capsys.readouterr().out
        assert code == 0
        assert "PASS (20 instances)" in first
        code = run("verify", "--n", "9", "--k", "3", "--trials", "20", "--seed", "7")
        second = capsys.readouterr().out
        assert code == 0
        assert first == second

    def test_fail_exit_code(self, capsys, monkeypatch):
        import ivclust.cli as cli_module

        def broken(ds, model, k, constraints=None):
            from ivclust.oracle import OracleResult

            return OracleResult(best_cost=-1.0, best_delimiters=(1,), partitions_examined=1)

        monkeypatch.setattr(cli_module, "brute_force", broken)
        code = run("verify", "--trials", "5")
        assert code == 4
        assert "FAIL" in capsys.readouterr().out


class TestDeterminism:
    def test_cluster_outputs_byte_identical(self, groups_file, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run("cluster", "--input", groups_file, "--method", "kmeans",
                       "--k", "3", "--threads", "1", "--output", out) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_fit_outputs_byte_identical(self, groups_file, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run("fit", "--input", groups_file, "--family", "gaussian_free_sigma",
                       "--k", "3", "--threads", "1", "--output", out) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_thread_count_does_not_change_costs(self, groups_file, tmp_path):
        one, four = tmp_path / "one.json", tmp_path / "four.json"
        assert run("cluster", "--input", groups_file, "--k", "3", "--threads", "1",
                   "--output", one) == 0
        assert run("cluster", "--input", groups_file, "--k", "3", "--threads", "4",
                   "--output", four) == 0
        pa, pb = json.loads(one.read_text()), json.loads(four.read_text())
        assert pa["total_cost"] == pb["total_cost"]
        assert pa["delimiters"] == pb["delimiters"]
        # Leave the process back at a single worker for other tests.
        from ivclust.solver import set_threads

        set_threads(1)


class TestPenaltyTable:
    def test_table_penalty(self, groups_file, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        table = ",".join(["0"] + ["1000000"] * 5)
        code = run("sweep", "--input", groups_file, "--kmax", "6",
                   "--penalty", f"table:{table}", "--output", out)
        assert code == 0
        assert "best k = 1" in capsys.readouterr().err
