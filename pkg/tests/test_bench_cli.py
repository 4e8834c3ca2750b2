import csv
import json
import math
from statistics import geometric_mean

import pytest

from dagmap import generate_workflow, load_cluster, preset, save_cluster
from dagmap.bench import run_bench, write_report
from dagmap.cli import main as cli_main
from dagmap.clusterio import system_from_dict, system_to_dict


class TestClusterIO:
    def test_round_trip(self, tmp_path):
        system = preset("small", 2.5)
        path = tmp_path / "cluster.json"
        save_cluster(system, str(path))
        back = load_cluster(str(path))
        assert back.bandwidth == 2.5
        assert [(p.id, p.memory, p.speed, p.kind) for p in back] == [
            (p.id, p.memory, p.speed, p.kind) for p in system
        ]

    def test_malformed_rejected(self):
        with pytest.raises(ValueError, match="malformed"):
            system_from_dict({"processors": []})

    def test_dict_shape(self):
        d = system_to_dict(preset("nohet", 1.0))
        assert set(d) == {"bandwidth", "processors"}
        assert set(d["processors"][0]) == {"id", "memory", "speed", "kind"}


class TestBench:
    def test_row_counts_and_geomean(self, tmp_path):
        report = run_bench(
            ["fanout", "chain-of-stages"], [30], [1, 2], preset_name="small")
        assert len(report.rows) == 2 * 1 * 2 * 2  # families x sizes x seeds x algs
        ratios = report.ratios()
        agg = report.geomean_ratio()
        if ratios:
            assert agg == pytest.approx(geometric_mean(ratios.values()))
        paths = write_report(report, str(tmp_path / "rep"))
        data = json.loads((tmp_path / "rep.json").read_text())
        assert data["format"] == 1
        assert len(data["rows"]) == len(report.rows)
        recomputed = [r["ratio"] for r in data["ratios"]]
        if recomputed:
            assert math.isclose(
                data["aggregates"]["geomean_ratio"],
                geometric_mean(recomputed), rel_tol=1e-9,
            )
        with open(paths["csv"]) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == len(report.rows)
        assert "runtime_seconds" in rows[0]

    def test_infeasible_rows_excluded_from_geomean(self):
        # diamond meshes at this scale do not fit the small preset
        report = run_bench(["diamond-mesh"], [60], [1], preset_name="small")
        assert all(not r.feasible for r in report.rows)
        assert report.geomean_ratio() is None

    def test_bandwidth_sweep_ratio_columns(self, tmp_path):
        report = run_bench(["fanout"], [40], [1], preset_name="small",
                           bandwidths=[0.1, 1.0, 5.0])
        per_instance = {}
        for (inst, bw), ratio in report.ratios().items():
            per_instance.setdefault(inst, set()).add(bw)
        for bws in per_instance.values():
            assert bws == {0.1, 1.0, 5.0}
        paths = write_report(report, str(tmp_path / "sweep"))
        with open(paths["ratios"]) as f:
            header = f.readline().strip().split(",")
        assert header == ["instance", "ratio_beta_0.1", "ratio_beta_1.0",
                          "ratio_beta_5.0"]


def run_cli(args):
    return cli_main(args)


class TestCli:
    @pytest.fixture
    def workflow_file(self, tmp_path):
        path = tmp_path / "wf.dot"
        assert run_cli(["generate", "--family", "fork-join", "--n-tasks", "40",
                        "--seed", "3", "--output", str(path)]) == 0
        return path

    def test_map_feasible_exit_zero(self, workflow_file, tmp_path, capsys):
        out = tmp_path / "res.json"
        code = run_cli([
            "map", "--workflow", str(workflow_file), "--preset", "small",
            "--algorithm", "hetpart", "--seed", "3", "--fit-memories",
            "--output", str(out),
        ])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["feasible"] is True
        assert data["makespan"] > 0
        assert all(b["fits"] for b in data["blocks"])
        assert "runtime_seconds" not in data

    def test_map_infeasible_exit_code_and_diagnostic(self, tmp_path, capsys):
        wf = tmp_path / "big.dot"
        wf.write_text('digraph g { whale [work=1, memory=4000]; }')
        out = tmp_path / "res.json"
        code = run_cli([
            "map", "--workflow", str(wf), "--preset", "small",
            "--algorithm", "hetmem", "--output", str(out),
        ])
        assert code == 3
        data = json.loads(out.read_text())
        assert data["feasible"] is False
        assert "whale" in data["diagnostic"]
        assert "whale" in capsys.readouterr().err

    def test_unknown_preset_is_input_error(self, workflow_file, tmp_path):
        code = run_cli([
            "map", "--workflow", str(workflow_file), "--preset", "mega",
            "--output", str(tmp_path / "x.json"),
        ])
        assert code == 2

    def test_missing_workflow_is_input_error(self, tmp_path):
        code = run_cli([
            "map", "--workflow", str(tmp_path / "nope.dot"), "--preset", "small",
            "--output", str(tmp_path / "x.json"),
        ])
        assert code == 2

    def test_timing_flag_adds_runtime(self, workflow_file, tmp_path):
        out = tmp_path / "timed.json"
        run_cli(["map", "--workflow", str(workflow_file), "--preset", "small",
                 "--fit-memories", "--timing", "--output", str(out)])
        data = json.loads(out.read_text())
        assert data["runtime_seconds"] > 0

    def test_check_accepts_fresh_result(self, workflow_file, tmp_path, capsys):
        out = tmp_path / "res.json"
        run_cli(["map", "--workflow", str(workflow_file), "--preset", "small",
                 "--fit-memories", "--seed", "1", "--output", str(out)])
        code = run_cli(["check", "--result", str(out), "--workflow",
                        str(workflow_file), "--preset", "small", "--fit-memories"])
        assert code == 0
        assert "self-consistent" in capsys.readouterr().err

    def test_check_catches_tampering(self, workflow_file, tmp_path, capsys):
        out = tmp_path / "res.json"
        run_cli(["map", "--workflow", str(workflow_file), "--preset", "small",
                 "--fit-memories", "--seed", "1", "--output", str(out)])
        data = json.loads(out.read_text())
        data["makespan"] = data["makespan"] * 0.5
        out.write_text(json.dumps(data))
        code = run_cli(["check", "--result", str(out), "--workflow",
                        str(workflow_file), "--preset", "small", "--fit-memories"])
        assert code == 1
        assert "violation" in capsys.readouterr().err

    def test_map_with_cluster_file(self, workflow_file, tmp_path):
        cluster = tmp_path / "cluster.json"
        save_cluster(preset("small", 1.0), str(cluster))
        out = tmp_path / "res.json"
        code = run_cli(["map", "--workflow", str(workflow_file), "--cluster",
                        str(cluster), "--fit-memories", "--output", str(out)])
        assert code == 0

    def test_bench_subcommand(self, tmp_path, capsys):
        code = run_cli([
            "bench", "--families", "fanout", "--sizes", "30", "--seeds", "1",
            "--preset", "small", "--report", str(tmp_path / "rep"),
        ])
        assert code == 0
        err = capsys.readouterr().err
        assert "geometric-mean" in err
        assert (tmp_path / "rep.json").exists()
        assert (tmp_path / "rep.csv").exists()
