from __future__ import annotations

import json
import subprocess
import sys

import pytest

from aquaplace.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


def read_json(path):
    return json.loads(path.read_text())


def without_meta(path):
    document = read_json(path)
    document.pop("meta")
    return document


@pytest.fixture
def grid_file(tmp_path):
    path = tmp_path / "net.json"
    assert run_cli("generate", "--out", path, "--size", "3", "--no-figures") == 0
    return path


@pytest.fixture
def centrality_file(tmp_path, grid_file):
    path = tmp_path / "centrality.json"
    assert run_cli("centrality", "--network", grid_file, "--out", path, "--no-figures") == 0
    return path


def solve_args(grid_file, centrality_file, out_dir, *extra):
    return (
        "solve", "--network", grid_file, "--centrality", centrality_file,
        "--out-dir", out_dir, "--sensors", "3", *extra,
    )


class TestHelp:
    def test_top_level_lists_commands(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("--help")
        assert excinfo.value.code == 0
        out = capsys.readouterr().out
        for command in ("generate", "centrality", "build", "solve",
                        "evaluate", "replan", "histogram", "serve"):
            assert command in out

    def test_solve_help_documents_knobs(self, capsys):
        with pytest.raises(SystemExit):
            run_cli("solve", "--help")
        out = capsys.readouterr().out
        for flag in ("--sensors", "--weight-a", "--weight-b", "--weight-c",
                     "--weight-d", "--weight-e", "--mode", "--cost-model",
                     "--runs", "--sweeps", "--t-hot", "--t-cold", "--solver",
                     "--max-vars", "--bins", "--session", "--no-figures",
                     "--seed", "--lenient"):
            assert flag in out

    def test_generate_help_documents_knobs(self, capsys):
        with pytest.raises(SystemExit):
            run_cli("generate", "--help")
        out = capsys.readouterr().out
        for flag in ("--size", "--inaccessible", "--industrial", "--pipe-length"):
            assert flag in out

    def test_console_script_is_installed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "aquaplace", "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "generate" in proc.stdout


class TestErrors:
    def test_missing_file_prints_json_line(self, tmp_path, capsys):
        code = run_cli("centrality", "--network", tmp_path / "nope.json",
                       "--out", tmp_path / "w.json", "--no-figures")
        assert code == 1
        err_lines = capsys.readouterr().err.strip().splitlines()
        assert len(err_lines) == 1
        payload = json.loads(err_lines[0])
        assert payload["error"] == "FileNotFoundError"
        assert "nope.json" in payload["message"]

    def test_schema_error_prints_json_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema": "wdn-network/1", "nodes": [], "edges": [],
                                   "extra": 1}))
        code = run_cli("centrality", "--network", bad,
                       "--out", tmp_path / "w.json", "--no-figures")
        assert code == 1
        payload = json.loads(capsys.readouterr().err.strip())
        assert payload["error"] == "SchemaError"

    def test_bad_mark_syntax(self, tmp_path, grid_file, centrality_file, capsys):
        code = run_cli("replan", "--network", grid_file, "--centrality", centrality_file,
                       "--session", tmp_path / "sess.json", "--out-dir", tmp_path / "out",
                       "--mark", "n1_1", "--solver", "exact", "--no-figures")
        assert code == 1
        payload = json.loads(capsys.readouterr().err.strip())
        assert payload["error"] == "SchemaError"
        assert "NODE=STATUS" in payload["message"]

    def test_solver_guard_surfaces(self, tmp_path, grid_file, centrality_file, capsys):
        code = run_cli(*solve_args(grid_file, centrality_file, tmp_path / "out",
                                   "--solver", "exact", "--max-vars", "4", "--no-figures"))
        assert code == 1
        payload = json.loads(capsys.readouterr().err.strip())
        assert payload["error"] == "SolverError"


class TestGenerate:
    def test_writes_network_and_figure(self, tmp_path):
        out = tmp_path / "net.json"
        assert run_cli("generate", "--out", out, "--size", "3") == 0
        assert out.exists()
        assert out.with_suffix(".png").exists()
        document = read_json(out)
        assert document["schema"] == "wdn-network/1"
        assert len(document["nodes"]) == 10

    def test_no_figures_skips_png(self, grid_file):
        assert not grid_file.with_suffix(".png").exists()

    def test_seed_changes_network(self, tmp_path):
        a, b, c = (tmp_path / n for n in ("a.json", "b.json", "c.json"))
        run_cli("generate", "--out", a, "--size", "3", "--seed", "1", "--no-figures")
        run_cli("generate", "--out", b, "--size", "3", "--seed", "1", "--no-figures")
        run_cli("generate", "--out", c, "--size", "3", "--seed", "2", "--no-figures")
        assert a.read_text() == b.read_text()
        assert a.read_text() != c.read_text()


class TestCentrality:
    def test_writes_document_and_figure(self, tmp_path, grid_file):
        out = tmp_path / "cent.json"
        assert run_cli("centrality", "--network", grid_file, "--out", out) == 0
        document = read_json(out)
        assert document["schema"] == "centrality/1"
        assert max(document["values"].values()) == pytest.approx(1.0)
        assert out.with_suffix(".png").exists()

    def test_reruns_identical_except_timestamp(self, tmp_path, grid_file):
        first = tmp_path / "c1.json"
        second = tmp_path / "c2.json"
        run_cli("centrality", "--network", grid_file, "--out", first, "--no-figures")
        run_cli("centrality", "--network", grid_file, "--out", second, "--no-figures")
        assert read_json(first)["meta"]["created"] != ""
        assert without_meta(first) == without_meta(second)


class TestBuild:
    def test_writes_model_document(self, tmp_path, grid_file, centrality_file, capsys):
        out = tmp_path / "model.json"
        code = run_cli("build", "--network", grid_file, "--centrality", centrality_file,
                       "--out", out, "--sensors", "3")
        assert code == 0
        document = read_json(out)
        assert document["schema"] == "qubo/1"
        assert len(document["registry"]) == 10
        assert "variables" in capsys.readouterr().out

    def test_session_marks_change_model(self, tmp_path, grid_file, centrality_file):
        plain = tmp_path / "plain.json"
        run_cli("build", "--network", grid_file, "--centrality", centrality_file,
                "--out", plain, "--sensors", "3")
        sess = tmp_path / "sess.json"
        run_cli("replan", "--network", grid_file, "--centrality", centrality_file,
                "--session", sess, "--out-dir", tmp_path / "r", "--sensors", "3",
                "--mark", "n1_1=installed", "--solver", "exact", "--no-figures")
        pinned = tmp_path / "pinned.json"
        run_cli("build", "--network", grid_file, "--centrality", centrality_file,
                "--out", pinned, "--sensors", "3", "--session", sess)
        assert without_meta(plain) != without_meta(pinned)


class TestSolve:
    def test_exact_solver_outputs(self, tmp_path, grid_file, centrality_file, capsys):
        out_dir = tmp_path / "out"
        code = run_cli(*solve_args(grid_file, centrality_file, out_dir,
                                   "--solver", "exact"))
        assert code == 0
        report = read_json(out_dir / "report.json")
        result = read_json(out_dir / "result.json")
        assert report["schema"] == "placement-report/1"
        assert report["sensor_count"] == 3
        assert report["constraint_satisfied"] is True
        assert result["best"]["selected"] == report["selected"]
        assert (out_dir / "histogram.csv").exists()
        assert (out_dir / "histogram.png").exists()
        assert (out_dir / "placement.png").exists()
        assert "constraint satisfied" in capsys.readouterr().out

    def test_annealer_echoes_schedule(self, tmp_path, grid_file, centrality_file):
        out_dir = tmp_path / "out"
        code = run_cli(*solve_args(grid_file, centrality_file, out_dir,
                                   "--runs", "5", "--sweeps", "50", "--seed", "3",
                                   "--bins", "5", "--no-figures"))
        assert code == 0
        result = read_json(out_dir / "result.json")
        assert result["schedule"]["runs"] == 5
        assert result["schedule"]["sweeps"] == 50
        assert result["schedule"]["seed"] == 3
        assert result["schedule"]["t_hot"] > result["schedule"]["t_cold"]
        assert len(result["energies"]) == 5
        csv_lines = (out_dir / "histogram.csv").read_text().strip().splitlines()
        assert csv_lines[0] == "center,density"

    def test_solve_reruns_identical_except_timestamp(self, tmp_path, grid_file, centrality_file):
        first = tmp_path / "s1"
        second = tmp_path / "s2"
        for out_dir in (first, second):
            run_cli(*solve_args(grid_file, centrality_file, out_dir,
                                "--runs", "4", "--sweeps", "40", "--seed", "7",
                                "--no-figures"))
        assert without_meta(first / "report.json") == without_meta(second / "report.json")
        assert without_meta(first / "result.json") == without_meta(second / "result.json")
        assert (first / "histogram.csv").read_text() == (second / "histogram.csv").read_text()


class TestEvaluate:
    def test_scores_report_against_baseline(self, tmp_path, grid_file, centrality_file, capsys):
        out_dir = tmp_path / "out"
        run_cli(*solve_args(grid_file, centrality_file, out_dir, "--solver", "exact",
                            "--no-figures"))
        capsys.readouterr()
        eval_path = tmp_path / "eval.json"
        code = run_cli("evaluate", "--network", grid_file,
                       "--report", out_dir / "report.json",
                       "--trials", "500", "--out", eval_path)
        assert code == 0
        document = read_json(eval_path)
        assert document["schema"] == "evaluation/1"
        assert document["sensor_count"] == 3
        assert document["baseline"]["trials"] == 500
        assert document["advantage"] == pytest.approx(
            document["demand_coverage"] - document["baseline"]["mean"]
        )
        assert "baseline" in capsys.readouterr().out

    def test_unknown_selected_node(self, tmp_path, grid_file, capsys):
        report = tmp_path / "report.json"
        report.write_text(json.dumps({"selected": ["ghost"]}))
        code = run_cli("evaluate", "--network", grid_file, "--report", report)
        assert code == 1
        payload = json.loads(capsys.readouterr().err.strip())
        assert "ghost" in payload["message"]


class TestReplan:
    def test_creates_session_and_honors_marks(self, tmp_path, grid_file, centrality_file, capsys):
        sess = tmp_path / "sess.json"
        out_dir = tmp_path / "out"
        code = run_cli("replan", "--network", grid_file, "--centrality", centrality_file,
                       "--session", sess, "--out-dir", out_dir, "--sensors", "3",
                       "--mark", "n1_1=installed", "--mark", "n2_2=rejected",
                       "--solver", "exact", "--no-figures")
        assert code == 0
        assert "created session" in capsys.readouterr().out
        stored = read_json(sess)
        assert stored["installed"] == ["n1_1"]
        assert stored["rejected"] == ["n2_2"]
        report = read_json(out_dir / "report.json")
        assert "n1_1" in report["selected"]
        assert "n2_2" not in report["selected"]
        assert stored["last_report"]["selected"] == report["selected"]

    def test_second_replan_reuses_session(self, tmp_path, grid_file, centrality_file, capsys):
        sess = tmp_path / "sess.json"
        base = ("replan", "--network", grid_file, "--centrality", centrality_file,
                "--session", sess, "--sensors", "3", "--solver", "exact", "--no-figures")
        run_cli(*base, "--out-dir", tmp_path / "r1", "--mark", "n1_1=installed")
        capsys.readouterr()
        code = run_cli(*base, "--out-dir", tmp_path / "r2",
                       "--unmark", "n1_1", "--mark", "n0_1=rejected")
        assert code == 0
        assert "created session" not in capsys.readouterr().out
        stored = read_json(sess)
        assert stored["installed"] == []
        assert stored["rejected"] == ["n0_1"]


class TestHistogram:
    def test_bins_result_document(self, tmp_path, grid_file, centrality_file):
        out_dir = tmp_path / "out"
        run_cli(*solve_args(grid_file, centrality_file, out_dir,
                            "--runs", "8", "--sweeps", "30", "--no-figures"))
        table = tmp_path / "table.csv"
        code = run_cli("histogram", "--result", out_dir / "result.json",
                       "--out", table, "--bins", "4")
        assert code == 0
        lines = table.read_text().strip().splitlines()
        assert lines[0] == "center,density"
        assert table.with_suffix(".png").exists()

    def test_missing_energies_key(self, tmp_path, capsys):
        bad = tmp_path / "result.json"
        bad.write_text(json.dumps({"schema": "anneal-result/1"}))
        code = run_cli("histogram", "--result", bad, "--out", tmp_path / "t.csv",
                       "--no-figures")
        assert code == 1
        payload = json.loads(capsys.readouterr().err.strip())
        assert payload["error"] == "SchemaError"


class TestFigureGuard:
    def test_solve_without_coords_skips_figures(self, tmp_path, capsys):
        net = {
            "schema": "wdn-network/1",
            "nodes": [
                {"id": "a", "kind": "source", "demand": 0.0, "accessible": True},
                {"id": "b", "kind": "junction", "demand": 5.0, "accessible": True},
            ],
            "edges": [{"id": "ab", "from": "a", "to": "b", "length": 1.0}],
        }
        net_path = tmp_path / "net.json"
        net_path.write_text(json.dumps(net))
        cent_path = tmp_path / "cent.json"
        run_cli("centrality", "--network", net_path, "--out", cent_path)
        capsys.readouterr()
        out_dir = tmp_path / "out"
        code = run_cli("solve", "--network", net_path, "--centrality", cent_path,
                       "--out-dir", out_dir, "--sensors", "1", "--solver", "exact")
        assert code == 0
        assert "figure skipped" in capsys.readouterr().out
        assert not (out_dir / "placement.png").exists()
        # energy histograms need no coordinates, so that figure still renders
        assert (out_dir / "histogram.png").exists()
