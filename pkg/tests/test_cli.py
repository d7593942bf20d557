"""End-to-end checks of the command-line entry points."""

import pytest

from caresim.cli import main
from caresim.logio import SessionLog
from caresim.params import load_params


def run_cli(*argv):
    return main(list(argv))


class TestCalibrate:
    def test_prints_default_thresholds(self, capsys):
        assert run_cli("calibrate", "--t-critical", "90", "--t-saturation", "90") == 0
        out = capsys.readouterr().out
        assert "c_critical = 1.650012" in out
        assert "c_saturation = 11.647148" in out


class TestSimulate:
    def test_writes_log_figure_and_summary_line(self, tmp_path, capsys):
        code = run_cli(
            "simulate",
            "--mode", "fixed",
            "--profile", "silent",
            "--seed", "3",
            "--phase-s", "30",
            "--out", str(tmp_path),
        )
        assert code == 0
        out = capsys.readouterr().out
        logs = list(tmp_path.glob("*.log"))
        figures = list(tmp_path.glob("*.png"))
        assert len(logs) == 1 and len(figures) == 1
        assert "session F (fixed)" in out
        assert len(SessionLog.load(logs[0]).records) == 900

    def test_param_override_changes_dynamics(self, tmp_path):
        code = run_cli(
            "simulate",
            "--mode", "fixed",
            "--profile", "silent",
            "--seed", "3",
            "--phase-s", "30",
            "--param", "tick_hz=5",
            "--out", str(tmp_path),
            "--no-figures",
        )
        assert code == 0
        log = SessionLog.load(next(tmp_path.glob("*.log")))
        assert log.header["tick_hz"] == 5
        assert len(log.records) == 450


class TestExperiment:
    def test_artifacts_and_report(self, tmp_path, capsys):
        code = run_cli(
            "experiment",
            "--order", "FA",
            "--profile", "distracted",
            "--seed", "7",
            "--out", str(tmp_path),
        )
        assert code == 0
        logs = sorted(tmp_path.glob("*.log"))
        assert len(logs) == 2
        assert (tmp_path / "summary.csv").exists()
        figure_names = {p.name for p in tmp_path.glob("*.png")}
        assert "threshold_hits.png" in figure_names
        assert "state_distribution.png" in figure_names
        assert "modality_distribution.png" in figure_names
        assert any(name.startswith("comfort_") for name in figure_names)


class TestReplayCommand:
    def test_identical_verdict(self, tmp_path, capsys):
        run_cli(
            "simulate", "--mode", "adaptive", "--profile", "sparse",
            "--seed", "5", "--phase-s", "30", "--out", str(tmp_path),
            "--no-figures",
        )
        log_path = next(tmp_path.glob("*.log"))
        capsys.readouterr()
        assert run_cli("replay", str(log_path)) == 0
        assert capsys.readouterr().out.strip() == "identical"

    def test_tampered_log_fails(self, tmp_path, capsys):
        run_cli(
            "simulate", "--mode", "fixed", "--profile", "silent",
            "--seed", "5", "--phase-s", "30", "--out", str(tmp_path),
            "--no-figures",
        )
        log_path = next(tmp_path.glob("*.log"))
        text = log_path.read_text().splitlines()
        target = text[100].split(",")
        target[5] = "9.999999"
        text[100] = ",".join(target)
        log_path.write_text("\n".join(text) + "\n")
        capsys.readouterr()
        assert run_cli("replay", str(log_path)) == 1
        assert "divergent" in capsys.readouterr().out


class TestMetricsCommand:
    def test_report_from_saved_logs(self, tmp_path):
        run_cli(
            "experiment", "--order", "AF", "--profile", "sparse", "--seed", "2",
            "--out", str(tmp_path), "--no-figures",
        )
        logs = sorted(str(p) for p in tmp_path.glob("*.log"))
        out_dir = tmp_path / "report"
        code = run_cli("metrics", *logs, "--group", "AF", "--out", str(out_dir))
        assert code == 0
        assert (out_dir / "summary.csv").exists()
        assert (out_dir / "threshold_hits.png").exists()


class TestPuzzleCommand:
    def test_generate_solve_score_round_trip(self, tmp_path, capsys):
        puzzle_path = tmp_path / "puzzle.txt"
        assert run_cli(
            "puzzle", "generate", "--seed", "9", "--out", str(puzzle_path), "--reveal"
        ) == 0
        capsys.readouterr()
        assert run_cli("puzzle", "solve", str(puzzle_path)) == 0
        out = capsys.readouterr().out
        assert out.startswith("1 solution(s)")
        solution = out.splitlines()[1].split()
        answer = ",".join(f"{i}={solution[i]}" for i in range(5))
        assert run_cli("puzzle", "score", str(puzzle_path), "--answer", answer) == 0
        out = capsys.readouterr().out
        assert "X = 50.0" in out and "Y = 100.0" in out and "Z = 80.0" in out

    def test_score_empty_answer(self, tmp_path, capsys):
        puzzle_path = tmp_path / "puzzle.txt"
        run_cli("puzzle", "generate", "--seed", "1", "--out", str(puzzle_path), "--reveal")
        capsys.readouterr()
        assert run_cli("puzzle", "score", str(puzzle_path)) == 0
        assert "Z = 0.0" in capsys.readouterr().out


class TestParamsCommand:
    def test_resolved_file_round_trips(self, tmp_path):
        path = tmp_path / "params.cfg"
        assert run_cli("params", "--out", str(path)) == 0
        params, weights = load_params(path)
        assert params.tick_hz == 10
        assert weights.w_face == 0.5

    def test_unknown_parameter_is_an_error(self, tmp_path, capsys):
        code = run_cli(
            "params", "--param", "warp_factor=9", "--out", str(tmp_path / "p.cfg")
        )
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestUsage:
    def test_unknown_subcommand_exits_nonzero(self):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("frobnicate")
        assert excinfo.value.code != 0

    def test_unknown_profile_exits_nonzero(self, tmp_path):
        with pytest.raises(SystemExit):
            run_cli(
                "simulate", "--mode", "fixed", "--profile", "nobody",
                "--out", str(tmp_path),
            )
