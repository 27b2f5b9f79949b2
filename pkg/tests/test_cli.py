"""Test the command-line entry point."""

import csv
import json
import logging
from pathlib import Path
from unittest.mock import patch

import pytest

from fading_bc.__main__ import build_parser, run
from fading_bc.verify_suites import VERIFY_SUITES, SuiteResult

from .utils import discover_test_configs, run_main

CONFIGS_DIR = Path(__file__).parent / "configs"


def config_path(name: str) -> str:
    return str(CONFIGS_DIR / f"{name}.yaml")


def read_rows(path: Path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class TestRegionCommands:
    """Test the tracing subcommands end to end."""

    @pytest.mark.parametrize("config_name,config_path", discover_test_configs(CONFIGS_DIR))
    def test_region_runs_for_every_config(self, config_name, config_path, temp_output_dir):
        """Test that `region` succeeds on all sample configs."""
        code = run_main(["region", "--config", str(config_path), "--out", str(temp_output_dir)])
        assert code == 0
        assert (temp_output_dir / "inner.csv").exists()
        assert (temp_output_dir / "outer.csv").exists()

    def test_zero_power_region(self, temp_output_dir):
        """Test that zero power writes the origin as the only vertex."""
        config = temp_output_dir / "zero.yaml"
        config.write_text(
            "schema_version: 1\n"
            "distribution:\n  atoms: [[3, 1, 0.5], [1, 3, 0.5]]\n"
            "csit: {kind: none}\n"
            "power: 0\n"
            "optimizer: {directions: 4, restarts: 1, grid_seed_levels: 2, max_iters: 20}\n"
            f"output: {{dir: {json.dumps(str(temp_output_dir))}, formats: [csv]}}\n"
        )
        assert run_main(["region", "--config", str(config)]) == 0
        for name in ("inner", "outer"):
            assert read_rows(temp_output_dir / f"{name}.csv") == [
                ["0.000000000", "0.000000000", "0.000000000"],
            ]

    def test_inner_only(self, temp_output_dir):
        """Test that `--bound inner` traces the inner region alone."""
        code = run_main(
            ["region", "--config", config_path("symmetric_two_atom"),
             "--bound", "inner", "--out", str(temp_output_dir)]
        )
        assert code == 0
        assert not (temp_output_dir / "outer.csv").exists()
        report = json.loads((temp_output_dir / "report.json").read_text())
        assert list(report["regions"]) == ["inner"]

    def test_secrecy_regions(self, temp_output_dir):
        """Test that `secrecy` writes all three secrecy regions."""
        code = run_main(
            ["secrecy", "--config", config_path("symmetric_two_atom"),
             "--out", str(temp_output_dir)]
        )
        assert code == 0
        report = json.loads((temp_output_dir / "report.json").read_text())
        assert sorted(report["regions"]) == [
            "secrecy_inner",
            "secrecy_nocommon",
            "secrecy_outer",
        ]

    def test_reruns_are_byte_identical(self, temp_output_dir):
        """Test that repeated runs write identical files."""
        args = ["region", "--config", config_path("symmetric_two_atom"),
                "--out", str(temp_output_dir)]
        assert run_main(args) == 0
        first = {p.name: p.read_bytes() for p in temp_output_dir.iterdir()}
        assert run_main(args) == 0
        second = {p.name: p.read_bytes() for p in temp_output_dir.iterdir()}
        assert first == second

    def test_timing_flag(self, temp_output_dir):
        """Test that wall-clock time is reported only with `--timing`."""
        args = ["region", "--config", config_path("single_atom"),
                "--out", str(temp_output_dir), "--format", "json"]
        assert run_main(args) == 0
        assert "wall_clock_seconds" not in (temp_output_dir / "report.json").read_text()
        assert run_main(args + ["--timing"]) == 0
        assert "wall_clock_seconds" in (temp_output_dir / "report.json").read_text()

    def test_capped_searches_warn_once(self, caplog, temp_output_dir):
        """Test that a run with capped searches logs a single warning."""
        config = temp_output_dir / "capped.yaml"
        config.write_text(
            "schema_version: 1\n"
            "distribution:\n  atoms: [[3, 1, 0.5], [1, 3, 0.5]]\n"
            "csit: {kind: none}\n"
            "optimizer: {directions: 4, restarts: 1, grid_seed_levels: 2, max_iters: 1}\n"
        )
        with caplog.at_level(logging.WARNING):
            code = run_main(
                ["region", "--config", str(config), "--out", str(temp_output_dir)]
            )
        assert code == 0
        capped = [r for r in caplog.records if "iteration cap" in r.getMessage()]
        assert len(capped) == 1
        assert capped[0].getMessage() == "8 of 8 support searches hit the iteration cap"


class TestSumRateAndCapacity:
    """Test the closed-result subcommands."""

    def test_sumrate_symmetric(self, capsys, temp_output_dir):
        """Test the sum-rate command on the symmetric channel."""
        code = run_main(
            ["sumrate", "--config", config_path("symmetric_two_atom"),
             "--out", str(temp_output_dir)]
        )
        assert code == 0
        assert "2.000000 bits" in capsys.readouterr().out
        report = json.loads((temp_output_dir / "report.json").read_text())
        assert report["summary"]["sum_rate"] == pytest.approx(2.0, abs=1e-8)

    def test_sumrate_needs_order_revealing_csit(self, capsys, temp_output_dir):
        """Test that sum rate without order-revealing CSIT exits with a computation error."""
        code = run_main(
            ["sumrate", "--config", config_path("rayleigh_no_csit"),
             "--out", str(temp_output_dir)]
        )
        assert code == 3
        assert capsys.readouterr().err.startswith("Error:")

    def test_capacity_perfect_csit(self, temp_output_dir):
        """Test that perfect CSIT reports matching inner and outer hulls."""
        code = run_main(
            ["capacity", "--config", config_path("perfect_csit"),
             "--out", str(temp_output_dir), "--format", "json"]
        )
        assert code == 0
        report = json.loads((temp_output_dir / "report.json").read_text())
        assert report["summary"]["inner_matches_outer"] is True
        assert report["summary"]["inner_outer_gap"] <= 1e-6
        assert sorted(report["regions"]) == [
            "capacity",
            "nocommon_capacity",
            "secrecy_capacity",
            "secrecy_nocommon_capacity",
        ]

    def test_capacity_degradedness_known(self, capsys, temp_output_dir):
        """Test that an atom-separating degradedness bit reports every closed result."""
        code = run_main(
            ["capacity", "--config", config_path("symmetric_two_atom"),
             "--out", str(temp_output_dir)]
        )
        assert code == 0
        assert "sum-rate capacity: 2.000000 bits" in capsys.readouterr().out
        report = json.loads((temp_output_dir / "report.json").read_text())
        # the degradedness bit separates both atoms, so perfect CSIT applies too
        assert report["summary"]["results"] == ["perfect CSIT", "degradedness known"]
        assert "capacity" in report["regions"]
        assert "secrecy_nocommon_capacity" in report["regions"]

    def test_capacity_degradedness_bit_merging_atoms(self, capsys, temp_output_dir):
        """Test that a degradedness bit merging atoms reports only the sum-rate results."""
        config = temp_output_dir / "merged.yaml"
        config.write_text(
            "schema_version: 1\n"
            "distribution:\n  atoms: [[3, 1, 0.25], [2, 1, 0.25], [1, 3, 0.5]]\n"
            "csit: {kind: degradedness_bit}\n"
            "optimizer: {directions: 4, restarts: 1, grid_seed_levels: 2, max_iters: 20}\n"
        )
        code = run_main(
            ["capacity", "--config", str(config), "--out", str(temp_output_dir),
             "--format", "json"]
        )
        assert code == 0
        assert capsys.readouterr().out.startswith("sum-rate capacity:")
        report = json.loads((temp_output_dir / "report.json").read_text())
        assert report["summary"]["results"] == ["degradedness known"]
        assert list(report["regions"]) == ["secrecy_nocommon_capacity"]

    def test_capacity_without_closed_result(self, temp_output_dir):
        """Test that CSIT without a closed result exits with a computation error."""
        code = run_main(
            ["capacity", "--config", config_path("table_csit"),
             "--out", str(temp_output_dir)]
        )
        assert code == 3


class TestErrorsAndOutput:
    """Test exit codes and the output options."""

    def test_missing_config(self, capsys):
        """Test that a missing `--config` is a usage error."""
        assert run_main(["region"]) == 2
        assert "--config" in capsys.readouterr().err

    def test_unknown_option(self):
        """Test that an unknown option is a usage error."""
        assert run_main(["region", "--bogus"]) == 2

    def test_bad_config_file(self, temp_output_dir):
        """Test that an unknown config key is a config error."""
        config = temp_output_dir / "bad.yaml"
        config.write_text("schema_version: 1\ndistribution:\n  atoms: [[1, 1, 1]]\nextra: 1\n")
        assert run_main(["region", "--config", str(config)]) == 2

    def test_invalid_distribution_is_a_computation_error(self, temp_output_dir):
        """Test that bad atom masses exit with a computation error."""
        config = temp_output_dir / "mass.yaml"
        config.write_text("schema_version: 1\ndistribution:\n  atoms: [[1, 1, 0.7]]\n")
        assert run_main(["region", "--config", str(config),
                         "--out", str(temp_output_dir)]) == 3

    def test_clipboard(self, temp_output_dir):
        """Test that `-c` copies the output text."""
        with patch("pyperclip.copy") as copy:
            code = run(
                ["sumrate", "--config", config_path("symmetric_two_atom"),
                 "--out", str(temp_output_dir), "-c"]
            )
        assert code == 0
        assert copy.call_args[0][0].startswith("2.000000 bits")

    def test_clipboard_failure_is_reported(self, capsys, temp_output_dir):
        """Test that a clipboard failure is reported without failing the run."""
        with patch("pyperclip.copy", side_effect=RuntimeError("no display")):
            code = run(
                ["sumrate", "--config", config_path("symmetric_two_atom"),
                 "--out", str(temp_output_dir), "-c"]
            )
        assert code == 0
        assert "Failed to copy to clipboard: no display" in capsys.readouterr().err

    def test_parser_subcommands(self):
        """Test parsing of the verify subcommand options."""
        parser = build_parser()
        args = parser.parse_args(["verify", "--suite", "containment", "--quick"])
        assert args.suite == ["containment"]
        assert args.quick


class TestVerifyAndEmit:
    """Test the verification and rendering subcommands."""

    def test_verify_single_suite(self, capsys, temp_output_dir):
        """Test running one verification suite."""
        code = run_main(
            ["verify", "--suite", "beta_monotonicity", "--out", str(temp_output_dir)]
        )
        assert code == 0
        assert capsys.readouterr().out.startswith("PASS beta_monotonicity")
        payload = json.loads((temp_output_dir / "verify.json").read_text())
        assert payload["suites"][0]["name"] == "beta_monotonicity"

    def test_verify_failure_exit_code(self, capsys):
        """Test that a failing suite exits with code 4."""
        failing = SuiteResult("beta_monotonicity", False, 1, 1.0, "forced")
        with patch.object(VERIFY_SUITES["beta_monotonicity"], "run", return_value=failing):
            code = run_main(["verify", "--suite", "beta_monotonicity"])
        assert code == 4
        captured = capsys.readouterr()
        assert "FAIL beta_monotonicity" in captured.out
        assert "verification failed" in captured.err

    def test_emit_from_report(self, temp_output_dir):
        """Test rendering CSV and SVG files from a saved report."""
        source = temp_output_dir / "run"
        assert run_main(
            ["region", "--config", config_path("single_atom"), "--out", str(source),
             "--format", "json"]
        ) == 0
        rendered = temp_output_dir / "rendered"
        code = run_main(
            ["emit", str(source / "report.json"), "--out", str(rendered)]
        )
        assert code == 0
        assert sorted(p.name for p in rendered.iterdir()) == [
            "inner.csv",
            "inner.svg",
            "outer.csv",
            "outer.svg",
        ]
        original = json.loads((source / "report.json").read_text())
        rows = read_rows(rendered / "inner.csv")
        assert len(rows) == len(original["regions"]["inner"]["vertices"])

    def test_emit_missing_report(self, temp_output_dir):
        """Test that emitting a missing report is an error."""
        assert run_main(["emit", str(temp_output_dir / "none.json")]) == 3
