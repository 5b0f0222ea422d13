"""End-to-end runs of the command-line front end"""

import json
import logging

import pytest

from scaleflow.cli_runner import build_parser, main
from scaleflow.diagnostics import ENV_VAR, configure_logging
from scaleflow.errors import error_report, exit_code_for
from scaleflow.example_systems import GOLDEN


def run_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def error_of(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)


class TestApproximate:
    def test_default_table(self, capsys):
        assert main(["approximate"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "P,distance"
        assert len(lines) == 21
        rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
        assert [p for p, _ in rows] == [float(p) for p in range(1, 21)]
        distances = [d for _, d in rows]
        assert distances[0] > 0.0 and distances[-1] == 0.0
        assert all(later <= earlier for earlier, later in zip(distances, distances[1:]))

    def test_json_table(self, capsys):
        rows = run_json(capsys, ["approximate", "--periods", "1,2", "--format", "json"])
        assert [r["P"] for r in rows] == [1.0, 2.0]

    def test_writes_the_output_file(self, tmp_path, capsys):
        target = tmp_path / "two-mass.csv"
        assert main(["approximate", "--periods", "1..3", "-o", str(target)]) == 0
        assert capsys.readouterr().out == ""
        assert target.read_text().startswith("P,distance\n")

    def test_config_file_and_flag_precedence(self, tmp_path, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("periods = 1..5\nepsilon = 0.2\n")
        assert main(["approximate", "--config", str(conf), "--periods", "1,2"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 3

    def test_output_is_deterministic(self, tmp_path):
        outputs = []
        for i in range(3):
            target = tmp_path / f"run{i}.csv"
            assert main(["approximate", "-o", str(target)]) == 0
            outputs.append(target.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]


class TestOrbitDist:
    def test_short_run(self, capsys):
        argv = ["orbit-dist", "--periods", "8,16", "--t-window=-8,8", "--dt", "0.1"]
        assert main(argv) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "P,distance"
        assert all(float(line.split(",")[1]) <= 1e-9 for line in lines[1:])


class TestChain:
    def test_golden_torus(self, capsys):
        report = run_json(capsys, ["chain"])
        assert report["found"] is True
        assert report["preset"] == "torus-golden"
        assert all(t >= 10.0 for t in report["chain"]["jump_times"])
        assert report["chain"]["points"][0] == report["chain"]["points"][-1] == [0.0, 0.0]

    def test_identity_flow(self, capsys):
        report = run_json(capsys, ["chain", "--preset", "torus-identity", "--s", "1"])
        assert report["found"] is True
        assert len(report["chain"]["jump_times"]) == 1

    def test_chain_reports_are_json_only(self, capsys):
        assert main(["chain", "--format", "csv"]) == 2
        assert error_of(capsys)["error"] == "invalid-config"

    def test_preset_without_a_flow(self, capsys):
        assert main(["chain", "--preset", "two-mass-default"]) == 2
        assert "no flow" in error_of(capsys)["detail"]


class TestEmbed:
    def test_report(self, capsys):
        report = run_json(capsys, ["embed"])
        assert report["anchors"] == 16
        assert report["equivariance_defect"] <= 1e-4
        assert 0.0 < report["growth_integral"] <= 1.0
        assert report["keller_total_variation"] <= 1.0 - 2.0**-16
        assert report["kernel_tail"] < 1e-14

    def test_cylinder_csv(self, capsys):
        argv = ["embed", "--format", "csv", "--y-min", "-1", "--y-max", "1", "--t-cut", "2"]
        assert main(argv) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "ray_index,phi,y,h"
        assert len(lines) == 1 + 16 * 41

    def test_misaligned_grid(self, capsys):
        assert main(["embed", "--dy", "0.015"]) == 2
        assert error_of(capsys)["error"] == "invalid-input"


class TestAdpt:
    def test_orbit_curve(self, capsys):
        report = run_json(capsys, ["adpt"])
        assert report["reading"] == "corrected"
        assert report["defect"] <= 0.005 + 1e-9
        assert len(report["profile"]) == 101
        assert 0.0 <= report["density_defect"] <= 0.5

    def test_constant_curve(self, capsys):
        report = run_json(capsys, ["adpt", "--curve", "constant"])
        assert report["defect"] == pytest.approx(0.5, abs=1e-9)

    def test_literal_reading(self, capsys):
        report = run_json(capsys, ["adpt", "--reading", "literal", "--tau-step", "0.1"])
        assert report["defect"] == pytest.approx(1.0 - GOLDEN, abs=0.01)

    def test_profile_csv(self, capsys):
        assert main(["adpt", "--format", "csv", "--tau-step", "0.5"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "tau,distance"


class TestFailures:
    def test_unknown_preset(self, capsys):
        assert main(["approximate", "--preset", "klein-bottle"]) == 2
        error = error_of(capsys)
        assert error["error"] == "invalid-config"
        assert "klein-bottle" in error["detail"]

    @pytest.mark.parametrize(
        "argv",
        [
            ["approximate", "--bogus"],
            ["approximate", "--rho", "abc"],
            ["approximate", "--periods", "5..1"],
            ["embed", "--anchors", "1"],
            ["sideways"],
            [],
        ],
    )
    def test_invalid_invocations(self, capsys, argv):
        assert main(argv) == 2
        assert set(error_of(capsys)) == {"error", "detail"}

    @pytest.mark.parametrize(
        "argv",
        [
            ["orbit-dist", "--rho", "90", "--epsilon", "0.5", "--periods", "2", "--dt", "1"],
            ["orbit-dist", "--t-window=-750,750", "--dt", "250", "--periods", "2"],
        ],
    )
    def test_mass_overflow_is_invalid_input(self, capsys, argv):
        assert main(argv) == 2
        error = error_of(capsys)
        assert error["error"] == "invalid-input"
        assert "overflows" in error["detail"]

    def test_arithmetic_errors_map_to_invalid_input(self):
        assert exit_code_for(OverflowError("math range error")) == 2
        assert error_report(OverflowError("math range error"))["error"] == "invalid-input"

    def test_unwritable_output(self, tmp_path, capsys):
        target = tmp_path / "missing" / "out.csv"
        assert main(["approximate", "--periods", "1", "-o", str(target)]) == 3
        error = error_of(capsys)
        assert error["error"] == "io-failure"
        assert not target.exists()

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["approximate", "--config", str(tmp_path / "absent.conf")]) == 2

    def test_stderr_keys_are_sorted(self, capsys):
        main(["approximate", "--preset", "klein-bottle"])
        line = capsys.readouterr().err.strip().splitlines()[-1]
        assert line.index('"detail"') < line.index('"error"')


class TestParser:
    def test_every_experiment_is_a_subcommand(self):
        parser = build_parser()
        for name in ("approximate", "orbit-dist", "chain", "embed", "adpt"):
            assert parser.parse_args([name]).experiment == name


class TestLogging:
    def test_levels(self):
        try:
            assert configure_logging("debug") == logging.DEBUG
            assert configure_logging("info") == logging.INFO
        finally:
            configure_logging("off")
        assert logging.getLogger("scaleflow").level > logging.CRITICAL

    def test_unknown_level_warns(self, capsys, monkeypatch):
        monkeypatch.setenv(ENV_VAR, "chatty")
        configure_logging()
        assert "unknown SCALEFLOW_LOG" in capsys.readouterr().err
        configure_logging("off")
