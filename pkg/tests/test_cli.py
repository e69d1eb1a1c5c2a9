import json

import pytest

from reglab import cli


def run_cli(tmp_path, *argv):
    out = tmp_path / "artifact.txt"
    code = cli.main([*argv, "--out", str(out)])
    return code, out.read_text()


class TestKernelCommand:
    def test_row_count_and_header(self, tmp_path):
        code, text = run_cli(tmp_path, "kernel", "--family", "parabolic", "--m", "2",
                             "--range", "0:10:0.05")
        assert code == 0
        lines = text.strip().split("\n")
        header = json.loads(lines[0][2:])
        assert header["d0"] == pytest.approx(0.23623, abs=1e-5)
        assert lines[1] == "y,F,asymptotic,abs_diff"
        assert len(lines) - 2 == 201

    def test_dispersion_header_constant(self, tmp_path):
        code, text = run_cli(tmp_path, "kernel", "--family", "dispersion3",
                             "--range", "0:5:0.5")
        header = json.loads(text.split("\n")[0][2:])
        assert header["d0"] == pytest.approx(0.38490, abs=1e-5)

    def test_bad_range_exits_nonzero(self):
        # argparse raises SystemExit for flag-validation failures
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args(["kernel", "--range", "nonsense"])
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args(["kernel", "--range", "5:1:0.1"])


class TestSpectrumCommand:
    def test_single_width(self, tmp_path):
        code, text = run_cli(tmp_path, "spectrum", "--l", "1")
        assert code == 0
        row = text.strip().split("\n")[-1].split(",")
        assert float(row[1]) == pytest.approx(-31.16, abs=0.05)

    def test_near_root_width(self, tmp_path):
        code, text = run_cli(tmp_path, "spectrum", "--l", "4.0775")
        row = text.strip().split("\n")[-1].split(",")
        assert abs(float(row[1])) <= 3e-4

    def test_branch_with_roots(self, tmp_path):
        code, text = run_cli(tmp_path, "spectrum", "--branch", "3.9:4.3:0.05", "--roots")
        header = json.loads(text.split("\n")[0][2:])
        assert header["roots"][0] == pytest.approx(4.0775, abs=3e-3)

    def test_missing_selection_is_an_error(self, tmp_path):
        out = tmp_path / "x.txt"
        code = cli.main(["spectrum", "--out", str(out)])
        assert code == 2


class TestCriterionCommand:
    def test_critical_family_with_cutoff(self, tmp_path):
        code, text = run_cli(tmp_path, "criterion", "--family", "biharmonic",
                             "--phi", "powerlog:C=2.9511,g=0.75", "--cutoff")
        data = json.loads(text)
        assert code == 0
        assert data["verdict"] == "regular"
        assert data["threshold_constant"] == pytest.approx(2.95115, abs=1e-4)

    def test_heat_above_threshold(self, tmp_path):
        code, text = run_cli(tmp_path, "criterion", "--family", "heat",
                             "--phi", "sqrtlog:C=2.2")
        assert json.loads(text)["verdict"] == "irregular-nonsingular"

    def test_dispersion_right_steep(self, tmp_path):
        code, text = run_cli(tmp_path, "criterion", "--family", "dispersion3",
                             "--side", "right", "--phi", "powerlog:C=1,g=1.5")
        assert json.loads(text)["verdict"] == "irregular-nonsingular"

    def test_indeterminate_still_exit_zero(self, tmp_path):
        code, text = run_cli(tmp_path, "criterion", "--family", "biharmonic",
                             "--phi", "powerlog:C=2.5,g=0.75")
        assert code == 0
        assert json.loads(text)["verdict"] == "indeterminate"


class TestSimulateCommand:
    def test_decay_run(self, tmp_path):
        code, text = run_cli(tmp_path, "simulate", "--family", "biharmonic",
                             "--phi", "const:4", "--tau-end", "120", "--dt", "0.05")
        header = json.loads(text.split("\n")[0][2:])
        assert code == 0
        assert header["sigma_fit"] < 0.0

    def test_determinism(self, tmp_path):
        argv = ["simulate", "--family", "biharmonic", "--phi", "const:3",
                "--tau-end", "10", "--dt", "0.05", "--initial", "random-smooth",
                "--seed", "11"]
        _, first = run_cli(tmp_path, *argv)
        _, second = run_cli(tmp_path, *argv)
        assert first == second


class TestReproduceCommand:
    def test_critical_constants(self, tmp_path):
        code, text = run_cli(tmp_path, "reproduce", "critical-constants")
        data = json.loads(text)
        assert code == 0
        assert float(data["biharmonic_c_star"]) == pytest.approx(
            float(data["closed_form_identity"]), rel=1e-12)

    def test_petrovskii_heat_sweep(self, tmp_path):
        code, text = run_cli(tmp_path, "reproduce", "petrovskii-heat")
        data = json.loads(text)
        assert data["sweep"]["C=2.0"] == "regular"
        assert data["sweep"]["C=2.2"] == "irregular-nonsingular"


class TestConfigFile:
    def test_config_overrides_flags(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"command": "spectrum", "l": 2.0}))
        out = tmp_path / "out.csv"
        code = cli.main(["spectrum", "--l", "1", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        row = out.read_text().strip().split("\n")[-1].split(",")
        assert float(row[0]) == 2.0
        assert float(row[1]) == pytest.approx(-1.83, abs=0.02)

    def test_unknown_keys_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"command": "spectrum", "l": 2.0, "bogus": 1}))
        with pytest.raises(SystemExit):
            cli.main(["spectrum", "--config", str(cfg)])

    def test_command_mismatch_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"command": "kernel"}))
        with pytest.raises(SystemExit):
            cli.main(["spectrum", "--l", "1", "--config", str(cfg)])


class TestJsonMode:
    def test_json_artifact(self, tmp_path):
        out = tmp_path / "a.json"
        code = cli.main(["spectrum", "--l", "3", "--json", "--out", str(out)])
        data = json.loads(out.read_text())
        assert code == 0
        assert data["rows"][0][1] == pytest.approx(-0.2647, abs=5e-3)
