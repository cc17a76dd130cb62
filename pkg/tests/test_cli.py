import json
import math

import pytest

from annulus_hardy.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_IO, EXIT_OK, main, read_config
from annulus_hardy.errors import PreconditionError
from annulus_hardy.plotting import plot_table


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def _summary(d):
    return json.loads((d / "summary.json").read_text())


class TestCommands:
    def test_optimality(self, tmp_path):
        assert main(["optimality", "--s", "0.5", "--n-max", "500", "--plot", "--out", str(tmp_path)]) == EXIT_OK
        lines = (tmp_path / "optimality.csv").read_text().splitlines()
        assert lines[0] == "n,sup_inner,sup_outer,sup_boundary,l1_outer,A_n"
        assert len(lines) == 501
        A = float(lines[-1].split(",")[-1])
        assert abs(A - 0.5 * math.log(2)) / (0.5 * math.log(2)) <= 0.03
        assert (tmp_path / "optimality.svg").read_text().lstrip().startswith("<?xml")
        s = _summary(tmp_path)
        assert s["passed"] and s["exit_code"] == 0 and "optimality.csv" in s["outputs"]

    def test_kernel_check(self, tmp_path):
        assert main(["kernel-check", "--s", "0.5", "--out", str(tmp_path)]) == EXIT_OK

    def test_jensen_check(self, tmp_path):
        assert main(["jensen-check", "--n-funcs", "10", "--out", str(tmp_path)]) == EXIT_OK

    def test_estimate_verify(self, tmp_path):
        assert main(["estimate-verify", "--k", "2", "--n-max", "25", "--n-random", "2",
                     "--out", str(tmp_path)]) == EXIT_OK
        assert _summary(tmp_path)["results"]["hypothesis_ok_count"] > 0

    def test_robin_stability(self, tmp_path):
        assert main(["robin-stability", "--s", "0.0018674", "--n", "2", "--plot", "--out", str(tmp_path)]) == EXIT_OK
        header = (tmp_path / "robin_stability.csv").read_text().splitlines()[0]
        assert header == "t,delta_u,delta_q,ratio,hypothesis_ok"


class TestExitCodes:
    def test_failing_tolerance(self, tmp_path):
        assert main(["optimality", "--n-max", "50", "--tol", "1e-6", "--out", str(tmp_path)]) == EXIT_CHECK
        s = _summary(tmp_path)
        assert s["status"] == "fail" and s["failed"] == ["A_n_limit"]

    @pytest.mark.parametrize("argv", [
        ["optimality", "--s", "1.5"],
        ["optimality", "--n-max", "0"],
        ["nonsense"],
        ["robin-stability", "--q-modes", "0:0.1"],
    ])
    def test_config_errors(self, tmp_path, argv):
        assert main(argv + ["--out", str(tmp_path)]) == EXIT_CONFIG
        assert _summary(tmp_path)["exit_code"] == EXIT_CONFIG

    def test_io_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["optimality", "--n-max", "5", "--out", str(blocker / "sub")]) == EXIT_IO


class TestConfig:
    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# small run\ns = 0.5\nn_max = 40\ntol = 0.5\n")
        out = tmp_path / "out"
        assert main(["optimality", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        assert _summary(out)["config"]["n_max"] == 40

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("n_max = 40\ntol = 0.5\n")
        out = tmp_path / "out"
        main(["optimality", "--config", str(cfg), "--n-max", "30", "--out", str(out)])
        assert _summary(out)["config"]["n_max"] == 30

    def test_robin_config_keys(self, tmp_path):
        cfg = tmp_path / "robin.cfg"
        cfg.write_text("s = 0.5\nN = 16\nc = 1\nc_prime = 3\nn = 2\nq_modes = 0:2\nphi_modes = 0:1\n")
        out = tmp_path / "out"
        assert main(["robin-stability", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        assert _summary(out)["config"]["modes"] == 16

    @pytest.mark.parametrize("text", ["no equals sign\n", "bogus = 1\n", "n_max = many\n"])
    def test_bad_config(self, tmp_path, text):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(text)
        assert main(["optimality", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG

    def test_read_config_comments(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("a = 1  # note\n\n# only comment\nb-c = x\n")
        assert read_config(cfg) == {"a": "1", "b_c": "x"}


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["optimality", "--n-max", "60", "--plot"],
        ["jensen-check", "--n-funcs", "5", "--seed", "7"],
        ["robin-stability", "--t-exp", "3", "--plot"],
    ])
    def test_byte_identical(self, tmp_path, argv):
        a, b = tmp_path / "a", tmp_path / "b"
        main(argv + ["--out", str(a)])
        main(argv + ["--out", str(b)])
        assert _files(a) == _files(b)

    def test_seed_changes_output(self, tmp_path):
        main(["jensen-check", "--n-funcs", "3", "--seed", "1", "--out", str(tmp_path / "a")])
        main(["jensen-check", "--n-funcs", "3", "--seed", "2", "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "jensen_check.csv").read_bytes() != (tmp_path / "b" / "jensen_check.csv").read_bytes()


class TestPlot:
    def test_empty_table(self, tmp_path):
        with pytest.raises(PreconditionError):
            plot_table([], [], tmp_path / "x.svg")

    def test_bad_kind(self, tmp_path):
        with pytest.raises(PreconditionError):
            plot_table([1, 2], [1, 2], tmp_path / "x.svg", kind="bar")

    def test_loglog_with_reference(self, tmp_path):
        p = plot_table([1, 10, 100], [[1, 0.1, 0.01]], tmp_path / "x.svg", "loglog", reference=0.05)
        assert "<svg" in p.read_text()
