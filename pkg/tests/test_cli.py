import json
import os

import numpy as np
import polars as pl
import pytest

from oddsym.cli import main, resolve_config
from oddsym.exceptions import CertificateContradiction
from oddsym.runner import EXIT_OK, EXIT_PRECONDITION, EXIT_SOLVER_FAILURE, THEOREM_KEYS, mesh_for
from oddsym.weights import symmetric_mesh

EXPQUAD_MINIMIZE = """\
task = minimize
problem.L = 1.0
problem.m = 1.0
problem.a.family = exp_quadratic
problem.b.family = exp_quadratic
eigen.mesh = 128
mesh = 256
"""

SMALL_DATA_REARRANGE = """\
task = rearrange
problem.L = 10.0
problem.m = 0.05
rearrange.init = plus_one
eigen.mesh = 128
mesh = 512
"""

SMALL_DATA_SWEEP = """\
task = sweep
problem.L = 10.0
problem.m = 0.05
sweep.values = 2.0, 3.0
sweep.presets = plus_one, minus_one, odd_tanh, random
sweep.points_per_unit = 16
eigen.mesh = 128
"""


def read_report(out: str) -> dict:
    with open(os.path.join(out, "report.json"), encoding="utf-8") as file:
        return json.load(file)


def read_bytes(out: str, name: str) -> bytes:
    with open(os.path.join(out, name), "rb") as file:
        return file.read()


class TestCommands:
    """Test the presets and audit commands and config resolution."""

    def test_presets(self):
        """Test listing the presets."""
        assert main(["presets"]) == EXIT_OK

    def test_audit(self, config_file):
        """Test printing the hypothesis verdicts of a config."""
        assert main(["audit", config_file(EXPQUAD_MINIMIZE)]) == EXIT_OK

    def test_missing_config(self, temp_out_dir):
        """Test that a missing config exits with status 2."""
        assert main(["run", os.path.join(temp_out_dir, "missing.conf"), "--out", temp_out_dir]) == EXIT_PRECONDITION

    def test_invalid_config(self, config_file, temp_out_dir):
        """Test that an invalid config exits with status 2 and writes nothing."""
        path = config_file("task = minimize\nproblem.a.alhpa = 1.0\n")
        out = os.path.join(temp_out_dir, "out")
        assert main(["run", path, "--out", out]) == EXIT_PRECONDITION
        assert not os.path.exists(os.path.join(out, "report.json"))

    def test_resolve_preset_name(self):
        """Test that a bundled preset can be named instead of a path."""
        config = resolve_config("expquad_uniqueness")
        assert config.task == "minimize"
        assert config.problem.a.family == "exp_quadratic"

    def test_resolve_path_without_suffix(self, config_file):
        """Test that the .conf suffix may be left out."""
        path = config_file("task = bounds\n", name="short.conf")
        assert resolve_config(path[: -len(".conf")]).task == "bounds"

    def test_resolve_unknown(self):
        """Test that an unknown reference raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError, match="No config file or preset"):
            resolve_config("no_such_preset")

    def test_mesh_for(self):
        """Test the sweep mesh: even, at least 64, about points_per_unit per unit length."""
        assert mesh_for(2.0, 16) == 64
        assert mesh_for(10.0, 16) == 160
        assert mesh_for(3.0, 64) % 2 == 0


class TestRunMinimize:
    """Test the minimize task end to end."""

    def test_outputs(self, config_file, temp_out_dir):
        """Test the report and the solution and starts tables."""
        out = os.path.join(temp_out_dir, "run")
        assert main(["run", config_file(EXPQUAD_MINIMIZE), "--out", out, "--mesh", "128"]) == EXIT_OK

        report = read_report(out)
        assert report["status"] == "ok"
        assert report["mesh"] == 128
        assert set(report["theorems"]) == set(THEOREM_KEYS)
        assert report["theorems"]["unique_odd_increasing"] == "certified"
        assert report["results"]["distinct_solutions"] == 1
        assert sorted(report["artifacts"]) == ["solution.csv", "starts.csv"]

        solution = read_bytes(out, "solution.csv")
        assert solution.startswith(b"x,u,uprime,hamiltonian\n")
        assert b"\r\n" not in solution
        starts = read_bytes(out, "starts.csv")
        assert starts.startswith(b"init,cluster,energy,residual_inf,u0,oddness_defect,is_increasing\n")

    def test_mesh_round_trips(self, config_file, temp_out_dir):
        """Test that the x column reads back as the exact mesh."""
        out = os.path.join(temp_out_dir, "run")
        assert main(["run", config_file(EXPQUAD_MINIMIZE), "--out", out, "--mesh", "128"]) == EXIT_OK
        frame = pl.read_csv(os.path.join(out, "solution.csv"))
        assert np.array_equal(frame["x"].to_numpy(), symmetric_mesh(1.0, 128))
        assert frame["u"][0] == -1.0 and frame["u"][-1] == 1.0

    def test_deterministic(self, config_file, temp_out_dir):
        """Test that the same seed gives byte-identical outputs."""
        path = config_file(EXPQUAD_MINIMIZE)
        first, second = os.path.join(temp_out_dir, "first"), os.path.join(temp_out_dir, "second")
        for out in (first, second):
            assert main(["run", path, "--out", out, "--seed", "7", "--mesh", "128"]) == EXIT_OK
        for name in ("report.json", "solution.csv", "starts.csv"):
            assert read_bytes(first, name) == read_bytes(second, name)
        assert read_report(first)["seed"] == 7

    def test_preset_deterministic(self, temp_out_dir):
        """Test byte-identical outputs for the exp-quadratic preset with seed 7."""
        first, second = os.path.join(temp_out_dir, "first"), os.path.join(temp_out_dir, "second")
        for out in (first, second):
            assert main(["run", "expquad_uniqueness", "--out", out, "--seed", "7", "--mesh", "256"]) == EXIT_OK
        for name in ("report.json", "solution.csv", "starts.csv"):
            assert read_bytes(first, name) == read_bytes(second, name)
        report = read_report(first)
        assert report["seed"] == 7
        assert report["results"]["distinct_solutions"] == 1

    def test_out_from_environment(self, config_file, temp_out_dir, monkeypatch):
        """Test that ODDSYM_OUT overrides --out."""
        target = os.path.join(temp_out_dir, "from_env")
        ignored = os.path.join(temp_out_dir, "ignored")
        monkeypatch.setenv("ODDSYM_OUT", target)
        assert main(["run", config_file(EXPQUAD_MINIMIZE), "--out", ignored, "--mesh", "128"]) == EXIT_OK
        assert os.path.exists(os.path.join(target, "report.json"))
        assert not os.path.exists(os.path.join(ignored, "report.json"))

    def test_solver_failure_removes_outputs(self, config_file, temp_out_dir, monkeypatch):
        """Test that a solver failure exits with status 1 and leaves no partial files."""

        def fail(*args, **kwargs):
            raise CertificateContradiction("forced failure")

        monkeypatch.setattr("oddsym.runner.derivative_comparison", fail)
        out = os.path.join(temp_out_dir, "run")
        assert main(["run", config_file(EXPQUAD_MINIMIZE), "--out", out, "--mesh", "128"]) == EXIT_SOLVER_FAILURE
        assert not os.path.exists(os.path.join(out, "solution.csv"))
        assert not os.path.exists(os.path.join(out, "report.json"))

    def test_preset_by_name(self, temp_out_dir):
        """Test running a bundled preset by name."""
        out = os.path.join(temp_out_dir, "run")
        assert main(["run", "convex_potential", "--out", out, "--mesh", "128"]) == EXIT_OK
        report = read_report(out)
        assert report["theorems"]["convex_energy_unique"] == "certified"
        assert report["results"]["distinct_solutions"] == 1


class TestRunTasks:
    """Test the remaining tasks end to end."""

    def test_precondition_failure(self, config_file, temp_out_dir):
        """Test that rearranging a non-monotone minimizer exits with status 2 and still reports."""
        out = os.path.join(temp_out_dir, "run")
        assert main(["run", config_file(SMALL_DATA_REARRANGE), "--out", out]) == EXIT_PRECONDITION
        report = read_report(out)
        assert report["status"] == "precondition_failed"
        assert "strictly increasing" in report["error"]
        assert set(report["theorems"]) == set(THEOREM_KEYS)

    def test_rearrange(self, config_file, temp_out_dir):
        """Test the rearrangement table for the exp-quadratic weights."""
        text = EXPQUAD_MINIMIZE.replace("task = minimize", "task = rearrange") + "rearrange.K = 257\nrearrange.t_points = 11\n"
        out = os.path.join(temp_out_dir, "run")
        assert main(["run", config_file(text), "--out", out, "--mesh", "128"]) == EXIT_OK
        report = read_report(out)
        assert report["results"]["binding"]
        table = pl.read_csv(os.path.join(out, "rearrangement.csv"))
        assert table.columns == ["t", "kinetic", "total"]
        assert table.height == 11

    def test_bounds(self, config_file, temp_out_dir):
        """Test the bounds task on the unweighted problem."""
        text = "task = bounds\nproblem.L = 10.0\nbounds.horizon = 40.0\neigen.mesh = 128\n"
        out = os.path.join(temp_out_dir, "run")
        assert main(["run", config_file(text), "--out", out]) == EXIT_OK
        report = read_report(out)
        assert report["results"]["symmetry_breaking"]["certified"]
        assert report["results"]["linear_energy_half"]["value"] == pytest.approx(0.1, rel=1e-9)
        for name in ("upper_bound.csv", "psi.csv", "scan.csv"):
            assert os.path.exists(os.path.join(out, name))

    def test_eigen(self, temp_out_dir):
        """Test the eigen task on the Gaussian preset."""
        out = os.path.join(temp_out_dir, "run")
        assert main(["run", "gaussian_l1_semistable", "--out", out]) == EXIT_OK
        report = read_report(out)
        assert report["results"]["l1_product"]["certified"]
        assert report["results"]["certificate"]["certified"]
        assert report["theorems"]["semistable_unique"] == "certified"
        table = pl.read_csv(os.path.join(out, "eigenvector.csv"))
        assert table.columns == ["x", "xi"]

    def test_sweep_parallel_matches_serial(self, config_file, temp_out_dir):
        """Test that the sweep table does not depend on the worker count."""
        path = config_file(SMALL_DATA_SWEEP)
        serial, parallel = os.path.join(temp_out_dir, "serial"), os.path.join(temp_out_dir, "parallel")
        assert main(["run", path, "--out", serial, "--jobs", "1"]) == EXIT_OK
        assert main(["run", path, "--out", parallel, "--jobs", "2"]) == EXIT_OK
        assert read_bytes(serial, "sweep.csv") == read_bytes(parallel, "sweep.csv")
        table = pl.read_csv(os.path.join(serial, "sweep.csv"))
        assert table.columns == ["L", "u0", "energy", "C_as", "upper_min", "certified"]
        assert table["L"].to_list() == [2.0, 3.0]
