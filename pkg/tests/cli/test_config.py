from pathlib import Path

import pytest
from marshmallow import ValidationError

from cli.config import RunConfig, load_run_config, solver_settings
from config import settings
from foliation.models import CalibrationGrid
from integrand.models import ConeParams, InvalidParameterError
from ode.models import SolverOptions
from tests.factories import RunConfigFactory


class TestRunConfigSchema:
    def test_loads_certify_flags(self):
        """String flag values are converted and defaults filled in."""
        config = load_run_config(
            {"command": "certify", "k": "1", "l": "2", "p": "6", "b_phi": "0.01", "out": "results"}
        )

        assert isinstance(config, RunConfig)
        assert config.params == ConeParams(1, 2)
        assert config.p == 6.0
        assert config.out == Path("results")
        assert isinstance(config.solver, SolverOptions)

    def test_sweep_reads_ranges(self):
        """--k and --l take ranges and --p takes a list for the sweep."""
        config = load_run_config({"command": "sweep", "k": "1..3", "l": "2", "p": "6,8,10"})

        assert config.k_values == [1, 2, 3]
        assert config.l_values == [2]
        assert config.p_values == [6.0, 8.0, 10.0]
        assert config.k is None

    @pytest.mark.parametrize(
        "data",
        [
            {"command": "certify", "k": "0", "l": "1", "p": "6"},
            {"command": "certify", "k": "1", "l": "1"},
            {"command": "certify", "k": "1", "p": "6"},
            {"command": "certify", "k": "1", "l": "1", "p": "2"},
            {"command": "certify", "k": "1", "l": "1", "p": "6", "b_phi": "-1"},
            {"command": "certify", "k": "1", "l": "1", "p": "6", "delta": "0.25"},
            {"command": "certify", "k": "1", "l": "1", "p": "6", "fourier_n": "63"},
            {"command": "certify", "k": "1", "l": "1", "p": "6", "format": "xml"},
            {"command": "certify", "k": "1", "l": "1", "p": "6", "colour": "red"},
            {"command": "sweep", "k": "1..3", "l": "1"},
            {"command": "sweep", "k": "0..2", "l": "1", "p": "6"},
            {"command": "sweep", "k": "a..b", "l": "1", "p": "6"},
            {"command": "calibrate", "k": "1", "l": "1", "p": "6", "grid": "0.2,0.8"},
            {"command": "asymptote", "k": "1", "l": "1", "p": "6", "window": "1e4,1e2"},
            {"command": "plot", "k": "1", "l": "1"},
        ],
    )
    def test_rejects_invalid_input(self, data):
        """Out-of-range, missing and unknown values are validation errors."""
        with pytest.raises(ValidationError):
            load_run_config(data)

    def test_area_needs_no_exponent(self):
        config = load_run_config({"command": "solve", "k": "3", "l": "3", "area": True})
        assert config.area
        assert config.p is None

    def test_grid_and_window(self):
        config = load_run_config(
            {
                "command": "calibrate",
                "k": "1",
                "l": "1",
                "p": "6",
                "grid": "0.2,0.8,1.2,2.0,1e-3",
                "window": "1e2,1e4",
            }
        )
        assert config.grid == CalibrationGrid(0.2, 0.8, 1.2, 2.0, 1e-3)
        assert config.window == (100.0, 10000.0)

    def test_nested_solver_options(self):
        config = load_run_config(
            {"command": "solve", "k": "1", "l": "1", "p": "6", "solver": {"rk_tol": "1e-11"}}
        )
        assert config.solver.rk_tol == 1e-11

    def test_unknown_solver_key(self):
        with pytest.raises(ValidationError):
            load_run_config(
                {"command": "solve", "k": "1", "l": "1", "p": "6", "solver": {"rk_order": "5"}}
            )


class TestSolverSettings:
    def test_flags_override_file(self, tmp_path):
        """Flag values take precedence over the key=value file."""
        path = tmp_path / "solver.env"
        path.write_text("RK_TOL=1e-9\ntau_max=30\n")

        values = solver_settings(path, {"rk_tol": "1e-11", "tau_max": None})

        assert values == {"rk_tol": "1e-11", "tau_max": "30"}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            solver_settings(tmp_path / "missing.env", {})

    def test_no_file_no_flags(self):
        assert solver_settings(None, {"rk_tol": None}) == {}


class TestRunConfig:
    def test_params_need_both_dimensions(self):
        with pytest.raises(InvalidParameterError):
            _ = RunConfigFactory(l=None).params

    def test_defaults_from_settings(self):
        config = RunConfig(command="certify")
        assert config.seed == settings.SEED
        assert config.out == Path(settings.OUTPUT_DIR)
