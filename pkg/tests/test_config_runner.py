"""
Tests for the run configuration, validation, the experiment runner, and
the command-line entry point.
"""

# =============================================================================

import csv
import json
import logging
import re

import pytest

from qknh.__main__ import EXIT_ERROR, main
from qknh.config import RunConfig, parse_override
from qknh.errors import ConfigError, ExperimentError
from qknh.runner import (
    COLUMN_UNITS,
    DISTRIBUTION_COLUMNS,
    LATTICE_COLUMNS,
    SEPARATRIX_COLUMNS,
    SHEET_COLUMNS,
    SPECTRUM_COLUMNS,
    TRAJECTORY_COLUMNS,
    header_cell,
    run,
    validate,
)

# =============================================================================


def _config(tmp_path, **overrides) -> RunConfig:
    overrides.setdefault("output.directory", str(tmp_path))
    return RunConfig().with_overrides(overrides)


def _read_csv(path):
    """Reads rows keyed by column name, without the unit suffix."""
    with path.open(encoding="utf-8") as f:
        return [
            {key.split(" [")[0]: value for key, value in row.items()}
            for row in csv.DictReader(f)
        ]


# config ======================================================================


def test_defaults_round_trip():
    config = RunConfig()
    assert RunConfig.from_dict(config.to_dict()) == config
    assert config.experiment.mode == "evolve"
    assert config.potential.hbar == 0.05


def test_unknown_keys():
    with pytest.raises(ConfigError, match="experiment.foo"):
        RunConfig.from_dict({"experiment": {"foo": 1}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"plots": {}})
    with pytest.raises(ConfigError):
        RunConfig().with_overrides({"experiment.foo": 1})
    with pytest.raises(ConfigError):
        RunConfig().with_overrides({"M": 1})


def test_bad_values():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"schema_version": 2})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"experiment": {"M": "ten"}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"experiment": {"mode": "plot"}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"experiment": {"seed": -1}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"sweep": {"window": [0.0]}})


def test_overrides():
    config = RunConfig().with_overrides(
        {"experiment.M": 5, "sweep.window": [-0.5, 0.5]}
    )
    assert config.experiment.M == 5
    assert config.sweep.window == (-0.5, 0.5)
    # untouched settings keep their defaults
    assert config.experiment.R == 100


def test_parse_override():
    assert parse_override("experiment.M=5") == ("experiment.M", 5)
    assert parse_override("output.directory=out") == (
        "output.directory",
        "out",
    )
    assert parse_override("sweep.window=[0, 1]") == ("sweep.window", [0, 1])
    with pytest.raises(ConfigError):
        parse_override("experiment.M")
    with pytest.raises(ConfigError):
        parse_override("experiment.X=NaN")


def test_from_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"experiment": {"M": 7}}), encoding="utf-8")
    assert RunConfig.from_json(path).experiment.M == 7
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.from_json(path)
    with pytest.raises(ConfigError):
        RunConfig.from_json(tmp_path / "missing.json")


# validation ==================================================================


def test_validate_defaults():
    report = validate(RunConfig())
    assert report.ok
    assert report.warnings == []


def test_validate_errors(tmp_path):
    report = validate(_config(tmp_path, **{"potential.alpha": -1}))
    assert not report.ok
    assert any("potential.alpha" in error for error in report.errors)
    report = validate(_config(tmp_path, **{"experiment.Z": 0}))
    assert any("experiment.Z" in error for error in report.errors)
    assert report.to_dict()["ok"] is False


def test_validate_warns_outside_double_well(tmp_path):
    config = _config(
        tmp_path,
        **{"experiment.mode": "spectrum", "potential.beta": [0.5, 1.0]},
    )
    report = validate(config)
    assert report.ok
    assert any("lambda=-1" in warning for warning in report.warnings)


def test_validate_warns_about_strong_prediction(tmp_path):
    report = validate(_config(tmp_path, **{"experiment.Y": -1.0}))
    assert report.ok
    assert len(report.warnings) == 1


def test_validate_notes_the_hbar_default(tmp_path):
    report = validate(_config(tmp_path, **{"experiment.mode": "spectrum"}))
    assert report.ok
    assert any("potential.hbar=0.05" in note for note in report.notes)
    assert report.to_dict()["notes"] == report.notes
    report = validate(
        _config(
            tmp_path,
            **{"experiment.mode": "spectrum", "potential.hbar": 1.0},
        )
    )
    assert report.notes == []
    # synthetic lattices do not use the potential
    assert validate(RunConfig()).notes == []


# runner ======================================================================


def test_run_evolve(tmp_path):
    config = _config(tmp_path)
    result = run(config)
    assert result.status == 0
    names = {path.name for path in result.outputs}
    assert names == {
        "trajectory.csv",
        "distribution.csv",
        "prediction.json",
        "manifest.json",
    }
    prediction = json.loads((tmp_path / "prediction.json").read_text())
    assert prediction["measured"]["p_minus"] == pytest.approx(0.4, abs=2e-3)
    assert prediction["initial"] == list(range(-13, -3))
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"] == config.to_dict()
    assert manifest["mode"] == "evolve"
    assert manifest["units"]["columns"]["energy"] == "E0"
    assert "E0" in manifest["units"]["base"]
    rows = _read_csv(tmp_path / "trajectory.csv")
    assert rows[0]["n_c"] == "0"
    assert float(rows[0]["p_minus"]) == pytest.approx(1.0)


def test_run_json_only(tmp_path):
    result = run(_config(tmp_path, **{"output.formats": ["json"]}))
    names = {path.name for path in result.outputs}
    assert names == {"prediction.json", "manifest.json"}


def test_sweep_is_reproducible(tmp_path):
    settings = {
        "experiment.mode": "sweep",
        "experiment.M": 5,
        "experiment.n_c_max": 40,
        "experiment.R": 6,
        "experiment.seed": 11,
    }
    first = run(_config(tmp_path / "first", **settings))
    second = run(_config(tmp_path / "second", **settings))
    assert first.report["mean_p_minus"] == second.report["mean_p_minus"]
    assert (tmp_path / "first" / "realizations.csv").read_bytes() == (
        tmp_path / "second" / "realizations.csv"
    ).read_bytes()
    stats = json.loads((tmp_path / "first" / "statistics.json").read_text())
    assert stats["realizations"] == 6
    assert stats["all_within_weak"] is True


def test_run_harmonic_spectrum(tmp_path, caplog):
    caplog.set_level(logging.INFO, logger="qknh.runner")
    config = _config(
        tmp_path,
        **{
            "experiment.mode": "spectrum",
            "experiment.lam_points": 2,
            "experiment.levels": 5,
            "potential.family": "harmonic",
            "potential.hbar": 1.0,
        },
    )
    run(config)
    rows = _read_csv(tmp_path / "spectrum.csv")
    assert len(rows) == 2 * 10
    for row in rows:
        assert row["kind"] == "A"
        assert float(row["energy"]) == pytest.approx(
            int(row["label"]) + 0.5, abs=1e-9
        )
    assert "Harmonic potential with hbar=1" in caplog.text


def test_run_separatrix(tmp_path):
    config = _config(
        tmp_path,
        **{"experiment.mode": "separatrix", "experiment.lam_points": 3},
    )
    result = run(config)
    assert result.report["points"] == 3
    rows = _read_csv(tmp_path / "separatrix.csv")
    assert [float(row["lambda"]) for row in rows] == [-1.0, 0.0, 1.0]


def test_run_rejects_invalid_config(tmp_path):
    with pytest.raises(ConfigError):
        run(_config(tmp_path, **{"potential.alpha": -1}))


def test_experiment_error_names_module(tmp_path):
    with pytest.raises(ExperimentError) as info:
        run(_config(tmp_path, **{"experiment.Y": -1.0}))
    assert info.value.module == "runner"


# headers =====================================================================


HEADER_PATTERN = re.compile(r"^\w+ \[[^\[\]]+\]$")

HARMONIC = {
    "potential.family": "harmonic",
    "potential.hbar": 1.0,
    "experiment.levels": 5,
}

HEADER_RUNS = {
    "spectrum": {**HARMONIC, "experiment.lam_points": 2},
    "separatrix": {"experiment.lam_points": 3},
    "evolve": {"experiment.M": 5, "experiment.n_c_max": 40},
    "sweep": {"experiment.M": 5, "experiment.n_c_max": 40, "experiment.R": 2},
    "oracle": {
        **HARMONIC,
        "experiment.lam_points": 2,
        "experiment.grid_points": 2000,
    },
}


def test_every_column_has_a_unit():
    for columns in (
        SPECTRUM_COLUMNS,
        LATTICE_COLUMNS,
        SEPARATRIX_COLUMNS,
        TRAJECTORY_COLUMNS,
        DISTRIBUTION_COLUMNS,
        SHEET_COLUMNS,
    ):
        for column in columns:
            assert COLUMN_UNITS[column]
            assert HEADER_PATTERN.match(header_cell(column))
    assert header_cell("energy") == "energy [E0]"
    assert header_cell("gamma") == "gamma [1/T]"
    assert header_cell("p_minus") == "p_minus [1]"
    with pytest.raises(KeyError):
        header_cell("bogus")


@pytest.mark.parametrize("mode", sorted(HEADER_RUNS))
def test_csv_headers_carry_units(tmp_path, mode):
    settings = {"experiment.mode": mode, **HEADER_RUNS[mode]}
    result = run(_config(tmp_path, **settings))
    written = [path for path in result.outputs if path.suffix == ".csv"]
    assert written
    for path in written:
        with path.open(encoding="utf-8") as f:
            header = next(csv.reader(f))
        assert header
        for cell in header:
            assert HEADER_PATTERN.match(cell), (path.name, cell)


# command line ================================================================


def test_main_evolve(tmp_path, capsys):
    out = tmp_path / "out"
    status = main(["evolve", "--out", str(out), "--set", "experiment.M=5"])
    assert status == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["experiment"]["M"] == 5
    assert str(out / "manifest.json") in capsys.readouterr().out


def test_main_validate(tmp_path, capsys):
    status = main(
        [
            "validate",
            "--out",
            str(tmp_path),
            "--set",
            "potential.alpha=-1",
        ]
    )
    assert status == EXIT_ERROR
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] is False


def test_main_reports_errors(tmp_path, capsys):
    status = main(["evolve", "--out", str(tmp_path), "--set", "bogus=1"])
    assert status == EXIT_ERROR
    report = json.loads(capsys.readouterr().out)
    assert report["error"] == "ConfigError"
    assert report["module"] == "config"
    assert json.loads((tmp_path / "error.json").read_text()) == report
