"""
Experiment orchestration and output files.

Each experiment mode writes CSV data and JSON reports into the output
directory, followed by a manifest that echoes the resolved config.
"""

# =============================================================================

import csv
import datetime
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from qknh.__version__ import __version__
from qknh.config import DEFAULT_HBAR, RunConfig
from qknh.errors import (
    ConfigError,
    EmptyWindow,
    ExperimentError,
    NoBarrier,
    QknhError,
)
from qknh.knh import prediction_report
from qknh.lznet import (
    EvolutionResult,
    Network,
    SyntheticLattice,
    ZoneMap,
    ensemble_below_zone,
    evolve_incoherent,
    final_distribution_rows,
    sweep_realizations,
    zone_of,
    zone_width,
)
from qknh.oracle import (
    GridSpec,
    default_grid,
    gap_scan,
    level_errors,
    scan_halfwidth,
    spectrum_sheet,
)
from qknh.potential import Potential, barrier_top, well_minima
from qknh.spectrum import (
    LatticeParams,
    branch_levels,
    crossing_lattice,
    local_params,
    modified_levels,
    nearest_to_separatrix,
    separatrix_curve,
)
from qknh.utils import Branch, Family

# =============================================================================

__all__ = ("RunResult", "ValidationReport", "run", "validate")

# =============================================================================

logger = logging.getLogger(__name__)

# levels of headroom above the window for the default oracle grid
GRID_HEADROOM = 1.0
GAP_SCAN_STEPS = 41

# E0 is the energy unit of the potential coefficients and T the time unit
# of the sweep rate; hbar is given in E0 T
BASE_UNITS = {
    "E0": "energy unit of the potential (alpha is in E0 per length^4)",
    "T": "time unit of the sweep rate (lambda_dot is in 1/T)",
    "1": "dimensionless",
    "-": "text",
}

COLUMN_UNITS = {
    "lambda": "1",
    "kind": "-",
    "label": "1",
    "level_index": "1",
    "m": "1",
    "n": "1",
    "energy": "E0",
    "E_s": "E0",
    "V_b": "E0",
    "gap": "E0",
    "time": "T",
    "gamma": "1/T",
    "neg_log_p": "1",
    "P": "1",
    "realization": "1",
    "n_c": "1",
    "p_minus": "1",
    "p_plus": "1",
    "p_zone": "1",
    "initial_index": "1",
    "final_index": "1",
    "probability": "1",
}

# =============================================================================


@dataclass
class ValidationReport:
    """Problems and notes found without running anything.

    Notes point out defaults that users may not expect; they never
    block a run.
    """

    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """Whether there are no errors."""
        return not self.errors

    def to_dict(self) -> dict:
        """Returns the report as a JSON-ready dict."""
        return {
            "ok": self.ok,
            "errors": list(self.errors),
            "warnings": list(self.warnings),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class RunResult:
    """The outcome of a run: exit status, written files, and report."""

    status: int
    outputs: Tuple[Path, ...]
    report: Dict[str, Any]


# =============================================================================


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def header_cell(column: str) -> str:
    """Returns the CSV header cell "name [unit]" of a column."""
    return f"{column} [{COLUMN_UNITS[column]}]"


class _Outputs:
    """Writes files into the output directory and remembers them."""

    def __init__(self, config: RunConfig):
        self._dir = config.output.path
        self._formats = config.output.formats
        self._paths: List[Path] = []
        self._dir.mkdir(parents=True, exist_ok=True)

    @property
    def paths(self) -> Tuple[Path, ...]:
        return tuple(self._paths)

    def csv(self, name: str, columns: Sequence[str], rows: Sequence):
        if "csv" not in self._formats:
            return
        path = self._dir / name
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow([header_cell(column) for column in columns])
            writer.writerows(rows)
        self._paths.append(path)

    def json(self, name: str, data, force: bool = False):
        if not force and "json" not in self._formats:
            return
        path = self._dir / name
        write_json(path, data)
        self._paths.append(path)


def write_json(path: Path, data):
    """Writes `data` as sorted, indented JSON; NaN becomes null."""
    text = json.dumps(_jsonable(data), indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")


# =============================================================================


def _lam_grid(config: RunConfig) -> np.ndarray:
    lo, hi = config.sweep.window
    return np.linspace(lo, hi, config.experiment.lam_points)


def _energy_window(
    pot: Potential, lam: float, config: RunConfig
) -> Tuple[float, float]:
    """Returns the configured window, or the band below the barrier.

    Without a barrier the default band holds about `levels` levels
    above the well bottom.
    """
    if config.experiment.E_window is not None:
        return config.experiment.E_window
    minima = well_minima(pot, lam)
    lo = max(v for _, v in minima)
    try:
        return lo, barrier_top(pot, lam).height
    except NoBarrier:
        x_min = minima[0][0]
        omega = math.sqrt(float(pot.dx(x_min, lam, 2)) / pot.mass)
        return lo, lo + 2 * config.experiment.levels * pot.hbar * omega


def _common_window(
    pot: Potential, lams: Sequence[float], config: RunConfig
) -> Tuple[float, float]:
    windows = [_energy_window(pot, float(lam), config) for lam in lams]
    return max(w[0] for w in windows), min(w[1] for w in windows)


def _synthetic_lattice(config: RunConfig) -> SyntheticLattice:
    exp = config.experiment
    return SyntheticLattice(
        exp.X, exp.Y, exp.Z, exp.slope_ratio, epsilon=exp.epsilon
    )


def _physical_setup(
    pot: Potential, config: RunConfig
) -> Tuple[Network, LatticeParams, Tuple[int, ...]]:
    """Builds the network of physical crossings and its initial lines."""
    lams = _lam_grid(config)
    nodes = crossing_lattice(
        pot, config.sweep.window, _common_window(pot, lams, config)
    )
    if not nodes:
        raise ExperimentError("no crossing nodes in the windows", "spectrum")
    params = local_params(pot, nearest_to_separatrix(nodes))
    network = Network.from_nodes(nodes, config.experiment.epsilon)
    zones_a, _ = network.line_zones(0)
    crossed = {node.m for node in nodes}
    below = [
        int(m)
        for m, code in zip(network.m_labels, zones_a)
        if code == 0 and int(m) in crossed
    ]
    others = [
        int(m) for m, code in zip(network.m_labels, zones_a) if code != 0
    ]
    if others:
        below = [m for m in below if m < min(others)]
    M = config.experiment.M
    if len(below) < M:
        raise ExperimentError(
            f"only {len(below)} A lines lie below the zone; {M} requested",
            "lznet",
        )
    return network, params, tuple(sorted(below)[-M:])


def _evolution_source(pot: Optional[Potential], config: RunConfig):
    """Returns (source, params, initial, D) for evolve and sweep."""
    exp = config.experiment
    if exp.source == "synthetic":
        lat = _synthetic_lattice(config)
        initial = ensemble_below_zone(lat, exp.M)
        lat = lat.sized_for(initial, exp.n_c_max)
        params = LatticeParams.from_xyz(
            exp.X, exp.Y, exp.Z, slope_ratio=exp.slope_ratio
        )
        return Network.from_lattice(lat), params, initial, zone_width(lat)
    network, params, initial = _physical_setup(pot, config)
    D = zone_width(
        SyntheticLattice.from_params(params, epsilon=exp.epsilon)
    )
    return network, params, initial, D


def _trajectory_rows(result: EvolutionResult) -> List[tuple]:
    rows = []
    for col, realization in enumerate(result.realizations):
        for i, n_c in enumerate(result.n_c):
            rows.append(
                (
                    realization,
                    int(n_c),
                    float(result.p_minus[i, col]),
                    float(result.p_plus[i, col]),
                    float(result.p_zone[i, col]),
                )
            )
    return rows


SPECTRUM_COLUMNS = ("lambda", "kind", "label", "energy")
LATTICE_COLUMNS = (
    "m",
    "n",
    "lambda",
    "energy",
    "time",
    "gamma",
    "gap",
    "neg_log_p",
    "P",
)
SEPARATRIX_COLUMNS = ("lambda", "E_s", "V_b")
TRAJECTORY_COLUMNS = ("realization", "n_c", "p_minus", "p_plus", "p_zone")
DISTRIBUTION_COLUMNS = ("initial_index", "final_index", "probability")
SHEET_COLUMNS = ("lambda", "level_index", "energy")

# =============================================================================


def _levels_at(pot, lam: float, config) -> List[tuple]:
    window = _energy_window(pot, lam, config)
    try:
        barrier_top(pot, lam)
        sides = tuple(Branch)
    except NoBarrier:
        sides = (Branch.A,)
    rows = []
    for side in sides:
        for level in branch_levels(pot, lam, side, window):
            rows.append((lam, side.value, level.quantum, level.E))
    if len(sides) == 2:
        for i, E in enumerate(modified_levels(pot, lam, window)):
            rows.append((lam, "modified", i, E))
    return rows


def _run_spectrum(pot, config, out: _Outputs) -> dict:
    rows = []
    for lam in _lam_grid(config):
        try:
            rows.extend(_levels_at(pot, float(lam), config))
        except EmptyWindow as exc:
            logger.info("no levels at lambda=%g: %s", lam, exc)
    out.csv("spectrum.csv", SPECTRUM_COLUMNS, rows)
    return {"levels": len(rows)}


def _run_lattice(pot, config, out: _Outputs) -> dict:
    lams = _lam_grid(config)
    nodes = crossing_lattice(
        pot, config.sweep.window, _common_window(pot, lams, config)
    )
    out.csv(
        "lattice.csv",
        LATTICE_COLUMNS,
        [
            (
                node.m,
                node.n,
                node.lam,
                node.E,
                node.time,
                node.gamma,
                node.gap,
                node.neg_log_p,
                node.P,
            )
            for node in nodes
        ],
    )
    if not nodes:
        return {"nodes": 0}
    origin = nearest_to_separatrix(nodes)
    params = local_params(pot, origin)
    exp = config.experiment
    D = zone_width(
        SyntheticLattice.from_params(params, epsilon=exp.epsilon)
    )
    zones = ZoneMap(
        zones={node.index: zone_of(node.P, exp.epsilon) for node in nodes},
        D=D,
        epsilon=exp.epsilon,
    )
    report = {
        "nodes": len(nodes),
        "zones": zones.summary(),
        "origin": [origin.m, origin.n],
        "params": params.to_dict(),
        "D": D,
    }
    try:
        report["prediction"] = prediction_report(params, exp.M, D, exp.tol)
    except QknhError as exc:
        report["prediction"] = {
            "error": type(exc).__name__,
            "message": str(exc),
        }
    out.json("lattice_params.json", report)
    return {"nodes": len(nodes), "D": D}


def _run_separatrix(pot, config, out: _Outputs) -> dict:
    rows = separatrix_curve(pot, _lam_grid(config))
    out.csv("separatrix.csv", SEPARATRIX_COLUMNS, rows)
    missing = sum(math.isnan(row[1]) for row in rows)
    return {"points": len(rows), "missing": missing}


def _run_evolve(pot, config, out: _Outputs) -> dict:
    exp = config.experiment
    network, params, initial, D = _evolution_source(pot, config)
    result = evolve_incoherent(network, initial, exp.n_c_max)
    out.csv("trajectory.csv", TRAJECTORY_COLUMNS, _trajectory_rows(result))
    out.csv(
        "distribution.csv",
        DISTRIBUTION_COLUMNS,
        final_distribution_rows(result),
    )
    p_minus = float(result.final_p_minus()[0])
    report = prediction_report(params, exp.M, D, exp.tol, measured=p_minus)
    report["initial"] = list(initial)
    report["D"] = D
    report["p_plus"] = float(result.final_p_plus()[0])
    out.json("prediction.json", report)
    return {"p_minus": p_minus, "D": D}


def _run_sweep(pot, config, out: _Outputs) -> dict:
    exp = config.experiment
    network, params, initial, D = _evolution_source(pot, config)
    stats = sweep_realizations(network, initial, exp.R, exp.seed, exp.n_c_max)
    rows = []
    for batch in stats.coherent:
        rows.extend(_trajectory_rows(batch))
    out.csv("realizations.csv", TRAJECTORY_COLUMNS, rows)
    ratio = params.X / params.Y
    bound = (D + 1) / exp.M
    report = stats.to_dict()
    report.update(
        {
            "D": D,
            "ratio": ratio,
            "weak_halfwidth": bound,
            "all_within_weak": bool(
                np.all(np.abs(stats.finals - ratio) <= bound + 1e-6)
            ),
            "agree_within_3_stderr": bool(
                abs(stats.mean - stats.incoherent_p_minus)
                <= 3 * stats.stderr
            ),
            "initial": list(initial),
        }
    )
    out.json("statistics.json", report)
    return {"mean_p_minus": stats.mean, "std_p_minus": stats.std}


def _oracle_grid(pot, lams, config) -> GridSpec:
    grids = []
    for lam in lams:
        lo, hi = _energy_window(pot, float(lam), config)
        top = hi + GRID_HEADROOM * (hi - lo)
        grids.append(
            default_grid(pot, float(lam), top, config.experiment.grid_points)
        )
    return GridSpec(
        min(g.x_min for g in grids),
        max(g.x_max for g in grids),
        config.experiment.grid_points,
    )


def _run_oracle(pot, config, out: _Outputs) -> dict:
    exp = config.experiment
    lams = _lam_grid(config)
    grid = _oracle_grid(pot, lams, config)
    sheet = spectrum_sheet(pot, lams, grid, exp.levels)
    out.csv("sheet.csv", SHEET_COLUMNS, sheet.rows())
    report = {"grid": {"x_min": grid.x_min, "x_max": grid.x_max}}
    lam0 = float(lams[len(lams) // 2])
    window = _energy_window(pot, lam0, config)
    try:
        barrier_top(pot, lam0)
        approx = modified_levels(pot, lam0, window)
    except NoBarrier:
        approx = [level.E for level in branch_levels(pot, lam0, "A", window)]
    exact = sheet.energies[len(lams) // 2]
    report["level_errors"] = {
        "lambda": lam0,
        "errors": level_errors(
            [E for E in approx if E < exact[-1]], exact
        ).tolist(),
    }
    gaps = []
    if pot.family is Family.QUARTIC_DOUBLE_WELL:
        nodes = crossing_lattice(
            pot, config.sweep.window, _common_window(pot, lams, config)
        )
        nodes = sorted(nodes, key=lambda node: -node.neg_log_p)
        for node in nodes[: exp.gap_nodes]:
            result = gap_scan(
                pot, node, grid, scan_halfwidth(node), GAP_SCAN_STEPS
            )
            gaps.append({"node": [node.m, node.n], **result.to_dict()})
    report["gaps"] = gaps
    out.json("gaps.json", report)
    return {"levels": int(sheet.energies.shape[1]), "gaps": len(gaps)}


_EXPERIMENTS: Dict[str, Callable] = {
    "spectrum": _run_spectrum,
    "lattice": _run_lattice,
    "separatrix": _run_separatrix,
    "evolve": _run_evolve,
    "sweep": _run_sweep,
    "oracle": _run_oracle,
}

# =============================================================================


def _physics_errors(config: RunConfig) -> List[str]:
    errors = []
    pot, sweep, exp = config.potential, config.sweep, config.experiment
    checks = [
        ("potential.mass", pot.mass > 0, "must be positive"),
        ("potential.hbar", pot.hbar > 0, "must be positive"),
        ("sweep.rate", sweep.rate > 0, "must be positive"),
        ("sweep.window", sweep.window[0] < sweep.window[1], "must increase"),
        ("experiment.M", exp.M >= 1, "must be at least 1"),
        ("experiment.n_c_max", exp.n_c_max >= 1, "must be at least 1"),
        ("experiment.epsilon", 0 < exp.epsilon < 0.5, "must be in (0, 1/2)"),
        ("experiment.tol", exp.tol > 0, "must be positive"),
        ("experiment.lam_points", exp.lam_points >= 2, "must be at least 2"),
        ("experiment.levels", exp.levels >= 1, "must be at least 1"),
        (
            "experiment.grid_points",
            exp.grid_points >= 200,
            "must be at least 200",
        ),
    ]
    if pot.family == Family.HARMONIC.value:
        checks.append(
            ("potential.stiffness", pot.stiffness > 0, "must be positive")
        )
    else:
        checks.append(("potential.alpha", pot.alpha > 0, "must be positive"))
    if exp.mode == "sweep":
        checks.append(("experiment.R", exp.R >= 2, "must be at least 2"))
    if exp.source == "synthetic" and exp.mode in ("evolve", "sweep"):
        checks.append(("experiment.Z", exp.Z > 0, "must be positive"))
        checks.append(
            ("experiment.slope_ratio", exp.slope_ratio > 0, "must be positive")
        )
    if exp.E_window is not None:
        checks.append(
            (
                "experiment.E_window",
                exp.E_window[0] < exp.E_window[1],
                "must increase",
            )
        )
    for key, ok, message in checks:
        if not ok:
            value = _lookup(config, key)
            errors.append(f"`{key}` {message} (got {value!r})")
    return errors


def _lookup(config: RunConfig, key: str):
    block, name = key.split(".")
    return getattr(getattr(config, block), name)


def _notes(config: RunConfig) -> List[str]:
    exp = config.experiment
    if exp.source == "synthetic" and exp.mode in ("evolve", "sweep"):
        return []
    if config.potential.hbar != DEFAULT_HBAR:
        return []
    return [
        f"potential.hbar={DEFAULT_HBAR} is the default, not 1; set "
        "potential.hbar=1 for unscaled natural units"
    ]


def _physics_warnings(config: RunConfig) -> List[str]:
    warnings = []
    exp = config.experiment
    if exp.source == "synthetic" and exp.mode in ("evolve", "sweep"):
        if not 0 < exp.X < exp.Y:
            warnings.append(
                f"X={exp.X}, Y={exp.Y}: the strong prediction needs "
                "0 < X < Y"
            )
        return warnings
    if config.potential.family != Family.QUARTIC_DOUBLE_WELL.value:
        return warnings
    pot = config.potential.build(config.sweep.build())
    for lam in _lam_grid(config):
        lam = float(lam)
        try:
            v_b = barrier_top(pot, lam).height
        except NoBarrier:
            warnings.append(
                f"the lambda window leaves the double-well regime at "
                f"lambda={lam:g}"
            )
            break
        if exp.E_window is not None and exp.E_window[1] > v_b:
            warnings.append(
                f"the energy window reaches above the barrier "
                f"V_b={v_b:g} at lambda={lam:g}"
            )
            break
    return warnings


def validate(config: RunConfig) -> ValidationReport:
    """Checks a configuration for physical sanity without running it.

    Errors are settings no experiment can use; warnings flag settings
    that will likely fail, such as a lambda window that leaves the
    double-well regime.
    """
    report = ValidationReport(errors=_physics_errors(config))
    if report.ok:
        try:
            report.warnings.extend(_physics_warnings(config))
        except (QknhError, ValueError) as exc:
            report.errors.append(str(exc))
    report.notes.extend(_notes(config))
    return report


# =============================================================================


def _manifest(
    config: RunConfig, outputs: Sequence[Path], summary: dict
) -> dict:
    return {
        "qknh_version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "mode": config.experiment.mode,
        "seed": config.experiment.seed,
        "config": config.to_dict(),
        "outputs": [path.name for path in outputs],
        "units": {"base": BASE_UNITS, "columns": COLUMN_UNITS},
        "summary": summary,
    }


def run(config: RunConfig) -> RunResult:
    """Runs the configured experiment and writes its outputs.

    Raises:
        ConfigError: If validation finds errors.
        ExperimentError: If the experiment fails; `module` names where.
    """
    mode = config.experiment.mode
    report = validate(config)
    for warning in report.warnings:
        logger.warning("%s", warning)
    for note in report.notes:
        logger.info("%s", note)
    if not report.ok:
        raise ConfigError("; ".join(report.errors))

    out = _Outputs(config)
    logger.info("starting %s experiment in %s", mode, config.output.path)
    if mode == "validate":
        summary = report.to_dict()
        out.json("validation.json", summary, force=True)
    else:
        pot = None
        if mode not in ("evolve", "sweep") or (
            config.experiment.source == "physical"
        ):
            pot = config.potential.build(config.sweep.build())
            logger.info(
                "%s potential with hbar=%g", pot.family.title(), pot.hbar
            )
        try:
            summary = _EXPERIMENTS[mode](pot, config, out)
        except ExperimentError:
            raise
        except (QknhError, ValueError) as exc:
            raise ExperimentError(
                f"{type(exc).__name__}: {exc}",
                getattr(exc, "module", "runner"),
            ) from exc
        summary["warnings"] = report.warnings
        summary["notes"] = report.notes
    manifest_path = config.output.path / "manifest.json"
    write_json(manifest_path, _manifest(config, out.paths, summary))
    outputs = out.paths + (manifest_path,)
    logger.info(
        "finished %s experiment: %s",
        mode,
        ", ".join(str(path) for path in outputs),
    )
    return RunResult(status=0, outputs=outputs, report=summary)
