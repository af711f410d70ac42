"""
Run configuration: a versioned JSON document of four blocks.
"""

# =============================================================================

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple, Union

from qknh.errors import ConfigError
from qknh.potential import HarmonicWell, Potential, QuarticDoubleWell, Sweep
from qknh.utils import Family

# =============================================================================

__all__ = (
    "SCHEMA_VERSION",
    "MODES",
    "SOURCES",
    "DEFAULT_HBAR",
    "PotentialConfig",
    "SweepConfig",
    "ExperimentConfig",
    "OutputConfig",
    "RunConfig",
    "parse_override",
)

# =============================================================================

SCHEMA_VERSION = 1
MODES = (
    "spectrum",
    "lattice",
    "separatrix",
    "evolve",
    "sweep",
    "oracle",
    "validate",
)
SOURCES = ("synthetic", "physical")
FORMATS = ("csv", "json")
SEED_LIMIT = 1 << 64
# scaled down from the natural-units value of 1
DEFAULT_HBAR = 0.05

# =============================================================================


def _as_float(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"`{key}` must be a number (got {value!r})")
    return float(value)


def _as_int(key: str, value) -> int:
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"`{key}` must be an integer (got {value!r})")
    return value


def _as_str(key: str, value) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"`{key}` must be a string (got {value!r})")
    return value


def _as_list(key: str, value) -> list:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"`{key}` must be a list (got {value!r})")
    return list(value)


def _as_floats(key: str, value) -> Tuple[float, ...]:
    values = _as_list(key, value)
    return tuple(_as_float(f"{key}[{i}]", v) for i, v in enumerate(values))


def _as_pair(key: str, value) -> Tuple[float, float]:
    values = _as_floats(key, value)
    if len(values) != 2:
        raise ConfigError(f"`{key}` must hold two numbers (got {value!r})")
    return values


def _as_optional_pair(key: str, value) -> Optional[Tuple[float, float]]:
    if value is None:
        return None
    return _as_pair(key, value)


def _as_strs(key: str, value) -> Tuple[str, ...]:
    values = _as_list(key, value)
    return tuple(_as_str(f"{key}[{i}]", v) for i, v in enumerate(values))


_COERCE = {
    float: _as_float,
    int: _as_int,
    str: _as_str,
    Tuple[float, ...]: _as_floats,
    Tuple[float, float]: _as_pair,
    Optional[Tuple[float, float]]: _as_optional_pair,
    Tuple[str, ...]: _as_strs,
}


def _block_from_dict(cls, data, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"`{prefix}` must be an object (got {data!r})")
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key `{prefix}.{key}`")
    kwargs = {}
    for name, value in data.items():
        kwargs[name] = _COERCE[known[name].type](f"{prefix}.{name}", value)
    return cls(**kwargs)


def _block_to_dict(block) -> Dict[str, Any]:
    out = {}
    for f in dataclasses.fields(block):
        value = getattr(block, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def _check_choice(key: str, value: str, choices: Iterable[str]):
    choices = tuple(choices)
    if value not in choices:
        raise ConfigError(
            f"`{key}` must be one of {', '.join(choices)} (got {value!r})"
        )


# =============================================================================


@dataclass(frozen=True)
class PotentialConfig:
    """The potential family and its coefficients.

    `beta` and `gamma` are polynomial coefficients in lambda, lowest
    power first. `stiffness` is used by the harmonic family only.
    """

    family: str = Family.QUARTIC_DOUBLE_WELL.value
    alpha: float = 1.0
    beta: Tuple[float, ...] = (2.0,)
    gamma: Tuple[float, ...] = (0.0, -0.25)
    stiffness: float = 1.0
    mass: float = 1.0
    hbar: float = DEFAULT_HBAR

    def __post_init__(self):
        _check_choice(
            "potential.family",
            self.family,
            (Family.QUARTIC_DOUBLE_WELL.value, Family.HARMONIC.value),
        )

    def build(self, sweep: Sweep) -> Potential:
        """Returns the configured potential."""
        common = {"mass": self.mass, "hbar": self.hbar, "sweep": sweep}
        if self.family == Family.HARMONIC.value:
            return HarmonicWell(self.stiffness, **common)
        return QuarticDoubleWell(self.alpha, self.beta, self.gamma, **common)


@dataclass(frozen=True)
class SweepConfig:
    """The affine sweep lambda(t) = lam0 + rate t and the lambda window."""

    lam0: float = -1.0
    rate: float = 1e-3
    window: Tuple[float, float] = (-1.0, 1.0)

    def build(self) -> Sweep:
        """Returns the configured sweep."""
        return Sweep(self.lam0, self.rate)


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run and with which numbers.

    X, Y, Z and `slope_ratio` describe the synthetic lattice. The energy
    window defaults to the band below the barrier. `lam_points` is the
    number of lambda samples of the curve and sheet experiments.
    """

    mode: str = "evolve"
    source: str = "synthetic"
    M: int = 10
    R: int = 100
    n_c_max: int = 80
    epsilon: float = 1e-3
    seed: int = 0
    X: float = 0.5
    Y: float = 1.25
    Z: float = 1.0
    slope_ratio: float = 1.0
    tol: float = 1e-3
    E_window: Optional[Tuple[float, float]] = None
    lam_points: int = 21
    levels: int = 20
    grid_points: int = 4000
    gap_nodes: int = 3

    def __post_init__(self):
        _check_choice("experiment.mode", self.mode, MODES)
        _check_choice("experiment.source", self.source, SOURCES)
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError(
                f"`experiment.seed` must fit in 64 bits (got {self.seed})"
            )


@dataclass(frozen=True)
class OutputConfig:
    """Where and in which formats results are written."""

    directory: str = "qknh-out"
    formats: Tuple[str, ...] = FORMATS

    def __post_init__(self):
        for fmt in self.formats:
            _check_choice("output.formats", fmt, FORMATS)

    @property
    def path(self) -> Path:
        """The output directory."""
        return Path(self.directory)


@dataclass(frozen=True)
class RunConfig:
    """A complete run configuration.

    Methods:
        from_dict(data) -> RunConfig
            Validates a parsed JSON document.
        from_json(path) -> RunConfig
            Loads and validates a JSON file.
        to_dict() -> dict
            Returns the fully resolved document.
        with_overrides(overrides) -> RunConfig
            Returns a copy with dotted keys replaced.
    """

    potential: PotentialConfig = field(default_factory=PotentialConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    schema_version: int = SCHEMA_VERSION

    _BLOCKS = {
        "potential": PotentialConfig,
        "sweep": SweepConfig,
        "experiment": ExperimentConfig,
        "output": OutputConfig,
    }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Validates a parsed document; missing keys take defaults.

        Raises:
            ConfigError: On a wrong schema version, an unknown key, or a
                value of the wrong type.
        """
        if not isinstance(data, dict):
            raise ConfigError("the configuration must be a JSON object")
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(
                f"`schema_version` must be {SCHEMA_VERSION} (got {version!r})"
            )
        blocks = {}
        for key, value in data.items():
            if key == "schema_version":
                continue
            if key not in cls._BLOCKS:
                raise ConfigError(f"unknown key `{key}`")
            blocks[key] = _block_from_dict(cls._BLOCKS[key], value, key)
        return cls(**blocks)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "RunConfig":
        """Loads a configuration file.

        Raises:
            ConfigError: If the file cannot be read or parsed.
        """
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        out = {"schema_version": self.schema_version}
        for key in self._BLOCKS:
            out[key] = _block_to_dict(getattr(self, key))
        return out

    def with_overrides(self, overrides: Dict[str, Any]) -> "RunConfig":
        """Returns a copy with values replaced by dotted key, such as
        `experiment.M`.

        Raises:
            ConfigError: If a key names no setting.
        """
        data = self.to_dict()
        for key, value in overrides.items():
            parts = key.split(".")
            if len(parts) != 2 or parts[0] not in self._BLOCKS:
                raise ConfigError(f"unknown key `{key}`")
            block, name = parts
            if name not in data[block]:
                raise ConfigError(f"unknown key `{key}`")
            data[block][name] = value
        return RunConfig.from_dict(data)


def parse_override(text: str) -> Tuple[str, Any]:
    """Parses `key=value`; the value is JSON, or else a plain string.

    Raises:
        ConfigError: If there is no `=`.
    """
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"overrides look like key=value (got {text!r})")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"`{key}` must be finite (got {raw!r})")
    return key, value
