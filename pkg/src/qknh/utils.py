"""
Utility enums and argument checks.
"""

# =============================================================================

import enum as _enum
import math
import os

from qknh.errors import ConfigError, UnknownSymbol

# =============================================================================

__all__ = (
    "Family",
    "Branch",
    "Subspace",
    "ActionSymbol",
    "PhaseMode",
    "Zone",
    "check_positive",
    "check_finite",
    "check_probability",
    "check_window",
    "thread_count",
)

# =============================================================================


class _EnumWithTitle(_enum.Enum):
    """An enum class that adds a `title()` method."""

    def title(self) -> str:
        """Returns the enum name as a title string."""
        return self.name.replace("_", " ").title()


class Family(_EnumWithTitle):
    """The potential families."""

    QUARTIC_DOUBLE_WELL = "quartic-double-well"
    HARMONIC = "harmonic"
    SAMPLED = "sampled"


class Branch(_EnumWithTitle):
    """The two families of zeroth-order level lines."""

    A = "A"
    C = "C"


class Subspace(_EnumWithTitle):
    """The phase-space regions and their quantum subspaces.

    A and C are the two wells, B lies above the barrier.
    """

    A = "A"
    B = "B"
    C = "C"


class ActionSymbol(_enum.Enum):
    """The action functions that take part in brackets."""

    S_A = "S_A"
    S_C = "S_C"
    ST_A = "St_A"
    ST_C = "St_C"
    T_B = "T_b"

    @classmethod
    def parse(cls, symbol) -> "ActionSymbol":
        """Returns the ActionSymbol for the given name.

        Accepts the member itself, its value, or its name.

        Raises:
            UnknownSymbol: If `symbol` names no action.
        """
        if isinstance(symbol, cls):
            return symbol
        for member in cls:
            if symbol in (member.value, member.name):
                return member
        raise UnknownSymbol(f"unknown action symbol: {symbol!r}")


class PhaseMode(_EnumWithTitle):
    """How crossing phases are chosen."""

    RANDOM = "random"
    ZERO = "zero"
    FIXED_LIST = "fixed-list"


class Zone(_EnumWithTitle):
    """Where a crossing lies relative to the separatrix zone."""

    BELOW = _enum.auto()
    ZONE = _enum.auto()
    ABOVE = _enum.auto()

    def human_readable(self) -> str:
        """Returns the crossing character of this zone."""
        return {
            Zone.BELOW: "diabatic",
            Zone.ZONE: "zone",
            Zone.ABOVE: "adiabatic",
        }[self]


# =============================================================================


def check_finite(**values):
    """Checks that all the given keyword values are finite numbers.

    Raises `ValueError` if any of them is not.
    """
    for name, val in values.items():
        if not math.isfinite(val):
            raise ValueError(f"`{name}` must be finite (got {val})")


def check_positive(**values):
    """Checks that all the given keyword values are finite and > 0.

    Raises `ValueError` if any of them is not.
    """
    check_finite(**values)
    for name, val in values.items():
        if val <= 0:
            raise ValueError(f"`{name}` must be positive (got {val})")


def check_probability(**values):
    """Checks that all the given keyword values are within [0, 1].

    Raises `ValueError` if any of them is not.
    """
    for name, val in values.items():
        if not 0 <= val <= 1:
            raise ValueError(f"`{name}` must be within [0, 1] (got {val})")


def check_window(name: str, window) -> tuple[float, float]:
    """Checks that `window` is an increasing pair of finite numbers.

    Returns:
        Tuple[float, float]: The window as floats.

    Raises:
        ValueError: If the window is malformed.
    """
    try:
        lo, hi = (float(v) for v in window)
    except (TypeError, ValueError):
        raise ValueError(f"`{name}` must be a pair of numbers") from None
    check_finite(**{name: lo}, **{f"{name}_hi": hi})
    if not lo < hi:
        raise ValueError(f"`{name}` must be increasing (got {lo}, {hi})")
    return lo, hi


def thread_count() -> int:
    """Returns the worker thread limit from QKNH_THREADS.

    Defaults to the CPU count when the variable is unset.

    Raises:
        ConfigError: If the variable is not a positive integer.
    """
    raw = os.environ.get("QKNH_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(
            f"QKNH_THREADS must be a positive integer (got {raw!r})"
        ) from None
    if count < 1:
        raise ConfigError(
            f"QKNH_THREADS must be a positive integer (got {raw!r})"
        )
    return count
