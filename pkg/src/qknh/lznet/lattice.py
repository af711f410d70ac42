"""
The synthetic probability lattice P_mn = exp(-Z exp(m X + n Y)).
"""

# =============================================================================

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from qknh.labels import NodeIndex
from qknh.spectrum import LatticeParams
from qknh.utils import Zone, check_positive, check_probability

# =============================================================================

__all__ = (
    "DEFAULT_EPSILON",
    "SyntheticLattice",
    "ZoneMap",
    "p_lattice",
    "zone_bounds",
    "zone_width",
    "zone_of",
    "classify_levels",
    "ensemble_below_zone",
)

# =============================================================================

DEFAULT_EPSILON = 1e-3

# =============================================================================


def _int_window(name: str, window) -> Tuple[int, int]:
    lo, hi = (int(v) for v in window)
    if lo > hi:
        raise ValueError(f"`{name}` must satisfy lo <= hi (got {lo}, {hi})")
    return lo, hi


class SyntheticLattice:
    """A lattice of crossings with P_mn = exp(-Z exp(m X + n Y)).

    The crossing (m, n) happens at lattice time tau = r n - m, where r
    is the slope ratio dE S~_A / dE S~_C. Index windows are inclusive.

    Properties:
        X (float): Growth of -ln P per step in m.
        Y (float): Growth of -ln P per step in n.
        Z (float): -ln P at the origin.
        slope_ratio (float): The slope ratio r.
        m_window (Tuple[int, int]): The A labels.
        n_window (Tuple[int, int]): The C labels.
        epsilon (float): The zone threshold.
        start (float): The lattice time at which evolution starts.

    Methods:
        neg_log_p(m, n) -> array
            Returns -ln P_mn.
        p(m, n) -> array
            Returns P_mn.
        time(m, n) -> array
            Returns the lattice time of the crossing (m, n).
        with_windows(m_window, n_window) -> SyntheticLattice
            Returns a copy with other index windows.
        sized_for(initial, n_c_max) -> SyntheticLattice
            Returns a copy with windows that hold every line reachable
            from `initial` within `n_c_max` columns.
    """

    def __init__(
        self,
        X: float,
        Y: float,
        Z: float = 1.0,
        slope_ratio: float = 1.0,
        m_window=(-20, 5),
        n_window=(-20, 60),
        epsilon: float = DEFAULT_EPSILON,
        start: float = 0.0,
    ):
        for name, value in (("X", X), ("Y", Y), ("start", start)):
            if not math.isfinite(value):
                raise ValueError(f"`{name}` must be finite (got {value})")
        check_positive(Z=Z, slope_ratio=slope_ratio)
        if not 0 < epsilon < 0.5:
            raise ValueError(
                f"`epsilon` must be within (0, 1/2) (got {epsilon})"
            )
        self._X = float(X)
        self._Y = float(Y)
        self._Z = float(Z)
        self._r = float(slope_ratio)
        self._m_window = _int_window("m_window", m_window)
        self._n_window = _int_window("n_window", n_window)
        self._epsilon = float(epsilon)
        self._start = float(start)

    @classmethod
    def from_params(
        cls, params: LatticeParams, **kwargs
    ) -> "SyntheticLattice":
        """Returns the lattice described by local lattice parameters."""
        return cls(
            params.X, params.Y, params.Z, params.slope_ratio, **kwargs
        )

    def __repr__(self):
        return (
            f"SyntheticLattice(X={self._X}, Y={self._Y}, Z={self._Z}, "
            f"slope_ratio={self._r}, m_window={self._m_window}, "
            f"n_window={self._n_window}, epsilon={self._epsilon}, "
            f"start={self._start})"
        )

    @property
    def X(self) -> float:
        """Growth of -ln P per step in m."""
        return self._X

    @property
    def Y(self) -> float:
        """Growth of -ln P per step in n."""
        return self._Y

    @property
    def Z(self) -> float:
        """-ln P at the origin."""
        return self._Z

    @property
    def slope_ratio(self) -> float:
        """The slope ratio r."""
        return self._r

    @property
    def m_window(self) -> Tuple[int, int]:
        """The A labels."""
        return self._m_window

    @property
    def n_window(self) -> Tuple[int, int]:
        """The C labels."""
        return self._n_window

    @property
    def epsilon(self) -> float:
        """The zone threshold."""
        return self._epsilon

    @property
    def start(self) -> float:
        """The lattice time at which evolution starts."""
        return self._start

    def m_range(self) -> np.ndarray:
        """Returns the A labels as an array."""
        return np.arange(self._m_window[0], self._m_window[1] + 1)

    def n_range(self) -> np.ndarray:
        """Returns the C labels as an array."""
        return np.arange(self._n_window[0], self._n_window[1] + 1)

    def neg_log_p(self, m, n):
        m = np.asarray(m, dtype=float)
        n = np.asarray(n, dtype=float)
        return self._Z * np.exp(m * self._X + n * self._Y)

    def p(self, m, n):
        return np.exp(-self.neg_log_p(m, n))

    def time(self, m, n):
        return self._r * np.asarray(n, dtype=float) - np.asarray(
            m, dtype=float
        )

    def first_crossing(self, m: int) -> int:
        """Returns the C label of the first crossing of line A_m at or
        after the start time.
        """
        n = math.ceil((self._start + m) / self._r - 1e-12)
        return n

    def with_windows(self, m_window, n_window) -> "SyntheticLattice":
        return SyntheticLattice(
            self._X,
            self._Y,
            self._Z,
            self._r,
            m_window,
            n_window,
            self._epsilon,
            self._start,
        )

    def sized_for(
        self, initial: Sequence[int], n_c_max: int
    ) -> "SyntheticLattice":
        # a line moves at most one label per column
        m_lo, m_hi = min(initial), max(initial)
        span = n_c_max * min(1.0, self._r)
        m_window = (m_lo - n_c_max - 2, m_hi + 2)
        n_window = (
            math.floor((self._start + m_window[0]) / self._r) - 2,
            math.ceil((self._start + span + m_hi) / self._r) + 2,
        )
        return self.with_windows(m_window, n_window)


# =============================================================================


def p_lattice(lat: SyntheticLattice, m, n) -> float:
    """Returns P_mn = exp(-Z exp(m X + n Y)), evaluated in log space."""
    return float(lat.p(m, n))


def zone_bounds(lat: SyntheticLattice, epsilon: Optional[float] = None):
    """Returns the (lo, hi) range of m X + n Y inside the zone,
    where epsilon < P < 1 - epsilon.
    """
    if epsilon is None:
        epsilon = lat.epsilon
    if not 0 < epsilon < 0.5:
        raise ValueError(f"`epsilon` must be within (0, 1/2) (got {epsilon})")
    lo = math.log(-math.log1p(-epsilon) / lat.Z)
    hi = math.log(-math.log(epsilon) / lat.Z)
    return lo, hi


def zone_width(
    lat: SyntheticLattice, epsilon: Optional[float] = None
) -> float:
    """Returns D, the number of levels a line of constant lambda passes
    inside the zone.

    Along such a line m advances r levels for every level in n, so D is
    the zone width in m X + n Y scaled by (r + 1) / (r X + Y).
    """
    lo, hi = zone_bounds(lat, epsilon)
    r = lat.slope_ratio
    speed = r * lat.X + lat.Y
    if speed == 0:
        return math.inf
    return abs((hi - lo) * (r + 1) / speed)


@dataclass(frozen=True)
class ZoneMap:
    """Zone labels of every crossing in the lattice windows."""

    zones: Dict[NodeIndex, Zone]
    D: float
    epsilon: float

    def count(self, zone: Zone) -> int:
        """Returns the number of crossings with the given label."""
        return sum(1 for z in self.zones.values() if z is zone)

    def summary(self) -> Dict[str, int]:
        """Returns the crossing count of each zone, keyed by
        `Zone.human_readable()`.
        """
        return {zone.human_readable(): self.count(zone) for zone in Zone}


def zone_of(p: float, epsilon: float) -> Zone:
    """Returns the zone of a crossing with diabatic probability `p`."""
    if p > 1 - epsilon:
        return Zone.BELOW
    if p < epsilon:
        return Zone.ABOVE
    return Zone.ZONE


def classify_levels(
    lat: SyntheticLattice, epsilon: Optional[float] = None
) -> ZoneMap:
    """Labels each crossing diabatic (below), adiabatic (above), or zone
    and returns the zone width D.
    """
    if epsilon is None:
        epsilon = lat.epsilon
    check_probability(epsilon=epsilon)
    m, n = np.meshgrid(lat.m_range(), lat.n_range(), indexing="ij")
    probs = lat.p(m, n)
    zones = {
        NodeIndex(mi, ni): zone_of(pi, epsilon)
        for mi, ni, pi in zip(m.ravel(), n.ravel(), probs.ravel())
    }
    return ZoneMap(zones=zones, D=zone_width(lat, epsilon), epsilon=epsilon)


def ensemble_below_zone(
    lat: SyntheticLattice, M: int, epsilon: Optional[float] = None
) -> Tuple[int, ...]:
    """Returns the M consecutive A lines just below the zone.

    The top line is the highest A line whose first crossing after the
    start time is still diabatic, P >= 1 - epsilon.
    """
    if M < 1:
        raise ValueError(f"`M` must be at least 1 (got {M})")
    if epsilon is None:
        epsilon = lat.epsilon
    drift = lat.X + lat.Y / lat.slope_ratio
    if not drift > 0:
        raise ValueError(
            "A lines must rise toward the zone (X + Y / slope_ratio > 0)"
        )
    lo, _ = zone_bounds(lat, epsilon)
    estimate = (lo - lat.start * lat.Y / lat.slope_ratio) / drift
    m = math.ceil(estimate) + 5
    for _ in range(1000):
        if lat.p(m, lat.first_crossing(m)) >= 1 - epsilon:
            break
        m -= 1
    else:
        raise ValueError("no A line lies below the zone")
    return tuple(range(m - M + 1, m + 1))
