"""
Landau-Zener network submodule.
"""

# =============================================================================

from qknh.lznet.lattice import (
    DEFAULT_EPSILON,
    SyntheticLattice,
    ZoneMap,
    classify_levels,
    ensemble_below_zone,
    p_lattice,
    zone_bounds,
    zone_of,
    zone_width,
)
from qknh.lznet.network import (
    Column,
    EvolutionResult,
    Network,
    NetworkState,
    RealizationStats,
    crossing_unitary,
    evolve_incoherent,
    evolve_unitary,
    final_distribution_rows,
    schedule,
    sweep_realizations,
)
from qknh.lznet.phases import PhaseSource, uniform_hash

# =============================================================================

__all__ = (
    "DEFAULT_EPSILON",
    "SyntheticLattice",
    "ZoneMap",
    "PhaseSource",
    "Column",
    "Network",
    "NetworkState",
    "EvolutionResult",
    "RealizationStats",
    "p_lattice",
    "zone_bounds",
    "zone_width",
    "zone_of",
    "classify_levels",
    "ensemble_below_zone",
    "uniform_hash",
    "crossing_unitary",
    "schedule",
    "evolve_unitary",
    "evolve_incoherent",
    "sweep_realizations",
    "final_distribution_rows",
)
