"""
Crossing phases a, b, c from a counter-based generator.

Every phase is a hash of (seed, realization, m, n, phase index), so a
realization can be replayed, or evaluated in any order or thread,
without carrying generator state.
"""

# =============================================================================

import math
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from qknh.labels import NodeIndex
from qknh.utils import PhaseMode

# =============================================================================

__all__ = ("PhaseSource", "uniform_hash")

# =============================================================================

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_SEED_MASK = (1 << 64) - 1

# =============================================================================


def _as_u64(values) -> np.ndarray:
    # negative labels wrap around modulo 2**64
    return np.asarray(values, dtype=np.int64).astype(np.uint64)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX_1
    z = (z ^ (z >> np.uint64(27))) * _MIX_2
    return z ^ (z >> np.uint64(31))


def uniform_hash(seed: int, *counters) -> np.ndarray:
    """Returns uniform floats in [0, 1) keyed by the seed and counters.

    The counters broadcast against each other.
    """
    with np.errstate(over="ignore"):
        z = np.full((), np.uint64(int(seed) & _SEED_MASK), dtype=np.uint64)
        for counter in counters:
            z = _mix((z + _GOLDEN) ^ _as_u64(counter))
        z = _mix(z + _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * (2.0**-53)


class PhaseSource:
    """Supplies the phases (a, b, c) of each crossing unitary.

    Properties:
        seed (int): The 64-bit seed.
        mode (PhaseMode): random, zero, or fixed-list.

    Methods:
        phases(realization, m, n) -> Tuple[np.ndarray, ...]
            Returns the arrays a, b, c for the crossings (m, n).
    """

    def __init__(
        self,
        seed: int = 0,
        mode=PhaseMode.RANDOM,
        fixed: Optional[Mapping] = None,
        default: Sequence[float] = (0.0, 0.0, 0.0),
    ):
        """
        Args:
            seed (int): The seed, reduced modulo 2**64.
            mode: A PhaseMode or its value.
            fixed (Optional[Mapping]): For fixed-list mode, the phases
                (a, b, c) of individual nodes, keyed by anything
                `NodeIndex.of()` accepts.
            default (Sequence[float]): For fixed-list mode, the phases
                of nodes missing from `fixed`.
        """
        self._seed = int(seed) & _SEED_MASK
        self._mode = PhaseMode(mode)
        self._fixed = {}
        if fixed:
            for key, triple in fixed.items():
                self._fixed[NodeIndex.of(key)] = _check_triple(triple)
        self._default = _check_triple(default)

    def __repr__(self):
        return f"PhaseSource(seed={self._seed}, mode={self._mode.value!r})"

    @property
    def seed(self) -> int:
        """The 64-bit seed."""
        return self._seed

    @property
    def mode(self) -> PhaseMode:
        """How phases are chosen."""
        return self._mode

    def phases(
        self, realization: int, m, n
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns the phases a, b, c for the crossings (m, n).

        Random phases are uniform on [0, 2 pi), independent across nodes
        and phase indices.
        """
        m = np.asarray(m, dtype=np.int64)
        n = np.asarray(n, dtype=np.int64)
        shape = np.broadcast(m, n).shape
        if self._mode is PhaseMode.ZERO:
            zero = np.zeros(shape)
            return zero, zero, zero
        if self._mode is PhaseMode.FIXED_LIST:
            table = np.array(
                [
                    self._fixed.get(NodeIndex(mi, ni), self._default)
                    for mi, ni in zip(
                        np.broadcast_to(m, shape).ravel(),
                        np.broadcast_to(n, shape).ravel(),
                    )
                ],
                dtype=float,
            ).reshape(shape + (3,))
            return table[..., 0], table[..., 1], table[..., 2]
        return tuple(
            2 * math.pi * uniform_hash(self._seed, realization, m, n, k)
            for k in range(3)
        )


def _check_triple(triple) -> Tuple[float, float, float]:
    values = tuple(float(v) for v in triple)
    if len(values) != 3:
        raise ValueError(f"phases must be a triple (got {triple!r})")
    for value in values:
        if not math.isfinite(value):
            raise ValueError(f"phases must be finite (got {triple!r})")
    return values
