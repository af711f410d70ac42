"""
Shared fixtures: the standard potentials and the reference synthetic
lattice.
"""

# =============================================================================

import pytest

from qknh.lznet import SyntheticLattice
from qknh.potential import HarmonicWell, QuarticDoubleWell, Sweep
from qknh.spectrum import LatticeParams

# =============================================================================

# the reference lattice: X/Y = 2/5
REF_X, REF_Y, REF_Z = 0.5, 1.25, 1.0

# =============================================================================


@pytest.fixture
def symmetric_well():
    """V = x**4 - 2 x**2, independent of lambda."""
    return QuarticDoubleWell(1.0, (2.0,), (0.0,), hbar=0.05)


@pytest.fixture
def tilted_well():
    """V = x**4 - 2 x**2 - (lambda / 4) x, swept slowly upward."""
    return QuarticDoubleWell(
        1.0, (2.0,), (0.0, -0.25), hbar=0.05, sweep=Sweep(-1.0, 1e-3)
    )


@pytest.fixture
def breathing_well():
    """V = x**4 - (2 + lambda) x**2: both lobes grow with lambda."""
    return QuarticDoubleWell(1.0, (2.0, 1.0), (0.0,), hbar=0.05)


@pytest.fixture
def harmonic():
    return HarmonicWell(1.0, hbar=1.0)


@pytest.fixture
def ref_lattice():
    return SyntheticLattice(REF_X, REF_Y, REF_Z)


@pytest.fixture
def ref_params():
    return LatticeParams.from_xyz(REF_X, REF_Y, REF_Z)
