"""
Tests for the finite-difference reference spectra and the exact gaps
at crossing nodes.
"""

# =============================================================================

import math

import numpy as np
import pytest

from qknh.errors import GridTooSmall, TrackingLoss
from qknh.oracle import (
    GridSpec,
    default_grid,
    exact_spectrum,
    gap_scan,
    level_errors,
    scan_halfwidth,
    spectrum_sheet,
)
from qknh.potential import HarmonicWell, SampledPotential
from qknh.spectrum import crossing_lattice, modified_levels

# =============================================================================


def test_harmonic_spectrum(harmonic):
    grid = GridSpec(-10.0, 10.0, 2000)
    energies = exact_spectrum(harmonic, 0.0, grid, 5)
    np.testing.assert_allclose(energies, np.arange(5) + 0.5, atol=1e-4)


def test_box_spectrum():
    x = np.linspace(0.0, 1.0, 11)
    box = SampledPotential(x, np.zeros_like(x))
    grid = GridSpec(0.0, 1.0, 2000)
    energies = exact_spectrum(box, 0.0, grid, 5, check_decay=False)
    expected = 0.5 * (math.pi * np.arange(1, 6)) ** 2
    np.testing.assert_allclose(energies, expected, rtol=1e-6)


def test_richardson_improves_accuracy(harmonic):
    grid = GridSpec(-10.0, 10.0, 400)
    plain = exact_spectrum(harmonic, 0.0, grid, 3, richardson=False)
    extrapolated = exact_spectrum(harmonic, 0.0, grid, 3)
    exact = np.arange(3) + 0.5
    assert np.all(np.abs(extrapolated - exact) < np.abs(plain - exact))


def test_grid_too_small(harmonic):
    with pytest.raises(GridTooSmall):
        exact_spectrum(harmonic, 0.0, GridSpec(-2.0, 2.0), 10)


def test_grid_spec_checks():
    with pytest.raises(ValueError):
        GridSpec(1.0, -1.0)
    with pytest.raises(ValueError):
        GridSpec(-1.0, 1.0, 50)
    with pytest.raises(ValueError):
        GridSpec(-1.0, 1.0, boundary="periodic")
    grid = GridSpec(-1.0, 1.0, 999)
    assert grid.spacing == pytest.approx(2e-3)
    assert grid.refined().spacing == pytest.approx(1e-3)
    assert grid.nodes()[0] == pytest.approx(-1.0 + 2e-3)


def test_default_grid_covers_turning_points():
    pot = HarmonicWell(hbar=1.0)
    grid = default_grid(pot, 0.0, 4.5)
    # turning points at -+3
    assert grid.x_min < -3.0 - 1.0
    assert grid.x_max > 3.0 + 1.0
    exact_spectrum(pot, 0.0, grid, 5)


def test_spectrum_sheet(harmonic):
    sheet = spectrum_sheet(
        harmonic, [0.0, 1.0], GridSpec(-10.0, 10.0, 2000), 4, workers=2
    )
    assert sheet.energies.shape == (2, 4)
    assert np.all(np.isnan(sheet.barrier))
    assert len(sheet.rows()) == 8
    np.testing.assert_allclose(sheet.pair_gaps(), 1.0, atol=1e-4)


def test_level_errors():
    errors = level_errors([1.52, 2.5], [0.5, 1.5, 2.5, 3.5])
    np.testing.assert_allclose(errors, [0.02, 0.0], atol=1e-12)
    with pytest.raises(ValueError):
        level_errors([1.0], [1.0])


# semiclassics against the exact spectrum =====================================


@pytest.mark.slow
def test_modified_levels_against_exact(tilted_well):
    lam, window = 0.2, (-0.8, -0.1)
    approx = modified_levels(tilted_well, lam, window)
    grid = default_grid(tilted_well, lam, 1.0)
    exact = exact_spectrum(tilted_well, lam, grid, 24)
    assert np.all(level_errors(approx, exact) < 0.1)


@pytest.mark.slow
def test_exact_gaps_match_semiclassical(tilted_well):
    hbar = tilted_well.hbar
    nodes = crossing_lattice(tilted_well, (-0.5, 0.5), (-0.87, -0.01))
    grid = default_grid(tilted_well, 0.0, 0.5)
    ratios = []
    for node in nodes:
        weight = math.exp(-2 * node.table.T_b / hbar)
        if not 1e-5 <= weight <= 1e-3:
            continue
        try:
            result = gap_scan(
                tilted_well, node, grid, scan_halfwidth(node), 41
            )
        except TrackingLoss:
            continue
        ratios.append(result.ratio)
    good = [r for r in ratios if 0.85 <= r <= 1.15]
    assert len(good) >= 3
