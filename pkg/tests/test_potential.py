"""
Tests for potentials, barrier geometry, and turning points.
"""

# =============================================================================

import math

import numpy as np
import pytest

from qknh.errors import DegenerateEnergy, EnergyOutOfRange, NoBarrier
from qknh.potential import (
    HarmonicWell,
    QuarticDoubleWell,
    SampledPotential,
    Sweep,
    barrier_top,
    eval_potential,
    turning_points,
    well_minima,
)
from qknh.utils import Family

# =============================================================================


def test_quartic_values(symmetric_well):
    assert eval_potential(symmetric_well, 1.0, 0.0) == pytest.approx(-1.0)
    tilted = QuarticDoubleWell(1.0, (2.0,), (0.7,))
    assert eval_potential(tilted, 0.0, 0.3) == 0.0


def test_harmonic_value():
    pot = HarmonicWell(1.0)
    assert eval_potential(pot, 2.0, 0.0) == pytest.approx(2.0)
    assert pot.family is Family.HARMONIC
    assert pot.omega == pytest.approx(1.0)


def test_polynomial_coefficients_follow_lambda():
    pot = QuarticDoubleWell(1.0, (2.0, 1.0), (0.0, -0.25))
    x, lam = 0.7, 0.4
    expected = x**4 - (2.0 + lam) * x**2 - 0.25 * lam * x
    assert eval_potential(pot, x, lam) == pytest.approx(expected)
    h = 1e-6
    numeric = (pot.value(x, lam + h) - pot.value(x, lam - h)) / (2 * h)
    assert float(pot.dlam(x, lam)) == pytest.approx(float(numeric), rel=1e-6)


def test_sweep():
    sweep = Sweep(-1.0, 1e-3)
    assert sweep.lam_at(500.0) == pytest.approx(-0.5)
    assert sweep.time_at(0.0) == pytest.approx(1000.0)
    with pytest.raises(ValueError):
        Sweep(0.0, 0.0)


def test_bad_coefficients():
    with pytest.raises(ValueError):
        QuarticDoubleWell(0.0)
    with pytest.raises(ValueError):
        QuarticDoubleWell(1.0, hbar=-1.0)


# barrier =====================================================================


def test_symmetric_barrier(symmetric_well):
    barrier = barrier_top(symmetric_well, 0.0)
    assert barrier.x0 == pytest.approx(0.0, abs=1e-12)
    assert barrier.height == pytest.approx(0.0, abs=1e-12)
    assert barrier.curvature == pytest.approx(4.0)


def test_single_well_has_no_barrier():
    pot = QuarticDoubleWell(1.0, (-1.0,), (0.0,))
    with pytest.raises(NoBarrier):
        barrier_top(pot, 0.0)
    with pytest.raises(NoBarrier):
        barrier_top(HarmonicWell(), 0.0)


def test_tilted_barrier():
    pot = QuarticDoubleWell(1.0, (2.0,), (0.1,))
    barrier = barrier_top(pot, 0.0)
    # root of 4 x**3 - 4 x + 0.1 near zero
    assert float(pot.dx(barrier.x0, 0.0)) == pytest.approx(0.0, abs=1e-10)
    assert abs(barrier.x0) < 0.1
    assert barrier.height > 0
    h = 1e-4
    x0 = barrier.x0
    left, mid, right = pot.value(np.array([x0 - h, x0, x0 + h]), 0.0)
    second = (left - 2 * mid + right) / h**2
    assert barrier.curvature == pytest.approx(-float(second), rel=1e-6)


def test_well_minima(symmetric_well):
    minima = well_minima(symmetric_well, 0.0)
    assert [x for x, _ in minima] == pytest.approx([-1.0, 1.0])
    assert [v for _, v in minima] == pytest.approx([-1.0, -1.0])


# turning points ==============================================================


def test_four_turning_points(symmetric_well):
    points = turning_points(symmetric_well, -0.5, 0.0)
    inner = math.sqrt(1 - math.sqrt(0.5))
    outer = math.sqrt(1 + math.sqrt(0.5))
    assert points == pytest.approx([-outer, -inner, inner, outer])
    assert points == pytest.approx(
        [-1.30656, -0.54120, 0.54120, 1.30656], abs=1e-5
    )


def test_two_turning_points_above_barrier(symmetric_well):
    points = turning_points(symmetric_well, 0.5, 0.0)
    r = math.sqrt(1 + math.sqrt(1.5))
    assert points == pytest.approx([-r, r])


def test_degenerate_energies(symmetric_well):
    with pytest.raises(DegenerateEnergy):
        turning_points(symmetric_well, -1.0, 0.0)
    with pytest.raises(DegenerateEnergy):
        turning_points(symmetric_well, 0.0, 0.0)
    with pytest.raises(EnergyOutOfRange):
        turning_points(symmetric_well, -1.5, 0.0)


def test_bracketed_roots_have_small_residual():
    pot = QuarticDoubleWell(1.0, (2.0,), (0.1,))
    for E in (-0.8, -0.5, -0.1, 0.3, 1.0):
        points = turning_points(pot, E, 0.0)
        residual = np.abs(pot.value(np.array(points), 0.0) - E)
        assert np.all(residual < 1e-10 * max(1.0, abs(E)))


def test_turning_point_count_follows_band():
    pot = QuarticDoubleWell(1.0, (2.0,), (0.0, 0.2))
    for lam in np.linspace(-1, 1, 5):
        v_b = barrier_top(pot, lam).height
        low = max(v for _, v in well_minima(pot, lam))
        for E in np.linspace(low + 0.01, v_b + 1.0, 13):
            if abs(E - v_b) < 1e-6:
                continue
            count = len(turning_points(pot, E, lam))
            assert count == (4 if low < E < v_b else 2)


def test_sampled_potential_matches_formula():
    x = np.linspace(-2.5, 2.5, 401)
    pot = SampledPotential(x, x**4 - 2 * x**2)
    assert float(pot.value(0.3, 0.0)) == pytest.approx(
        0.3**4 - 2 * 0.3**2, abs=1e-6
    )
    barrier = barrier_top(pot, 0.0)
    assert barrier.x0 == pytest.approx(0.0, abs=1e-6)
    points = turning_points(pot, -0.5, 0.0)
    assert len(points) == 4
