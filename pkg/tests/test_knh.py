"""
Tests for growth rates, transition maps, the weak and strong
predictions, and the classical separatrix-crossing map.
"""

# =============================================================================

import math
import random

import pytest

from qknh.errors import CaseViolation, DegenerateCase
from qknh.knh import (
    classical_knh,
    growth_rates,
    knh_predict,
    lattice_geometry_points,
    prediction_report,
    strong_prediction,
    subspace_geometry,
    weak_bounds,
)
from qknh.semiclassics import separatrix_action
from qknh.spectrum import LatticeParams
from qknh.utils import Branch, Subspace

# =============================================================================


def test_growth_rates(ref_params):
    rates = growth_rates(ref_params)
    assert rates.total == 0.0
    assert rates.dD_A < 0 < rates.dD_C
    assert rates.dD_B > 0
    assert rates.case == "A shrinking; B, C growing"
    assert rates.dD_A == pytest.approx(-ref_params.Gamma * 1.25)


def test_transition_map(ref_params):
    transitions = knh_predict(ref_params)
    assert transitions[Subspace.A][Subspace.C] == pytest.approx(0.4)
    assert transitions[Subspace.A][Subspace.B] == pytest.approx(0.6)
    assert transitions[Subspace.A][Subspace.A] == 0.0
    assert transitions[Subspace.B][Subspace.B] == 1.0
    assert transitions[Subspace.C][Subspace.C] == 1.0


def test_two_shrinking_subspaces():
    # Gamma < 0: A and C shrink into B
    params = LatticeParams.from_xyz(0.5, -1.0)
    assert params.Gamma < 0
    transitions = knh_predict(params)
    assert transitions[Subspace.A][Subspace.B] == pytest.approx(1.0)
    assert transitions[Subspace.C][Subspace.B] == pytest.approx(1.0)


def test_degenerate_cases():
    with pytest.raises(DegenerateCase):
        growth_rates(LatticeParams.from_xyz(0.0, 0.0))
    # X a + Y c = 0
    with pytest.raises(DegenerateCase):
        growth_rates(LatticeParams.from_xyz(1.0, -1.0, slope_ratio=1.0))


# strong prediction ===========================================================


@pytest.mark.parametrize(
    "X, Y, tol, expected",
    [
        (0.5, 1.25, 1e-3, (2, 5)),
        (0.5, 1.0, 1e-3, (1, 2)),
        (1 / math.sqrt(2), 1.0, 1e-4, (70, 99)),
        (1 / math.sqrt(2), 1.0, 1e-3, (29, 41)),
    ],
)
def test_strong_prediction(X, Y, tol, expected):
    strong = strong_prediction(LatticeParams.from_xyz(X, Y), tol)
    assert (strong.q, strong.p) == expected
    assert strong.value == pytest.approx(X / Y)
    assert strong.period == expected[1]


def test_strong_prediction_periods(ref_params):
    strong = strong_prediction(ref_params)
    assert strong.is_exact_for(10)
    assert not strong.is_exact_for(12)
    assert strong.periods(20) == 4.0
    with pytest.raises(ValueError):
        strong_prediction(LatticeParams.from_xyz(1.25, 0.5))
    with pytest.raises(ValueError):
        strong_prediction(ref_params, tol=0.0)


def test_weak_bounds(ref_params):
    assert weak_bounds(10, 10.0, ref_params) == (0.0, 1.0)
    low, high = weak_bounds(100, 9.0, ref_params)
    assert low == pytest.approx(0.3)
    assert high == pytest.approx(0.5)


# geometry ====================================================================


def test_geometry_points_match_counts():
    rng = random.Random(1234)
    for _ in range(50):
        Y = rng.uniform(0.5, 3.0)
        X = rng.uniform(0.05, 0.95) * Y
        params = LatticeParams.from_xyz(
            X, Y, slope_ratio=rng.uniform(0.2, 5.0)
        )
        M = rng.randint(1, 200)
        D = rng.uniform(0.0, 20.0)
        points = lattice_geometry_points(M, D, params)
        summary = subspace_geometry(M, D, params)
        assert points.N == pytest.approx(summary.N - summary.dN, abs=1e-9)
        assert points.D == pytest.approx(D, abs=1e-9)
        assert points.K == pytest.approx(
            summary.K - summary.dK, rel=1e-9, abs=1e-9
        )
        assert abs(summary.dN) <= 0.5
        assert abs(summary.dK) <= 0.5


def test_geometry_needs_ordered_rates():
    with pytest.raises(ValueError):
        subspace_geometry(10, 5.0, LatticeParams.from_xyz(1.0, 0.5))
    with pytest.raises(ValueError):
        subspace_geometry(0, 5.0, LatticeParams.from_xyz(0.5, 1.0))


# report ======================================================================


def test_prediction_report(ref_params):
    report = prediction_report(ref_params, 10, 10.1, measured=0.4)
    assert report["case"] == "A shrinking; B, C growing"
    assert report["P_map"]["A->C"] == pytest.approx(0.4)
    assert report["weak_interval"] == [0.0, 1.0]
    assert report["strong"]["q"] == 2
    assert report["strong"]["p"] == 5
    assert report["strong"]["exact_for_M"] is True
    assert report["strong"]["J"] == 2.0
    assert report["geometry"]["N"] == 4
    assert report["measured"]["within_weak"] is True


def test_report_without_strong_prediction():
    params = LatticeParams.from_xyz(0.5, -1.0)
    report = prediction_report(params, 10, 5.0)
    assert report["strong"] is None
    assert "measured" not in report
    with pytest.raises(ValueError):
        prediction_report(params, 10, 5.0, measured=1.5)


# classical map ===============================================================


def test_classical_tilt(tilted_well):
    result = classical_knh(tilted_well, 0.0)
    # each lobe changes by (pi / 8) / sqrt(2) per unit lambda
    rate = math.pi / (8 * math.sqrt(2))
    assert result.rates[Subspace.A] == pytest.approx(-rate, rel=1e-7)
    assert result.rates[Subspace.C] == pytest.approx(rate, rel=1e-7)
    assert result.value == pytest.approx(1.0, rel=1e-9)
    assert result.clamped == pytest.approx(1.0)
    assert not result.violation
    assert result.transitions[Subspace.A][Subspace.C] == pytest.approx(1.0)
    result.check()


def test_classical_violation(breathing_well):
    result = classical_knh(breathing_well, 0.0)
    assert result.rates[Subspace.A] == pytest.approx(1.0, rel=1e-7)
    assert result.rates[Subspace.B] == pytest.approx(-2.0, rel=1e-7)
    assert result.case == "B shrinking; A, C growing"
    assert result.violation
    assert result.clamped == 0.0
    row = result.transitions[Subspace.B]
    assert row[Subspace.A] == pytest.approx(0.5)
    assert row[Subspace.C] == pytest.approx(0.5)
    with pytest.raises(CaseViolation):
        result.check()
    with pytest.raises(CaseViolation):
        classical_knh(breathing_well, 0.0, strict=True)


def test_classical_rates_are_lobe_derivatives(tilted_well):
    lam, h = 0.2, 1e-4
    result = classical_knh(tilted_well, lam)
    for side, subspace in ((Branch.A, Subspace.A), (Branch.C, Subspace.C)):
        upper = separatrix_action(tilted_well, lam + h, side).area
        lower = separatrix_action(tilted_well, lam - h, side).area
        assert result.rates[subspace] == pytest.approx(
            (upper - lower) / (2 * h), rel=1e-5
        )
