"""
Tests for branch levels, the modified quantization condition, and the
lattice of avoided crossings.
"""

# =============================================================================

import math

import pytest

from qknh.errors import EmptyWindow, NoBarrier, NoRoot
from qknh.potential import QuarticDoubleWell, Sweep
from qknh.spectrum import (
    LatticeParams,
    affine_prediction,
    branch_levels,
    crossing_lattice,
    diabatic_probability,
    label_offsets,
    landau_zener_probability,
    local_params,
    min_gap,
    modified_levels,
    nearest_to_separatrix,
    quantization_residual,
    separatrix_curve,
    separatrix_energy,
    two_state_levels,
)
from qknh.utils import Branch

# =============================================================================

LAM_WINDOW = (-0.5, 0.5)
E_WINDOW = (-0.87, -0.01)

# =============================================================================


@pytest.fixture(scope="module")
def swept_well():
    return QuarticDoubleWell(
        1.0, (2.0,), (0.0, -0.25), hbar=0.05, sweep=Sweep(-1.0, 1e-3)
    )


@pytest.fixture(scope="module")
def nodes(swept_well):
    return crossing_lattice(swept_well, LAM_WINDOW, E_WINDOW)


# branch levels ===============================================================


def test_harmonic_branch_levels(harmonic):
    levels = branch_levels(harmonic, 0.0, Branch.A, (0.0, 10.0))
    assert [level.quantum for level in levels] == list(range(10))
    for k, level in enumerate(levels):
        assert level.E == pytest.approx(k + 0.5, abs=1e-9)
        assert level.label == k
        assert level.line.branch is Branch.A


def test_branch_levels_respect_offset(harmonic):
    levels = branch_levels(harmonic, 0.0, "C", (0.0, 4.0), offset=2)
    assert [level.label for level in levels] == [-2, -1, 0, 1]


def test_empty_window(harmonic):
    with pytest.raises(EmptyWindow):
        branch_levels(harmonic, 0.0, Branch.A, (0.6, 0.9))
    with pytest.raises(ValueError):
        branch_levels(harmonic, 0.0, Branch.A, (1.0, 0.5))


def test_modified_levels_solve_condition(swept_well):
    lam = 0.4
    roots = modified_levels(swept_well, lam, (-0.8, -0.2))
    assert roots == sorted(roots)
    assert len(roots) >= 4
    for E in roots:
        assert -0.8 <= E <= -0.2
        assert abs(quantization_residual(swept_well, E, lam)) < 1e-7


def test_modified_levels_track_branch_levels(swept_well):
    lam, window = 0.4, (-0.8, -0.4)
    roots = modified_levels(swept_well, lam, window)
    anchors = sorted(
        level.E
        for side in Branch
        for level in branch_levels(swept_well, lam, side, window)
    )
    assert anchors
    # deep levels barely feel the tunneling
    for E in roots:
        assert min(abs(E - a) for a in anchors) < 1e-3


# crossing lattice ============================================================


def test_nodes_sit_on_both_quanta(swept_well, nodes):
    unit = math.pi * swept_well.hbar
    assert len(nodes) >= 4
    for node in nodes:
        m_q, n_q = node.quantum
        assert node.table.St_A == pytest.approx(
            (m_q + 0.5) * unit, abs=1e-9 * unit
        )
        assert node.table.St_C == pytest.approx(
            (n_q + 0.5) * unit, abs=1e-9 * unit
        )
        assert LAM_WINDOW[0] <= node.lam <= LAM_WINDOW[1]
        assert E_WINDOW[0] <= node.E <= E_WINDOW[1]


def test_nodes_are_sorted_and_consistent(swept_well, nodes):
    lams = [node.lam for node in nodes]
    assert lams == sorted(lams)
    for node in nodes:
        assert node.P == pytest.approx(math.exp(-node.neg_log_p))
        assert node.gap == pytest.approx(swept_well.hbar * node.gamma)
        assert node.time == pytest.approx(swept_well.sweep.time_at(node.lam))
    assert len({node.index for node in nodes}) == len(nodes)


def test_affine_prediction_finds_neighbors(swept_well, nodes):
    unit = math.pi * swept_well.hbar
    by_quantum = {node.quantum: node for node in nodes}
    for (m_q, n_q), node in by_quantum.items():
        neighbor = by_quantum.get((m_q + 1, n_q))
        if neighbor is None:
            continue
        targets = (node.table.St_A + unit, node.table.St_C)
        E, lam = affine_prediction(node.table, targets)
        miss = math.hypot((E - neighbor.E) / unit, lam - neighbor.lam)
        step = math.hypot(
            (node.E - neighbor.E) / unit, node.lam - neighbor.lam
        )
        assert miss < 0.3 * step
        return
    pytest.skip("no pair of neighboring nodes in the window")


def test_local_params(swept_well, nodes):
    origin = nearest_to_separatrix(nodes)
    params = local_params(swept_well, origin)
    assert params.Z == origin.neg_log_p
    assert 0 < params.k < 1
    assert params.E00 == origin.E
    assert params.rate == swept_well.sweep.rate
    assert math.isfinite(params.Gamma)
    assert all(
        abs(math.log(origin.neg_log_p)) <= abs(math.log(node.neg_log_p))
        for node in nodes
    )


def test_local_params_predict_neighbors(swept_well, nodes):
    origin = nearest_to_separatrix(nodes)
    params = local_params(swept_well, origin)
    m0, n0 = origin.m, origin.n
    for node in nodes:
        dm, dn = node.m - m0, node.n - n0
        if abs(dm) + abs(dn) != 1:
            continue
        predicted = float(params.neg_log_p(dm, dn))
        # first order in the lattice step
        assert predicted == pytest.approx(node.neg_log_p, rel=0.5)


def test_from_xyz():
    params = LatticeParams.from_xyz(0.5, 1.25, 2.0, slope_ratio=3.0)
    assert params.k == pytest.approx(0.75)
    assert params.slope_ratio == pytest.approx(3.0)
    assert float(params.neg_log_p(0, 0)) == pytest.approx(2.0)
    assert float(params.neg_log_p(2, -1)) == pytest.approx(2.0 * math.e**-0.25)
    assert params.Gamma == pytest.approx(1 / (math.pi * (1.5 + 1.25)))
    with pytest.raises(ValueError):
        LatticeParams.from_xyz(0.5, 1.25, 0.0)


# probabilities and separatrix ================================================


def test_probability_decreases_with_energy(swept_well):
    values = [
        diabatic_probability(swept_well, E, 0.0)
        for E in (-0.8, -0.6, -0.4, -0.2)
    ]
    assert all(0 < p <= 1 for p in values)
    assert values == sorted(values, reverse=True)
    assert values[-1] < values[0]


def test_separatrix_energy(swept_well):
    e_s = separatrix_energy(swept_well, 0.0)
    assert -1.0 < e_s < 0.0
    assert diabatic_probability(swept_well, e_s, 0.0) == pytest.approx(
        math.exp(-1), rel=1e-9
    )


def test_separatrix_failures(swept_well, harmonic):
    with pytest.raises(NoBarrier):
        separatrix_energy(harmonic, 0.0)
    with pytest.raises(NoRoot):
        separatrix_energy(swept_well, 0.0, rate=1e6)


def test_separatrix_curve(swept_well):
    rows = separatrix_curve(swept_well, [-0.2, 0.2], rate=1e6)
    assert [row[0] for row in rows] == [-0.2, 0.2]
    assert all(math.isnan(row[1]) for row in rows)
    assert all(math.isfinite(row[2]) for row in rows)


def test_label_offsets_pick_separatrix_levels(swept_well):
    lam = 0.0
    e_s = separatrix_energy(swept_well, lam)
    m0, n0 = label_offsets(swept_well, lam)
    unit = math.pi * swept_well.hbar
    for side, offset in zip(Branch, (m0, n0)):
        levels = branch_levels(
            swept_well, lam, side, (e_s - 3 * unit, e_s + 3 * unit)
        )
        nearest = min(levels, key=lambda level: abs(level.E - e_s))
        assert nearest.quantum == offset


# two-state picture ===========================================================


def test_two_state_levels_at_node(nodes):
    node = nodes[0]
    lower, upper = two_state_levels(node, node.lam)
    assert lower == pytest.approx(node.E - 0.5 * node.gap)
    assert upper == pytest.approx(node.E + 0.5 * node.gap)
    assert min_gap(node) == node.gap > 0
    far_lower, far_upper = two_state_levels(node, node.lam + 0.1)
    assert far_upper - far_lower > upper - lower


def test_landau_zener_is_half_the_node_exponent(nodes):
    node = min(nodes, key=lambda node: node.E)
    ratio = math.log(landau_zener_probability(node)) / -node.neg_log_p
    assert 0.4 <= ratio <= 0.6
