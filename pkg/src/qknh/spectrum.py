"""
Branch levels, the modified quantization condition, the lattice of
avoided crossings, and the local lattice parameters X, Y, Z.
"""

# =============================================================================

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from qknh.errors import (
    EmptyWindow,
    NoBarrier,
    NonConvergence,
    NoRoot,
    QknhError,
)
from qknh.labels import LineLabel, NodeIndex
from qknh.potential import (
    Potential,
    barrier_top,
    energy_tolerance,
    well_minima,
)
from qknh.semiclassics import (
    DEFAULT_SETTINGS,
    ActionTable,
    QuadratureSettings,
    action_derivatives,
    bracket,
    corrected_action,
    level_slope,
    phase_from_tunneling,
    tunneling_action,
    well_action,
)
from qknh.utils import ActionSymbol, Branch, check_positive, check_window

# =============================================================================

__all__ = (
    "BranchLevel",
    "LatticeParams",
    "CrossingNode",
    "branch_levels",
    "modified_levels",
    "quantization_residual",
    "crossing_lattice",
    "affine_prediction",
    "local_params",
    "diabatic_probability",
    "separatrix_energy",
    "separatrix_curve",
    "label_offsets",
    "nearest_to_separatrix",
    "min_gap",
    "two_state_levels",
    "landau_zener_probability",
)

# =============================================================================

logger = logging.getLogger(__name__)

SEPARATRIX_SCAN_STEPS = 64
CELL_SUBDIVISIONS = 32
NEWTON_MAX_ITER = 50
NEWTON_MAX_HALVINGS = 12
# residual tolerance in units of pi * hbar
LEVEL_RTOL = 1e-10
SEED_GRID = 5

_ENERGY_XTOL = 1e-14

# =============================================================================


@dataclass(frozen=True)
class BranchLevel:
    """One zeroth-order level E^A_m or E^C_n at fixed lambda.

    `label` is the quantum number relative to the offset; `quantum` is
    the absolute quantum number, S~ = (quantum + 1/2) pi hbar.
    """

    branch: Branch
    label: int
    quantum: int
    lam: float
    E: float
    slope: float

    @property
    def line(self) -> LineLabel:
        """The level line this level lies on."""
        return LineLabel(self.branch, self.label)


@dataclass(frozen=True)
class LatticeParams:
    """Local descriptor of the lattice of avoided crossings.

    With these parameters, the diabatic probability at the crossing
    (m, n) from the origin is exp(-Z exp(m X + n Y)).

    Attributes:
        E00 (float): Origin energy.
        lam00 (float): Origin lambda.
        X (float): Growth of -ln P per step in m.
        Y (float): Growth of -ln P per step in n.
        Z (float): -ln P at the origin.
        bracket (float): [S~_A, S~_C] at the origin.
        dE_St_A (float): dE S~_A at the origin.
        dE_St_C (float): dE S~_C at the origin.
        Gamma (float): Separatrix advance in lattice units per lambda.
        k (float): dE S~_A / (dE S~_A + dE S~_C).
        rate (float): The sweep rate at the origin.
        hbar (float): The reduced Planck constant.
    """

    E00: float
    lam00: float
    X: float
    Y: float
    Z: float
    bracket: float
    dE_St_A: float
    dE_St_C: float
    Gamma: float
    k: float
    rate: float
    hbar: float

    def __post_init__(self):
        for name in ("X", "Y", "Z"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"`{name}` must be finite (got {value})")
        if not self.Z > 0:
            raise ValueError(f"`Z` must be positive (got {self.Z})")

    @classmethod
    def from_xyz(
        cls,
        X: float,
        Y: float,
        Z: float = 1.0,
        slope_ratio: float = 1.0,
        bracket: float = 1.0,
        hbar: float = 1.0,
        rate: float = 1.0,
    ) -> "LatticeParams":
        """Builds parameters for a synthetic lattice.

        `slope_ratio` is dE S~_A / dE S~_C, with dE S~_C = 1.
        """
        check_positive(slope_ratio=slope_ratio, hbar=hbar, rate=rate)
        a, c = float(slope_ratio), 1.0
        return cls(
            E00=0.0,
            lam00=0.0,
            X=float(X),
            Y=float(Y),
            Z=float(Z),
            bracket=float(bracket),
            dE_St_A=a,
            dE_St_C=c,
            Gamma=_gamma_rate(bracket, hbar, X, Y, a, c),
            k=a / (a + c),
            rate=float(rate),
            hbar=float(hbar),
        )

    @property
    def slope_ratio(self) -> float:
        """dE S~_A / dE S~_C."""
        return self.dE_St_A / self.dE_St_C

    def neg_log_p(self, m, n):
        """Returns -ln P_mn = Z exp(m X + n Y)."""
        return self.Z * np.exp(
            np.asarray(m, dtype=float) * self.X
            + np.asarray(n, dtype=float) * self.Y
        )

    def to_dict(self) -> dict:
        """Returns the parameters as a JSON-ready dict."""
        return {
            "E00": self.E00,
            "lam00": self.lam00,
            "X": self.X,
            "Y": self.Y,
            "Z": self.Z,
            "bracket": self.bracket,
            "dE_St_A": self.dE_St_A,
            "dE_St_C": self.dE_St_C,
            "Gamma": self.Gamma,
            "k": self.k,
            "rate": self.rate,
            "hbar": self.hbar,
        }


@dataclass(frozen=True)
class CrossingNode:
    """One avoided crossing of the lines A_m and C_n.

    Attributes:
        m (int): The A label, relative to the offset.
        n (int): The C label, relative to the offset.
        quantum (Tuple[int, int]): The absolute quantum numbers.
        E (float): The crossing energy E_mn.
        lam (float): The crossing parameter lambda_mn.
        time (float): The time t_mn at which the sweep reaches lam.
        gamma (float): The coupling, so the minimum gap is hbar gamma.
        gap (float): The minimum gap hbar gamma.
        neg_log_p (float): -ln P_mn.
        P (float): The diabatic probability P_mn.
        rate (float): The sweep rate at lam.
        table (ActionTable): Action data at (E, lam).
    """

    m: int
    n: int
    quantum: Tuple[int, int]
    E: float
    lam: float
    time: float
    gamma: float
    gap: float
    neg_log_p: float
    P: float
    rate: float
    table: ActionTable

    @property
    def index(self) -> NodeIndex:
        """The (m, n) index of this node."""
        return NodeIndex(self.m, self.n)


# =============================================================================


def _gamma_rate(br, hbar, X, Y, a, c) -> float:
    denom = math.pi * hbar * (X * a + Y * c)
    if denom == 0:
        return math.nan
    return br / denom


def _energy_band(pot: Potential, lam: float) -> Tuple[float, float]:
    """Returns the energy band with a classically allowed region in
    every well and (for double wells) below the barrier.
    """
    minima = well_minima(pot, lam)
    lo = max(v for _, v in minima) if minima else -math.inf
    hi = math.inf
    if len(minima) >= 2:
        hi = barrier_top(pot, lam).height
    return lo, hi


def _clip_window(pot: Potential, lam: float, E_window) -> Tuple[float, float]:
    lo, hi = check_window("E_window", E_window)
    band_lo, band_hi = _energy_band(pot, lam)
    if math.isfinite(band_lo):
        lo = max(lo, band_lo + 1e3 * energy_tolerance(band_lo))
    if math.isfinite(band_hi):
        hi = min(hi, band_hi - 1e3 * energy_tolerance(band_hi))
    if not lo < hi:
        raise EmptyWindow(
            f"energy window {tuple(E_window)} lies outside the band "
            f"({band_lo}, {band_hi}) at lambda={lam}"
        )
    return lo, hi


def _neg_log_p(table: ActionTable, rate: float) -> float:
    """Returns -ln P = pi hbar exp(-2 T_b / hbar) / (rate |[S~_A, S~_C]|)."""
    if math.isinf(table.T_b):
        return 0.0
    br = abs(bracket(table, ActionSymbol.ST_A, ActionSymbol.ST_C))
    return (
        math.pi
        * table.hbar
        * math.exp(-2 * table.T_b / table.hbar)
        / (rate * br)
    )


def _quantum_number(action: float, hbar: float) -> float:
    """Returns the fractional quantum number S / (pi hbar) - 1/2."""
    return action / (math.pi * hbar) - 0.5


# =============================================================================


def branch_levels(
    pot: Potential,
    lam: float,
    side,
    E_window,
    offset: int = 0,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> List[BranchLevel]:
    """Returns the levels S~_side = (k + 1/2) pi hbar inside a window.

    The window is clipped to the band between the higher well minimum
    and the barrier top.

    Raises:
        EmptyWindow: If no level fits in the window.
    """
    side = Branch(side)
    lo, hi = _clip_window(pot, lam, E_window)
    unit = math.pi * pot.hbar

    def action(E):
        return corrected_action(pot, E, lam, side, settings)

    k_lo = math.ceil(_quantum_number(action(lo), pot.hbar))
    k_hi = math.floor(_quantum_number(action(hi), pot.hbar))
    levels = []
    for k in range(k_lo, k_hi + 1):
        target = (k + 0.5) * unit
        E = brentq(lambda e: action(e) - target, lo, hi, xtol=_ENERGY_XTOL)
        table = action_derivatives(pot, E, lam, settings)
        levels.append(
            BranchLevel(
                branch=side,
                label=k - offset,
                quantum=k,
                lam=lam,
                E=E,
                slope=level_slope(table, side),
            )
        )
    if not levels:
        raise EmptyWindow(
            f"no {side.value} level in ({lo}, {hi}) at lambda={lam}"
        )
    return levels


def quantization_residual(
    pot: Potential,
    E: float,
    lam: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Returns the left side of the modified quantization condition,

    cos((S~_A - S~_C)/hbar) + sqrt(1 + exp(-2 T_b/hbar))
    cos((S~_A + S~_C)/hbar).
    """
    hbar = pot.hbar
    s_a = well_action(pot, E, lam, Branch.A, settings)
    s_c = well_action(pot, E, lam, Branch.C, settings)
    try:
        tunnel = tunneling_action(pot, E, lam, settings)
    except QknhError:
        tunnel = math.inf
    phi = phase_from_tunneling(tunnel, hbar)[0]
    st_a = s_a - 0.5 * hbar * phi
    st_c = s_c - 0.5 * hbar * phi
    coupling = math.sqrt(1 + math.exp(-2 * tunnel / hbar))
    return math.cos((st_a - st_c) / hbar) + coupling * math.cos(
        (st_a + st_c) / hbar
    )


def modified_levels(
    pot: Potential,
    lam: float,
    E_window,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> List[float]:
    """Returns the sorted roots of the modified quantization condition.

    Each root lies near one branch level. The window is cut into cells
    at the midpoints between neighboring branch levels and each cell is
    searched for a sign change.

    Raises:
        EmptyWindow: If no root lies in the window.
    """
    lo, hi = _clip_window(pot, lam, E_window)
    anchors = []
    for side in Branch:
        try:
            levels = branch_levels(pot, lam, side, (lo, hi), 0, settings)
            anchors.extend(level.E for level in levels)
        except EmptyWindow:
            pass
    anchors.sort()
    if not anchors:
        raise EmptyWindow(f"no level in ({lo}, {hi}) at lambda={lam}")

    def f(E):
        return quantization_residual(pot, E, lam, settings)

    mids = [0.5 * (a + b) for a, b in zip(anchors[:-1], anchors[1:])]
    edges = [lo] + mids + [hi]
    roots = []
    for left, right, anchor in zip(edges[:-1], edges[1:], anchors):
        f_left, f_right = f(left), f(right)
        if f_left == 0:
            roots.append(left)
            continue
        if f_left * f_right < 0:
            roots.append(brentq(f, left, right, xtol=_ENERGY_XTOL))
            continue
        if abs(f(anchor)) < LEVEL_RTOL:
            logger.debug(
                "cell (%.12g, %.12g): no sign change, branch level %.12g "
                "already satisfies the condition",
                left,
                right,
                anchor,
            )
            roots.append(anchor)
            continue
        logger.debug(
            "cell (%.12g, %.12g): no sign change, subdividing", left, right
        )
        grid = np.linspace(left, right, CELL_SUBDIVISIONS + 1)
        values = [f(e) for e in grid]
        for i in range(CELL_SUBDIVISIONS):
            if values[i] * values[i + 1] < 0:
                roots.append(
                    brentq(f, grid[i], grid[i + 1], xtol=_ENERGY_XTOL)
                )
    if len(roots) != len(anchors):
        logger.debug(
            "found %d roots for %d branch levels at lambda=%g",
            len(roots),
            len(anchors),
            lam,
        )
    if not roots:
        raise EmptyWindow(f"no root in ({lo}, {hi}) at lambda={lam}")
    return sorted(roots)


# =============================================================================


def _make_node(
    pot: Potential,
    E: float,
    lam: float,
    quantum: Tuple[int, int],
    offsets: Tuple[int, int],
    settings: QuadratureSettings,
) -> CrossingNode:
    table = action_derivatives(pot, E, lam, settings)
    hbar = pot.hbar
    rate = pot.sweep.rate_at(lam)
    gamma = math.exp(-table.T_b / hbar) / math.sqrt(
        table.dE_S_A * table.dE_S_C
    )
    neg_log_p = _neg_log_p(table, rate)
    return CrossingNode(
        m=quantum[0] - offsets[0],
        n=quantum[1] - offsets[1],
        quantum=quantum,
        E=E,
        lam=lam,
        time=pot.sweep.time_at(lam),
        gamma=gamma,
        gap=hbar * gamma,
        neg_log_p=neg_log_p,
        P=math.exp(-neg_log_p),
        rate=rate,
        table=table,
    )


def _newton(
    pot: Potential,
    targets: Tuple[float, float],
    seed: Tuple[float, float],
    tol: float,
    settings: QuadratureSettings,
    max_iter: int,
) -> Tuple[float, float]:
    """Solves S~_A = targets[0], S~_C = targets[1] for (E, lam)."""

    def evaluate(point):
        table = action_derivatives(pot, point[0], point[1], settings)
        res = np.array([table.St_A - targets[0], table.St_C - targets[1]])
        jac = np.array(
            [
                [table.dE_St_A, table.dlam_St_A],
                [table.dE_St_C, table.dlam_St_C],
            ]
        )
        return res, jac

    point = np.asarray(seed, dtype=float)
    res, jac = evaluate(point)
    for _ in range(max_iter):
        norm = float(np.max(np.abs(res)))
        if norm < tol:
            return float(point[0]), float(point[1])
        step = np.linalg.solve(jac, -res)
        for _ in range(NEWTON_MAX_HALVINGS):
            trial = point + step
            try:
                trial_res, trial_jac = evaluate(trial)
            except QknhError:
                step *= 0.5
                continue
            if float(np.max(np.abs(trial_res))) < norm:
                break
            step *= 0.5
        else:
            raise NonConvergence("damped Newton step made no progress")
        point, res, jac = trial, trial_res, trial_jac
    if float(np.max(np.abs(res))) < tol:
        return float(point[0]), float(point[1])
    raise NonConvergence(f"no convergence in {max_iter} iterations")


def crossing_lattice(
    pot: Potential,
    lam_window,
    E_window,
    offsets: Optional[Tuple[int, int]] = None,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
    max_iter: int = NEWTON_MAX_ITER,
) -> List[CrossingNode]:
    """Returns all crossings of A and C levels inside the windows.

    Candidate quantum numbers come from the corrected actions on a grid
    over the windows. Each candidate is seeded by the affine prediction
    from the nearest grid point and polished by damped Newton. Seeds
    that do not converge are logged and skipped.

    Args:
        offsets (Optional[Tuple[int, int]]): (m0, n0). Defaults to the
            offsets that give label 0 to the levels nearest the quantum
            separatrix at the start of the lambda window.

    Returns:
        List[CrossingNode]: The nodes, sorted by lambda.
    """
    lam_lo, lam_hi = check_window("lam_window", lam_window)
    E_lo, E_hi = check_window("E_window", E_window)
    unit = math.pi * pot.hbar
    tol = LEVEL_RTOL * unit
    newton_settings = QuadratureSettings(
        settings.nodes, settings.panel, settings.lam_step, "analytic"
    )
    if offsets is None:
        try:
            offsets = label_offsets(pot, lam_lo, settings=settings)
        except QknhError as exc:
            logger.warning(
                "no label offsets at lambda=%g (%s); using absolute "
                "quantum numbers",
                lam_lo,
                exc,
            )
            offsets = (0, 0)
    offsets = (int(offsets[0]), int(offsets[1]))

    grid = []
    for lam in np.linspace(lam_lo, lam_hi, SEED_GRID):
        for E in np.linspace(E_lo, E_hi, SEED_GRID):
            try:
                grid.append(action_derivatives(pot, E, lam, newton_settings))
            except QknhError:
                continue
    if not grid:
        raise EmptyWindow(
            "no point of the windows lies in the double-well band"
        )
    qa = [_quantum_number(t.St_A, pot.hbar) for t in grid]
    qc = [_quantum_number(t.St_C, pot.hbar) for t in grid]

    nodes = {}
    for m_q in range(math.floor(min(qa)), math.ceil(max(qa)) + 1):
        for n_q in range(math.floor(min(qc)), math.ceil(max(qc)) + 1):
            targets = ((m_q + 0.5) * unit, (n_q + 0.5) * unit)
            anchor = min(
                grid,
                key=lambda t, ta=targets: abs(t.St_A - ta[0])
                + abs(t.St_C - ta[1]),
            )
            seed = affine_prediction(anchor, targets)
            if not _near_window(seed, (lam_lo, lam_hi), (E_lo, E_hi)):
                continue
            try:
                E, lam = _newton(
                    pot, targets, seed, tol, newton_settings, max_iter
                )
            except (NonConvergence, np.linalg.LinAlgError) as exc:
                logger.warning(
                    "node (%d,%d): %s",
                    m_q - offsets[0],
                    n_q - offsets[1],
                    exc,
                )
                continue
            except QknhError as exc:
                logger.debug(
                    "node (%d,%d): seed outside the double-well band (%s)",
                    m_q - offsets[0],
                    n_q - offsets[1],
                    exc,
                )
                continue
            if not (lam_lo <= lam <= lam_hi and E_lo <= E <= E_hi):
                continue
            nodes[(m_q, n_q)] = _make_node(
                pot, E, lam, (m_q, n_q), offsets, settings
            )
    return sorted(nodes.values(), key=lambda node: (node.lam, node.E))


def _near_window(seed, lam_window, E_window, margin=0.25) -> bool:
    E, lam = seed
    lam_pad = margin * (lam_window[1] - lam_window[0])
    E_pad = margin * (E_window[1] - E_window[0])
    return (
        lam_window[0] - lam_pad <= lam <= lam_window[1] + lam_pad
        and E_window[0] - E_pad <= E <= E_window[1] + E_pad
    )


def affine_prediction(
    table: ActionTable, targets: Tuple[float, float]
) -> Tuple[float, float]:
    """Returns the (E, lam) where the linearized corrected actions at
    `table` reach `targets`.

    With targets shifted by (m pi hbar, n pi hbar) from a crossing, this
    is the regular lattice of nearby crossings.
    """
    br = bracket(table, ActionSymbol.ST_A, ActionSymbol.ST_C)
    d_a = targets[0] - table.St_A
    d_c = targets[1] - table.St_C
    dE = (d_a * table.dlam_St_C - d_c * table.dlam_St_A) / br
    dlam = (d_c * table.dE_St_A - d_a * table.dE_St_C) / br
    return table.E + dE, table.lam + dlam


# =============================================================================


def local_params(
    pot: Potential,
    node: CrossingNode,
    rate: Optional[float] = None,
    settings: Optional[QuadratureSettings] = None,
) -> LatticeParams:
    """Returns the lattice parameters with the origin at `node`.

    X and Y come from expanding 2 T_b / hbar to first order over the
    affine lattice, so that exp(-Z exp(m X + n Y)) reproduces the
    diabatic probability at each nearby node:

        X = -2 pi [T_b, S~_C] / [S~_A, S~_C]
        Y = -2 pi [T_b, S~_A] / [S~_C, S~_A]

    Z is -ln P at the origin.
    """
    if rate is None:
        rate = pot.sweep.rate_at(node.lam)
    check_positive(rate=rate)
    table = node.table
    if settings is not None:
        table = action_derivatives(pot, node.E, node.lam, settings)
    br = bracket(table, ActionSymbol.ST_A, ActionSymbol.ST_C)
    X = -2 * math.pi * bracket(table, ActionSymbol.T_B, ActionSymbol.ST_C) / br
    Y = (
        -2
        * math.pi
        * bracket(table, ActionSymbol.T_B, ActionSymbol.ST_A)
        / bracket(table, ActionSymbol.ST_C, ActionSymbol.ST_A)
    )
    a, c = table.dE_St_A, table.dE_St_C
    return LatticeParams(
        E00=node.E,
        lam00=node.lam,
        X=X,
        Y=Y,
        Z=_neg_log_p(table, rate),
        bracket=br,
        dE_St_A=a,
        dE_St_C=c,
        Gamma=_gamma_rate(br, pot.hbar, X, Y, a, c),
        k=a / (a + c),
        rate=rate,
        hbar=pot.hbar,
    )


def diabatic_probability(
    pot: Potential,
    E: float,
    lam: float,
    rate: Optional[float] = None,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Returns P = exp(-pi hbar exp(-2 T_b/hbar) / (rate |[S~_A, S~_C]|)).

    `rate` defaults to the potential's sweep rate at lam.
    """
    if rate is None:
        rate = pot.sweep.rate_at(lam)
    check_positive(rate=rate)
    table = action_derivatives(pot, E, lam, settings)
    return math.exp(-_neg_log_p(table, rate))


def _log_neg_log_p(
    pot: Potential, E: float, lam: float, rate: float, settings
) -> float:
    table = action_derivatives(pot, E, lam, settings)
    br = abs(bracket(table, ActionSymbol.ST_A, ActionSymbol.ST_C))
    return (
        math.log(math.pi * pot.hbar / (rate * br)) - 2 * table.T_b / pot.hbar
    )


def separatrix_energy(
    pot: Potential,
    lam: float,
    rate: Optional[float] = None,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Returns the quantum separatrix energy E_s, where P(E_s) = 1/e.

    The band below the barrier is scanned in 64 steps for the sign
    change of ln(-ln P), which is then bracketed by Brent's method.

    Raises:
        NoBarrier: If there is no barrier at lam.
        NoRoot: If P stays on one side of 1/e over the whole band.
    """
    if rate is None:
        rate = pot.sweep.rate_at(lam)
    check_positive(rate=rate)
    lo, hi = _energy_band(pot, lam)
    if not math.isfinite(hi):
        raise NoBarrier(f"no barrier at lambda={lam}")
    margin = 1e-6 * (hi - lo)
    grid = np.linspace(lo + margin, hi - margin, SEPARATRIX_SCAN_STEPS + 1)

    def g(E):
        return _log_neg_log_p(pot, E, lam, rate, settings)

    values = [g(E) for E in grid]
    for i in range(SEPARATRIX_SCAN_STEPS):
        if values[i] == 0:
            return float(grid[i])
        if values[i] * values[i + 1] < 0:
            return brentq(g, grid[i], grid[i + 1], xtol=_ENERGY_XTOL)
    if values[-1] < 0:
        raise NoRoot(
            f"P > 1/e up to the barrier top at lambda={lam}: the sweep "
            f"rate {rate} is too fast for a separatrix below the barrier"
        )
    raise NoRoot(
        f"P < 1/e down to the well bottom at lambda={lam} "
        f"(rate {rate})"
    )


def separatrix_curve(
    pot: Potential,
    lams: Sequence[float],
    rate: Optional[float] = None,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> List[Tuple[float, float, float]]:
    """Returns (lam, E_s, V_b) rows; E_s is NaN where there is no root."""
    rows = []
    for lam in lams:
        lam = float(lam)
        v_b = _energy_band(pot, lam)[1]
        try:
            e_s = separatrix_energy(pot, lam, rate, settings)
        except NoRoot as exc:
            logger.info("no separatrix at lambda=%g: %s", lam, exc)
            e_s = math.nan
        rows.append((lam, e_s, v_b))
    return rows


def label_offsets(
    pot: Potential,
    lam: float,
    rate: Optional[float] = None,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> Tuple[int, int]:
    """Returns (m0, n0), the quantum numbers of the A and C levels
    nearest the quantum separatrix at lam.

    A separatrix exactly halfway between two levels picks the lower one.
    """
    e_s = separatrix_energy(pot, lam, rate, settings)
    offsets = []
    for side in Branch:
        q = _quantum_number(
            corrected_action(pot, e_s, lam, side, settings), pot.hbar
        )
        offsets.append(math.ceil(q - 0.5))
    return offsets[0], offsets[1]


def nearest_to_separatrix(nodes: Sequence[CrossingNode]) -> CrossingNode:
    """Returns the node whose P is closest to 1/e in log scale.

    Ties go to the lower energy.
    """
    if not nodes:
        raise EmptyWindow("no crossing nodes to choose from")
    return min(
        nodes,
        key=lambda node: (
            abs(math.log(node.neg_log_p)) if node.neg_log_p > 0 else math.inf,
            node.E,
        ),
    )


# =============================================================================


def min_gap(node: CrossingNode) -> float:
    """Returns the minimum gap hbar gamma at a node."""
    return node.gap


def two_state_levels(node: CrossingNode, lam: float) -> Tuple[float, float]:
    """Returns the two eigenvalues of the local two-state Hamiltonian
    at lam, lower first.
    """
    s_a = level_slope(node.table, Branch.A)
    s_c = level_slope(node.table, Branch.C)
    d_lam = lam - node.lam
    mean = node.E + 0.5 * d_lam * (s_a + s_c)
    half = 0.5 * math.hypot(d_lam * (s_a - s_c), node.gap)
    return mean - half, mean + half


def landau_zener_probability(
    node: CrossingNode, rate: Optional[float] = None
) -> float:
    """Returns the Landau-Zener diabatic probability of the local
    two-state Hamiltonian.

    The Hamiltonian has off-diagonal hbar gamma / 2 and a diabatic gap
    that opens at rate hbar nu**2 = rate |dE_A/dlam - dE_C/dlam|, so

        P = exp(-2 pi (hbar gamma / 2)**2 / (hbar * hbar nu**2)).
    """
    if rate is None:
        rate = node.rate
    check_positive(rate=rate)
    hbar = node.table.hbar
    slope_gap = abs(
        level_slope(node.table, Branch.A) - level_slope(node.table, Branch.C)
    )
    nu2 = rate * slope_gap / hbar
    return math.exp(-0.5 * math.pi * node.gamma**2 / nu2)
