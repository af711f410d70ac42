"""
Classical and quantum-corrected action integrals.

The well actions S_A, S_C and the tunneling action T_b are integrals of
the classical momentum between turning points. The corrected actions
S~ = S - (hbar/2) Phi absorb the barrier phase, which keeps their energy
derivatives finite through the barrier top.
"""

# =============================================================================

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import loggamma, psi

from qknh._quadrature import endpoint_rule
from qknh.errors import DegenerateEnergy, EnergyOutOfRange, NoBarrier
from qknh.potential import (
    ROOT_XTOL,
    BarrierInfo,
    Potential,
    barrier_top,
    turning_points,
    well_minima,
)
from qknh.utils import ActionSymbol, Branch

# =============================================================================

__all__ = (
    "QuadratureSettings",
    "ActionTable",
    "SeparatrixLobe",
    "well_action",
    "tunneling_action",
    "phase_from_tunneling",
    "barrier_phase",
    "corrected_action",
    "action_derivatives",
    "bracket",
    "level_slope",
    "slope_bracket_identity",
    "separatrix_action",
)

# =============================================================================

LAMBDA_SCHEMES = ("difference", "analytic")

# =============================================================================


@dataclass(frozen=True)
class QuadratureSettings:
    """Numerical knobs for the action integrals.

    Attributes:
        nodes (int): Gauss-Legendre nodes per panel.
        panel (float): Panel width in the graded variable.
        lam_step (float): Relative lambda step for central differences.
        lam_scheme (str): "difference" (4th-order central differences)
            or "analytic" (lambda derivative under the integral).
    """

    nodes: int = 16
    panel: float = 0.5
    lam_step: float = 1e-4
    lam_scheme: str = "difference"

    def __post_init__(self):
        if self.nodes < 2:
            raise ValueError("`nodes` must be at least 2")
        if not self.panel > 0:
            raise ValueError("`panel` must be positive")
        if not self.lam_step > 0:
            raise ValueError("`lam_step` must be positive")
        if self.lam_scheme not in LAMBDA_SCHEMES:
            raise ValueError(
                f"`lam_scheme` must be one of {LAMBDA_SCHEMES} "
                f"(got {self.lam_scheme!r})"
            )

    def doubled(self) -> "QuadratureSettings":
        """Returns settings with twice the nodes per panel."""
        return QuadratureSettings(
            2 * self.nodes, self.panel, self.lam_step, self.lam_scheme
        )


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class ActionTable:
    """Actions, barrier phase, and their partial derivatives at (E, lam).

    Corrected actions use the prefix `St` (S tilde). For a potential
    without a barrier, T_b is infinite and Phi vanishes.
    """

    E: float
    lam: float
    hbar: float
    S_A: float
    S_C: float
    T_b: float
    phi: float
    dE_S_A: float
    dE_S_C: float
    dE_T_b: float
    dE_phi: float
    dlam_S_A: float
    dlam_S_C: float
    dlam_T_b: float
    dlam_phi: float
    St_A: float = field(init=False)
    St_C: float = field(init=False)
    dE_St_A: float = field(init=False)
    dE_St_C: float = field(init=False)
    dlam_St_A: float = field(init=False)
    dlam_St_C: float = field(init=False)

    def __post_init__(self):
        h2 = 0.5 * self.hbar
        # frozen dataclass: derived fields are set through object
        object.__setattr__(self, "St_A", self.S_A - h2 * self.phi)
        object.__setattr__(self, "St_C", self.S_C - h2 * self.phi)
        object.__setattr__(self, "dE_St_A", self.dE_S_A - h2 * self.dE_phi)
        object.__setattr__(self, "dE_St_C", self.dE_S_C - h2 * self.dE_phi)
        object.__setattr__(
            self, "dlam_St_A", self.dlam_S_A - h2 * self.dlam_phi
        )
        object.__setattr__(
            self, "dlam_St_C", self.dlam_S_C - h2 * self.dlam_phi
        )

    def value(self, symbol) -> float:
        """Returns the value of the named action."""
        return getattr(self, ActionSymbol.parse(symbol).value)

    def d_energy(self, symbol) -> float:
        """Returns the energy derivative of the named action."""
        return getattr(self, "dE_" + ActionSymbol.parse(symbol).value)

    def d_lambda(self, symbol) -> float:
        """Returns the lambda derivative of the named action."""
        return getattr(self, "dlam_" + ActionSymbol.parse(symbol).value)


@dataclass(frozen=True)
class SeparatrixLobe:
    """Area of one separatrix lobe and its total lambda derivative."""

    side: Branch
    lam: float
    area: float
    d_area: float


# =============================================================================


def _barrier_or_none(pot: Potential, lam: float) -> Optional[BarrierInfo]:
    try:
        return barrier_top(pot, lam)
    except NoBarrier:
        return None


def _well_interval(
    pot: Potential, E: float, lam: float, side: Branch
) -> Tuple[float, float, Optional[float], Optional[float]]:
    """Returns (a, b, delta_a, delta_b) for the requested well."""
    side = Branch(side)
    points = turning_points(pot, E, lam)
    if len(points) == 4:
        x1, x2, x3, x4 = points
        if side is Branch.A:
            return x1, x2, None, x3 - x2
        return x3, x4, x3 - x2, None
    if len(points) == 2:
        barrier = _barrier_or_none(pot, lam)
        x1, x2 = points
        if barrier is None:
            return x1, x2, None, None
        if E < barrier.height:
            in_a = x2 < barrier.x0
            if in_a == (side is Branch.A):
                return x1, x2, None, None
    raise EnergyOutOfRange(
        f"no classically allowed interval for well {side.value} at "
        f"E={E}, lambda={lam}"
    )


def _momentum(pot: Potential, E: float, x: np.ndarray, lam: float):
    gap = E - pot.value(x, lam)
    return np.sqrt(2 * pot.mass * np.maximum(gap, 0.0))


def _inverse(mass: float, p: np.ndarray) -> np.ndarray:
    """Returns mass / p, with zero where rounding leaves p at zero."""
    return np.divide(mass, p, out=np.zeros_like(p), where=p > 0)


def _well_integrals(
    pot: Potential,
    E: float,
    lam: float,
    side: Branch,
    settings: QuadratureSettings,
) -> Tuple[float, float, float]:
    """Returns S, dS/dE, and dS/dlam (under the integral) for a well."""
    a, b, da, db = _well_interval(pot, E, lam, side)
    x, w = endpoint_rule(a, b, da, db, settings.nodes, settings.panel)
    p = _momentum(pot, E, x, lam)
    inv = _inverse(pot.mass, p)
    action = float(np.dot(w, p))
    period = float(np.dot(w, inv))
    dlam = -float(np.dot(w, inv * pot.dlam(x, lam)))
    return action, period, dlam


def _barrier_interval(pot: Potential, E: float, lam: float):
    points = turning_points(pot, E, lam)
    if len(points) != 4:
        raise EnergyOutOfRange(
            f"tunneling action needs E below the barrier "
            f"(E={E}, lambda={lam})"
        )
    x1, x2, x3, x4 = points
    return x2, x3, x2 - x1, x4 - x3


def _barrier_integrals(
    pot: Potential, E: float, lam: float, settings: QuadratureSettings
) -> Tuple[float, float, float]:
    """Returns T_b, dT_b/dE, and dT_b/dlam (under the integral)."""
    a, b, da, db = _barrier_interval(pot, E, lam)
    x, w = endpoint_rule(a, b, da, db, settings.nodes, settings.panel)
    q = np.sqrt(2 * pot.mass * np.maximum(pot.value(x, lam) - E, 0.0))
    inv = _inverse(pot.mass, q)
    tunnel = float(np.dot(w, q))
    d_energy = -float(np.dot(w, inv))
    d_lam = float(np.dot(w, inv * pot.dlam(x, lam)))
    return tunnel, d_energy, d_lam


# =============================================================================


def well_action(
    pot: Potential,
    E: float,
    lam: float,
    side,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Returns the classical action of one well.

    S = integral of sqrt(2 mu (E - V)) over the classically allowed
    interval of well A (left) or C (right).

    Raises:
        DegenerateEnergy: If E sits on a critical value of V.
        EnergyOutOfRange: If the well has no allowed interval at E.
    """
    return _well_integrals(pot, E, lam, Branch(side), settings)[0]


def tunneling_action(
    pot: Potential,
    E: float,
    lam: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Returns T_b, the integral of sqrt(2 mu (V - E)) under the barrier.

    Raises:
        DegenerateEnergy: If E equals the barrier height.
        EnergyOutOfRange: If E is not below the barrier.
    """
    return _barrier_integrals(pot, E, lam, settings)[0]


def phase_from_tunneling(tunnel: float, hbar: float) -> Tuple[float, float]:
    """Returns Phi and dPhi/dT_b for a tunneling action.

    Phi = arg Gamma(1/2 - i y) + y (ln y - 1) with y = T_b / (pi hbar).
    """
    if math.isinf(tunnel):
        return 0.0, 0.0
    if tunnel < 0:
        raise ValueError(f"`tunnel` must be nonnegative (got {tunnel})")
    y = tunnel / (math.pi * hbar)
    if y == 0:
        # the derivative diverges logarithmically at the barrier top
        return 0.0, -math.inf
    z = 0.5 - 1j * y
    phi = float(loggamma(z).imag) + y * (math.log(y) - 1)
    dphi_dy = math.log(y) - float(psi(z).real)
    return phi, dphi_dy / (math.pi * hbar)


def barrier_phase(
    E: float,
    lam: float,
    pot: Potential,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Returns the barrier phase Phi at (E, lam)."""
    if _barrier_or_none(pot, lam) is None:
        return 0.0
    return phase_from_tunneling(
        tunneling_action(pot, E, lam, settings), pot.hbar
    )[0]


def corrected_action(
    pot: Potential,
    E: float,
    lam: float,
    side,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Returns S~ = S - (hbar/2) Phi for one well."""
    action = well_action(pot, E, lam, side, settings)
    return action - 0.5 * pot.hbar * barrier_phase(E, lam, pot, settings)


def _central_difference(f, x: float, h: float) -> float:
    """4th-order central difference of f at x."""
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (
        12 * h
    )


def action_derivatives(
    pot: Potential,
    E: float,
    lam: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> ActionTable:
    """Returns the full ActionTable at (E, lam).

    Energy derivatives are period integrals. Lambda derivatives use
    `settings.lam_scheme`.

    Raises:
        DegenerateEnergy: If E sits on a critical value of V.
        EnergyOutOfRange: If E is outside the four-turning-point band
            of a double well.
    """
    s_a, de_a, dl_a = _well_integrals(pot, E, lam, Branch.A, settings)
    s_c, de_c, dl_c = _well_integrals(pot, E, lam, Branch.C, settings)
    has_barrier = _barrier_or_none(pot, lam) is not None
    if has_barrier:
        t_b, de_t, dl_t = _barrier_integrals(pot, E, lam, settings)
    else:
        t_b, de_t, dl_t = math.inf, 0.0, 0.0

    if settings.lam_scheme == "difference":
        h = settings.lam_step * max(1.0, abs(lam))

        def diff(func, fallback):
            # the stencil can leave the band next to a critical value
            try:
                return _central_difference(func, lam, h)
            except (DegenerateEnergy, EnergyOutOfRange):
                return fallback

        dl_a = diff(
            lambda l: well_action(pot, E, l, Branch.A, settings), dl_a
        )
        dl_c = diff(
            lambda l: well_action(pot, E, l, Branch.C, settings), dl_c
        )
        if has_barrier:
            dl_t = diff(
                lambda l: tunneling_action(pot, E, l, settings), dl_t
            )

    phi, dphi_dt = phase_from_tunneling(t_b, pot.hbar)
    if has_barrier:
        de_phi, dl_phi = dphi_dt * de_t, dphi_dt * dl_t
    else:
        de_phi, dl_phi = 0.0, 0.0
    return ActionTable(
        E=E,
        lam=lam,
        hbar=pot.hbar,
        S_A=s_a,
        S_C=s_c,
        T_b=t_b,
        phi=phi,
        dE_S_A=de_a,
        dE_S_C=de_c,
        dE_T_b=de_t,
        dE_phi=de_phi,
        dlam_S_A=dl_a,
        dlam_S_C=dl_c,
        dlam_T_b=dl_t,
        dlam_phi=dl_phi,
    )


def bracket(table: ActionTable, F, G) -> float:
    """Returns the bracket [F, G] = dE F dlam G - dE G dlam F.

    Raises:
        UnknownSymbol: If F or G names no action.
    """
    F = ActionSymbol.parse(F)
    G = ActionSymbol.parse(G)
    return table.d_energy(F) * table.d_lambda(G) - table.d_energy(
        G
    ) * table.d_lambda(F)


def level_slope(table: ActionTable, side) -> float:
    """Returns dE/dlam = -dlam S~ / dE S~ along a branch level."""
    st = ActionSymbol.ST_A if Branch(side) is Branch.A else ActionSymbol.ST_C
    return -table.d_lambda(st) / table.d_energy(st)


def slope_bracket_identity(table: ActionTable) -> Tuple[float, float]:
    """Returns both sides of dE S~_A dE S~_C |dE_A/dlam - dE_C/dlam|
    = |[S~_A, S~_C]|.
    """
    lhs = (
        table.dE_St_A
        * table.dE_St_C
        * abs(level_slope(table, Branch.A) - level_slope(table, Branch.C))
    )
    rhs = abs(bracket(table, ActionSymbol.ST_A, ActionSymbol.ST_C))
    return lhs, rhs


# =============================================================================


def _outer_root(pot: Potential, level: float, lam: float, x_min, step):
    """Returns the root of V = level beyond a well minimum."""

    def f(x):
        return float(pot.value(x, lam)) - level

    x = x_min
    for _ in range(200):
        far = x + step
        if f(far) > 0:
            return brentq(f, min(x, far), max(x, far), xtol=ROOT_XTOL)
        x = far
        step *= 2
    raise EnergyOutOfRange(f"no outer turning point at lambda={lam}")


def separatrix_action(
    pot: Potential,
    lam: float,
    side,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> SeparatrixLobe:
    """Returns the area of one separatrix lobe at E = V_b(lam).

    The total derivative d/dlam S(V_b(lam), lam) is evaluated as one
    integral of mu (dV_b/dlam - dV/dlam) / p, in which the divergent
    parts of dS/dlam and dS/dE dV_b/dlam cancel.

    Raises:
        NoBarrier: If V has no barrier at lam.
    """
    side = Branch(side)
    barrier = barrier_top(pot, lam)
    minima = well_minima(pot, lam)
    x0, v_b = barrier.x0, barrier.height
    scale = max(1.0, minima[-1][0] - minima[0][0])
    if side is Branch.A:
        x_min = minima[0][0]
        a = _outer_root(pot, v_b, lam, x_min, -scale)
        b = x0
        x, w = endpoint_rule(a, b, None, b - a, settings.nodes, settings.panel)
    else:
        x_min = minima[-1][0]
        b = _outer_root(pot, v_b, lam, x_min, scale)
        a = x0
        x, w = endpoint_rule(a, b, b - a, None, settings.nodes, settings.panel)
    p = _momentum(pot, v_b, x, lam)
    area = float(np.dot(w, p))
    dvb = float(pot.dlam(x0, lam))
    integrand = _inverse(pot.mass, p) * (dvb - pot.dlam(x, lam))
    return SeparatrixLobe(
        side=side, lam=lam, area=area, d_area=float(np.dot(w, integrand))
    )
