"""
Classical and quantum separatrix-crossing predictions.

Transition probabilities out of a shrinking region equal the ratios of
the growth rates of the regions that receive it. Classically the rates
are lobe-area derivatives at the barrier energy; in the quantum lattice
they are the rates at which levels enter each subspace.
"""

# =============================================================================

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from qknh.errors import (
    AllGrowing,
    CaseViolation,
    DegenerateCase,
    NonConvergence,
)
from qknh.potential import Potential
from qknh.semiclassics import (
    DEFAULT_SETTINGS,
    QuadratureSettings,
    separatrix_action,
)
from qknh.spectrum import LatticeParams
from qknh.utils import Branch, Subspace, check_probability

# =============================================================================

__all__ = (
    "TransitionMap",
    "GrowthRates",
    "ClassicalKnh",
    "GeometrySummary",
    "GeometryPoints",
    "StrongPrediction",
    "classical_knh",
    "growth_rates",
    "knh_predict",
    "subspace_geometry",
    "lattice_geometry_points",
    "weak_bounds",
    "strong_prediction",
    "prediction_report",
)

# =============================================================================

DEGENERATE_TOL = 1e-12
STERN_BROCOT_MAX_STEPS = 1_000_000

TransitionMap = Dict[Subspace, Dict[Subspace, float]]

# =============================================================================


def _case_tag(rates: Dict[Subspace, float]) -> str:
    shrinking = [s.value for s in Subspace if rates[s] < 0]
    growing = [s.value for s in Subspace if rates[s] > 0]
    parts = []
    if shrinking:
        parts.append(f"{', '.join(shrinking)} shrinking")
    if growing:
        parts.append(f"{', '.join(growing)} growing")
    return "; ".join(parts) if parts else "static"


def _transition_map(rates: Dict[Subspace, float]) -> TransitionMap:
    """Splits each shrinking subspace among the growing ones in
    proportion to their rates. Other subspaces keep their states.

    Raises:
        AllGrowing: If no subspace shrinks.
    """
    growing = {s: r for s, r in rates.items() if r > 0}
    if not growing or all(r >= 0 for r in rates.values()):
        raise AllGrowing(
            f"no subspace shrinks (rates {_format_rates(rates)})"
        )
    total = sum(growing.values())
    transitions = {}
    for src in Subspace:
        if rates[src] < 0:
            row = {dst: growing.get(dst, 0.0) / total for dst in Subspace}
        else:
            row = {dst: float(dst is src) for dst in Subspace}
        transitions[src] = row
    return transitions


def _format_rates(rates: Dict[Subspace, float]) -> str:
    return ", ".join(f"{s.value}={r:.6g}" for s, r in rates.items())


def _map_to_dict(transitions: TransitionMap) -> Dict[str, float]:
    return {
        f"{src.value}->{dst.value}": p
        for src, row in transitions.items()
        for dst, p in row.items()
    }


# =============================================================================


@dataclass(frozen=True)
class ClassicalKnh:
    """The classical transition map at one lambda.

    Attributes:
        lam (float): The parameter value.
        rates (Dict[Subspace, float]): Area growth rates of A, B, C.
        transitions (TransitionMap): The transition probabilities.
        value (float): -dS_C/dlam / dS_A/dlam, the A to C probability
            when A shrinks and C grows.
        violation (bool): Whether the rates break that sign pattern.
    """

    lam: float
    rates: Dict[Subspace, float]
    transitions: TransitionMap
    value: float
    violation: bool

    @property
    def case(self) -> str:
        """Which regions shrink and which grow."""
        return _case_tag(self.rates)

    @property
    def clamped(self) -> float:
        """The A to C value clamped to [0, 1]."""
        return min(1.0, max(0.0, self.value))

    def check(self):
        """Raises CaseViolation if A is not shrinking into a growing C."""
        if self.violation:
            raise CaseViolation(
                f"A to C needs A shrinking and C growing at "
                f"lambda={self.lam} ({_format_rates(self.rates)})"
            )


def classical_knh(
    pot: Potential,
    lam: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
    strict: bool = False,
) -> ClassicalKnh:
    """Returns the classical transition map at the barrier energy.

    The lobe rates are total derivatives d/dlam S(V_b(lam), lam), and
    region B, outside both lobes, gains what they lose.

    Args:
        strict (bool): Raise instead of flagging a sign pattern in which
            A does not shrink into a growing C.

    Raises:
        NoBarrier: If there is no barrier at lam.
        CaseViolation: If `strict` and the sign pattern is violated.
        AllGrowing: If no region shrinks.
    """
    r_a = separatrix_action(pot, lam, Branch.A, settings).d_area
    r_c = separatrix_action(pot, lam, Branch.C, settings).d_area
    rates = {Subspace.A: r_a, Subspace.B: -(r_a + r_c), Subspace.C: r_c}
    value = -r_c / r_a if r_a != 0 else math.nan
    result = ClassicalKnh(
        lam=lam,
        rates=rates,
        transitions=_transition_map(rates),
        value=value,
        violation=not (r_a < 0 < r_c),
    )
    if strict:
        result.check()
    return result


# =============================================================================


@dataclass(frozen=True)
class GrowthRates:
    """Rates at which levels enter the subspaces A, B, C.

    Attributes:
        dD_A (float): Levels per unit lambda entering A.
        dD_B (float): Levels per unit lambda entering B.
        dD_C (float): Levels per unit lambda entering C.
        Gamma (float): Separatrix advance in lattice units per lambda.
    """

    dD_A: float
    dD_B: float
    dD_C: float
    Gamma: float

    def by_subspace(self) -> Dict[Subspace, float]:
        """Returns the rates keyed by subspace."""
        return {
            Subspace.A: self.dD_A,
            Subspace.B: self.dD_B,
            Subspace.C: self.dD_C,
        }

    @property
    def total(self) -> float:
        """The sum of the three rates; exactly zero."""
        return (self.dD_A + self.dD_C) + self.dD_B

    @property
    def case(self) -> str:
        """Which subspaces shrink and which grow."""
        return _case_tag(self.by_subspace())

    def to_dict(self) -> dict:
        """Returns the rates as a JSON-ready dict."""
        return {
            "dD_A": self.dD_A,
            "dD_B": self.dD_B,
            "dD_C": self.dD_C,
            "Gamma": self.Gamma,
            "case": self.case,
        }


def growth_rates(params: LatticeParams) -> GrowthRates:
    """Returns dD_A = -Gamma Y, dD_C = Gamma X, and dD_B, which makes
    the three sum to zero.

    Raises:
        DegenerateCase: If X and Y both vanish, or X a + Y c does.
    """
    X, Y = params.X, params.Y
    if abs(X) < DEGENERATE_TOL and abs(Y) < DEGENERATE_TOL:
        raise DegenerateCase(f"X and Y both vanish (X={X}, Y={Y})")
    if not math.isfinite(params.Gamma):
        raise DegenerateCase(
            "the separatrix does not advance in lambda "
            f"(X={X}, Y={Y}, dE_St_A={params.dE_St_A}, "
            f"dE_St_C={params.dE_St_C})"
        )
    gamma = params.Gamma
    dD_A = -gamma * Y
    dD_C = gamma * X
    return GrowthRates(
        dD_A=dD_A, dD_B=-(dD_A + dD_C), dD_C=dD_C, Gamma=gamma
    )


def knh_predict(params: LatticeParams) -> TransitionMap:
    """Returns the transition map between the subspaces.

    A single shrinking subspace splits among the growing ones in
    proportion to their rates; with two shrinking, both go entirely to
    the growing one.

    Raises:
        DegenerateCase: See `growth_rates()`.
        AllGrowing: If no subspace shrinks.
    """
    return _transition_map(growth_rates(params).by_subspace())


# =============================================================================


@dataclass(frozen=True)
class GeometrySummary:
    """Level counts of an ensemble that has just entered the zone.

    N levels end below the zone and K above; dN and dK are what the
    integer counts differ from their continuous values.
    """

    M: int
    D: float
    N: int
    K: int
    dN: float
    dK: float
    k: float
    ratio: float

    def to_dict(self) -> dict:
        """Returns the summary as a JSON-ready dict."""
        return {
            "M": self.M,
            "D": self.D,
            "N": self.N,
            "K": self.K,
            "dN": self.dN,
            "dK": self.dK,
            "k": self.k,
        }


def _round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


def _check_geometry_args(M: int, D: float, params: LatticeParams):
    if M < 1:
        raise ValueError(f"`M` must be at least 1 (got {M})")
    if not D >= 0:
        raise ValueError(f"`D` must be nonnegative (got {D})")
    if not 0 < params.X < params.Y:
        raise ValueError(
            f"`params` must satisfy 0 < X < Y (got X={params.X}, "
            f"Y={params.Y})"
        )


def subspace_geometry(
    M: int, D: float, params: LatticeParams
) -> GeometrySummary:
    """Returns N = M X/Y + dN and K = (M - k D)(1 - X/Y) + dK."""
    _check_geometry_args(M, D, params)
    ratio = params.X / params.Y
    n_exact = M * ratio
    k_exact = (M - params.k * D) * (1 - ratio)
    N = _round_half_up(n_exact)
    K = _round_half_up(k_exact)
    return GeometrySummary(
        M=M,
        D=D,
        N=N,
        K=K,
        dN=N - n_exact,
        dK=K - k_exact,
        k=params.k,
        ratio=ratio,
    )


@dataclass(frozen=True)
class GeometryPoints:
    """The construction points in (n, m) coordinates.

    a is where the ensemble meets the zone, b the top of the ensemble,
    d the far side of the zone from a along constant lambda, c the
    corner over the ensemble on the far side, and e the point over c on
    the constant-lambda line through a.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray

    @property
    def N(self) -> float:
        """Levels below the zone."""
        return float(self.a[0])

    @property
    def D(self) -> float:
        """Levels across the zone."""
        return float(np.sum(self.d - self.a))

    @property
    def K(self) -> float:
        """Levels above the zone."""
        return float(np.sum(self.e - self.d))


def _intersect(p0, v0, p1, v1) -> np.ndarray:
    """Returns the point where p0 + s v0 meets p1 + t v1."""
    s, _ = np.linalg.solve(np.column_stack((v0, -v1)), p1 - p0)
    return p0 + s * v0


def lattice_geometry_points(
    M: int, D: float, params: LatticeParams
) -> GeometryPoints:
    """Returns the points a to e by intersecting the construction lines.

    The zone runs along (X, -Y) in (n, m) and lines of constant lambda
    along (dE S~_C, dE S~_A).
    """
    _check_geometry_args(M, D, params)
    X, Y = params.X, params.Y
    along_zone = np.array([X, -Y])
    along_lam = np.array([params.dE_St_C, params.dE_St_A])
    a = np.array([M * X / Y, 0.0])
    b = np.array([0.0, float(M)])
    d = a + D * along_lam / along_lam.sum()
    c = _intersect(b, np.array([1.0, 0.0]), d, along_zone)
    e = _intersect(c, np.array([1.0, -1.0]), a, along_lam)
    return GeometryPoints(a=a, b=b, c=c, d=d, e=e)


# =============================================================================


def weak_bounds(
    M: int, D: float, params: LatticeParams
) -> Tuple[float, float]:
    """Returns X/Y -+ (D + 1)/M, clipped to [0, 1]."""
    if M < 1:
        raise ValueError(f"`M` must be positive (got {M})")
    ratio = params.X / params.Y
    half = (D + 1) / M
    return max(0.0, ratio - half), min(1.0, ratio + half)


@dataclass(frozen=True)
class StrongPrediction:
    """The exact prediction X/Y and the lattice period.

    q/p is the simplest fraction within the tolerance of X/Y. The lattice
    repeats after p steps along the A lines, so the prediction is exact
    for ensembles of M = J p lines.
    """

    q: int
    p: int
    value: float

    @property
    def period(self) -> int:
        """The lattice period in A lines."""
        return self.p

    def is_exact_for(self, M: int) -> bool:
        """Returns whether M is a whole number of periods."""
        return M > 0 and M % self.p == 0

    def periods(self, M: int) -> float:
        """Returns J = M / p."""
        return M / self.p

    def to_dict(self) -> dict:
        """Returns the prediction as a JSON-ready dict."""
        return {"q": self.q, "p": self.p, "value": self.value}


def _simplest_fraction(x: float, tol: float) -> Tuple[int, int]:
    """Walks the Stern-Brocot tree toward x until a fraction is within
    tol. Every fraction on that path is a convergent or semiconvergent.
    """
    lo, hi = (0, 1), (1, 1)
    for end in (lo, hi):
        if abs(x - end[0] / end[1]) < tol:
            return end
    for _ in range(STERN_BROCOT_MAX_STEPS):
        q, p = lo[0] + hi[0], lo[1] + hi[1]
        if abs(x - q / p) < tol:
            return q, p
        if q / p < x:
            lo = (q, p)
        else:
            hi = (q, p)
    raise NonConvergence(f"no fraction within {tol} of {x}")


def strong_prediction(
    params: LatticeParams, tol: float = 1e-3
) -> StrongPrediction:
    """Returns the simplest q/p within `tol` of X/Y and the exact value.

    Raises:
        ValueError: Unless 0 < X < Y and tol > 0.
    """
    if not 0 < params.X < params.Y:
        raise ValueError(
            f"`params` must satisfy 0 < X < Y (got X={params.X}, "
            f"Y={params.Y})"
        )
    if not tol > 0:
        raise ValueError(f"`tol` must be positive (got {tol})")
    ratio = params.X / params.Y
    q, p = _simplest_fraction(ratio, tol)
    return StrongPrediction(q=q, p=p, value=ratio)


def prediction_report(
    params: LatticeParams,
    M: int,
    D: float,
    tol: float = 1e-3,
    measured: Optional[float] = None,
) -> dict:
    """Returns the prediction report as a JSON-ready dict.

    `measured`, a simulated A to C probability, is compared with the
    predictions when given.
    """
    rates = growth_rates(params)
    report = {
        "case": rates.case,
        "rates": rates.to_dict(),
        "P_map": _map_to_dict(knh_predict(params)),
        "weak_interval": list(weak_bounds(M, D, params)),
    }
    if 0 < params.X < params.Y:
        strong = strong_prediction(params, tol)
        report["strong"] = strong.to_dict()
        report["strong"]["exact_for_M"] = strong.is_exact_for(M)
        report["strong"]["J"] = strong.periods(M)
        report["geometry"] = subspace_geometry(M, D, params).to_dict()
    else:
        report["strong"] = None
    if measured is not None:
        check_probability(measured=measured)
        low, high = report["weak_interval"]
        report["measured"] = {
            "p_minus": measured,
            "within_weak": low <= measured <= high,
        }
    return report
