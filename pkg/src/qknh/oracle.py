"""
Exact reference spectra from a finite-difference Hamiltonian.

H = -(hbar**2 / 2 mu) d**2/dx**2 + V(x, lam) is discretized on a uniform
grid between hard walls with the 3-point stencil and diagonalized as a
symmetric tridiagonal matrix.
"""

# =============================================================================

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar

from qknh.errors import GridTooSmall, NoBarrier, QknhError, TrackingLoss
from qknh.potential import Potential, barrier_top, turning_points
from qknh.semiclassics import bracket, level_slope
from qknh.spectrum import CrossingNode
from qknh.utils import ActionSymbol, Branch, check_positive, thread_count

# =============================================================================

__all__ = (
    "GridSpec",
    "GapResult",
    "SpectrumSheet",
    "default_grid",
    "exact_spectrum",
    "scan_halfwidth",
    "gap_scan",
    "spectrum_sheet",
    "level_errors",
)

# =============================================================================

logger = logging.getLogger(__name__)

MIN_POINTS = 200
DEFAULT_POINTS = 4000
DECAY_LENGTHS = 8
BOUNDARY_MASS_TOL = 1e-8
# gaps below this, relative to the level energy, are not resolved
GAP_RESOLUTION = 1e-12
BOUNDARIES = ("hard-wall",)
# characteristic widths of an avoided crossing covered by a gap scan
SCAN_WIDTHS = 10

# =============================================================================


@dataclass(frozen=True)
class GridSpec:
    """A uniform grid of interior points between two hard walls.

    The wavefunction vanishes at x_min and x_max; the `points` interior
    points are spaced (x_max - x_min) / (points + 1) apart.
    """

    x_min: float
    x_max: float
    points: int = DEFAULT_POINTS
    boundary: str = "hard-wall"

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid ends must be finite")
        if not self.x_min < self.x_max:
            raise ValueError(
                f"`x_min` must be below `x_max` (got {self.x_min}, "
                f"{self.x_max})"
            )
        if self.points < MIN_POINTS:
            raise ValueError(
                f"`points` must be at least {MIN_POINTS} (got {self.points})"
            )
        if self.boundary not in BOUNDARIES:
            raise ValueError(
                f"`boundary` must be one of {BOUNDARIES} "
                f"(got {self.boundary!r})"
            )

    @property
    def spacing(self) -> float:
        """The distance between neighboring points."""
        return (self.x_max - self.x_min) / (self.points + 1)

    def nodes(self) -> np.ndarray:
        """Returns the interior points."""
        return self.x_min + self.spacing * np.arange(1, self.points + 1)

    def refined(self) -> "GridSpec":
        """Returns the grid with half the spacing."""
        return GridSpec(
            self.x_min, self.x_max, 2 * self.points + 1, self.boundary
        )


def default_grid(
    pot: Potential,
    lam: float,
    E_max: float,
    points: int = DEFAULT_POINTS,
) -> GridSpec:
    """Returns a grid reaching 8 decay lengths past the outer turning
    points at E_max.

    The decay length at a turning point x_t is the Airy length
    (hbar**2 / (2 mu |V'(x_t)|))**(1/3).
    """
    xs = turning_points(pot, E_max, lam)
    ends = []
    for x_t in (xs[0], xs[-1]):
        slope = abs(float(pot.dx(x_t, lam)))
        length = (pot.hbar**2 / (2 * pot.mass * slope)) ** (1 / 3)
        ends.append(length)
    return GridSpec(
        xs[0] - DECAY_LENGTHS * ends[0],
        xs[-1] + DECAY_LENGTHS * ends[1],
        points,
    )


# =============================================================================


def _hamiltonian(pot: Potential, lam: float, grid: GridSpec):
    """Returns the diagonal and off-diagonal of H on the grid."""
    kinetic = pot.hbar**2 / (2 * pot.mass * grid.spacing**2)
    diag = 2 * kinetic + np.asarray(pot.value(grid.nodes(), lam), dtype=float)
    return diag, np.full(grid.points - 1, -kinetic)


def _eigenvalues(
    pot: Potential, lam: float, grid: GridSpec, lo: int, hi: int
) -> np.ndarray:
    diag, off = _hamiltonian(pot, lam, grid)
    return eigh_tridiagonal(
        diag,
        off,
        eigvals_only=True,
        select="i",
        select_range=(lo, hi),
        lapack_driver="stebz",
    )


def _boundary_mass(pot: Potential, lam: float, E: float, grid: GridSpec):
    """Estimates |psi|**2 at the walls from the WKB decay past the outer
    turning points.
    """
    try:
        xs = turning_points(pot, E, lam)
    except QknhError:
        return 0.0
    if not xs:
        return 1.0
    if grid.x_min >= xs[0] or grid.x_max <= xs[-1]:
        return 1.0

    def kappa(x):
        return math.sqrt(
            max(0.0, 2 * pot.mass * (float(pot.value(x, lam)) - E))
        )

    worst = 0.0
    for lo, hi in ((grid.x_min, xs[0]), (xs[-1], grid.x_max)):
        decay = quad(kappa, lo, hi, limit=200)[0] / pot.hbar
        worst = max(worst, math.exp(-2 * decay))
    return worst


def exact_spectrum(
    pot: Potential,
    lam: float,
    grid: GridSpec,
    count: int,
    richardson: bool = True,
    check_decay: bool = True,
) -> np.ndarray:
    """Returns the lowest `count` eigenvalues, sorted.

    With `richardson`, the spectrum is also computed at half the spacing
    and extrapolated as (4 E_fine - E_coarse) / 3, which cancels the
    O(h**2) error of the stencil.

    Raises:
        GridTooSmall: If `check_decay` and a level would leave more than
            1e-8 of its probability at a wall.
    """
    if count < 1:
        raise ValueError(f"`count` must be at least 1 (got {count})")
    if count > grid.points:
        raise ValueError(
            f"`count` must not exceed the grid points (got {count})"
        )
    energies = _eigenvalues(pot, lam, grid, 0, count - 1)
    if richardson:
        fine = _eigenvalues(pot, lam, grid.refined(), 0, count - 1)
        energies = (4 * fine - energies) / 3
    energies = np.sort(energies)
    if check_decay:
        mass = _boundary_mass(pot, lam, float(energies[-1]), grid)
        if mass > BOUNDARY_MASS_TOL:
            logger.error(
                "level %d at E=%.10g leaves mass %.3g at the walls of "
                "[%g, %g] (lambda=%g)",
                count - 1,
                energies[-1],
                mass,
                grid.x_min,
                grid.x_max,
                lam,
            )
            raise GridTooSmall(
                f"grid [{grid.x_min}, {grid.x_max}] is too small for level "
                f"{count - 1} at E={energies[-1]:.10g}"
            )
    return energies


# =============================================================================


@dataclass(frozen=True)
class GapResult:
    """The minimal exact gap near one crossing node.

    Attributes:
        gap (float): The minimal separation of the tracked pair.
        lam (float): Where the minimum lies.
        pair (Tuple[int, int]): The tracked eigenvalue indices.
        predicted (float): The semiclassical gap hbar gamma.
        scan (np.ndarray): Rows (lam, gap) of the coarse scan.
    """

    gap: float
    lam: float
    pair: Tuple[int, int]
    predicted: float
    scan: np.ndarray

    @property
    def ratio(self) -> float:
        """The exact gap over hbar gamma."""
        return self.gap / self.predicted

    def to_dict(self) -> dict:
        """Returns the result as a JSON-ready dict."""
        return {
            "gap": self.gap,
            "lam": self.lam,
            "pair": list(self.pair),
            "predicted": self.predicted,
            "ratio": self.ratio,
        }


def _pair_index(pot, lam, grid, E) -> int:
    """Returns i such that levels i and i + 1 straddle E best."""
    diag, off = _hamiltonian(pot, lam, grid)
    # Sturm count of the levels below E
    below = len(
        eigh_tridiagonal(
            diag,
            off,
            eigvals_only=True,
            select="v",
            select_range=(float(diag.min()) + 4 * float(off[0]) - 1.0, E),
            lapack_driver="stebz",
        )
    )
    energies = _eigenvalues(pot, lam, grid, 0, below + 1)
    candidates = [i for i in (below - 2, below - 1, below) if i >= 0]
    candidates = [i for i in candidates if i + 1 < len(energies)]
    return min(
        candidates,
        key=lambda i: abs(energies[i] + energies[i + 1] - 2 * E),
    )


def scan_halfwidth(node: CrossingNode, widths: float = SCAN_WIDTHS) -> float:
    """Returns the lambda halfwidth for a gap scan around a node.

    The scan covers `widths` times the crossing width gap / |slope
    difference|, but at most a quarter of the lattice step in lambda.
    """
    table = node.table
    slope_gap = abs(
        level_slope(table, Branch.A) - level_slope(table, Branch.C)
    )
    br = abs(bracket(table, ActionSymbol.ST_A, ActionSymbol.ST_C))
    step = math.pi * table.hbar * min(table.dE_St_A, table.dE_St_C) / br
    return min(widths * node.gap / slope_gap, 0.25 * step)


def gap_scan(
    pot: Potential,
    node: CrossingNode,
    grid: GridSpec,
    lam_halfwidth: float,
    steps: int = 41,
) -> GapResult:
    """Returns the minimal gap of the level pair at a crossing node.

    The pair is the two exact levels that straddle E_mn at lambda_mn,
    tracked by energy order over [lambda_mn -+ lam_halfwidth]. The coarse
    minimum is refined by bounded Brent minimization between its
    neighbors.

    Raises:
        TrackingLoss: If the gap drops below the eigensolver resolution
            or the minimum sits at the scan edge.
    """
    check_positive(lam_halfwidth=lam_halfwidth)
    if steps < 3:
        raise ValueError(f"`steps` must be at least 3 (got {steps})")
    i = _pair_index(pot, node.lam, grid, node.E)

    def gap(lam):
        pair = _eigenvalues(pot, float(lam), grid, i, i + 1)
        return float(pair[1] - pair[0])

    lams = np.linspace(
        node.lam - lam_halfwidth, node.lam + lam_halfwidth, steps
    )
    gaps = np.array([gap(lam) for lam in lams])
    j = int(np.argmin(gaps))
    resolution = GAP_RESOLUTION * max(1.0, abs(node.E))
    if gaps[j] < resolution:
        raise TrackingLoss(
            f"gap {gaps[j]:.3g} at lambda={lams[j]:.10g} is below the "
            f"eigensolver resolution {resolution:.3g}"
        )
    if j in (0, steps - 1):
        raise TrackingLoss(
            f"the gap of levels ({i}, {i + 1}) is smallest at the scan "
            f"edge lambda={lams[j]:.10g}"
        )
    best = minimize_scalar(
        gap,
        bounds=(lams[j - 1], lams[j + 1]),
        method="bounded",
        options={"xatol": 1e-10 * max(1.0, abs(node.lam))},
    )
    lam_min, gap_min = float(best.x), float(best.fun)
    if gaps[j] < gap_min:
        lam_min, gap_min = float(lams[j]), float(gaps[j])
    return GapResult(
        gap=gap_min,
        lam=lam_min,
        pair=(i, i + 1),
        predicted=node.gap,
        scan=np.column_stack((lams, gaps)),
    )


# =============================================================================


@dataclass(frozen=True)
class SpectrumSheet:
    """Exact levels over a lambda grid, with the barrier height.

    `energies[j, i]` is level i at `lams[j]`; `barrier[j]` is V_b at
    `lams[j]`, NaN where there is no barrier.
    """

    lams: np.ndarray
    energies: np.ndarray
    barrier: np.ndarray

    def rows(self) -> List[Tuple[float, int, float]]:
        """Returns (lambda, level_index, energy) rows."""
        return [
            (float(lam), i, float(E))
            for lam, levels in zip(self.lams, self.energies)
            for i, E in enumerate(levels)
        ]

    def pair_gaps(self) -> np.ndarray:
        """Returns the gaps between neighboring levels at each lambda."""
        return np.diff(self.energies, axis=1)


def _barrier_height(pot: Potential, lam: float) -> float:
    try:
        return barrier_top(pot, lam).height
    except NoBarrier:
        return math.nan


def spectrum_sheet(
    pot: Potential,
    lams: Sequence[float],
    grid: GridSpec,
    count: int,
    richardson: bool = True,
    workers: Optional[int] = None,
) -> SpectrumSheet:
    """Returns `exact_spectrum` at every lambda, with V_b(lambda).

    Lambda points are solved on a thread pool of at most `workers`
    threads (default from QKNH_THREADS).
    """
    lams = np.asarray(lams, dtype=float)
    if workers is None:
        workers = thread_count()

    def solve(lam):
        return exact_spectrum(pot, float(lam), grid, count, richardson)

    if workers > 1 and len(lams) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            energies = list(executor.map(solve, lams))
    else:
        energies = [solve(lam) for lam in lams]
    return SpectrumSheet(
        lams=lams,
        energies=np.array(energies),
        barrier=np.array([_barrier_height(pot, lam) for lam in lams]),
    )


def level_errors(approx: Sequence[float], exact: Sequence[float]):
    """Returns |E_approx - E_exact| / spacing for each approximate level.

    Each approximate level is matched to the nearest exact one; the
    spacing is the mean distance to that level's exact neighbors.
    """
    exact = np.sort(np.asarray(exact, dtype=float))
    if len(exact) < 2:
        raise ValueError("`exact` must hold at least two levels")
    errors = []
    for E in approx:
        i = int(np.argmin(np.abs(exact - E)))
        if i == 0:
            spacing = exact[1] - exact[0]
        elif i == len(exact) - 1:
            spacing = exact[-1] - exact[-2]
        else:
            spacing = 0.5 * (exact[i + 1] - exact[i - 1])
        errors.append(abs(E - exact[i]) / spacing)
    return np.array(errors)
