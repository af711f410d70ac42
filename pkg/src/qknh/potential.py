"""
Potential classes, barrier geometry, and turning points.
"""

# =============================================================================

import copy
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline, RectBivariateSpline
from scipy.optimize import brentq

from qknh.errors import DegenerateEnergy, EnergyOutOfRange, NoBarrier
from qknh.utils import Family, check_finite, check_positive

# =============================================================================

__all__ = (
    "Sweep",
    "BarrierInfo",
    "Potential",
    "QuarticDoubleWell",
    "HarmonicWell",
    "SampledPotential",
    "eval_potential",
    "barrier_top",
    "well_minima",
    "turning_points",
    "energy_tolerance",
)

# =============================================================================

# relative tolerance for energies that sit on a critical value
DEGENERATE_RTOL = 1e-9
# absolute tolerance in x for bracketed turning points
ROOT_XTOL = 1e-13

# =============================================================================


@dataclass(frozen=True)
class Sweep:
    """An affine parameter sweep, lambda(t) = lam0 + rate * t."""

    lam0: float = 0.0
    rate: float = 1e-3

    def __post_init__(self):
        check_finite(lam0=self.lam0)
        check_positive(rate=self.rate)

    def lam_at(self, t: float) -> float:
        """Returns lambda at time t."""
        return self.lam0 + self.rate * t

    def time_at(self, lam: float) -> float:
        """Returns the time at which the sweep reaches lambda."""
        return (lam - self.lam0) / self.rate

    def rate_at(self, lam: float) -> float:
        """Returns d(lambda)/dt at lambda (constant for an affine sweep)."""
        # pylint: disable=unused-argument
        return self.rate


@dataclass(frozen=True)
class BarrierInfo:
    """Barrier top, V ~ V_b - (kappa/2)(x - x0)**2 near x0."""

    x0: float
    height: float
    curvature: float


# =============================================================================


class Potential:
    """A one-dimensional potential V(x, lambda) with mass and hbar.

    Properties:
        family (Family): The potential family.
        mass (float): The particle mass.
        hbar (float): The reduced Planck constant.
        sweep (Sweep): The parameter sweep.
        domain (Tuple[float, float]): The x range where V is defined.

    Methods:
        value(x, lam) -> array
            Returns V(x, lam).
        dx(x, lam, order = 1) -> array
            Returns the x derivative of V of the given order.
        dlam(x, lam) -> array
            Returns the lambda derivative of V.
        critical_points(lam) -> List[float]
            Returns the sorted real points where dV/dx vanishes.
        with_hbar(hbar) -> Potential
            Returns a copy with a different hbar.
        with_sweep(sweep) -> Potential
            Returns a copy with a different sweep.
    """

    _family: Family = None

    def __init__(
        self,
        *,
        mass: float = 1.0,
        hbar: float = 1.0,
        sweep: Optional[Sweep] = None,
    ):
        if self._family is None:
            raise RuntimeError(
                f"{self.__class__.__name__} is missing `_family` attribute"
            )
        check_positive(mass=mass, hbar=hbar)
        self._mass = float(mass)
        self._hbar = float(hbar)
        self._sweep = sweep if sweep is not None else Sweep()

    def __repr__(self):
        return (
            f"{self.__class__.__name__}(mass={self._mass}, "
            f"hbar={self._hbar}, sweep={self._sweep})"
        )

    @property
    def family(self) -> Family:
        """The potential family."""
        return self._family

    @property
    def mass(self) -> float:
        """The particle mass."""
        return self._mass

    @property
    def hbar(self) -> float:
        """The reduced Planck constant."""
        return self._hbar

    @property
    def sweep(self) -> Sweep:
        """The parameter sweep."""
        return self._sweep

    @property
    def domain(self) -> Tuple[float, float]:
        """The x range where V is defined."""
        return (-math.inf, math.inf)

    def with_hbar(self, hbar: float) -> "Potential":
        """Returns a copy of this potential with a different hbar."""
        check_positive(hbar=hbar)
        other = copy.copy(self)
        other._hbar = float(hbar)
        return other

    def with_sweep(self, sweep: Sweep) -> "Potential":
        """Returns a copy of this potential with a different sweep."""
        other = copy.copy(self)
        other._sweep = sweep
        return other

    def value(self, x, lam: float):
        """Returns V(x, lam). Vectorized over x."""
        raise NotImplementedError(
            f"{self.__class__.__name__}: function `value()` not implemented"
        )

    def dx(self, x, lam: float, order: int = 1):
        """Returns the x derivative of V of the given order."""
        raise NotImplementedError(
            f"{self.__class__.__name__}: function `dx()` not implemented"
        )

    def dlam(self, x, lam: float):
        """Returns the lambda derivative of V. Vectorized over x."""
        raise NotImplementedError(
            f"{self.__class__.__name__}: function `dlam()` not implemented"
        )

    def critical_points(self, lam: float) -> List[float]:
        """Returns the sorted real points where dV/dx vanishes."""
        raise NotImplementedError(
            f"{self.__class__.__name__}: "
            "function `critical_points()` not implemented"
        )

    def _biquadratic_roots(self, E: float, lam: float) -> Optional[list]:
        """Returns closed-form turning points, or None if unavailable."""
        # pylint: disable=unused-argument
        return None


class QuarticDoubleWell(Potential):
    """V(x, lam) = alpha x**4 - beta(lam) x**2 + gamma(lam) x.

    `beta` and `gamma` are polynomial coefficients in lambda, lowest
    power first.

    Properties:
        alpha (float): The quartic coefficient.
        beta (Polynomial): beta as a polynomial in lambda.
        gamma (Polynomial): gamma as a polynomial in lambda.
    """

    _family = Family.QUARTIC_DOUBLE_WELL

    def __init__(
        self,
        alpha: float = 1.0,
        beta: Sequence[float] = (2.0,),
        gamma: Sequence[float] = (0.0,),
        **kwargs,
    ):
        super().__init__(**kwargs)
        check_positive(alpha=alpha)
        beta = [float(v) for v in beta] or [0.0]
        gamma = [float(v) for v in gamma] or [0.0]
        check_finite(**{f"beta[{i}]": v for i, v in enumerate(beta)})
        check_finite(**{f"gamma[{i}]": v for i, v in enumerate(gamma)})
        self._alpha = float(alpha)
        self._beta = Polynomial(beta)
        self._gamma = Polynomial(gamma)
        self._dbeta = self._beta.deriv()
        self._dgamma = self._gamma.deriv()

    def __repr__(self):
        return (
            f"QuarticDoubleWell(alpha={self._alpha}, "
            f"beta={list(self._beta.coef)}, "
            f"gamma={list(self._gamma.coef)}, mass={self._mass}, "
            f"hbar={self._hbar}, sweep={self._sweep})"
        )

    @property
    def alpha(self) -> float:
        """The quartic coefficient."""
        return self._alpha

    @property
    def beta(self) -> Polynomial:
        """beta as a polynomial in lambda."""
        return self._beta

    @property
    def gamma(self) -> Polynomial:
        """gamma as a polynomial in lambda."""
        return self._gamma

    def value(self, x, lam: float):
        x = np.asarray(x, dtype=float)
        b = self._beta(lam)
        g = self._gamma(lam)
        x2 = x * x
        return self._alpha * x2 * x2 - b * x2 + g * x

    def dx(self, x, lam: float, order: int = 1):
        x = np.asarray(x, dtype=float)
        a, b, g = self._alpha, self._beta(lam), self._gamma(lam)
        if order == 1:
            return 4 * a * x**3 - 2 * b * x + g
        if order == 2:
            return 12 * a * x**2 - 2 * b
        if order == 3:
            return 24 * a * x
        if order == 4:
            return np.full_like(x, 24 * a)
        return np.zeros_like(x)

    def dlam(self, x, lam: float):
        x = np.asarray(x, dtype=float)
        return -self._dbeta(lam) * x * x + self._dgamma(lam) * x

    def critical_points(self, lam: float) -> List[float]:
        a, b, g = self._alpha, self._beta(lam), self._gamma(lam)
        roots = np.roots([4 * a, 0.0, -2 * b, g])
        scale = max(1.0, float(np.max(np.abs(roots))))
        real = sorted(
            float(r.real) for r in roots if abs(r.imag) < 1e-9 * scale
        )
        # polish, since np.roots loses digits near a double root
        polished = []
        for x in real:
            for _ in range(3):
                d2 = float(self.dx(x, lam, 2))
                if d2 == 0:
                    break
                x -= float(self.dx(x, lam, 1)) / d2
            polished.append(x)
        return sorted(polished)

    def _biquadratic_roots(self, E: float, lam: float) -> Optional[list]:
        if self._gamma(lam) != 0:
            return None
        a, b = self._alpha, self._beta(lam)
        disc = b * b + 4 * a * E
        if disc < 0:
            return []
        # stable pair of roots in x**2
        q = (b + math.copysign(math.sqrt(disc), b)) / (2 * a)
        if q == 0:
            return []
        roots = []
        for x2 in (q, -E / (a * q)):
            if x2 > 0:
                r = math.sqrt(x2)
                roots.extend((-r, r))
        return sorted(roots)


class HarmonicWell(Potential):
    """V(x) = (stiffness / 2) (x - center)**2. Has no lambda dependence.

    Properties:
        stiffness (float): The spring constant.
        center (float): The position of the minimum.
        omega (float): The angular frequency sqrt(stiffness / mass).
    """

    _family = Family.HARMONIC

    def __init__(self, stiffness: float = 1.0, center: float = 0.0, **kwargs):
        super().__init__(**kwargs)
        check_positive(stiffness=stiffness)
        check_finite(center=center)
        self._stiffness = float(stiffness)
        self._center = float(center)

    @property
    def stiffness(self) -> float:
        """The spring constant."""
        return self._stiffness

    @property
    def center(self) -> float:
        """The position of the minimum."""
        return self._center

    @property
    def omega(self) -> float:
        """The angular frequency."""
        return math.sqrt(self._stiffness / self._mass)

    def value(self, x, lam: float):
        d = np.asarray(x, dtype=float) - self._center
        return 0.5 * self._stiffness * d * d

    def dx(self, x, lam: float, order: int = 1):
        d = np.asarray(x, dtype=float) - self._center
        if order == 1:
            return self._stiffness * d
        if order == 2:
            return np.full_like(d, self._stiffness)
        return np.zeros_like(d)

    def dlam(self, x, lam: float):
        return np.zeros_like(np.asarray(x, dtype=float))

    def critical_points(self, lam: float) -> List[float]:
        return [self._center]

    def _biquadratic_roots(self, E: float, lam: float) -> Optional[list]:
        if E <= 0:
            return []
        r = math.sqrt(2 * E / self._stiffness)
        return [self._center - r, self._center + r]


class SampledPotential(Potential):
    """A tabulated potential, interpolated by cubic splines.

    `values` has one row per lambda sample. With a single row (or no
    `lam_grid`) the potential does not depend on lambda.

    Properties:
        x_grid (np.ndarray): The x samples.
        lam_grid (Optional[np.ndarray]): The lambda samples.
    """

    _family = Family.SAMPLED

    def __init__(self, x_grid, values, lam_grid=None, **kwargs):
        super().__init__(**kwargs)
        x_grid = np.asarray(x_grid, dtype=float)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if x_grid.ndim != 1 or len(x_grid) < 4:
            raise ValueError("`x_grid` must be 1-D with at least 4 points")
        if np.any(np.diff(x_grid) <= 0):
            raise ValueError("`x_grid` must be strictly increasing")
        if values.shape[1] != len(x_grid):
            raise ValueError("`values` rows must match `x_grid`")
        if not np.all(np.isfinite(values)):
            raise ValueError("`values` must be finite")

        self._x_grid = x_grid
        self._lam_grid = None
        if lam_grid is None or values.shape[0] == 1:
            self._spline = CubicSpline(x_grid, values[0])
            self._table = None
        else:
            lam_grid = np.asarray(lam_grid, dtype=float)
            if values.shape[0] != len(lam_grid) or len(lam_grid) < 4:
                raise ValueError(
                    "`values` needs one row per `lam_grid` point (>= 4)"
                )
            self._lam_grid = lam_grid
            self._spline = None
            self._table = RectBivariateSpline(x_grid, lam_grid, values.T)

    @property
    def x_grid(self) -> np.ndarray:
        """The x samples."""
        return self._x_grid

    @property
    def lam_grid(self) -> Optional[np.ndarray]:
        """The lambda samples."""
        return self._lam_grid

    @property
    def domain(self) -> Tuple[float, float]:
        return float(self._x_grid[0]), float(self._x_grid[-1])

    def _eval(self, x, lam, dx=0, dy=0):
        x = np.asarray(x, dtype=float)
        if self._table is None:
            if dy:
                return np.zeros_like(x)
            return self._spline(x, dx) if dx else self._spline(x)
        lam_arr = np.full_like(x, lam)
        return self._table.ev(x, lam_arr, dx=dx, dy=dy)

    def value(self, x, lam: float):
        return self._eval(x, lam)

    def dx(self, x, lam: float, order: int = 1):
        return self._eval(x, lam, dx=order)

    def dlam(self, x, lam: float):
        return self._eval(x, lam, dy=1)

    def critical_points(self, lam: float) -> List[float]:
        fine = np.linspace(
            self._x_grid[0], self._x_grid[-1], 8 * len(self._x_grid)
        )
        slope = self.dx(fine, lam)
        points = []
        for i in np.flatnonzero(np.sign(slope[:-1]) * np.sign(slope[1:]) < 0):
            points.append(
                brentq(
                    lambda x: float(self.dx(x, lam)),
                    fine[i],
                    fine[i + 1],
                    xtol=ROOT_XTOL,
                )
            )
        return points


# =============================================================================


def eval_potential(pot: Potential, x, lam: float):
    """Returns V(x, lam) per the family formula."""
    return pot.value(x, lam)


def energy_tolerance(E: float) -> float:
    """Returns the tolerance for an energy to count as a critical value."""
    return DEGENERATE_RTOL * max(1.0, abs(E))


def well_minima(pot: Potential, lam: float) -> List[Tuple[float, float]]:
    """Returns the local minima of V as sorted (x, V) pairs."""
    minima = []
    for x in pot.critical_points(lam):
        if float(pot.dx(x, lam, 2)) > 0:
            minima.append((x, float(pot.value(x, lam))))
    return minima


def barrier_top(pot: Potential, lam: float) -> BarrierInfo:
    """Returns the interior local maximum of V between two minima.

    Raises:
        NoBarrier: If V has no interior maximum (single-well regime).
    """
    minima = [x for x, _ in well_minima(pot, lam)]
    for x in pot.critical_points(lam):
        curvature = -float(pot.dx(x, lam, 2))
        if curvature <= 0:
            continue
        if any(m < x for m in minima) and any(m > x for m in minima):
            return BarrierInfo(
                x0=x, height=float(pot.value(x, lam)), curvature=curvature
            )
    raise NoBarrier(f"no barrier between two wells at lambda={lam}")


def _outer_bracket(pot: Potential, E: float, lam: float, x: float, step):
    """Steps away from x until V > E; returns the far end."""
    lo, hi = pot.domain
    for _ in range(200):
        x_new = min(max(x + step, lo), hi)
        if float(pot.value(x_new, lam)) > E:
            return x_new
        if x_new == x:
            return None
        x = x_new
        step *= 2
    return None


def turning_points(pot: Potential, E: float, lam: float) -> List[float]:
    """Returns the sorted real roots of V(x, lam) = E.

    Raises:
        EnergyOutOfRange: If E lies below the global minimum of V.
        DegenerateEnergy: If E equals a barrier top or well minimum
            within tolerance.
    """
    crit = pot.critical_points(lam)
    tol = energy_tolerance(E)
    crit_values = [float(pot.value(x, lam)) for x in crit]
    for x, v in zip(crit, crit_values):
        if abs(E - v) < tol:
            raise DegenerateEnergy(
                f"E={E} is within {tol:.3g} of the critical value "
                f"V({x:.6g})={v:.12g} at lambda={lam}"
            )
    if crit_values and E < min(crit_values):
        raise EnergyOutOfRange(
            f"E={E} is below the global minimum {min(crit_values)}"
        )

    closed = pot._biquadratic_roots(E, lam)  # pylint: disable=protected-access
    if closed is not None:
        return closed

    def f(x):
        return float(pot.value(x, lam)) - E

    roots = []
    # V is monotone between consecutive critical points
    for left, right in zip(crit[:-1], crit[1:]):
        if f(left) * f(right) < 0:
            roots.append(brentq(f, left, right, xtol=ROOT_XTOL))
    if crit:
        scale = max(1.0, crit[-1] - crit[0])
        for x, step in ((crit[0], -scale), (crit[-1], scale)):
            if f(x) >= 0:
                continue
            far = _outer_bracket(pot, E, lam, x, step)
            if far is not None:
                roots.append(
                    brentq(f, min(x, far), max(x, far), xtol=ROOT_XTOL)
                )
    return sorted(roots)
