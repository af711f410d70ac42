"""
Graded Gauss-Legendre rules for integrals between turning points.

Near an endpoint t with a neighboring root at distance delta beyond it,
the map x = t +/- delta * sinh(s)**2 makes both sqrt(x - t) and
sqrt(x - t + delta) analytic in s, so a composite Gauss-Legendre rule in
s converges spectrally for action and period integrands alike.
"""

# =============================================================================

import functools
import math
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

# =============================================================================

__all__ = ("endpoint_rule",)

# =============================================================================


@functools.lru_cache(maxsize=32)
def _legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(nodes)


def _half_rule(
    t: float,
    length: float,
    delta: float,
    direction: int,
    nodes: int,
    panel: float,
) -> Tuple[np.ndarray, np.ndarray]:
    s_max = math.asinh(math.sqrt(length / delta))
    num_panels = max(1, math.ceil(s_max / panel))
    edges = np.linspace(0.0, s_max, num_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    gx, gw = _legendre(nodes)
    s = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    ws = (half[:, None] * gw[None, :]).ravel()
    sh = np.sinh(s)
    x = t + direction * delta * sh * sh
    w = ws * delta * np.sinh(2 * s)
    return x, w


def endpoint_rule(
    a: float,
    b: float,
    delta_a: Optional[float] = None,
    delta_b: Optional[float] = None,
    nodes: int = 16,
    panel: float = 0.5,
) -> Tuple[np.ndarray, np.ndarray]:
    """Returns nodes and weights for an integral over (a, b).

    The interval is split at its midpoint and each half is graded
    toward its outer endpoint. No node falls on an endpoint.

    Args:
        a (float): The left endpoint.
        b (float): The right endpoint.
        delta_a (Optional[float]): Distance from `a` to the nearest
            root on its far side. Defaults to the interval length.
        delta_b (Optional[float]): Same for `b`.
        nodes (int): Gauss-Legendre nodes per panel.
        panel (float): Maximum panel width in the graded variable.

    Returns:
        Tuple[np.ndarray, np.ndarray]: The nodes and weights.
    """
    length = b - a
    if not length > 0:
        raise ValueError(f"empty interval ({a}, {b})")
    if delta_a is None or not math.isfinite(delta_a) or delta_a <= 0:
        delta_a = length
    if delta_b is None or not math.isfinite(delta_b) or delta_b <= 0:
        delta_b = length
    xl, wl = _half_rule(a, 0.5 * length, delta_a, 1, nodes, panel)
    xr, wr = _half_rule(b, 0.5 * length, delta_b, -1, nodes, panel)
    return np.concatenate((xl, xr)), np.concatenate((wl, wr))
