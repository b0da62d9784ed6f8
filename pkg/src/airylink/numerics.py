"""Oscillatory special-function integrals and root finding.

The beam-correlation closed forms reduce to the cumulative integrals

    A(x) = int_0^x cos(pi/2 t^3) dt        (cubic-phase integral)
    B(x) = int_0^x cos(pi/2 t^2) dt        (Fresnel cosine)
    D(x) = int_0^x sin(pi/2 t^2) dt        (Fresnel sine)

A is evaluated by Gauss-Legendre panels split at the integrand's zeros
(t = (1+2m)^(1/3)), which keeps every panel a smooth half-oscillation;
B and D come from scipy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def airy_cos_lobe_nodes(x_max: float) -> np.ndarray:
    """Zeros of cos(pi/2 t^3) on (0, x_max): t = (1+2m)^(1/3)."""
    if x_max <= 1.0:
        return np.empty(0)
    m_max = int(math.floor((x_max**3 - 1) / 2))
    return np.cbrt(1.0 + 2.0 * np.arange(m_max + 1))


def _panel_quad(lo: float, hi: float) -> float:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    t = mid + half * _GL_NODES
    return half * float(np.dot(_GL_WEIGHTS, np.cos(0.5 * np.pi * t**3)))


def airy_cos_integral(x: float) -> float:
    """A(x) = int_0^x cos(pi/2 t^3) dt, absolute error below 1e-9."""
    if not np.isfinite(x):
        raise ValueError("x must be finite")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0:
        return 0.0
    nodes = airy_cos_lobe_nodes(x)
    edges = np.concatenate(([0.0], nodes[nodes < x], [x]))
    return sum(_panel_quad(a, b) for a, b in zip(edges[:-1], edges[1:]))


def airy_cos_integral_table(x_grid: np.ndarray) -> np.ndarray:
    """A(x) on an ascending grid, via one cumulative panel sweep."""
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.size == 0:
        return np.empty(0)
    if x_grid[0] < 0 or np.any(np.diff(x_grid) < 0):
        raise ValueError("grid must be ascending and nonnegative")
    edges = np.unique(np.concatenate((
        [0.0], x_grid, airy_cos_lobe_nodes(float(x_grid[-1]))
    )))
    increments = np.array([_panel_quad(a, b) for a, b in zip(edges[:-1], edges[1:])])
    cumulative = np.concatenate(([0.0], np.cumsum(increments)))
    return np.interp(x_grid, edges, cumulative)


def fresnel_integrals(x) -> tuple:
    """(B(x), D(x)) with B the cosine and D the sine Fresnel integral."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    if np.any(x < 0):
        raise ValueError("x must be >= 0")
    s, c = special.fresnel(x)
    if x.ndim == 0:
        return float(c), float(s)
    return c, s


class TabulatedFunction(enum.Enum):
    AIRY_COS = "airy_cos"
    FRESNEL_COS = "fresnel_cos"
    FRESNEL_SIN = "fresnel_sin"


@dataclass(frozen=True)
class IntegralTable:
    """Sampled cumulative integral with linear interpolation.

    Cheap repeated evaluation for envelope scans; call the direct
    functions when 1e-9 accuracy is required at a single point.
    """

    function_id: TabulatedFunction
    x: np.ndarray
    values: np.ndarray
    interpolation_order: int = 1

    @classmethod
    def build(cls, function_id: TabulatedFunction, x_max: float,
              num_samples: int = 2048) -> "IntegralTable":
        grid = np.linspace(0.0, x_max, num_samples)
        if function_id is TabulatedFunction.AIRY_COS:
            vals = airy_cos_integral_table(grid)
        elif function_id is TabulatedFunction.FRESNEL_COS:
            vals = special.fresnel(grid)[1]
        else:
            vals = special.fresnel(grid)[0]
        return cls(function_id, grid, np.asarray(vals))

    def __call__(self, x):
        return np.interp(x, self.x, self.values)


def solve_monotone_root(f, target: float, bracket: tuple) -> float:
    """Bisection for f(root) = target on a bracket that straddles it.

    The correlation curves this inverts are oscillatory; the caller is
    responsible for passing a bracket on a single monotone stretch.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    flo = f(lo) - target
    fhi = f(hi) - target
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(
            f"bracket [{lo}, {hi}] does not straddle target {target}: "
            f"f(lo)-target={flo:.3g}, f(hi)-target={fhi:.3g}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid) - target
        if fm == 0.0 or (hi - lo) < 1e-13 * max(1.0, abs(mid)):
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def invert_oscillatory_envelope(envelope, target: float, primitive_sup: float,
                                lobe_nodes: np.ndarray,
                                refine_points: int = 12,
                                batch_envelope=None):
    """Invert a decaying oscillatory envelope C(x) = |P(x)|/x at a target level.

    Returns (solved, first_crossing) where first_crossing is the first
    downward crossing of the target and solved upgrades it to the location
    of the envelope's global maximum beyond that crossing whenever the
    envelope rebounds above the target (for a monotone-reachable target the
    two coincide). primitive_sup bounds |P|, so beyond primitive_sup/target
    the envelope stays below the target and the scan can stop.

    The rebound upgrade matches how published sampling designs for these
    correlation curves read the hover region of the envelope: the spacing
    is set where residual correlation peaks, not at the earliest graze.

    batch_envelope, when given, evaluates the whole scan grid at once
    (e.g. from a cumulative table); the scalar envelope is still used for
    the high-accuracy refinements.
    """
    if not (0 < target < 1):
        raise ValueError("target must lie in (0, 1)")
    x_stop = primitive_sup / target + 0.5
    nodes = lobe_nodes[lobe_nodes < x_stop]
    edges = np.unique(np.concatenate(([1e-9], nodes, [x_stop])))
    grid = np.concatenate([
        np.linspace(a, b, refine_points, endpoint=False)
        for a, b in zip(edges[:-1], edges[1:])
    ] + [[x_stop]])
    if batch_envelope is not None:
        vals = np.asarray(batch_envelope(grid), dtype=float)
    else:
        vals = np.array([envelope(x) for x in grid])

    below = vals < target
    if below[0] or not below.any():
        raise ValueError("target not reachable from the envelope's initial lobe")
    i = int(np.argmax(below))  # first grid point under the target
    # scan values may carry interpolation error; confirm the straddle on
    # the exact envelope, widening by grid steps if needed
    lo_i, hi_i = i - 1, i
    while envelope(grid[lo_i]) < target and lo_i > 0:
        lo_i -= 1
    while envelope(grid[hi_i]) >= target and hi_i < grid.size - 1:
        hi_i += 1
    first_crossing = solve_monotone_root(envelope, target, (grid[lo_i], grid[hi_i]))

    tail = grid >= first_crossing
    j = int(np.argmax(np.where(tail, vals, -np.inf)))
    if vals[j] <= target + 1e-12:
        return first_crossing, first_crossing
    lo = grid[max(j - 1, 0)]
    hi = grid[min(j + 1, grid.size - 1)]
    solved = _golden_max(envelope, lo, hi)
    return solved, first_crossing


def _golden_max(f, lo: float, hi: float, tol: float = 1e-11) -> float:
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fresnel_lobe_nodes(x_max: float) -> np.ndarray:
    """Extrema of the Fresnel primitives: zeros of the t^2 phase cosine/sine."""
    if x_max <= 0:
        return np.empty(0)
    m_max = int(math.floor(x_max**2))
    return np.sqrt(np.arange(1, m_max + 1, dtype=float))
