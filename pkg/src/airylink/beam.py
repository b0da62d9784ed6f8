"""Constant-modulus beam synthesis and 2-D field-map rendering.

A codeword is a phase-only aperture profile over the Tx array:

    phi(y) = (2*pi/lambda) * (a*y^3 + cos(theta)^2/(2r)*y^2 - sin(theta)*y)

The quadratic plus linear part focuses at polar point (r, theta) in front
of the array; the cubic coefficient a bends the main lobe (positive a
curves the trajectory upward near the aperture and back down, mirroring
for negative a at theta = 0). a has units 1/m^2 with y in meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .scenario import ArrayConfig, CarrierConfig, ScenarioConfig, element_positions


@dataclass(frozen=True)
class BeamParams:
    """(curving, focus_distance, focus_angle) beam parameterization.

    focus_distance may be inf for a pure steering (far-field) beam.
    """

    curving: float
    focus_distance: float
    focus_angle: float

    def __post_init__(self):
        # normalize to plain floats so params repr cleanly in traces/manifests
        for name in ("curving", "focus_distance", "focus_angle"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.focus_distance > 0):
            raise ValueError("focus_distance must be positive (inf allowed)")
        if not (-math.pi / 2 < self.focus_angle < math.pi / 2):
            raise ValueError("focus_angle must lie in (-pi/2, pi/2)")


@dataclass(frozen=True)
class BeamVector:
    params: BeamParams
    weights: np.ndarray

    def __post_init__(self):
        norm = np.linalg.norm(self.weights)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("beam weights must have unit l2 norm")


def focusing_phase(position, focus_distance: float, focus_angle: float,
                   carrier: CarrierConfig):
    """Quadratic-plus-linear near-field phase, radians."""
    y = np.asarray(position, dtype=float)
    lam = carrier.wavelength
    if math.isinf(focus_distance):
        quad = 0.0
    else:
        quad = math.cos(focus_angle) ** 2 / (2 * focus_distance) * y**2
    return 2 * math.pi / lam * (quad - math.sin(focus_angle) * y)


def airy_phase(position, params: BeamParams, carrier: CarrierConfig):
    """Cubic + quadratic + linear phase profile, radians."""
    y = np.asarray(position, dtype=float)
    cubic = 2 * math.pi / carrier.wavelength * params.curving * y**3
    return cubic + focusing_phase(y, params.focus_distance, params.focus_angle, carrier)


def airy_beam_vector(params: BeamParams, array: ArrayConfig,
                     carrier: CarrierConfig) -> BeamVector:
    """Unit-norm constant-modulus codeword for the given parameters."""
    y = element_positions(array)
    phase = airy_phase(y, params, carrier)
    weights = np.exp(1j * phase) / math.sqrt(array.num_elements)
    return BeamVector(params, weights)


def focusing_beam_vector(focus_distance: float, focus_angle: float,
                         array: ArrayConfig, carrier: CarrierConfig) -> BeamVector:
    return airy_beam_vector(BeamParams(0.0, focus_distance, focus_angle), array, carrier)


def steering_beam_vector(focus_angle: float, array: ArrayConfig,
                         carrier: CarrierConfig) -> BeamVector:
    """Far-field beam: linear phase only."""
    return airy_beam_vector(BeamParams(0.0, math.inf, focus_angle), array, carrier)


def airy_aperture_amplitude(position, scale: float, truncation: float):
    """Reference amplitude-and-phase aperture Ai(y/scale)*exp(truncation*y/scale).

    Only used to render textbook curved-trajectory field maps for
    comparison; codebooks never use amplitude control (phase-only arrays).
    """
    if not (scale > 0):
        raise ValueError("scale must be > 0")
    if not (truncation > 0):
        raise ValueError("truncation must be > 0")
    z = np.asarray(position, dtype=float) / scale
    ai = special.airy(z)[0]
    return (ai * np.exp(truncation * z)).astype(complex)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular rendering window, x in (0, D], uniform sampling."""

    x_min: float
    x_max: float
    num_x: int
    y_min: float
    y_max: float
    num_y: int

    def __post_init__(self):
        if not (self.x_min > 0):
            raise ValueError("grid must start strictly after the aperture plane x=0")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("grid extents must be increasing")
        if self.num_x < 1 or self.num_y < 2:
            raise ValueError("grid too small")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.num_x)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.num_y)


@dataclass(frozen=True)
class FieldMap:
    x: np.ndarray
    y: np.ndarray
    power_db: np.ndarray  # [num_y, num_x], normalized to map max, floored
    mask_applied: bool

    DB_FLOOR = -60.0

    def peak(self) -> tuple:
        """(x, y) of the strongest cell."""
        j, i = np.unravel_index(int(np.argmax(self.power_db)), self.power_db.shape)
        return float(self.x[i]), float(self.y[j])

    def column_db(self, x_value: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.x - x_value)))
        return self.power_db[:, i]


def render_field_map(beam: BeamVector, scenario: ScenarioConfig,
                     grid: GridSpec) -> FieldMap:
    """Propagate a codeword's aperture through the scenario onto a grid."""
    aperture_y = element_positions(scenario.tx)
    return render_aperture_field_map(aperture_y, beam.weights, scenario, grid)


def render_aperture_field_map(aperture_positions, aperture_values,
                              scenario: ScenarioConfig, grid: GridSpec) -> FieldMap:
    """Render an arbitrary sampled aperture.

    Columns before the blockage are each propagated directly from the
    aperture (no column-to-column error accumulation); at and beyond the
    blockage, the field is chained through the masked virtual planes once
    and each column take a single hop from the nearest upstream plane.
    """
    from .channel import FieldVector, rs_propagate, _edge_taper, _plane_mask

    if grid.x_max > scenario.link_distance + 1e-12:
        raise ValueError("grid extends beyond the receiver plane")
    aperture = FieldVector(0.0, np.asarray(aperture_positions, dtype=float),
                           np.asarray(aperture_values, dtype=complex))
    xs, ys = grid.x, grid.y
    field = np.empty((ys.size, xs.size), dtype=complex)

    blk = scenario.blockage
    if blk is None:
        for i, xc in enumerate(xs):
            field[:, i] = rs_propagate(aperture, xc, ys, scenario.carrier).values
        return _finalize_map(xs, ys, field, mask_applied=False)

    scen = scenario.with_virtual_defaults()
    from .scenario import virtual_grid, virtual_plane_positions

    vy = virtual_grid(scen)
    plane_xs = virtual_plane_positions(scen)
    # chain the masked planes once; absorb the window edges like _cascade
    gate = _plane_mask(vy, blk) * _edge_taper(vy)
    plane_fields = []
    upstream = aperture
    for px in plane_xs:
        f = rs_propagate(upstream, px, vy, scen.carrier)
        upstream = FieldVector(px, vy, f.values * gate)
        plane_fields.append(upstream)

    for i, xc in enumerate(xs):
        if xc < plane_xs[0]:
            src = aperture
        else:
            p = int(np.searchsorted(plane_xs, xc, side="right")) - 1
            if math.isclose(xc, plane_xs[p], rel_tol=1e-12, abs_tol=1e-15):
                src = aperture if p == 0 else plane_fields[p - 1]
            else:
                src = plane_fields[p]
        vals = rs_propagate(src, xc, ys, scen.carrier).values
        if blk.near_x - 1e-15 <= xc <= blk.far_x + 1e-15:
            vals = vals * _plane_mask(ys, blk)
        field[:, i] = vals
    return _finalize_map(xs, ys, field, mask_applied=True)


def _finalize_map(xs, ys, field, mask_applied: bool) -> FieldMap:
    mag = np.abs(field)
    peak = mag.max()
    if peak == 0:
        power = np.full(mag.shape, FieldMap.DB_FLOOR)
    else:
        with np.errstate(divide="ignore"):
            power = 20 * np.log10(mag / peak)
        power = np.maximum(power, FieldMap.DB_FLOOR)
    return FieldMap(xs, ys, power, mask_applied)
