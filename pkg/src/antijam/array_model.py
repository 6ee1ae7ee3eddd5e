"""Uniform rectangular array geometry and steering vectors.

Angle convention (used everywhere in the package):

* the array lies flat in the x-y plane (z = 0) of its own frame;
* azimuth is measured from +y toward +x, elevation up from the x-y plane;
* the unit propagation vector toward a source is
  ``u = (cos(el) sin(az), cos(el) cos(az), sin(el))``;
* element ``i`` at position ``p_i`` responds with ``exp(+j k p_i . u)``.

Because the elements all have ``z = 0`` the response only depends on
``(u_x, u_y)``: ``(az, el)`` and ``(az, -el)`` give the same steering vector.
With azimuth limited to [-90, 90] only the half-space ``u_y >= 0`` is
representable.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_CARRIER_HZ = 100e6


@dataclass(frozen=True)
class Direction:
    azimuth: float
    elevation: float

    def __post_init__(self):
        for name in ("azimuth", "elevation"):
            value = getattr(self, name)
            if not np.isfinite(value) or not -90.0 <= value <= 90.0:
                raise ValidationError(f"{name} {value!r} outside [-90, 90] degrees")

    def as_tuple(self):
        return (self.azimuth, self.elevation)


@dataclass(frozen=True)
class ArrayGeometry:
    rows: int
    cols: int
    spacing: float
    wavelength: float
    element_positions: tuple  # ((x, y, z), ...) meters, row-major over (row, col)

    @property
    def num_elements(self):
        return self.rows * self.cols

    @property
    def positions(self):
        return np.array(self.element_positions, dtype=float)


def make_ura(rows, cols, spacing, wavelength):
    """Centered ``rows x cols`` grid; element (r, c) sits at
    ``((c - (cols-1)/2) d, (r - (rows-1)/2) d, 0)``."""
    if int(rows) != rows or int(cols) != cols or rows < 1 or cols < 1:
        raise ValidationError(f"array dimensions must be positive integers, got {rows}x{cols}")
    if not spacing > 0:
        raise ValidationError(f"spacing must be positive, got {spacing}")
    if not wavelength > 0:
        raise ValidationError(f"wavelength must be positive, got {wavelength}")
    rows, cols = int(rows), int(cols)
    positions = []
    for r in range(rows):
        for c in range(cols):
            positions.append((
                (c - (cols - 1) / 2) * spacing,
                (r - (rows - 1) / 2) * spacing,
                0.0,
            ))
    return ArrayGeometry(rows, cols, float(spacing), float(wavelength), tuple(positions))


def default_ura(rows=2, cols=2, carrier_hz=DEFAULT_CARRIER_HZ, spacing=None):
    """The 2x2 half-wavelength array at 100 MHz unless told otherwise."""
    wavelength = SPEED_OF_LIGHT / carrier_hz
    if spacing is None:
        spacing = wavelength / 2
    return make_ura(rows, cols, spacing, wavelength)


def unit_vector(azimuth, elevation):
    """Propagation unit vector(s) for angles in degrees; broadcasts."""
    az = np.deg2rad(azimuth)
    el = np.deg2rad(elevation)
    return np.stack(np.broadcast_arrays(
        np.cos(el) * np.sin(az), np.cos(el) * np.cos(az), np.sin(el)), axis=-1)


def steering_matrix(geom, azimuth, elevation):
    """Steering vectors for arrays of angles: shape ``(elements, K)``."""
    u = unit_vector(np.ravel(azimuth), np.ravel(elevation))
    k = 2 * np.pi / geom.wavelength
    return np.exp(1j * k * (geom.positions @ u.T))


def steering_vector(geom, direction):
    return steering_matrix(geom, [direction.azimuth], [direction.elevation])[:, 0]


@lru_cache(maxsize=64)
def grid_steering(geom, az_grid, el_grid):
    """Cached steering vectors over an (az, el) grid, flattened az-major.

    ``az_grid`` and ``el_grid`` must be tuples so the call is hashable.
    """
    az, el = np.meshgrid(np.asarray(az_grid), np.asarray(el_grid), indexing="ij")
    a = steering_matrix(geom, az, el)
    a.setflags(write=False)
    return a
