"""MVDR and conventional beamformers, beamformer output and beampatterns."""

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .array_model import Direction, grid_steering, steering_vector
from .errors import DimensionError
from .estimation import CovarianceEstimate, angle_grid
from .linalg import diagonal_load, solve_hermitian

GAIN_FLOOR_DB = -100.0


class WeightKind(str, enum.Enum):
    MVDR = "MVDR"
    FIXED = "FIXED"


@dataclass(frozen=True)
class BeamWeights:
    weights: np.ndarray
    look_direction: Direction
    kind: WeightKind


@dataclass(frozen=True)
class BeamformedSeries:
    values: np.ndarray  # complex, length T
    signal_region: tuple
    noise_region: tuple


@dataclass(frozen=True)
class Beampattern:
    az_grid: np.ndarray
    el_grid: np.ndarray
    gain_db: np.ndarray  # shape (len(az_grid), len(el_grid))


def mvdr_weights(cov, geom, look):
    """``w = R^-1 a / (a^H R^-1 a)`` with light diagonal loading on ``R``."""
    r = cov.matrix if isinstance(cov, CovarianceEstimate) else np.asarray(cov)
    a = steering_vector(geom, look)
    ria = solve_hermitian(diagonal_load(r), a)
    w = ria / np.vdot(a, ria)
    return BeamWeights(w, look, WeightKind.MVDR)


def fixed_weights(geom, look):
    a = steering_vector(geom, look)
    return BeamWeights(a / np.vdot(a, a).real, look, WeightKind.FIXED)


def apply_beamformer(w, snap):
    weights = w.weights if isinstance(w, BeamWeights) else np.asarray(w)
    if weights.shape[0] != snap.samples.shape[0]:
        raise DimensionError(
            f"{weights.shape[0]} weights for {snap.samples.shape[0]} array elements")
    return BeamformedSeries(weights.conj() @ snap.samples, snap.signal_region, snap.noise_region)


def response(w, geom, direction):
    """Complex array response ``w^H a(direction)``."""
    return np.vdot(w.weights, steering_vector(geom, direction))


def beampattern(w, geom, grid_step=1.0, el_grid=None):
    az = angle_grid(grid_step)
    el = angle_grid(grid_step) if el_grid is None else tuple(float(v) for v in el_grid)
    resp = w.weights.conj() @ grid_steering(geom, az, el)
    with np.errstate(divide="ignore"):
        gain = 20 * np.log10(np.abs(resp))
    gain = np.maximum(gain, GAIN_FLOOR_DB).reshape(len(az), len(el))
    return Beampattern(np.array(az), np.array(el), gain)


def output_sinr(w, a_s, desired_power, interference_cov):
    """Output SINR of weights ``w`` for a known signal-plus-interference model."""
    weights = w.weights if isinstance(w, BeamWeights) else np.asarray(w)
    signal = desired_power * abs(np.vdot(weights, a_s)) ** 2
    return signal / np.real(np.vdot(weights, interference_cov @ weights))


def write_beampattern_csv(pattern, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["az", "el", "gain_db"])
        for i, az in enumerate(pattern.az_grid):
            for j, el in enumerate(pattern.el_grid):
                out.writerow([f"{az:g}", f"{el:g}", f"{pattern.gain_db[i, j]:.6f}"])
