"""Sample covariance, MUSIC pseudospectrum and peak picking."""

import csv
import enum
import logging
from dataclasses import dataclass

import numpy as np

from .array_model import Direction, grid_steering, steering_vector, unit_vector
from .errors import SubspaceError, ValidationError
from .linalg import hermitian_eig

log = logging.getLogger(__name__)

DENOMINATOR_FLOOR = 1e-30


class EstimateSource(str, enum.Enum):
    MUSIC = "MUSIC"
    ML_PREDICTED = "ML_PREDICTED"
    FALLBACK_LAST = "FALLBACK_LAST"
    STATIC = "STATIC"


@dataclass(frozen=True)
class CovarianceEstimate:
    matrix: np.ndarray
    snapshot_count: int


@dataclass(frozen=True)
class MusicSpectrum:
    az_grid: np.ndarray
    el_grid: np.ndarray
    values: np.ndarray  # shape (len(az_grid), len(el_grid))
    num_sources: int


@dataclass(frozen=True)
class DoaEstimate:
    direction: Direction
    source: EstimateSource = EstimateSource.MUSIC
    spectrum_peak_value: float = float("nan")


def estimate_covariance(snap):
    """``R = X X^H / T`` over all samples of a snapshot (or a raw array)."""
    x = snap.samples if hasattr(snap, "samples") else np.asarray(snap, dtype=np.complex128)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ValidationError("snapshot is empty")
    e, t = x.shape
    if t < e:
        log.warning("only %d samples for %d elements; covariance is rank deficient", t, e)
    r = (x @ x.conj().T) / t
    return CovarianceEstimate(0.5 * (r + r.conj().T), t)


def angle_grid(step, lo=-90.0, hi=90.0):
    if not step > 0:
        raise ValidationError(f"grid step must be positive, got {step}")
    n = int(np.floor((hi - lo) / step + 1e-9))
    return tuple(float(v) for v in np.round(lo + step * np.arange(n + 1), 10))


def noise_subspace(cov, num_sources):
    r = cov.matrix if isinstance(cov, CovarianceEstimate) else np.asarray(cov)
    e = r.shape[0]
    if not 0 <= num_sources < e:
        raise SubspaceError(f"num_sources={num_sources} must be below the element count {e}")
    return hermitian_eig(r).eigenvectors[:, num_sources:]


def _pseudospectrum(un, steering):
    proj = un.conj().T @ steering
    denom = np.sum(np.abs(proj) ** 2, axis=0)
    return 1.0 / np.maximum(denom, DENOMINATOR_FLOOR)


def music_spectrum(cov, geom, grid_step=1.0, num_sources=2, el_grid=None, az_grid=None):
    """MUSIC pseudospectrum ``1 / ||U_n^H a||^2`` over an azimuth/elevation grid.

    The denominator is floored at 1e-30 so exact nulls stay finite.
    """
    un = noise_subspace(cov, num_sources)
    az = angle_grid(grid_step) if az_grid is None else tuple(float(v) for v in az_grid)
    el = angle_grid(grid_step) if el_grid is None else tuple(float(v) for v in el_grid)
    return _spectrum_on_grid(un, geom, az, el, num_sources)


def _spectrum_on_grid(un, geom, az, el, num_sources):
    values = _pseudospectrum(un, grid_steering(geom, az, el)).reshape(len(az), len(el))
    return MusicSpectrum(np.array(az), np.array(el), values, num_sources)


def find_peaks(spec, k):
    """Top-``k`` strict local maxima of a spectrum (8-neighborhood).

    Returns ``(peaks, shortage)``; ``shortage`` is True when fewer than ``k``
    local maxima exist.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    v = spec.values
    padded = np.pad(v, 1, mode="constant", constant_values=-np.inf)
    is_peak = np.ones(v.shape, dtype=bool)
    n_az, n_el = v.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neighbor = padded[1 + di:1 + di + n_az, 1 + dj:1 + dj + n_el]
            is_peak &= v > neighbor
    ii, jj = np.nonzero(is_peak)
    # value descending, then lower azimuth, then lower elevation
    order = np.lexsort((spec.el_grid[jj], spec.az_grid[ii], -v[ii, jj]))
    peaks = [
        DoaEstimate(Direction(float(spec.az_grid[ii[o]]), float(spec.el_grid[jj[o]])),
                    EstimateSource.MUSIC, float(v[ii[o], jj[o]]))
        for o in order[:k]
    ]
    return peaks, len(peaks) < k


def estimate_doas(cov, geom, num_sources=2, grid_step=1.0, coarse_el_step=5.0, refine_el_step=1.0,
                  extra=0, el_min=-90.0):
    """Two-stage MUSIC search used by the mitigation loop.

    A coarse pass (``grid_step`` in azimuth, ``coarse_el_step`` in elevation)
    finds candidate peaks; each is then refined on a local grid with
    ``refine_el_step`` elevation resolution.  ``extra`` keeps that many
    additional, weaker peaks beyond ``num_sources``.  The shortage flag
    refers to ``num_sources`` only.  ``el_min = 0`` restricts the search to
    the upper hemisphere, which removes the mirror peaks of a planar array.
    """
    un = noise_subspace(cov, num_sources)
    coarse = _spectrum_on_grid(un, geom, angle_grid(grid_step), angle_grid(coarse_el_step, lo=el_min),
                               num_sources)
    candidates, _ = find_peaks(coarse, num_sources + extra + 2)
    peaks = [p for p in candidates if not _is_fold_artifact(un, geom, p)][:num_sources + extra]
    shortage = len(peaks) < num_sources
    refined = []
    for p in peaks:
        az0, el0 = p.direction.as_tuple()
        az = np.round(np.arange(-2, 3) * grid_step + az0, 10)
        az = az[(az >= -90) & (az <= 90)]
        el = np.round(np.arange(-coarse_el_step, coarse_el_step + refine_el_step / 2,
                                refine_el_step) + el0, 10)
        el = el[(el >= el_min) & (el <= 90)]
        local = _spectrum_on_grid(un, geom, tuple(az), tuple(el), num_sources).values
        i, j = np.unravel_index(np.argmax(local), local.shape)
        d = Direction(float(az[i]), float(el[j]))
        if all(r.direction != d for r in refined):  # two coarse peaks can refine to one point
            refined.append(DoaEstimate(d, EstimateSource.MUSIC, float(local[i, j])))
    return refined, shortage


def _is_fold_artifact(un, geom, peak, stretch=1.02):
    """True for an endfire-edge peak whose spectrum keeps rising outward.

    ``u_x = cos(el) sin(az)`` is stationary at ``az = +-90``, so a spectrum
    that increases toward the edge of the visible region shows a spurious
    maximum there.  Evaluating the steering vector slightly past the edge
    (``|u| > 1``) tells the two cases apart.
    """
    az, el = peak.direction.as_tuple()
    if abs(az) < 90.0:
        return False
    u = unit_vector(az, el) * stretch
    beyond = np.exp(1j * 2 * np.pi / geom.wavelength * (geom.positions @ u))[:, None]
    return _pseudospectrum(un, beyond)[0] > peak.spectrum_peak_value


def doa_error_pct(est, truth):
    """Combined azimuth+elevation error as a percentage of the 360 degree span."""
    return 100.0 * (abs(est.azimuth - truth.azimuth) + abs(est.elevation - truth.elevation)) / 360.0


def split_dominant(cov, geom, peaks):
    """Separate the peak best aligned with the principal eigenvector.

    A barrage jammer above the signal level dominates the covariance, so that
    peak is labelled the jammer.  Returns ``(dominant, rest)``; with fewer
    than two peaks nothing is split off.
    """
    if len(peaks) < 2:
        return None, list(peaks)
    r = cov.matrix if isinstance(cov, CovarianceEstimate) else np.asarray(cov)
    e1 = hermitian_eig(r).eigenvectors[:, 0]
    a = np.column_stack([steering_vector(geom, p.direction) for p in peaks])
    align = np.abs(e1.conj() @ a) ** 2 / geom.num_elements
    i = int(np.argmax(align))
    return peaks[i], [p for j, p in enumerate(peaks) if j != i]


def associate_source(peaks, reference):
    """Split peaks into (source, others): the peak closest to ``reference``
    is taken as the desired source."""
    if not peaks:
        return None, []
    ranked = sorted(range(len(peaks)), key=lambda i: doa_error_pct(peaks[i].direction, reference))
    return peaks[ranked[0]], [peaks[i] for i in ranked[1:]]


def write_spectrum_csv(spec, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["az", "el", "value"])
        for i, az in enumerate(spec.az_grid):
            for j, el in enumerate(spec.el_grid):
                w.writerow([f"{az:g}", f"{el:g}", repr(float(spec.values[i, j]))])
