import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from antijam.array_model import (Direction, default_ura, grid_steering, make_ura, steering_matrix,
                                 steering_vector, unit_vector)
from antijam.errors import ValidationError

angles = st.floats(-90, 90, allow_nan=False)


def test_two_by_two_positions():
    g = make_ura(2, 2, 1.5, 3.0)
    assert g.num_elements == 4
    assert sorted(g.element_positions) == sorted(
        (x, y, 0.0) for x in (-0.75, 0.75) for y in (-0.75, 0.75))


def test_single_element_at_origin():
    assert make_ura(1, 1, 1.5, 3.0).element_positions == ((0.0, 0.0, 0.0),)


def test_two_by_four_enumeration():
    g = make_ura(2, 4, 0.5, 1.0)
    expected = [((c - 1.5) * 0.5, (r - 0.5) * 0.5, 0.0) for r in range(2) for c in range(4)]
    np.testing.assert_allclose(g.positions, expected)


@pytest.mark.parametrize("args", [(0, 2, 1.0, 1.0), (2, -1, 1.0, 1.0), (2, 2, 0.0, 1.0),
                                  (2, 2, 1.0, -3.0), (1.5, 2, 1.0, 1.0)])
def test_bad_geometry(args):
    with pytest.raises(ValidationError):
        make_ura(*args)


def test_default_is_half_wavelength_at_100mhz():
    g = default_ura()
    assert g.wavelength == pytest.approx(2.99792458)
    assert g.spacing == pytest.approx(g.wavelength / 2)


@pytest.mark.parametrize("az, el", [(91, 0), (0, -90.5), (float("nan"), 0)])
def test_direction_range(az, el):
    with pytest.raises(ValidationError):
        Direction(az, el)


def test_boresight_phases():
    g = make_ura(2, 2, 1.5, 3.0)
    a = steering_vector(g, Direction(0, 0))
    np.testing.assert_allclose(unit_vector(0, 0), [0, 1, 0], atol=1e-15)
    for p, ai in zip(g.positions, a):
        assert ai == pytest.approx(np.exp(1j * (2 * np.pi / 3) * p[1]), abs=1e-12)
    # y offsets of +-0.75 m give phases of +-pi/2
    assert np.allclose(np.angle(a), np.sign(g.positions[:, 1]) * np.pi / 2)


def test_zenith_is_all_ones(geom):
    np.testing.assert_allclose(steering_vector(geom, Direction(0, 90)), np.ones(4), atol=1e-12)
    np.testing.assert_allclose(steering_vector(geom, Direction(37, 90)), np.ones(4), atol=1e-12)


@given(az=angles, el=angles)
def test_unit_modulus_and_norm(az, el):
    a = steering_vector(default_ura(), Direction(az, el))
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)
    assert np.vdot(a, a).real == pytest.approx(4.0, abs=1e-12)


@given(az=angles)
def test_ula_row_conjugate_symmetry(az):
    g = make_ura(1, 4, 1.5, 3.0)
    np.testing.assert_allclose(steering_vector(g, Direction(-az, 0)),
                               steering_vector(g, Direction(az, 0)).conj(), atol=1e-12)


@given(az=angles, el=angles)
def test_elevation_mirror_is_identical(az, el):
    g = default_ura()
    np.testing.assert_allclose(steering_vector(g, Direction(az, el)),
                               steering_vector(g, Direction(az, -el)), atol=1e-12)


def test_continuity(geom):
    for az in np.linspace(-90, 89.9, 50):
        a0 = steering_vector(geom, Direction(az, 10))
        a1 = steering_vector(geom, Direction(az + 0.001, 10))
        assert np.max(np.abs(a1 - a0)) <= 1e-3


def test_matrix_matches_vector(geom):
    az = [-40.0, 0.0, 30.0]
    el = [0.0, 20.0, -10.0]
    m = steering_matrix(geom, az, el)
    for i, (a, e) in enumerate(zip(az, el)):
        np.testing.assert_allclose(m[:, i], steering_vector(geom, Direction(a, e)))


def test_grid_is_az_major(geom):
    az, el = (-10.0, 0.0, 10.0), (0.0, 45.0)
    a = grid_steering(geom, az, el)
    for n, (x, y) in enumerate(itertools.product(az, el)):
        np.testing.assert_allclose(a[:, n], steering_vector(geom, Direction(x, y)))
    assert not a.flags.writeable
