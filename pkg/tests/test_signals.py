import numpy as np
import pytest

from antijam.array_model import Direction, steering_vector
from antijam.errors import ValidationError
from antijam.linalg import hermitian_eig
from antijam.scenario import WorldState
from antijam.signals import SignalSpec, Snapshot, synth_snapshot, write_snapshot_csv

WORLD = WorldState(0, (0, 0, 0), (0, 0, 0), Direction(-40, 10), Direction(30, 5))


def test_regions_partition():
    (a1, b1), (a0, b0) = SignalSpec().regions()
    assert (a0, b0) == (0, 63)
    assert (a1, b1) == (64, 191)


def test_noise_free_decomposition(geom):
    spec = SignalSpec(jammer_power=0.0, noise_power=0.0)
    snap = synth_snapshot(WORLD, geom, spec, 7)
    (a1, b1), (a0, b0) = snap.signal_region, snap.noise_region
    assert np.all(snap.samples[:, a0:b0 + 1] == 0)
    assert np.all(snap.samples[:, b1 + 1:] == 0)
    a = steering_vector(geom, WORLD.true_src_doa)
    s = snap.samples[0, a1:b1 + 1] / a[0]
    np.testing.assert_allclose(snap.samples[:, a1:b1 + 1], np.outer(a, s), atol=1e-12)
    assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=1e-9)


def test_same_seed_bit_identical(geom):
    spec = SignalSpec()
    a = synth_snapshot(WORLD, geom, spec, np.random.SeedSequence([1, 2, 3]))
    b = synth_snapshot(WORLD, geom, spec, np.random.SeedSequence([1, 2, 3]))
    c = synth_snapshot(WORLD, geom, spec, np.random.SeedSequence([1, 2, 4]))
    assert a.samples.tobytes() == b.samples.tobytes()
    assert a.samples.tobytes() != c.samples.tobytes()


def test_noise_region_variance(geom):
    spec = SignalSpec(jammer_power=10.0, noise_power=0.5, snapshot_len=8192)
    snap = synth_snapshot(WORLD, geom, spec, 3)
    a0, b0 = snap.noise_region
    var = np.mean(np.abs(snap.samples[:, a0:b0 + 1]) ** 2, axis=1)
    np.testing.assert_allclose(var, 10.5, rtol=0.05)


def test_jammer_is_rank_one(geom):
    spec = SignalSpec(jammer_power=10.0, noise_power=0.0)
    snap = synth_snapshot(WORLD, geom, spec, 5)
    a0, b0 = snap.noise_region
    x = snap.samples[:, a0:b0 + 1]
    lam = hermitian_eig(x @ x.conj().T / x.shape[1]).eigenvalues
    assert np.all(np.abs(lam[1:]) <= 1e-9 * lam[0])


def test_from_db():
    spec = SignalSpec.from_db(10.0, 5.0)
    assert spec.jammer_power == pytest.approx(10.0)
    assert spec.noise_power == pytest.approx(10 ** -0.5)


@pytest.mark.parametrize("kwargs", [dict(desired_power=0), dict(noise_power=-1), dict(snapshot_len=8),
                                    dict(burst_fraction=1.0), dict(sample_rate=0)])
def test_spec_validation(kwargs):
    with pytest.raises(ValidationError):
        SignalSpec(**kwargs)


def test_snapshot_region_validation():
    with pytest.raises(ValidationError):
        Snapshot(np.zeros((4, 32), complex), 1000.0, (10, 20), (15, 25))


def test_csv_export(tmp_path, geom):
    snap = synth_snapshot(WORLD, geom, SignalSpec(snapshot_len=16), 1)
    path = tmp_path / "snap.csv"
    write_snapshot_csv(snap, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "element,sample_index,re,im"
    assert len(lines) == 1 + 4 * 16
    e, t, re, im = lines[1 + 16 + 3].split(",")
    assert (int(e), int(t)) == (1, 3)
    assert complex(float(re), float(im)) == snap.samples[1, 3]
