"""Snapshot synthesis: pulsed desired signal, barrage jammer and AWGN."""

import csv
from dataclasses import dataclass

import numpy as np

from .array_model import steering_vector
from .errors import ValidationError


@dataclass(frozen=True)
class SignalSpec:
    desired_power: float = 1.0
    jammer_power: float = 10.0
    noise_power: float = 0.1
    snapshot_len: int = 256
    burst_fraction: float = 0.5
    sample_rate: float = 1000.0

    def __post_init__(self):
        if not self.desired_power > 0:
            raise ValidationError("desired_power must be positive")
        if min(self.jammer_power, self.noise_power) < 0:
            raise ValidationError("jammer and noise powers must be non-negative")
        if self.snapshot_len < 16:
            raise ValidationError(f"snapshot_len must be >= 16, got {self.snapshot_len}")
        if not 0 < self.burst_fraction < 1:
            raise ValidationError(f"burst_fraction must lie in (0, 1), got {self.burst_fraction}")
        if not self.sample_rate > 0:
            raise ValidationError("sample_rate must be positive")

    @classmethod
    def from_db(cls, jsr_db, input_snr_db, desired_power=1.0, **kwargs):
        return cls(
            desired_power=desired_power,
            jammer_power=desired_power * 10 ** (jsr_db / 10),
            noise_power=desired_power * 10 ** (-input_snr_db / 10),
            **kwargs,
        )

    def regions(self):
        """``(signal_region, noise_region)`` as inclusive index pairs.

        The burst is centered; the noise region is everything before it and
        the tail after the burst is an unused guard band.
        """
        n = self.snapshot_len
        burst = int(round(self.burst_fraction * n))
        a1 = (n - burst) // 2
        return (a1, a1 + burst - 1), (0, a1 - 1)


@dataclass(frozen=True)
class Snapshot:
    samples: np.ndarray  # (elements, T) complex
    sample_rate: float
    signal_region: tuple
    noise_region: tuple

    def __post_init__(self):
        a0, b0 = self.noise_region
        a1, b1 = self.signal_region
        t = self.samples.shape[1]
        if not (0 <= a0 <= b0 < a1 <= b1 < t):
            raise ValidationError(
                f"regions noise={self.noise_region} signal={self.signal_region} invalid for T={t}")

    @property
    def num_samples(self):
        return self.samples.shape[1]


def synth_snapshot(world, geom, spec, rng_seed):
    """Draw one collection per ``x = s a_s + j a_j + n``.

    Deterministic in ``rng_seed`` (an int or a ``numpy.random.SeedSequence``).
    """
    rng = np.random.default_rng(rng_seed)
    n = spec.snapshot_len
    e = geom.num_elements
    (a1, b1), _ = spec.regions()

    symbols = rng.integers(0, 4, size=b1 - a1 + 1)
    s = np.zeros(n, dtype=np.complex128)
    s[a1:b1 + 1] = np.sqrt(spec.desired_power) * np.exp(1j * (np.pi / 4 + np.pi / 2 * symbols))

    j = np.sqrt(spec.jammer_power / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    noise = np.sqrt(spec.noise_power / 2) * (
        rng.standard_normal((e, n)) + 1j * rng.standard_normal((e, n)))

    a_s = steering_vector(geom, world.true_src_doa)
    a_j = steering_vector(geom, world.true_jam_doa)
    x = np.outer(a_s, s) + np.outer(a_j, j) + noise
    signal_region, noise_region = spec.regions()
    return Snapshot(x, spec.sample_rate, signal_region, noise_region)


def write_snapshot_csv(snap, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["element", "sample_index", "re", "im"])
        for i, row in enumerate(snap.samples):
            for t, z in enumerate(row):
                w.writerow([i, t, repr(float(z.real)), repr(float(z.imag))])
