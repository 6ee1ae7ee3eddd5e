"""Region-based SNR measurement and DoA accuracy tiers.

SNR follows an amplitude-mean convention: the mean magnitude over the
signal-present region divided by the mean magnitude over the signal-absent
region, expressed as ``20 log10`` of that ratio.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .estimation import doa_error_pct

DEFAULT_TIERS = (15.0, 10.0, 7.5)


@dataclass(frozen=True)
class SnrReport:
    snr_before_db: float
    snr_after_db: float
    improvement_db: float
    signal_region: tuple
    noise_region: tuple

    @property
    def infinite(self):
        return math.isinf(self.snr_before_db) or math.isinf(self.snr_after_db)


@dataclass(frozen=True)
class AccuracyReport:
    tiers: tuple
    hit_rates: tuple
    mean_abs_az_error: float
    mean_abs_el_error: float
    count: int

    def rate(self, tier):
        return self.hit_rates[self.tiers.index(tier)]

    @property
    def strictest(self):
        return self.hit_rates[int(np.argmin(self.tiers))]


def combine_elements(snap):
    """Per-sample mean of element magnitudes over all ``M*N`` elements."""
    x = snap.samples if hasattr(snap, "samples") else np.asarray(snap)
    return np.abs(x).mean(axis=0)


def _check_regions(n, signal_region, noise_region):
    (a1, b1), (a0, b0) = signal_region, noise_region
    if not (0 <= a1 <= b1 < n and 0 <= a0 <= b0 < n):
        raise ValidationError(f"regions {signal_region}, {noise_region} outside series of length {n}")
    if not (b0 < a1 or b1 < a0):
        raise ValidationError("signal and noise regions overlap")


def snr_db(series, signal_region, noise_region, power=False):
    """``20 log10(mean|x| over signal / mean|x| over noise)``.

    With ``power=True`` the means are taken over ``|x|^2`` and the ratio is
    converted with ``10 log10`` instead.  A zero noise mean returns ``inf``.
    """
    x = np.abs(np.asarray(series))
    _check_regions(len(x), signal_region, noise_region)
    (a1, b1), (a0, b0) = signal_region, noise_region
    if power:
        x = x ** 2
    sig = x[a1:b1 + 1].mean()
    noise = x[a0:b0 + 1].mean()
    if noise == 0.0:
        return math.inf
    if sig == 0.0:
        return -math.inf
    return (10.0 if power else 20.0) * math.log10(sig / noise)


def snr_improvement(before, after, power=False):
    """SNR of the beamformer output minus SNR of the element-averaged input."""
    if tuple(before.signal_region) != tuple(after.signal_region) or \
            tuple(before.noise_region) != tuple(after.noise_region):
        raise ValidationError("before/after series use different regions")
    s_before = snr_db(combine_elements(before), before.signal_region, before.noise_region, power)
    s_after = snr_db(np.abs(after.values), after.signal_region, after.noise_region, power)
    if math.isinf(s_before) or math.isinf(s_after):
        improvement = math.nan if s_before == s_after else s_after - s_before
    else:
        improvement = s_after - s_before
    return SnrReport(s_before, s_after, improvement, tuple(before.signal_region),
                     tuple(before.noise_region))


def accuracy_report(pairs, tiers=DEFAULT_TIERS):
    """Hit rate per tier for ``(estimate, truth)`` Direction pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("accuracy_report needs at least one record")
    errors = np.array([doa_error_pct(e, t) for e, t in pairs])
    az = np.array([abs(e.azimuth - t.azimuth) for e, t in pairs])
    el = np.array([abs(e.elevation - t.elevation) for e, t in pairs])
    return AccuracyReport(
        tiers=tuple(tiers),
        hit_rates=tuple(float(np.mean(errors <= tier)) for tier in tiers),
        mean_abs_az_error=float(az.mean()),
        mean_abs_el_error=float(el.mean()),
        count=len(pairs),
    )
