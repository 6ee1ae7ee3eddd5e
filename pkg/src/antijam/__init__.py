"""MUSIC direction finding, MVDR nulling and a lag-k azimuth predictor for
mobile-jammer mitigation on a small uniform rectangular array."""

from .array_model import ArrayGeometry, Direction, default_ura, make_ura, steering_vector
from .beamforming import apply_beamformer, beampattern, fixed_weights, mvdr_weights
from .estimation import (doa_error_pct, estimate_covariance, estimate_doas, find_peaks,
                         music_spectrum)
from .linalg import hermitian_eig, solve_hermitian
from .metrics import accuracy_report, combine_elements, snr_db, snr_improvement
from .pipeline import Algorithm, RunConfig, run_comparison, run_mitigation_loop
from .predictor import build_training_set, coefficient_significance, fit_linear, predict_next
from .scenario import ScenarioConfig, TrajectoryId, position_at, world_at
from .signals import SignalSpec, Snapshot, synth_snapshot

__version__ = "0.1.0"
