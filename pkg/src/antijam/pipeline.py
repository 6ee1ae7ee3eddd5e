"""Mitigation loop, three-way comparison, configuration and result files."""

import csv
import enum
import json
import logging
import math
import os
import time
from collections import deque
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .array_model import Direction, default_ura
from .beamforming import apply_beamformer, fixed_weights, mvdr_weights
from .errors import AntijamError, ColdStartError, RunError, ValidationError
from .estimation import (EstimateSource, associate_source, doa_error_pct, estimate_covariance,
                         estimate_doas, split_dominant)
from .metrics import accuracy_report, snr_improvement
from .predictor import AngleHistory, build_training_set, fit_linear, predict_next
from .scenario import DEFAULT_SUITE, ScenarioConfig, TrajectoryId, source_azimuth_track, world_at
from .signals import SignalSpec, synth_snapshot

log = logging.getLogger(__name__)

CSV_HEADER = ("t,true_src_az,true_src_el,true_jam_az,true_jam_el,est_az,est_el,est_source,"
              "doa_err_pct,snr_before_db,snr_after_db,improvement_db,music_ms,mvdr_ms,ml_ms")


class Algorithm(str, enum.Enum):
    FIXED = "FIXED"
    MUSIC_MVDR = "MUSIC_MVDR"
    MUSIC_MVDR_ML = "MUSIC_MVDR_ML"


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    snapshot_len: int = 256
    burst_fraction: float = 0.5
    sample_rate: float = 1000.0
    array_rows: int = 2
    array_cols: int = 2
    carrier_hz: float = 100e6
    spacing: float = 0.0  # 0 means half a wavelength
    grid_step: float = 1.0
    coarse_el_step: float = 5.0
    extra_peaks: int = 2
    el_min: float = 0.0
    reject_dominant: bool = True
    thresholds: tuple = (15.0, 10.0, 7.5)
    ml_trigger_failures: int = 3
    algorithm: Algorithm = Algorithm.MUSIC_MVDR_ML
    output_dir: str = "results"
    num_seeds: int = 5
    lag_k: int = 3
    refresh_every: int = 10
    training_phases: int = 3
    fixed_mode: str = "initial"
    snr_mode: str = "amplitude"
    timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if any(b >= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValidationError(f"thresholds must be strictly decreasing, got {self.thresholds}")
        if self.ml_trigger_failures < 1:
            raise ValidationError("ml_trigger_failures must be >= 1")
        if self.fixed_mode not in ("initial", "true"):
            raise ValidationError(f"fixed_mode must be 'initial' or 'true', got {self.fixed_mode!r}")
        if self.snr_mode not in ("amplitude", "power"):
            raise ValidationError(f"snr_mode must be 'amplitude' or 'power', got {self.snr_mode!r}")
        if self.num_seeds < 1 or self.lag_k < 1 or self.refresh_every < 0 or self.training_phases < 1:
            raise ValidationError("num_seeds, lag_k and training_phases must be >= 1")

    @property
    def signal(self):
        return SignalSpec.from_db(self.scenario.jsr_db, self.scenario.input_snr_db,
                                  snapshot_len=self.snapshot_len,
                                  burst_fraction=self.burst_fraction,
                                  sample_rate=self.sample_rate)

    @property
    def geometry(self):
        return default_ura(self.array_rows, self.array_cols, self.carrier_hz,
                           self.spacing if self.spacing > 0 else None)

    @property
    def gate_threshold(self):
        return min(self.thresholds)


@dataclass
class CollectionRecord:
    t: int
    true_src_az: float
    true_src_el: float
    true_jam_az: float
    true_jam_el: float
    est_az: float
    est_el: float
    est_source: EstimateSource
    doa_err_pct: float
    snr_before_db: float
    snr_after_db: float
    improvement_db: float
    music_ms: float = 0.0
    mvdr_ms: float = 0.0
    ml_ms: float = 0.0
    gate_failed: bool = False

    @property
    def est(self):
        return Direction(self.est_az, self.est_el)

    @property
    def truth(self):
        return Direction(self.true_src_az, self.true_src_el)


# --- predictor plumbing ----------------------------------------------------------

def training_sequences(cfg):
    """Ground-truth source azimuth tracks for every trajectory, sampled at
    ``training_phases`` sub-collection offsets."""
    seqs = []
    for traj in TrajectoryId:
        for p in range(cfg.training_phases):
            seqs.append(source_azimuth_track(cfg.scenario, traj, phase=p / cfg.training_phases))
    return seqs


def train_predictor(cfg):
    x, y = build_training_set(training_sequences(cfg), cfg.lag_k)
    return fit_linear(x, y), x, y


class OnlinePredictor:
    """Offline-trained model refreshed with accepted estimates during a run."""

    def __init__(self, cfg, base=None):
        self.k = cfg.lag_k
        self.refresh_every = cfg.refresh_every
        if base is None:
            base = train_predictor(cfg)
        self.model, self._x, self._y = base
        self.accepted = []

    def record(self, azimuth):
        self.accepted.append(float(azimuth))
        n = len(self.accepted)
        if self.refresh_every and n % self.refresh_every == 0 and n > self.k:
            xa, ya = build_training_set([self.accepted], self.k)
            self.model = fit_linear(np.vstack([self._x, xa]), np.concatenate([self._y, ya]))


# --- the loop ----------------------------------------------------------------

def _clock(enabled):
    return time.perf_counter if enabled else (lambda: 0.0)


def collection_seed(scenario, t_index):
    rx = list(TrajectoryId).index(scenario.rx_trajectory)
    jam = list(TrajectoryId).index(scenario.jammer_trajectory)
    return np.random.SeedSequence([scenario.seed, rx, jam, t_index])


def run_mitigation_loop(cfg, predictor_base=None):
    """Run one trajectory pair under ``cfg.algorithm``; one record per collection.

    ``predictor_base`` is an optional ``(model, X, y)`` triple from
    :func:`train_predictor` so repeated runs skip retraining.
    """
    geom = cfg.geometry
    spec = cfg.signal
    sc = cfg.scenario
    clock = _clock(cfg.timing)
    power = cfg.snr_mode == "power"
    use_ml = cfg.algorithm is Algorithm.MUSIC_MVDR_ML

    initial = world_at(sc, 0).true_src_doa
    last = anchor = initial  # anchor: last accepted MUSIC estimate
    recent_el = deque([initial.elevation], maxlen=cfg.lag_k)
    history = AngleHistory(max(cfg.lag_k, 16))
    predictor = OnlinePredictor(cfg, predictor_base) if use_ml else None
    failures = 0
    records = []

    for t in range(sc.collections):
        try:
            world = world_at(sc, t)
            snap = synth_snapshot(world, geom, spec, collection_seed(sc, t))
            music_ms = mvdr_ms = ml_ms = 0.0
            gate_failed = False

            if cfg.algorithm is Algorithm.FIXED:
                look = initial if cfg.fixed_mode == "initial" else world.true_src_doa
                flag = EstimateSource.STATIC
                w = fixed_weights(geom, look)
            else:
                t0 = clock()
                cov = estimate_covariance(snap)
                peaks, _ = estimate_doas(cov, geom, 2, cfg.grid_step, cfg.coarse_el_step,
                                         extra=cfg.extra_peaks, el_min=cfg.el_min)
                t1 = clock()
                music_ms = (t1 - t0) * 1e3

                # elevation estimates of a planar array are noisy; gate on a short mean
                track_el = float(np.mean(recent_el))
                reference = Direction(last.azimuth, track_el)
                forecast = None
                if use_ml:
                    t2 = clock()
                    try:
                        forecast = predict_next(predictor.model, history)
                        reference = Direction(forecast, track_el)
                    except ColdStartError:
                        forecast = None
                    ml_ms = (clock() - t2) * 1e3

                if cfg.reject_dominant:
                    _, peaks = split_dominant(cov, geom, peaks)
                src, _ = associate_source(peaks, reference)
                if src is None:
                    look, flag = last, EstimateSource.FALLBACK_LAST
                    gate_failed = True
                else:
                    look, flag = src.direction, EstimateSource.MUSIC
                    if forecast is not None:
                        # the forecast carries no elevation; compare azimuths only
                        reference = Direction(forecast, look.elevation)
                    gate_failed = doa_error_pct(look, reference) > cfg.gate_threshold
                failures = failures + 1 if gate_failed else 0
                accepted = not gate_failed
                if failures >= cfg.ml_trigger_failures:
                    # the track is held for at most ml_trigger_failures - 1
                    # collections, then carried by the forecast; a forecast
                    # that MUSIC keeps disagreeing with is dropped after as
                    # many collections again and the track re-acquired
                    if (use_ml and forecast is not None
                            and failures < 2 * cfg.ml_trigger_failures):
                        look = Direction(forecast, track_el)
                        flag = EstimateSource.ML_PREDICTED
                    else:
                        src, _ = associate_source(peaks, Direction(anchor.azimuth, track_el))
                        if src is not None:
                            look, flag = src.direction, EstimateSource.MUSIC
                            failures = 0
                            history.clear()
                    accepted = flag is not EstimateSource.FALLBACK_LAST

                t3 = clock()
                w = mvdr_weights(cov, geom, look)
                mvdr_ms = (clock() - t3) * 1e3

            y = apply_beamformer(w, snap)
            snr = snr_improvement(snap, y, power=power)
            if cfg.algorithm is not Algorithm.FIXED and accepted:
                last = look
                if flag is EstimateSource.MUSIC:
                    anchor = look
                recent_el.append(look.elevation)
                history.push(look.azimuth, flag)
                if use_ml:
                    t4 = clock()
                    predictor.record(look.azimuth)
                    ml_ms += (clock() - t4) * 1e3

            records.append(CollectionRecord(
                t=t,
                true_src_az=world.true_src_doa.azimuth,
                true_src_el=world.true_src_doa.elevation,
                true_jam_az=world.true_jam_doa.azimuth,
                true_jam_el=world.true_jam_doa.elevation,
                est_az=look.azimuth,
                est_el=look.elevation,
                est_source=flag,
                doa_err_pct=doa_error_pct(look, world.true_src_doa),
                snr_before_db=snr.snr_before_db,
                snr_after_db=snr.snr_after_db,
                improvement_db=snr.improvement_db,
                music_ms=music_ms,
                mvdr_ms=mvdr_ms,
                ml_ms=ml_ms,
                gate_failed=gate_failed,
            ))
        except AntijamError as exc:
            raise RunError(t, exc) from exc
    return records


def summarize(records, tiers=(15.0, 10.0, 7.5)):
    imp = np.array([r.improvement_db for r in records])
    acc = accuracy_report([(r.est, r.truth) for r in records], tiers)
    return {
        "collections": len(records),
        "mean_improvement_db": float(np.mean(imp)),
        "max_improvement_db": float(np.max(imp)),
        "min_improvement_db": float(np.min(imp)),
        "mean_snr_before_db": float(np.mean([r.snr_before_db for r in records])),
        "mean_snr_after_db": float(np.mean([r.snr_after_db for r in records])),
        "accuracy": {_tier_key(tier): rate for tier, rate in zip(acc.tiers, acc.hit_rates)},
        "mean_abs_az_error_deg": acc.mean_abs_az_error,
        "mean_abs_el_error_deg": acc.mean_abs_el_error,
        "ml_activations": sum(r.est_source is EstimateSource.ML_PREDICTED for r in records),
        "mean_music_ms": float(np.mean([r.music_ms for r in records])),
        "mean_mvdr_ms": float(np.mean([r.mvdr_ms for r in records])),
        "mean_ml_ms": float(np.mean([r.ml_ms for r in records])),
    }


def _tier_key(tier):
    return f"{tier:g}%"


@dataclass
class RunResult:
    algorithm: Algorithm
    rx: TrajectoryId
    jammer: TrajectoryId
    seed: int
    records: list

    @property
    def name(self):
        return f"{self.algorithm.value}_{self.rx.value}-{self.jammer.value}_s{self.seed}"


@dataclass
class ComparisonTable:
    rows: dict  # algorithm value -> summary dict
    runs: list

    def mean_improvement(self, algorithm):
        return self.rows[Algorithm(algorithm).value]["mean_improvement_db"]

    def strict_accuracy(self, algorithm, tier=7.5):
        return self.rows[Algorithm(algorithm).value]["accuracy"][_tier_key(tier)]


def run_comparison(cfg, suite=DEFAULT_SUITE, algorithms=tuple(Algorithm)):
    """Run every algorithm over the same trajectory pairs and seeds."""
    base = train_predictor(cfg)
    runs = []
    for algorithm in algorithms:
        for rx, jam in suite:
            for i in range(cfg.num_seeds):
                seed = cfg.scenario.seed + i
                sc = replace(cfg.scenario.with_pair(rx, jam), seed=seed)
                run_cfg = replace(cfg, scenario=sc, algorithm=algorithm)
                records = run_mitigation_loop(run_cfg, base)
                runs.append(RunResult(Algorithm(algorithm), TrajectoryId(rx), TrajectoryId(jam),
                                      seed, records))
    rows = {}
    for algorithm in algorithms:
        recs = [r for run in runs if run.algorithm is Algorithm(algorithm) for r in run.records]
        rows[Algorithm(algorithm).value] = summarize(recs, cfg.thresholds)
    return ComparisonTable(rows, runs)


# --- output --------------------------------------------------------------------

def _fmt(value, digits=6):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return f"{value:.{digits}f}"


def write_records_csv(records, path):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            out = csv.writer(fh, lineterminator="\n")
            for r in records:
                out.writerow([
                    r.t,
                    _fmt(r.true_src_az), _fmt(r.true_src_el), _fmt(r.true_jam_az), _fmt(r.true_jam_el),
                    _fmt(r.est_az), _fmt(r.est_el), r.est_source.value,
                    _fmt(r.doa_err_pct), _fmt(r.snr_before_db), _fmt(r.snr_after_db),
                    _fmt(r.improvement_db), _fmt(r.music_ms, 4), _fmt(r.mvdr_ms, 4), _fmt(r.ml_ms, 4),
                ])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_json(obj, path):
    try:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_results(records, output_dir, name="run", tiers=(15.0, 10.0, 7.5)):
    """Write ``<name>.csv`` and ``<name>.json`` into ``output_dir``."""
    os.makedirs(output_dir, exist_ok=True)
    csv_path = os.path.join(output_dir, f"{name}.csv")
    json_path = os.path.join(output_dir, f"{name}.json")
    write_records_csv(records, csv_path)
    write_json(summarize(records, tiers), json_path)
    return csv_path, json_path


COMPARISON_HEADER = ("algorithm,mean_improvement_db,max_improvement_db,acc_15,acc_10,acc_7.5,"
                     "mean_abs_az_error_deg,ml_activations")


def emit_comparison(table, output_dir, tiers=(15.0, 10.0, 7.5)):
    os.makedirs(output_dir, exist_ok=True)
    paths = []
    for run in table.runs:
        paths.extend(emit_results(run.records, output_dir, run.name, tiers))
    csv_path = os.path.join(output_dir, "comparison.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(COMPARISON_HEADER + "\n")
        for alg, row in table.rows.items():
            acc = [row["accuracy"][_tier_key(t)] for t in tiers]
            fh.write(",".join([alg, _fmt(row["mean_improvement_db"]), _fmt(row["max_improvement_db"])]
                              + [_fmt(a) for a in acc]
                              + [_fmt(row["mean_abs_az_error_deg"]), str(row["ml_activations"])]) + "\n")
    json_path = os.path.join(output_dir, "comparison.json")
    write_json(table.rows, json_path)
    return paths + [csv_path, json_path]


# --- configuration files ---------------------------------------------------------

def _floats(text):
    return tuple(float(v) for v in str(text).replace(",", " ").split())


def _bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


SCENARIO_KEYS = {
    "tx_position": _floats, "rx_trajectory": str, "jammer_trajectory": str, "collections": int,
    "speed": float, "collection_interval": float, "arm_length": float, "jsr_db": float,
    "input_snr_db": float, "seed": int, "jammer_lag": float, "vehicle_height": float,
    "jammer_height": float,
}
RUN_KEYS = {
    "snapshot_len": int, "burst_fraction": float, "sample_rate": float, "array_rows": int,
    "array_cols": int, "carrier_hz": float, "spacing": float, "grid_step": float,
    "coarse_el_step": float, "extra_peaks": int, "el_min": float, "reject_dominant": _bool,
    "thresholds": _floats, "ml_trigger_failures": int,
    "algorithm": lambda v: Algorithm(str(v).upper()), "output_dir": str, "num_seeds": int,
    "lag_k": int, "refresh_every": int, "training_phases": int, "fixed_mode": str,
    "snr_mode": str, "timing": _bool,
}


def parse_config_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCENARIO_KEYS and key not in RUN_KEYS:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_run_config(values=None, base=None):
    """Apply a ``{key: text}`` mapping on top of ``base`` (defaults if None)."""
    base = base or RunConfig()
    sc_updates, run_updates = {}, {}
    for key, value in (values or {}).items():
        try:
            if key in SCENARIO_KEYS:
                sc_updates[key] = SCENARIO_KEYS[key](value)
            elif key in RUN_KEYS:
                run_updates[key] = RUN_KEYS[key](value)
            else:
                raise ValidationError(f"unknown key {key!r}")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad value for {key}: {value!r} ({exc})") from exc
    scenario = replace(base.scenario, **sc_updates)
    return replace(base, scenario=scenario, **run_updates)


def load_run_config(path, overrides=None):
    with open(path, encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    values.update(overrides or {})
    return build_run_config(values)


def config_as_dict(cfg):
    out = {f.name: getattr(cfg.scenario, f.name) for f in fields(cfg.scenario)}
    out.update({f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name != "scenario"})
    return {k: (v.value if isinstance(v, enum.Enum) else v) for k, v in out.items()}
