"""Highway intersection scenario: vehicle paths and ground-truth DoAs.

The intersection sits at the world origin.  The north arm runs along +y,
south along -y, west along -x.  A vehicle starts ``arm_length`` out on its
start arm, drives toward the origin at constant speed, turns and leaves along
its end arm.  Roads continue straight past the nominal arm ends, so a lagged
jammer can be positioned outside the collection window.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .array_model import Direction
from .errors import BoundsError, DegenerateGeometryError, ValidationError


class TrajectoryId(str, enum.Enum):
    NS = "NS"
    NW = "NW"
    SN = "SN"
    SW = "SW"
    WN = "WN"
    WS = "WS"

    @property
    def start_arm(self):
        return self.value[0]

    @property
    def end_arm(self):
        return self.value[1]


ARM_DIRECTIONS = {
    "N": np.array([0.0, 1.0]),
    "S": np.array([0.0, -1.0]),
    "W": np.array([-1.0, 0.0]),
    "E": np.array([1.0, 0.0]),
}

# Receiver trajectory -> jammer trajectory for the six-scenario suite.
DEFAULT_SUITE = (
    (TrajectoryId.NS, TrajectoryId.NW),
    (TrajectoryId.NW, TrajectoryId.NS),
    (TrajectoryId.SN, TrajectoryId.SW),
    (TrajectoryId.SW, TrajectoryId.SN),
    (TrajectoryId.WN, TrajectoryId.SN),
    (TrajectoryId.WS, TrajectoryId.NS),
)


@dataclass(frozen=True)
class ScenarioConfig:
    tx_position: tuple = (-300.0, 80.0, 50.0)
    rx_trajectory: TrajectoryId = TrajectoryId.NS
    jammer_trajectory: TrajectoryId = TrajectoryId.NW
    collections: int = 50
    speed: float = 20.0
    collection_interval: float = 0.5
    arm_length: float = 250.0
    jsr_db: float = 10.0
    input_snr_db: float = 5.0
    seed: int = 0
    jammer_lag: float = 8.0  # collections the jammer trails its schedule by
    vehicle_height: float = 1.5
    jammer_height: float = 2.5

    def __post_init__(self):
        object.__setattr__(self, "rx_trajectory", TrajectoryId(self.rx_trajectory))
        object.__setattr__(self, "jammer_trajectory", TrajectoryId(self.jammer_trajectory))
        object.__setattr__(self, "tx_position", tuple(float(v) for v in self.tx_position))
        if len(self.tx_position) != 3:
            raise ValidationError("tx_position needs three coordinates")
        if int(self.collections) != self.collections or self.collections < 1:
            raise ValidationError(f"collections must be >= 1, got {self.collections}")
        if not self.arm_length > 0:
            raise ValidationError(f"arm_length must be positive, got {self.arm_length}")
        if not self.speed > 0 or not self.collection_interval > 0:
            raise ValidationError("speed and collection_interval must be positive")
        if not math.isfinite(self.jsr_db) or not math.isfinite(self.input_snr_db):
            raise ValidationError("jsr_db and input_snr_db must be finite")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def with_pair(self, rx, jammer):
        return replace(self, rx_trajectory=TrajectoryId(rx), jammer_trajectory=TrajectoryId(jammer))


@dataclass(frozen=True)
class WorldState:
    collection_index: int
    rx_position: tuple
    jammer_position: tuple
    true_src_doa: Direction
    true_jam_doa: Direction


def _planar_position(traj, distance):
    """Point at signed path distance from the origin (negative = before the turn)."""
    if distance < 0:
        return -distance * ARM_DIRECTIONS[traj.start_arm]
    return distance * ARM_DIRECTIONS[traj.end_arm]


def position_at_time(traj, t_index, cfg, height=None):
    """Position for a fractional collection index; no range check."""
    traj = TrajectoryId(traj)
    distance = t_index * cfg.speed * cfg.collection_interval - cfg.arm_length
    xy = _planar_position(traj, distance)
    z = cfg.vehicle_height if height is None else height
    return (float(xy[0]), float(xy[1]), float(z))


def position_at(traj, t_index, cfg):
    if not 0 <= t_index < cfg.collections:
        raise BoundsError(f"t_index {t_index} outside [0, {cfg.collections})")
    return position_at_time(traj, t_index, cfg)


def direction_to_angles(v):
    """Convert a direction vector to (azimuth, elevation) in degrees.

    Vectors behind the panel (``v_y < 0``) are folded onto their front mirror
    image, which the array cannot distinguish from them.  The zenith maps to
    azimuth 0.
    """
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not norm > 1e-9:
        raise DegenerateGeometryError("source coincides with the array center")
    x, y, z = v / norm
    y = abs(y)
    el = math.degrees(math.asin(min(1.0, max(-1.0, z))))
    if math.hypot(x, y) < 1e-12:
        az = 0.0
    else:
        az = math.degrees(math.atan2(x, y))
    return Direction(az, el)


def world_at(cfg, t_index):
    if not 0 <= t_index < cfg.collections:
        raise BoundsError(f"t_index {t_index} outside [0, {cfg.collections})")
    rx = np.array(position_at(cfg.rx_trajectory, t_index, cfg))
    jam = np.array(position_at_time(cfg.jammer_trajectory, t_index - cfg.jammer_lag, cfg,
                                    height=cfg.jammer_height))
    tx = np.array(cfg.tx_position)
    return WorldState(
        collection_index=t_index,
        rx_position=tuple(rx),
        jammer_position=tuple(jam),
        true_src_doa=direction_to_angles(tx - rx),
        true_jam_doa=direction_to_angles(jam - rx),
    )


def source_azimuth_track(cfg, traj, phase=0.0):
    """Ground-truth source azimuths seen from a receiver on ``traj``.

    ``phase`` shifts the sampling instants by a fraction of a collection.
    """
    tx = np.array(cfg.tx_position)
    out = []
    for t in range(cfg.collections):
        if t + phase >= cfg.collections:
            break
        rx = np.array(position_at_time(traj, t + phase, cfg))
        out.append(direction_to_angles(tx - rx).azimuth)
    return out
