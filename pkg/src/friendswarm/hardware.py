"""Emulation of the robots' sensing and omni-wheel actuation.

Each robot sees its neighbours only through ``n_sensors`` narrow distance
sensors with a finite range, refreshed on a fixed clock, and drives three
omni-wheels. Robots translate without turning, so every sensor frame is aligned
with the world frame.

Units: positions inside the simulator stay in model units. ``scale`` converts
them to meters and ``time_scale`` converts model time to seconds, so a model
velocity ``v`` is ``v * scale / time_scale`` m/s on the robot.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import IntegratorConfig, SwarmState, min_pair_distance, n_steps, _checked
from .errors import DimensionError, InconsistentCommandError, SwarmError
from .scenario import ScenarioSpec
from .trajectory import TrajectoryRecord

log = logging.getLogger(__name__)

ZERO_SUM_TOL = 1e-9

# Rows map the body velocity (V cos t, V sin t) onto the three wheel outputs.
MOTOR_MATRIX = np.array(
    [
        [0.0, -1.0],
        [-math.sqrt(3.0) / 2.0, 0.5],
        [math.sqrt(3.0) / 2.0, 0.5],
    ]
)
# M^T M = 3/2 I, so the pseudo-inverse is (2/3) M^T.
_MOTOR_PINV = (2.0 / 3.0) * MOTOR_MATRIX.T


@dataclass(frozen=True)
class SensorLayout:
    n_sensors: int = 8
    half_angle: float = math.pi / 12
    range: float = 1.7
    update_interval: float = 0.1
    # switches used to reduce the layer to ideal perception
    quantize_bearing: bool = True
    occlusion: bool = True

    def __post_init__(self):
        if self.n_sensors < 1:
            raise SwarmError("n_sensors must be >= 1")
        if not 0 < self.half_angle <= math.pi / self.n_sensors * (1 + 1e-12):
            raise SwarmError(f"half_angle must be in (0, pi/n_sensors], got {self.half_angle}")
        if not self.range > 0:
            raise SwarmError(f"sensor range must be positive, got {self.range}")
        if not (math.isfinite(self.update_interval) and self.update_interval > 0):
            raise SwarmError(f"update_interval must be positive, got {self.update_interval}")

    @property
    def axes(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_sensors) / self.n_sensors

    @classmethod
    def full_coverage(cls, update_interval: float) -> SensorLayout:
        """Omnidirectional, unlimited, unquantized sensing."""
        return cls(
            n_sensors=1,
            half_angle=math.pi,
            range=math.inf,
            update_interval=update_interval,
            quantize_bearing=False,
            occlusion=False,
        )


@dataclass(frozen=True, eq=False)
class PerceptionSnapshot:
    """What one robot knows about its neighbours; positions are relative, in meters."""

    relative: np.ndarray  # (k, 2)
    is_red: np.ndarray  # (k,) bool
    timestamp: float = 0.0
    stale: bool = False
    self_is_red: bool = False
    sectors: np.ndarray | None = None  # detecting sensor per estimate

    def __post_init__(self):
        rel = np.asarray(self.relative, dtype=float).reshape(-1, 2)
        red = np.asarray(self.is_red, dtype=bool).reshape(-1)
        if red.shape[0] != rel.shape[0]:
            raise DimensionError("one is_red flag is needed per neighbour estimate")
        sec = None if self.sectors is None else np.asarray(self.sectors, dtype=int).reshape(-1)
        object.__setattr__(self, "relative", rel)
        object.__setattr__(self, "is_red", red)
        object.__setattr__(self, "sectors", sec)

    @property
    def neighbor_estimates(self) -> list[tuple[np.ndarray, bool]]:
        return [(r, bool(f)) for r, f in zip(self.relative, self.is_red)]

    def __len__(self):
        return self.relative.shape[0]

    def held(self, timestamp: float) -> PerceptionSnapshot:
        return PerceptionSnapshot(self.relative, self.is_red, timestamp, True, self.self_is_red, self.sectors)


@dataclass(frozen=True)
class MotorCommand:
    p: tuple[float, float, float]

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        if len(p) != 3:
            raise DimensionError("a motor command has exactly three outputs")
        object.__setattr__(self, "p", p)

    def as_array(self) -> np.ndarray:
        return np.array(self.p)


@dataclass(frozen=True)
class HardwareConfig:
    layout: SensorLayout = field(default_factory=SensorLayout)
    noise_sigma: float = 0.0
    dropout_prob: float = 0.0
    scale: float = 0.5
    time_scale: float = 2.0
    v_max: float = 0.3
    c: float = 1.0
    robot_diameter: float = 0.19
    robot_mass: float = 1.2  # carried for reference, enters no equation
    hold_max_age: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("scale", "time_scale", "v_max", "c"):
            if not getattr(self, name) > 0:
                raise SwarmError(f"hardware {name} must be positive, got {getattr(self, name)}")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise SwarmError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 0 <= self.dropout_prob <= 1:
            raise SwarmError(f"dropout_prob must be in [0, 1], got {self.dropout_prob}")
        if self.robot_diameter < 0 or self.hold_max_age < 0:
            raise SwarmError("robot_diameter and hold_max_age must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["layout"] = {k: (repr(v) if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d["layout"].items()}
        return d


def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def perceive(
    world: SwarmState,
    self_index: int,
    layout: SensorLayout,
    *,
    red_index: int = 0,
    scale: float = 1.0,
    noise_sigma: float = 0.0,
    dropout_prob: float = 0.0,
    rng: np.random.Generator | None = None,
    timestamp: float | None = None,
) -> PerceptionSnapshot:
    """Sector-sensor reading of ``world`` from robot ``self_index``.

    A neighbour is seen when it is within range and inside the cone of some
    sensor. With ``occlusion`` each sensor reports only its nearest echo.
    """
    X = world.positions
    n = X.shape[0]
    if not 0 <= self_index < n:
        raise DimensionError(f"self_index {self_index} out of range for {n} robots")
    if (noise_sigma > 0 or dropout_prob > 0) and rng is None:
        raise SwarmError("a random generator is required when noise or dropout is enabled")

    others = np.array([j for j in range(n) if j != self_index])
    R = (X[others] - X[self_index]) * scale
    dist = np.hypot(R[:, 0], R[:, 1])
    bearing = np.arctan2(R[:, 1], R[:, 0])
    width = 2.0 * math.pi / layout.n_sensors
    sector = np.round(bearing / width).astype(int) % layout.n_sensors
    off_axis = np.abs(_wrap(bearing - sector * width))
    seen = (dist <= layout.range) & (off_axis <= layout.half_angle)

    idx = np.flatnonzero(seen)
    if layout.occlusion and idx.size:
        nearest = {}
        for i in idx[np.argsort(dist[idx], kind="stable")]:
            nearest.setdefault(sector[i], i)
        idx = np.array(sorted(nearest.values()), dtype=int)

    d = dist[idx]
    if noise_sigma > 0 and idx.size:
        d = np.clip(d + noise_sigma * rng.standard_normal(idx.size), 0.0, layout.range)
    if dropout_prob > 0 and idx.size:
        keep = rng.random(idx.size) >= dropout_prob
        idx, d = idx[keep], d[keep]

    if layout.quantize_bearing:
        ang = sector[idx] * width
        rel = d[:, None] * np.column_stack((np.cos(ang), np.sin(ang)))
    else:
        unit = R[idx] / np.maximum(dist[idx], np.finfo(float).tiny)[:, None]
        rel = d[:, None] * unit

    return PerceptionSnapshot(
        relative=rel,
        is_red=others[idx] == red_index,
        timestamp=world.time if timestamp is None else timestamp,
        stale=False,
        self_is_red=self_index == red_index,
        sectors=sector[idx],
    )


def motor_outputs(V: float, theta: float, c: float) -> MotorCommand:
    if not c > 0:
        raise SwarmError(f"motor gain c must be positive, got {c}")
    vx, vy = V * math.cos(theta), V * math.sin(theta)
    s = math.sqrt(3.0) / 2.0
    # written out so the three outputs cancel exactly
    a = s * vx
    b = 0.5 * vy
    return MotorCommand((-c * vy, c * (b - a), c * (a + b)))


def motor_to_velocity(cmd: MotorCommand, c: float) -> tuple[float, float]:
    """``(V, theta)`` implied by a motor command; ``theta`` is 0 when ``V`` is 0."""
    if not c > 0:
        raise SwarmError(f"motor gain c must be positive, got {c}")
    p = cmd.as_array()
    if abs(p.sum()) > ZERO_SUM_TOL * max(1.0, np.abs(p).max()):
        raise InconsistentCommandError(f"motor outputs {cmd.p} do not sum to zero")
    vx, vy = _MOTOR_PINV @ p / c
    V = math.hypot(vx, vy)
    return V, (math.atan2(vy, vx) if V > 0 else 0.0)


def desired_velocity(snapshot: PerceptionSnapshot, params, scale: float) -> np.ndarray:
    """Model-unit velocity from the perceived neighbours only."""
    k_p, k_m, k_a = params
    if len(snapshot) == 0:
        return np.zeros(2)
    if snapshot.self_is_red:
        k = np.full(len(snapshot), k_p + k_m)
    else:
        k = np.where(snapshot.is_red, k_p - k_m, k_a)
    R = snapshot.relative / scale
    dist = np.hypot(R[:, 0], R[:, 1])
    ok = dist > 0
    coef = (k[ok] / dist[ok] - 1.0 / dist[ok] ** 2) / dist[ok]
    return coef @ R[ok]


def controller_step(snapshot: PerceptionSnapshot, params, cfg: HardwareConfig) -> MotorCommand:
    v = desired_velocity(snapshot, params, cfg.scale) * (cfg.scale / cfg.time_scale)
    speed = math.hypot(v[0], v[1])
    if speed == 0:
        return MotorCommand((0.0, 0.0, 0.0))
    return motor_outputs(min(speed, cfg.v_max), math.atan2(v[1], v[0]), cfg.c)


def _merge_held(fresh: PerceptionSnapshot, memory: dict, now: float, max_age: float) -> PerceptionSnapshot:
    """Fill silent sectors with their last reading if it is recent enough."""
    live = set(fresh.sectors.tolist())
    rel, red, sec = [fresh.relative], [fresh.is_red], [fresh.sectors]
    for s, (r, f, t) in memory.items():
        if s not in live and now - t <= max_age + 1e-12:
            rel.append(r)
            red.append(f)
            sec.append(np.full(len(f), s))
    for s in live:
        m = fresh.sectors == s
        memory[s] = (fresh.relative[m], fresh.is_red[m], now)
    return PerceptionSnapshot(
        np.vstack(rel), np.concatenate(red), fresh.timestamp, fresh.stale, fresh.self_is_red, np.concatenate(sec)
    )


def run_hardware(
    scenario: ScenarioSpec,
    hw: HardwareConfig,
    cfg: IntegratorConfig,
    duration: float,
    sample_every: int = 1,
    meta: dict | None = None,
) -> TrajectoryRecord:
    """Closed-loop run through perception, controller and wheels.

    Sensors refresh every ``update_interval`` seconds; in between each robot keeps
    its last command. Commanded velocities are constant over a step, so positions
    advance exactly by ``dt * v`` whatever ``cfg.method`` says.
    """
    if scenario.params is None:
        raise SwarmError("hardware mode needs a five-robot scenario given by (k_p, k_m, k_a)")
    if sample_every < 1:
        raise SwarmError(f"sample_every must be >= 1, got {sample_every}")
    if duration < 0 or not math.isfinite(duration):
        raise SwarmError(f"duration must be a non-negative number, got {duration}")

    rng = np.random.default_rng(hw.seed)
    layout = hw.layout
    red = scenario.red_index
    to_model = hw.time_scale / hw.scale
    tick = layout.update_interval / hw.time_scale  # model time between sensor refreshes

    state = scenario.initial
    X = np.array(state.positions)
    n = X.shape[0]
    V = np.zeros_like(X)
    memories = [dict() for _ in range(n)]
    next_tick = state.time
    overlap_warned = False

    total = n_steps(duration, cfg.dt)
    steps, frames = [0], [X.copy()]
    for k in range(total):
        t = state.time + k * cfg.dt
        if t >= next_tick - 1e-9 * cfg.dt:
            world = SwarmState(X, t)
            for i in range(n):
                snap = perceive(
                    world, i, layout, red_index=red, scale=hw.scale,
                    noise_sigma=hw.noise_sigma, dropout_prob=hw.dropout_prob, rng=rng,
                    timestamp=t * hw.time_scale,
                )
                if hw.hold_max_age > 0:
                    snap = _merge_held(snap, memories[i], t * hw.time_scale, hw.hold_max_age)
                Vm, th = motor_to_velocity(controller_step(snap, scenario.params, hw), hw.c)
                V[i] = Vm * to_model * np.array([math.cos(th), math.sin(th)])
            while next_tick <= t + 1e-9 * cfg.dt:
                next_tick += tick
        X = _checked(X + cfg.dt * V, cfg, k + 1)
        if not overlap_warned and hw.robot_diameter > 0 and min_pair_distance(X) * hw.scale < hw.robot_diameter:
            log.warning("robot bodies overlap at model time %.3f", t + cfg.dt)
            overlap_warned = True
        if (k + 1) % sample_every == 0 or k + 1 == total:
            steps.append(k + 1)
            frames.append(X.copy())

    steps_arr = np.array(steps, dtype=np.int64)
    info = {
        "K": scenario.K.k.tolist(),
        "params": list(scenario.params),
        "scenario": scenario.name,
        "red_index": red,
        "mode": "hardware",
        "integrator": {"method": "zero-order-hold", "dt": cfg.dt, "min_separation": cfg.min_separation},
        "hardware": hw.to_dict(),
        "sample_every": sample_every,
    }
    info.update(meta or {})
    return TrajectoryRecord(
        times=state.time + steps_arr * cfg.dt, positions=np.stack(frames), steps=steps_arr, meta=info
    )
