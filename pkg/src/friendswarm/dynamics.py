"""Fully observed integration of the friendship-formation swarm model.

Every agent moves with velocity

    v_i = sum_{j != i} (k_ij / |R_ij| - 1 / |R_ij|**2) * R_ij / |R_ij|,   R_ij = r_j - r_i

on an unbounded plane. Units are dimensionless; physical units only appear in
:mod:`friendswarm.hardware`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, DimensionError, SwarmError
from .trajectory import TrajectoryRecord

DEFAULT_MIN_SEPARATION = 1e-6


class Method(str, enum.Enum):
    EULER = "euler"
    RK4 = "rk4"


def as_vec2(v) -> np.ndarray:
    """Coerce ``v`` to a finite float array of shape ``(2,)``."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (2,):
        raise DimensionError(f"expected a 2-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SwarmError(f"non-finite vector {arr!r}")
    return arr


def _pair_distances(X: np.ndarray) -> np.ndarray:
    R = X[None, :, :] - X[:, None, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", R, R))


def min_pair_distance(X: np.ndarray) -> float:
    d = _pair_distances(X)
    np.fill_diagonal(d, np.inf)
    return float(d.min())


@dataclass(frozen=True, eq=False)
class SwarmState:
    """Positions of all agents, shape ``(N, 2)``, plus the simulation time."""

    positions: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        X = np.array(self.positions, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise DimensionError(f"positions must have shape (N, 2), got {X.shape}")
        if X.shape[0] < 2:
            raise DimensionError("a swarm needs at least 2 agents")
        if not np.all(np.isfinite(X)):
            raise SwarmError("positions contain NaN or Inf")
        if not math.isfinite(self.time):
            raise SwarmError("time must be finite")
        if min_pair_distance(X) <= 0.0:
            raise DegenerateStateError("two agents occupy the same position")
        X.setflags(write=False)
        object.__setattr__(self, "positions", X)
        object.__setattr__(self, "time", float(self.time))

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SwarmState):
            return NotImplemented
        return self.time == other.time and np.array_equal(self.positions, other.positions)

    def __repr__(self):
        return f"SwarmState(n={self.n}, time={self.time!r})"


@dataclass(frozen=True)
class IntegratorConfig:
    method: Method = Method.RK4
    dt: float = 0.01
    min_separation: float = DEFAULT_MIN_SEPARATION

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise SwarmError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.min_separation) and self.min_separation > 0):
            raise SwarmError(f"min_separation must be positive, got {self.min_separation}")


def _matrix(K) -> np.ndarray:
    return np.asarray(getattr(K, "k", K), dtype=float)


def pairwise_term(k_ij: float, r_i, r_j, min_separation: float = DEFAULT_MIN_SEPARATION) -> np.ndarray:
    """Velocity contribution of agent ``j`` on agent ``i``."""
    R = as_vec2(r_j) - as_vec2(r_i)
    dist = math.hypot(R[0], R[1])
    if dist == 0.0:
        raise DegenerateStateError("pairwise term undefined for coincident agents")
    d = max(dist, min_separation)
    return (k_ij / d - 1.0 / d**2) * (R / dist)


def velocity_field(X: np.ndarray, k: np.ndarray, min_separation: float = DEFAULT_MIN_SEPARATION) -> np.ndarray:
    """Array-level velocity field; ``X`` is ``(N, 2)`` and ``k`` is ``(N, N)``.

    No validation beyond what is needed to stay finite: callers check states at
    step boundaries.
    """
    R = X[None, :, :] - X[:, None, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", R, R))
    np.fill_diagonal(dist, np.inf)
    if not np.all(dist > 0):
        raise DegenerateStateError("coincident agents")
    d = np.maximum(dist, min_separation)
    coef = (k / d - 1.0 / (d * d)) / dist
    np.fill_diagonal(coef, 0.0)
    return np.einsum("ij,ijk->ik", coef, R)


def net_velocity(state: SwarmState, K, min_separation: float = DEFAULT_MIN_SEPARATION) -> np.ndarray:
    """Velocity of every agent, shape ``(N, 2)``."""
    k = _matrix(K)
    if k.shape != (state.n, state.n):
        raise DimensionError(f"preference matrix is {k.shape}, swarm has {state.n} agents")
    return velocity_field(state.positions, k, min_separation)


def _advance(X: np.ndarray, k: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    dt, ms = cfg.dt, cfg.min_separation
    if cfg.method is Method.EULER:
        return X + dt * velocity_field(X, k, ms)
    a = velocity_field(X, k, ms)
    b = velocity_field(X + 0.5 * dt * a, k, ms)
    c = velocity_field(X + 0.5 * dt * b, k, ms)
    e = velocity_field(X + dt * c, k, ms)
    return X + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + e)


def _checked(X: np.ndarray, cfg: IntegratorConfig, step: int | None = None) -> np.ndarray:
    if not np.all(np.isfinite(X)):
        raise DegenerateStateError("state became non-finite", step)
    if min_pair_distance(X) < cfg.min_separation:
        raise DegenerateStateError(f"agents collapsed below min_separation={cfg.min_separation}", step)
    return X


def step(state: SwarmState, K, cfg: IntegratorConfig) -> SwarmState:
    k = _matrix(K)
    if k.shape != (state.n, state.n):
        raise DimensionError(f"preference matrix is {k.shape}, swarm has {state.n} agents")
    X = _advance(state.positions, k, cfg)
    return SwarmState(_checked(X, cfg), state.time + cfg.dt)


def n_steps(duration: float, dt: float) -> int:
    """Number of steps covering ``duration``; tolerant to round-off in ``duration/dt``."""
    if duration <= 0:
        return 0
    return max(1, math.ceil(duration / dt - 1e-9))


def run(
    initial: SwarmState,
    K,
    cfg: IntegratorConfig,
    duration: float,
    sample_every: int = 1,
    meta: dict | None = None,
) -> TrajectoryRecord:
    """Integrate for ``ceil(duration / dt)`` steps.

    Samples the initial state, every ``sample_every``-th step and the final step.
    Deterministic: identical arguments give bit-identical output.
    """
    if duration < 0 or not math.isfinite(duration):
        raise SwarmError(f"duration must be a non-negative number, got {duration}")
    if sample_every < 1:
        raise SwarmError(f"sample_every must be >= 1, got {sample_every}")
    k = _matrix(K)
    if k.shape != (initial.n, initial.n):
        raise DimensionError(f"preference matrix is {k.shape}, swarm has {initial.n} agents")

    total = n_steps(duration, cfg.dt)
    steps = [0]
    frames = [initial.positions]
    X = np.array(initial.positions)
    for n in range(1, total + 1):
        try:
            X = _advance(X, k, cfg)
        except DegenerateStateError as exc:
            raise DegenerateStateError(str(exc), n) from exc
        _checked(X, cfg, n)
        if n % sample_every == 0 or n == total:
            steps.append(n)
            frames.append(X.copy())

    steps_arr = np.array(steps, dtype=np.int64)
    info = {
        "K": k.tolist(),
        "integrator": {"method": cfg.method.value, "dt": cfg.dt, "min_separation": cfg.min_separation},
        "sample_every": sample_every,
    }
    info.update(meta or {})
    return TrajectoryRecord(
        times=initial.time + steps_arr * cfg.dt,
        positions=np.stack(frames),
        steps=steps_arr,
        meta=info,
    )

