"""Trajectory metrics and regime classification.

The classifier looks only at the final part of a run (after a transient) and
assigns one of: stationary formation, rigid translation, periodic oscillation,
irregular motion, or unresolved when the window is too short.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import TrajectoryError
from .trajectory import TrajectoryRecord


class PatternKind(str, enum.Enum):
    STATIONARY = "Stationary"
    TRANSLATIONAL = "Translational"
    OSCILLATORY = "Oscillatory"
    IRREGULAR = "Irregular"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class ClassifierThresholds:
    transient_fraction: float = 0.5
    v_eps: float = 1e-3
    v_com_min: float = 1e-2
    s_eps: float = 1e-2
    cv_max: float = 0.2
    min_window_samples: int = 8

    def __post_init__(self):
        if not 0 <= self.transient_fraction < 1:
            raise ValueError("transient_fraction must be in [0, 1)")
        for name in ("v_eps", "v_com_min", "s_eps", "cv_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.min_window_samples < 3:
            raise ValueError("min_window_samples must be >= 3")


@dataclass(frozen=True)
class Diagnostics:
    terminal_speed: float
    com_speed: float
    shape_drift: float
    period: float | None = None
    period_cv: float | None = None
    window_start: float | None = None
    window_samples: int = 0


@dataclass(frozen=True)
class PatternLabel:
    kind: PatternKind
    diagnostics: Diagnostics

    def __post_init__(self):
        if (self.diagnostics.period is not None) != (self.kind is PatternKind.OSCILLATORY):
            raise ValueError("period must be present exactly when the pattern is oscillatory")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "diagnostics": asdict(self.diagnostics)}


def center_of_mass_series(traj: TrajectoryRecord) -> tuple[np.ndarray, np.ndarray]:
    """Sample times ``(M,)`` and swarm centroids ``(M, 2)``."""
    if traj.n_samples == 0:
        raise TrajectoryError("empty trajectory")
    return traj.times, traj.positions.mean(axis=1)


def _window_mask(times: np.ndarray, window: float) -> np.ndarray:
    return times >= times[-1] - window - 1e-12 * max(1.0, abs(times[-1]))


def _aligned_rms(za: np.ndarray, zb: np.ndarray) -> float:
    g = np.vdot(zb, za)
    rot = g / abs(g) if g != 0 else 1.0
    r = za - rot * zb
    return math.sqrt(float(np.vdot(r, r).real) / za.size)


def _max_procrustes_rms(frames: np.ndarray, block: int = 512, recheck: int = 8) -> float:
    """Largest rigid-alignment RMS between any two frames ``(M, N, 2)``.

    With centred frames as complex vectors, the best rotation leaves
    ``|a|^2 + |b|^2 - 2|<b, a>|``. That form cancels badly near zero, so it only
    ranks the pairs and the leading candidates are recomputed from residuals.
    """
    z = frames[..., 0] + 1j * frames[..., 1]
    z = z - z.mean(axis=1, keepdims=True)
    norms = np.einsum("mn,mn->m", z.conj(), z).real
    cands: list[tuple[float, int, int]] = []
    for lo in range(0, z.shape[0], block):
        sq = norms[lo:lo + block, None] + norms[None, :] - 2.0 * np.abs(z[lo:lo + block].conj() @ z.T)
        flat = np.argsort(sq, axis=None)[-recheck:]
        rows, cols = np.unravel_index(flat, sq.shape)
        cands.extend((float(sq[r, c]), lo + int(r), int(c)) for r, c in zip(rows, cols))
    cands.sort(reverse=True)
    return max(_aligned_rms(z[a], z[b]) for _, a, b in cands[:recheck])


def shape_drift(traj: TrajectoryRecord, window: float) -> float:
    """Worst RMS mismatch between formations in the final ``window``, modulo rigid motion.

    Zero means the formation moved rigidly (translation plus rotation).
    """
    if traj.n_samples < 2:
        raise TrajectoryError("shape drift needs at least 2 samples")
    span = traj.times[-1] - traj.times[0]
    if not 0 < window <= span:
        raise TrajectoryError(f"window {window} must be positive and within the trajectory span {span}")
    frames = traj.positions[_window_mask(traj.times, window)]
    if frames.shape[0] < 2:
        raise TrajectoryError("fewer than 2 samples inside the shape-drift window")
    return _max_procrustes_rms(frames)


def estimate_period(times, values, min_cycles: int = 3) -> tuple[float | None, float | None]:
    """Mean spacing of upward zero crossings of the mean-removed signal and its CV.

    Returns ``(None, None)`` when fewer than ``min_cycles`` complete cycles are found.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(values, dtype=float)
    if t.shape != x.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-D arrays of equal length")
    if x.size < 4:
        return None, None
    s = x - x.mean()
    if np.ptp(s) <= 1e-9 * (1.0 + np.abs(x).max()):
        return None, None
    up = np.flatnonzero((s[:-1] < 0) & (s[1:] >= 0))
    if up.size < min_cycles + 1:
        return None, None
    frac = -s[up] / (s[up + 1] - s[up])
    crossings = t[up] + frac * (t[up + 1] - t[up])
    spacing = np.diff(crossings)
    mean = float(spacing.mean())
    return mean, float(spacing.std() / mean)


def red_displacement(traj: TrajectoryRecord) -> np.ndarray:
    """Red agent's offset from the swarm centroid, ``(M, 2)``."""
    return traj.positions[:, traj.red_index] - traj.positions.mean(axis=1)


def principal_projection(d: np.ndarray) -> np.ndarray:
    """Project 2-D samples on their major axis.

    The sign is tied to the first sample so the result does not depend on how
    the plane is oriented.
    """
    c = d - d.mean(axis=0)
    _, vecs = np.linalg.eigh(c.T @ c)
    axis = vecs[:, -1]
    proj = d @ axis
    ref = next((p for p in proj - proj.mean() if abs(p) > 1e-15), 1.0)
    return proj if ref >= 0 else -proj


def classify(traj: TrajectoryRecord, thresholds: ClassifierThresholds | None = None) -> PatternLabel:
    th = thresholds or ClassifierThresholds()
    if traj.n_samples < 2:
        raise TrajectoryError("trajectory too short to classify (needs at least 2 samples)")

    t = traj.times
    start = t[0] + th.transient_fraction * (t[-1] - t[0])
    mask = t >= start - 1e-12 * max(1.0, abs(start))
    tw, pw = t[mask], traj.positions[mask]
    m = tw.size

    if m >= 2:
        steps = np.linalg.norm(np.diff(pw, axis=0), axis=-1) / np.diff(tw)[:, None]
        terminal_speed = float(steps.max())
        com = pw.mean(axis=1)
        com_speed = float(np.linalg.norm(com[-1] - com[0]) / (tw[-1] - tw[0]))
        drift = _max_procrustes_rms(pw)
    else:
        terminal_speed = com_speed = drift = float("nan")

    period = cv = None
    if m >= 4:
        signal = principal_projection(red_displacement(traj)[mask])
        period, cv = estimate_period(tw, signal)

    def label(kind: PatternKind) -> PatternLabel:
        return PatternLabel(
            kind,
            Diagnostics(
                terminal_speed=terminal_speed,
                com_speed=com_speed,
                shape_drift=drift,
                period=period if kind is PatternKind.OSCILLATORY else None,
                period_cv=cv,
                window_start=float(tw[0]) if m else None,
                window_samples=int(m),
            ),
        )

    if m < th.min_window_samples:
        return label(PatternKind.UNRESOLVED)
    if terminal_speed < th.v_eps:
        return label(PatternKind.STATIONARY)
    if com_speed >= th.v_com_min and drift < th.s_eps:
        return label(PatternKind.TRANSLATIONAL)
    if period is not None and cv < th.cv_max:
        return label(PatternKind.OSCILLATORY)
    return label(PatternKind.IRREGULAR)


def red_is_enclosed(positions: np.ndarray, red_index: int = 0) -> bool:
    """True when the red agent lies strictly inside the convex hull of the others."""
    from scipy.spatial import ConvexHull

    others = np.delete(positions, red_index, axis=0)
    hull = ConvexHull(others)
    # hull.equations rows are (normal, offset) with normal . x + offset <= 0 inside
    margins = hull.equations[:, :2] @ positions[red_index] + hull.equations[:, 2]
    return bool(np.all(margins < 0))


def leading_agent(traj: TrajectoryRecord, window: float | None = None) -> int:
    """Agent with the largest projection on the centroid's direction of travel."""
    t, com = center_of_mass_series(traj)
    if window is None:
        window = 0.5 * (t[-1] - t[0])
    mask = _window_mask(t, window)
    heading = com[mask][-1] - com[mask][0]
    norm = np.linalg.norm(heading)
    if norm == 0:
        raise TrajectoryError("centroid does not move; no leading agent")
    final = traj.positions[-1] - com[-1]
    return int(np.argmax(final @ (heading / norm)))
