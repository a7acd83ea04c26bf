"""Trajectory container and its plain-text file format.

File layout::

    # friendswarm-trajectory 1
    # meta {"K": [[...]], "seed": 0, ...}
    step,time,agent_id,is_red,x,y
    0,0.0,0,1,1.0,0.0
    ...

Floats are written with ``repr`` so a write/read cycle is lossless.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import TrajectoryError

FORMAT_TAG = "friendswarm-trajectory"
FORMAT_VERSION = 1
COLUMNS = ("step", "time", "agent_id", "is_red", "x", "y")


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Sampled positions ``(M, N, 2)`` at ``times`` ``(M,)`` plus run metadata."""

    times: np.ndarray
    positions: np.ndarray
    steps: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 3 or pos.shape[2] != 2:
            raise TrajectoryError(f"positions must have shape (M, N, 2), got {pos.shape}")
        if times.shape != (pos.shape[0],):
            raise TrajectoryError("times and positions disagree on the number of samples")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise TrajectoryError("sample times must be strictly increasing")
        steps = np.arange(times.size) if self.steps is None else np.asarray(self.steps, dtype=np.int64)
        if steps.shape != times.shape:
            raise TrajectoryError("steps and times disagree on the number of samples")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "steps", steps)
        # normalised through JSON so that a file round-trip compares equal
        object.__setattr__(self, "meta", json.loads(json.dumps(self.meta)))

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def n_agents(self) -> int:
        return self.positions.shape[1]

    @property
    def red_index(self) -> int:
        return int(self.meta.get("red_index", 0))

    def final_positions(self) -> np.ndarray:
        if self.n_samples == 0:
            raise TrajectoryError("empty trajectory")
        return self.positions[-1]

    def __eq__(self, other):
        if not isinstance(other, TrajectoryRecord):
            return NotImplemented
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.steps, other.steps)
            and self.meta == other.meta
        )


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory(traj: TrajectoryRecord, path) -> Path:
    """Write ``traj`` as delimited text; returns the path written."""
    path = Path(path)
    red = traj.red_index
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(f"# {FORMAT_TAG} {FORMAT_VERSION}\n")
            fh.write("# meta " + json.dumps(traj.meta, sort_keys=True) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for s, t, frame in zip(traj.steps, traj.times, traj.positions):
                for a, (x, y) in enumerate(frame):
                    writer.writerow((int(s), _fmt(t), a, int(a == red), _fmt(x), _fmt(y)))
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc.strerror or exc}") from exc
    return path


def read_trajectory(path) -> TrajectoryRecord:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read trajectory {path}: {exc.strerror or exc}") from exc

    meta: dict = {}
    body = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.startswith("# meta "):
            try:
                meta = json.loads(line[len("# meta "):])
            except json.JSONDecodeError as exc:
                raise TrajectoryError(f"{path}:{lineno}: bad metadata: {exc}") from exc
        elif line.startswith("#") or not line.strip():
            continue
        else:
            body.append(line)
    if not body or tuple(body[0].split(",")) != COLUMNS:
        raise TrajectoryError(f"{path}: missing header row {','.join(COLUMNS)}")

    rows = list(csv.reader(body[1:]))
    if not rows:
        raise TrajectoryError(f"{path}: no samples")
    steps = np.array([int(r[0]) for r in rows])
    n_agents = int(max(int(r[2]) for r in rows)) + 1
    if len(rows) % n_agents:
        raise TrajectoryError(f"{path}: ragged samples")
    m = len(rows) // n_agents
    xy = np.array([(float(r[4]), float(r[5])) for r in rows]).reshape(m, n_agents, 2)
    times = np.array([float(r[1]) for r in rows]).reshape(m, n_agents)[:, 0]
    ids = np.array([int(r[2]) for r in rows]).reshape(m, n_agents)
    if not np.all(ids == np.arange(n_agents)):
        raise TrajectoryError(f"{path}: agent rows out of order")
    if "red_index" not in meta:
        reds = {int(r[2]) for r in rows if r[3] == "1"}
        # 0 is the default, so leaving it out keeps round trips exact
        if len(reds) == 1 and (red := reds.pop()) != 0:
            meta["red_index"] = red
    return TrajectoryRecord(times=times, positions=xy, steps=steps.reshape(m, n_agents)[:, 0], meta=meta)
