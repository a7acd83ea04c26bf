"""Deterministic SVG renders of trajectories.

Agents are circles (red for the red agent, blue otherwise) with optional
polyline trails that fade with age. Every panel is fitted to its own content
with a fixed pixel margin.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import TrajectoryError
from .trajectory import TrajectoryRecord

RED = "#d62728"
BLUE = "#1f77b4"
TRAIL_SEGMENTS = 4


def _num(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _sample_at(traj: TrajectoryRecord, time: float | None) -> int:
    if time is None:
        return traj.n_samples - 1
    return int(np.argmin(np.abs(traj.times - time)))


def _panel(traj: TrajectoryRecord, idx: int, trail: float, size: float, margin: float, radius: float) -> list[str]:
    """Body of one panel (without the enclosing element), in pixel coordinates."""
    t = traj.times
    lo = int(np.searchsorted(t, t[idx] - trail, side="left")) if trail > 0 else idx
    pts = traj.positions[lo:idx + 1]
    flat = pts.reshape(-1, 2)
    xmin, ymin = flat.min(axis=0)
    xmax, ymax = flat.max(axis=0)
    extent = max(xmax - xmin, ymax - ymin, 1e-9)
    scale = (size - 2.0 * margin) / extent
    cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)

    def px(p):
        # y axis points up in the model and down in SVG
        return size / 2 + (p[..., 0] - cx) * scale, size / 2 - (p[..., 1] - cy) * scale

    out = []
    red = traj.red_index
    if pts.shape[0] > 1:
        bounds = np.linspace(0, pts.shape[0] - 1, TRAIL_SEGMENTS + 1).round().astype(int)
        for seg in range(TRAIL_SEGMENTS):
            a, b = bounds[seg], bounds[seg + 1]
            if b <= a:
                continue
            opacity = (seg + 1) / TRAIL_SEGMENTS * 0.6
            for agent in range(traj.n_agents):
                xs, ys = px(pts[a:b + 1, agent])
                coords = " ".join(f"{_num(x)},{_num(y)}" for x, y in zip(xs, ys))
                color = RED if agent == red else BLUE
                out.append(
                    f'<polyline class="trail" points="{coords}" fill="none" stroke="{color}" '
                    f'stroke-width="1.5" stroke-opacity="{opacity:.2f}"/>'
                )
    xs, ys = px(traj.positions[idx])
    for agent, (x, y) in enumerate(zip(xs, ys)):
        color = RED if agent == red else BLUE
        out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{_num(radius)}" fill="{color}" data-agent="{agent}"/>')
    out.append(
        f'<text x="{_num(margin / 2)}" y="{_num(size - margin / 4)}" font-size="10" '
        f'font-family="sans-serif">t={t[idx]:.2f}</text>'
    )
    return out


def _document(width: float, height: float, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">'
    )
    return "\n".join([head, f'<rect width="{_num(width)}" height="{_num(height)}" fill="white"/>', *body, "</svg>"]) + "\n"


def svg_snapshot(traj: TrajectoryRecord, time: float | None = None, trail: float = 5.0, size: float = 400.0,
                 margin: float = 20.0, radius: float = 6.0) -> str:
    if traj.n_samples == 0:
        raise TrajectoryError("cannot render an empty trajectory")
    body = _panel(traj, _sample_at(traj, time), trail, size, margin, radius)
    return _document(size, size, body)


def svg_filmstrip(traj: TrajectoryRecord, panels: int = 6, columns: int = 3, trail: float = 5.0,
                  size: float = 240.0, margin: float = 16.0, radius: float = 5.0) -> str:
    """Grid of ``panels`` snapshots at evenly spaced sample indices."""
    if traj.n_samples == 0:
        raise TrajectoryError("cannot render an empty trajectory")
    if panels < 1 or columns < 1:
        raise ValueError("panels and columns must be >= 1")
    idxs = np.linspace(0, traj.n_samples - 1, panels).round().astype(int)
    columns = min(columns, panels)
    rows = math.ceil(panels / columns)
    body = []
    for p, idx in enumerate(idxs):
        x0, y0 = (p % columns) * size, (p // columns) * size
        body.append(
            f'<svg class="panel" x="{_num(x0)}" y="{_num(y0)}" width="{_num(size)}" height="{_num(size)}" '
            f'viewBox="0 0 {_num(size)} {_num(size)}">'
        )
        body.append(f'<rect width="{_num(size)}" height="{_num(size)}" fill="none" stroke="#cccccc"/>')
        body.extend(_panel(traj, int(idx), trail, size, margin, radius))
        body.append("</svg>")
    return _document(columns * size, rows * size, body)


def _save(text: str, path) -> Path:
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write render {path}: {exc.strerror or exc}") from exc
    return path


def render_snapshot(traj: TrajectoryRecord, path, **options) -> Path:
    return _save(svg_snapshot(traj, **options), path)


def render_filmstrip(traj: TrajectoryRecord, path, **options) -> Path:
    return _save(svg_filmstrip(traj, **options), path)
