"""Execute run and sweep configurations and write their artifacts."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import PatternKind, PatternLabel, classify
from .config import PARAM_NAMES, RunConfig, SweepConfig, cell_document, to_run_config
from .dynamics import run
from .errors import SwarmError
from .hardware import run_hardware
from .render import render_filmstrip, render_snapshot
from .trajectory import TrajectoryRecord, write_trajectory

SUMMARY_COLUMNS = (
    "cell", *PARAM_NAMES, "seed", "kind", "terminal_speed", "com_speed", "shape_drift", "period", "period_cv", "note",
)


def simulate(rc: RunConfig) -> TrajectoryRecord:
    s = rc.scenario
    if rc.mode == "hardware":
        return run_hardware(s, rc.hardware, rc.integrator, rc.duration, rc.sample_every, meta=rc.meta())
    return run(s.initial, s.K, rc.integrator, rc.duration, rc.sample_every, meta=rc.meta())


def _writable_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    return out


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def report(traj: TrajectoryRecord, label: PatternLabel) -> dict:
    return {"label": label.kind.value, "diagnostics": label.to_dict()["diagnostics"], "meta": traj.meta}


def execute_run(rc: RunConfig, out_dir=None) -> dict:
    """Simulate, classify and write trajectory, report and optional render."""
    out = _writable_dir(out_dir if out_dir is not None else rc.output.dir)
    traj = simulate(rc)
    label = classify(traj, rc.thresholds)
    write_trajectory(traj, out / rc.output.trajectory)
    rep = report(traj, label)
    _write_text(out / rc.output.report, json.dumps(rep, indent=2, sort_keys=True) + "\n")
    if rc.output.render == "snapshot":
        render_snapshot(traj, out / rc.output.render_file, trail=rc.output.trail)
    elif rc.output.render == "filmstrip":
        render_filmstrip(traj, out / rc.output.render_file, panels=rc.output.panels, trail=rc.output.trail)
    return rep


def cell_seed(master: int, index: int) -> int:
    """Independent per-cell seed; depends only on the master seed and the cell index."""
    return int(np.random.SeedSequence(master, spawn_key=(index,)).generate_state(1)[0])


def _run_cell(args) -> dict:
    template, cell, index, cell_dir = args
    seed = cell_seed(template.seed, index)
    row = {"cell": index, "seed": seed, "note": ""}
    row.update({p: cell.get(p) for p in PARAM_NAMES})
    try:
        doc = cell_document(template, cell, template.sweep).model_copy(update={"seed": seed})
        rc = to_run_config(doc)
        if rc.params is not None:
            row.update(dict(zip(PARAM_NAMES, rc.params)))
        traj = simulate(rc)
        label = classify(traj, rc.thresholds)
        if cell_dir is not None:
            write_trajectory(traj, Path(cell_dir) / f"cell_{index:04d}.csv")
        row["kind"] = label.kind.value
        row.update({k: v for k, v in label.to_dict()["diagnostics"].items() if k in SUMMARY_COLUMNS})
    except (SwarmError, ValueError, OSError, FloatingPointError) as exc:
        row["kind"] = PatternKind.UNRESOLVED.value
        row["note"] = f"{type(exc).__name__}: {exc}"
    return row


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def run_sweep(sc: SweepConfig, out_dir=None, jobs: int | None = None) -> list[dict]:
    """Run every cell and write ``summary.csv`` plus per-cell labels.

    Rows are ordered by cell index, so the files do not depend on ``jobs``.
    """
    out = _writable_dir(out_dir if out_dir is not None else sc.output.dir)
    jobs = sc.jobs if jobs is None else jobs
    if jobs < 1:
        raise SwarmError(f"jobs must be >= 1, got {jobs}")
    cell_dir = None
    if sc.output.keep_cells:
        cell_dir = _writable_dir(out / "cells")
    tasks = [(sc.template, cell, i, cell_dir) for i, cell in enumerate(sc.grid())]
    if jobs == 1 or len(tasks) == 1:
        rows = [_run_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, tasks))
    rows.sort(key=lambda r: r["cell"])

    path = out / sc.output.summary
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_COLUMNS)
            for r in rows:
                w.writerow([_fmt(r.get(c)) for c in SUMMARY_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write sweep summary {path}: {exc.strerror or exc}") from exc
    labels = [{"cell": r["cell"], "label": r["kind"], "note": r["note"]} for r in rows]
    _write_text(out / "labels.json", json.dumps(labels, indent=2) + "\n")
    return rows
