"""TOML run and sweep configuration.

Top-level keys::

    scenario = "fig6"            # or a table, see NamedOverrides / ParamScenario / MatrixScenario
    mode = "ideal"               # or "hardware"
    duration = 100.0             # model time
    sample_every = 5
    seed = 0
    method = "rk4"
    dt = 0.01
    min_separation = 1e-6

    [hardware]   # SensorLayout and HardwareConfig fields
    [analysis]   # ClassifierThresholds fields
    [output]     # dir, trajectory, report, render, panels
    [sweep]      # present only in sweep documents

Unknown keys anywhere are errors.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analysis import ClassifierThresholds
from .dynamics import IntegratorConfig, Method, SwarmState
from .errors import ConfigError, SwarmError
from .hardware import HardwareConfig, SensorLayout
from .scenario import (
    DEFAULT_PERTURBATION,
    DEFAULT_RADIUS,
    INITIAL_BUILDERS,
    ScenarioSpec,
    build_general_matrix,
    five_robot_scenario,
    named_scenario,
)

PARAM_NAMES = ("k_p", "k_m", "k_a")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ParamScenario(_Strict):
    k_p: float
    k_m: float
    k_a: float
    initial: Literal["polygon", "surrounded"] = "surrounded"
    radius: float = Field(DEFAULT_RADIUS, gt=0)
    perturbation: float = Field(DEFAULT_PERTURBATION, ge=0)
    red_index: int = Field(0, ge=0, lt=5)


class MatrixScenario(_Strict):
    matrix: list[list[float]]
    positions: Optional[list[list[float]]] = None
    initial: Optional[Literal["polygon", "surrounded"]] = None
    radius: float = Field(DEFAULT_RADIUS, gt=0)
    perturbation: float = Field(0.0, ge=0)
    red_index: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.positions is None) == (self.initial is None):
            raise ValueError("give exactly one of 'positions' or 'initial'")
        return self


class NamedOverrides(_Strict):
    name: Literal["fig6", "fig7", "fig8"]
    radius: float = Field(DEFAULT_RADIUS, gt=0)
    perturbation: Optional[float] = Field(None, ge=0)
    red_index: int = Field(0, ge=0, lt=5)


ScenarioField = Union[Literal["fig6", "fig7", "fig8"], NamedOverrides, ParamScenario, MatrixScenario]


class HardwareSection(_Strict):
    n_sensors: int = 8
    half_angle: float = math.pi / 12
    range: float = 1.7
    update_interval: float = 0.1
    quantize_bearing: bool = True
    occlusion: bool = True
    noise_sigma: float = 0.0
    dropout_prob: float = 0.0
    scale: float = 0.5
    time_scale: float = 2.0
    v_max: float = 0.3
    c: float = 1.0
    robot_diameter: float = 0.19
    robot_mass: float = 1.2
    hold_max_age: float = 0.0


class AnalysisSection(_Strict):
    transient_fraction: float = 0.5
    v_eps: float = 1e-3
    v_com_min: float = 1e-2
    s_eps: float = 1e-2
    cv_max: float = 0.2
    min_window_samples: int = 8


class OutputSection(_Strict):
    dir: str = "."
    trajectory: str = "trajectory.csv"
    report: str = "report.json"
    summary: str = "summary.csv"
    render: Literal["none", "snapshot", "filmstrip"] = "none"
    render_file: str = "render.svg"
    panels: int = Field(6, ge=1)
    trail: float = Field(5.0, ge=0)
    keep_cells: bool = False


class Axis(_Strict):
    min: float
    max: float
    steps: int = Field(ge=2)

    @model_validator(mode="after")
    def _finite(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError("axis range must be finite")
        return self

    def values(self) -> list[float]:
        # rounded so that grid values print as typed (-0.15, not -0.15000000000000002)
        return [float(f"{self.min + (self.max - self.min) * i / (self.steps - 1):.12g}") for i in range(self.steps)]


class Cell(_Strict):
    scenario: Optional[Literal["fig6", "fig7", "fig8"]] = None
    k_p: Optional[float] = None
    k_m: Optional[float] = None
    k_a: Optional[float] = None
    initial: Optional[Literal["polygon", "surrounded"]] = None
    perturbation: Optional[float] = Field(None, ge=0)

    @model_validator(mode="after")
    def _complete(self):
        given = [getattr(self, p) is not None for p in PARAM_NAMES]
        if self.scenario is None and not all(given):
            raise ValueError("a sweep cell needs either 'scenario' or all of k_p, k_m, k_a")
        if self.scenario is not None and any(given):
            raise ValueError("a sweep cell takes either 'scenario' or k_p/k_m/k_a, not both")
        return self


class SweepSection(_Strict):
    axes: dict[Literal["k_p", "k_m", "k_a"], Axis] = Field(default_factory=dict)
    fixed: dict[Literal["k_p", "k_m", "k_a"], float] = Field(default_factory=dict)
    cells: list[Cell] = Field(default_factory=list)
    jobs: int = Field(1, ge=1)
    initial: Literal["polygon", "surrounded"] = "polygon"
    radius: float = Field(DEFAULT_RADIUS, gt=0)
    perturbation: float = Field(DEFAULT_PERTURBATION, ge=0)

    @model_validator(mode="after")
    def _grid(self):
        if bool(self.axes) == bool(self.cells):
            raise ValueError("give either 'axes' (1 to 3 of k_p, k_m, k_a) or an explicit 'cells' list")
        if self.axes:
            overlap = set(self.axes) & set(self.fixed)
            if overlap:
                raise ValueError(f"{sorted(overlap)} cannot be both an axis and fixed")
            missing = set(PARAM_NAMES) - set(self.axes) - set(self.fixed)
            if missing:
                raise ValueError(f"fixed values missing for {sorted(missing)}")
        return self


class Document(_Strict):
    scenario: Optional[ScenarioField] = None
    mode: Literal["ideal", "hardware"] = "ideal"
    duration: float = Field(100.0, gt=0)
    sample_every: int = Field(5, ge=1)
    seed: int = Field(0, ge=0)
    method: Literal["euler", "rk4"] = "rk4"
    dt: float = Field(0.01, gt=0)
    min_separation: float = Field(1e-6, gt=0)
    hardware: HardwareSection = Field(default_factory=HardwareSection)
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)
    output: OutputSection = Field(default_factory=OutputSection)
    sweep: Optional[SweepSection] = None

    @field_validator("duration", "dt")
    @classmethod
    def _finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v

    @model_validator(mode="after")
    def _scenario_required(self):
        if self.scenario is None and self.sweep is None:
            raise ValueError("scenario required")
        return self


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioSpec
    mode: str
    integrator: IntegratorConfig
    hardware: HardwareConfig | None
    thresholds: ClassifierThresholds
    duration: float
    sample_every: int
    seed: int
    output: OutputSection
    source: Document

    @property
    def params(self) -> tuple[float, float, float] | None:
        return self.scenario.params

    def meta(self) -> dict:
        from . import __version__

        return {
            "scenario": self.scenario.name,
            "params": list(self.params) if self.params else None,
            "red_index": self.scenario.red_index,
            "seed": self.seed,
            "mode": self.mode,
            "version": __version__,
        }


@dataclass(frozen=True)
class SweepConfig:
    template: Document
    axes: dict[str, list[float]]
    fixed: dict[str, float]
    cells: list[Cell]
    jobs: int
    output: OutputSection

    def grid(self) -> list[dict]:
        """Cell descriptions in lexicographic order over ``k_p, k_m, k_a`` axes."""
        if self.cells:
            return [c.model_dump(exclude_none=True) for c in self.cells]
        names = [p for p in PARAM_NAMES if p in self.axes]
        out = [dict(self.fixed)]
        for name in names:
            out = [dict(row, **{name: v}) for row in out for v in self.axes[name]]
        return out


def build_scenario(source, seed: int) -> ScenarioSpec:
    if isinstance(source, str):
        return named_scenario(source, seed=seed)
    if isinstance(source, NamedOverrides):
        return named_scenario(source.name, source.radius, source.perturbation, seed, source.red_index)
    if isinstance(source, ParamScenario):
        return five_robot_scenario(
            "custom", (source.k_p, source.k_m, source.k_a), source.initial,
            source.radius, source.perturbation, seed, source.red_index,
        )
    K = build_general_matrix(source.matrix)
    if source.positions is not None:
        initial = SwarmState(source.positions)
    else:
        initial = INITIAL_BUILDERS[source.initial](K.n, source.radius, source.red_index, source.perturbation, seed)
    return ScenarioSpec("matrix", K, initial, red_index=source.red_index)


def hardware_config(section: HardwareSection, seed: int) -> HardwareConfig:
    d = section.model_dump()
    layout = SensorLayout(**{k: d.pop(k) for k in ("n_sensors", "half_angle", "range", "update_interval",
                                                     "quantize_bearing", "occlusion")})
    return HardwareConfig(layout=layout, seed=seed, **d)


def _locate(exc: ValidationError) -> tuple[str, str]:
    err = exc.errors()[0]
    key = ".".join(str(p) for p in err["loc"] if not str(p).startswith(("function-after", "literal[")))
    return key or "(document)", err["msg"]


def _parse_document(text: str) -> Document:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"parse error: {exc}", line=line) from exc
    if "scenario" not in raw and "sweep" not in raw:
        raise ConfigError("scenario required", key="scenario")
    try:
        return Document.model_validate(raw)
    except ValidationError as exc:
        key, msg = _locate(exc)
        raise ConfigError(msg, key=key) from exc


def to_run_config(doc: Document) -> RunConfig:
    """Build every downstream object now so later stages cannot reject the config."""
    try:
        scenario = build_scenario(doc.scenario, doc.seed)
    except (SwarmError, ValueError) as exc:
        raise ConfigError(str(exc), key="scenario") from exc
    try:
        integrator = IntegratorConfig(Method(doc.method), doc.dt, doc.min_separation)
    except SwarmError as exc:
        raise ConfigError(str(exc), key="dt") from exc
    hw = None
    if doc.mode == "hardware":
        if scenario.params is None:
            raise ConfigError("hardware mode needs a five-robot scenario (k_p, k_m, k_a)", key="mode")
        try:
            hw = hardware_config(doc.hardware, doc.seed)
        except SwarmError as exc:
            raise ConfigError(str(exc), key="hardware") from exc
    try:
        thresholds = ClassifierThresholds(**doc.analysis.model_dump())
    except ValueError as exc:
        raise ConfigError(str(exc), key="analysis") from exc
    return RunConfig(scenario, doc.mode, integrator, hw, thresholds, doc.duration, doc.sample_every,
                     doc.seed, doc.output, doc)


def cell_document(template: Document, cell: dict, fallback: SweepSection) -> Document:
    """Per-cell run document: the template with the cell's scenario swapped in."""
    if "scenario" in cell:
        scenario = cell["scenario"]
        if "perturbation" in cell:
            scenario = NamedOverrides(name=scenario, perturbation=cell["perturbation"])
    else:
        base = template.scenario
        initial = cell.get("initial", base.initial if isinstance(base, ParamScenario) else fallback.initial)
        scenario = ParamScenario(
            k_p=cell["k_p"], k_m=cell["k_m"], k_a=cell["k_a"], initial=initial,
            radius=base.radius if isinstance(base, ParamScenario) else fallback.radius,
            perturbation=cell.get("perturbation", base.perturbation if isinstance(base, ParamScenario)
                                  else fallback.perturbation),
        )
    return template.model_copy(update={"scenario": scenario, "sweep": None})


def to_sweep_config(doc: Document) -> SweepConfig:
    sw = doc.sweep
    if doc.scenario is not None and not isinstance(doc.scenario, ParamScenario):
        raise ConfigError("a sweep template scenario must be a k_p/k_m/k_a table", key="scenario")
    sweep = SweepConfig(
        template=doc,
        axes={k: a.values() for k, a in sw.axes.items()},
        fixed=dict(sw.fixed),
        cells=list(sw.cells),
        jobs=sw.jobs,
        output=doc.output,
    )
    # validate every cell up front
    for i, cell in enumerate(sweep.grid()):
        try:
            to_run_config(cell_document(doc, cell, sw))
        except ConfigError as exc:
            raise ConfigError(f"sweep cell {i}: {exc}", key="sweep") from exc
    return sweep


def parse_config(text: str) -> RunConfig | SweepConfig:
    doc = _parse_document(text)
    return to_sweep_config(doc) if doc.sweep is not None else to_run_config(doc)


def load_config(path, overrides: dict | None = None) -> RunConfig | SweepConfig:
    """Read ``path`` and apply dotted-key ``overrides`` (from CLI flags)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    if not overrides:
        return parse_config(text)
    doc = _parse_document(text)
    raw = doc.model_dump(exclude_unset=True, mode="python")
    for dotted, value in overrides.items():
        node = raw
        *parents, leaf = dotted.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    try:
        doc = Document.model_validate(raw)
    except ValidationError as exc:
        key, msg = _locate(exc)
        raise ConfigError(msg, key=key) from exc
    return to_sweep_config(doc) if doc.sweep is not None else to_run_config(doc)
