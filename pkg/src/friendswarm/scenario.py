"""Preference matrices, initial conditions and the named robot scenarios."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import SwarmState
from .errors import DimensionError, NoEquilibriumError, SwarmError

DEFAULT_RADIUS = 1.0
DEFAULT_PERTURBATION = 1e-3


@dataclass(frozen=True, eq=False)
class PreferenceMatrix:
    """``k[i, j]``: how strongly agent ``i`` is drawn to agent ``j``. Diagonal is zero."""

    k: np.ndarray

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise DimensionError(f"preference matrix must be square, got shape {k.shape}")
        if k.shape[0] < 2:
            raise DimensionError("preference matrix needs n >= 2")
        off = ~np.eye(k.shape[0], dtype=bool)
        if not np.all(np.isfinite(k[off])):
            raise SwarmError("preference matrix has non-finite entries")
        np.fill_diagonal(k, 0.0)
        k.setflags(write=False)
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return self.k.shape[0]

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.k, self.k.T))

    def permuted(self, perm) -> PreferenceMatrix:
        """Relabel agents: new agent ``a`` is old agent ``perm[a]``."""
        p = np.asarray(perm)
        return PreferenceMatrix(self.k[np.ix_(p, p)])

    def __eq__(self, other):
        if not isinstance(other, PreferenceMatrix):
            return NotImplemented
        return np.array_equal(self.k, other.k)


def build_general_matrix(entries) -> PreferenceMatrix:
    try:
        k = np.array(entries, dtype=float)
    except ValueError as exc:
        raise DimensionError(f"preference matrix must be a square array of numbers: {exc}") from exc
    if k.ndim == 2 and k.shape[0] == k.shape[1] and np.any(np.diag(k) != 0):
        warnings.warn("preference matrix diagonal is ignored and forced to 0", stacklevel=2)
    return PreferenceMatrix(k)


def build_five_robot_matrix(k_p: float, k_m: float, k_a: float, red_index: int = 0) -> PreferenceMatrix:
    """The five-robot coupling used on the hardware.

    The red robot prefers every blue with ``k_p + k_m``; each blue prefers the red
    with ``k_p - k_m`` and the other blues with ``k_a``.
    """
    if not 0 <= red_index < 5:
        raise DimensionError(f"red_index {red_index} out of range for 5 robots")
    k = np.full((5, 5), float(k_a))
    k[red_index, :] = k_p + k_m
    k[:, red_index] = k_p - k_m
    return PreferenceMatrix(k)


def equilibrium_distance(k: float) -> float:
    """Preferred separation ``1/k`` of a reciprocal pair."""
    if not k > 0:
        raise NoEquilibriumError(f"no equilibrium distance for k={k} (needs k > 0)")
    return 1.0 / k


def _ring(m: int, radius: float, phase: float = 0.0) -> np.ndarray:
    ang = phase + 2.0 * math.pi * np.arange(m) / m
    pts = radius * np.column_stack((np.cos(ang), np.sin(ang)))
    # snap cos/sin round-off so that e.g. the square is exactly (1,0),(0,1),...
    pts[np.abs(pts) < 1e-15 * radius] = 0.0
    return pts


def _order_with_red(red_first: np.ndarray, red_index: int) -> np.ndarray:
    """``red_first[0]`` is the red agent; place it at ``red_index``."""
    n = red_first.shape[0]
    if not 0 <= red_index < n:
        raise DimensionError(f"red_index {red_index} out of range for {n} agents")
    others = list(range(1, n))
    order = others[:red_index] + [0] + others[red_index:]
    return red_first[order]


def _perturb(X: np.ndarray, magnitude: float, seed: int | None) -> np.ndarray:
    if magnitude <= 0:
        return X
    rng = np.random.default_rng(seed)
    Y = X + magnitude * rng.standard_normal(X.shape)
    return Y - Y.mean(axis=0)


def initial_polygon(
    n: int, radius: float = DEFAULT_RADIUS, red_index: int = 0, perturbation: float = 0.0, seed: int | None = 0
) -> SwarmState:
    """Regular ``n``-gon centred at the origin; the red agent sits at angle 0."""
    if n < 2:
        raise DimensionError("polygon needs n >= 2")
    if not radius > 0:
        raise SwarmError(f"radius must be positive, got {radius}")
    X = _order_with_red(_ring(n, radius), red_index)
    return SwarmState(_perturb(X, perturbation, seed))


def initial_surrounded(
    n: int, radius: float = DEFAULT_RADIUS, red_index: int = 0, perturbation: float = 0.0, seed: int | None = 0
) -> SwarmState:
    """Red agent at the origin, the others on a regular ``(n-1)``-gon around it."""
    if n < 3:
        raise DimensionError("surrounded configuration needs n >= 3")
    if not radius > 0:
        raise SwarmError(f"radius must be positive, got {radius}")
    X = np.vstack(([0.0, 0.0], _ring(n - 1, radius)))
    return SwarmState(_perturb(_order_with_red(X, red_index), perturbation, seed))


INITIAL_BUILDERS = {"polygon": initial_polygon, "surrounded": initial_surrounded}


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    K: PreferenceMatrix
    initial: SwarmState
    red_index: int = 0
    params: tuple[float, float, float] | None = None  # (k_p, k_m, k_a) when five-robot form

    def __post_init__(self):
        if self.initial.n != self.K.n:
            raise DimensionError(f"scenario {self.name!r}: {self.K.n}x{self.K.n} matrix for {self.initial.n} agents")
        if not 0 <= self.red_index < self.K.n:
            raise DimensionError(f"scenario {self.name!r}: red_index {self.red_index} out of range")


@dataclass(frozen=True)
class NamedScenario:
    params: tuple[float, float, float]
    initial: str
    perturbation: float = DEFAULT_PERTURBATION


# fig7 starts next to a linearly stable symmetric fixed point; a 1e-3 kick decays back
# to it, so the registered kick is large enough to reach the chasing formation.
NAMED_SCENARIOS = {
    "fig6": NamedScenario((2.0, 0.5, 2.0), "polygon"),
    "fig7": NamedScenario((2.0, -1.0, 2.0), "surrounded", perturbation=0.3),
    "fig8": NamedScenario((1.6, 2.4, 1.6), "surrounded"),
}


def five_robot_scenario(
    name: str,
    params: tuple[float, float, float],
    initial: str = "surrounded",
    radius: float = DEFAULT_RADIUS,
    perturbation: float = DEFAULT_PERTURBATION,
    seed: int | None = 0,
    red_index: int = 0,
) -> ScenarioSpec:
    try:
        builder = INITIAL_BUILDERS[initial]
    except KeyError:
        raise SwarmError(f"unknown initial condition {initial!r}; choose from {sorted(INITIAL_BUILDERS)}") from None
    k_p, k_m, k_a = (float(v) for v in params)
    return ScenarioSpec(
        name=name,
        K=build_five_robot_matrix(k_p, k_m, k_a, red_index),
        initial=builder(5, radius, red_index, perturbation, seed),
        red_index=red_index,
        params=(k_p, k_m, k_a),
    )


def named_scenario(
    name: str,
    radius: float = DEFAULT_RADIUS,
    perturbation: float | None = None,
    seed: int | None = 0,
    red_index: int = 0,
) -> ScenarioSpec:
    try:
        entry = NAMED_SCENARIOS[name]
    except KeyError:
        raise SwarmError(f"unknown scenario {name!r}; known: {sorted(NAMED_SCENARIOS)}") from None
    if perturbation is None:
        perturbation = entry.perturbation
    return five_robot_scenario(name, entry.params, entry.initial, radius, perturbation, seed, red_index)
