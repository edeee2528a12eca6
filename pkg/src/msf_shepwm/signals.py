"""Objective multi-harmonic coil current ``f(t) = sum_p w_p sin(p*w*t + theta_p)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import bisect

from .errors import (
    DuplicateOrder,
    MissingFundamental,
    NonPositiveFrequency,
    NonPositiveWeight,
    NotQuarterSymmetric,
    UnknownPreset,
    ValidationError,
)
from .grid import TimingGrid

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HarmonicComponent:
    order: int
    weight: float
    phase: float = 0.0

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValidationError(f"harmonic order must be a positive integer, got {self.order}")
        if not self.weight > 0:
            raise NonPositiveWeight(f"weight of order {self.order} must be > 0, got {self.weight}")
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)


@dataclass(frozen=True)
class ObjectiveSignal:
    omega: float
    components: tuple[HarmonicComponent, ...]

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(c.order for c in self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def phases(self) -> np.ndarray:
        return np.array([c.phase for c in self.components])

    @property
    def in_phase(self) -> bool:
        return all(c.phase == 0.0 for c in self.components)

    @property
    def period(self) -> float:
        return TWO_PI / self.omega

    def __call__(self, t):
        return evaluate(self, t)


def make_objective(fundamental_freq: float, components: Iterable) -> ObjectiveSignal:
    """Validate and build an objective signal.

    ``components`` may hold :class:`HarmonicComponent` instances or plain
    ``(order, weight[, phase])`` tuples.  ``fundamental_freq`` is in rad/s.
    """
    if not fundamental_freq > 0:
        raise NonPositiveFrequency(f"fundamental frequency must be > 0, got {fundamental_freq}")
    comps = tuple(c if isinstance(c, HarmonicComponent) else HarmonicComponent(*c) for c in components)
    if not comps:
        raise MissingFundamental("objective signal needs at least the fundamental")
    orders = [c.order for c in comps]
    if len(set(orders)) != len(orders):
        raise DuplicateOrder(f"duplicate harmonic order in {orders}")
    if orders[0] != 1:
        raise MissingFundamental(f"first component must be the fundamental (order 1), got {orders[0]}")
    if any(b <= a for a, b in zip(orders, orders[1:])):
        raise ValidationError(f"harmonic orders must be strictly increasing, got {orders}")
    return ObjectiveSignal(float(fundamental_freq), comps)


_PRESETS = {
    "f1": ((1, 3, 9, 27, 81), None),
    "f2": ((1, 3, 7, 17), None),
    "f3": ((1, 2, 4, 6, 8, 10, 12, 14), None),
    "f4": ((1, 2, 3, 4, 5, 6, 7, 8), None),
    "f5": ((1, 3, 9, 27, 81), (0.0, math.pi / 4, math.pi / 7, math.pi / 5, math.pi / 6)),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, fundamental_freq: float) -> ObjectiveSignal:
    """One of the five reference signals ``f1`` .. ``f5`` (weights ``1/p``)."""
    try:
        orders, phases = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}") from None
    phases = phases or (0.0,) * len(orders)
    return make_objective(fundamental_freq, [(p, 1.0 / p, ph) for p, ph in zip(orders, phases)])


def evaluate_angle(signal: ObjectiveSignal, theta):
    """f as a function of fundamental phase ``theta = w*t``."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros_like(theta)
    for c in signal.components:
        out = out + c.weight * np.sin(c.order * theta + c.phase)
    return out


def gradient_angle(signal: ObjectiveSignal, theta):
    """df/dtheta (multiply by ``omega`` for the time derivative)."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros_like(theta)
    for c in signal.components:
        out = out + c.weight * c.order * np.cos(c.order * theta + c.phase)
    return out


def evaluate(signal: ObjectiveSignal, t):
    return evaluate_angle(signal, signal.omega * np.asarray(t, dtype=float))


def evaluate_gradient(signal: ObjectiveSignal, t):
    return signal.omega * gradient_angle(signal, signal.omega * np.asarray(t, dtype=float))


def _require_in_phase(signal: ObjectiveSignal) -> None:
    if not signal.in_phase:
        bad = [c.order for c in signal.components if c.phase != 0.0]
        raise NotQuarterSymmetric(f"non-zero phase on orders {bad}; quarter-wave symmetry does not hold")


def gradient_roots(signal: ObjectiveSignal, grid: TimingGrid, oversample: int = 10,
                   xtol: float = 1e-12) -> list[float]:
    """Interior sign changes of df/dtheta on (0, pi/2), in radians.

    A dense pre-scan at ``oversample`` points per clock cycle brackets the
    sign changes, each of which is then bisected to ``xtol``.
    """
    _require_in_phase(signal)
    n = grid.quarter * oversample
    theta = np.linspace(0.0, math.pi / 2, n + 1)
    g = gradient_angle(signal, theta)
    scale = float(np.sum(signal.weights * np.array(signal.orders)))
    g[np.abs(g) < 1e-13 * scale] = 0.0  # floating-point zeros at pi/2 (odd orders)
    f = lambda x: float(gradient_angle(signal, x))  # noqa: E731
    nonzero = np.flatnonzero(g)
    roots = []
    for a, b in zip(nonzero, nonzero[1:]):
        if np.sign(g[a]) == np.sign(g[b]):
            continue
        if b - a > 1:
            # exact zeros on the scan between the bracket ends; take the middle one
            roots.append(float(theta[(a + b) // 2]))
        else:
            roots.append(bisect(f, theta[a], theta[b], xtol=xtol))
    return [r for r in roots if 1e-9 < r < math.pi / 2 - 1e-9]


def _round_half_up(x):
    return np.floor(np.asarray(x) + 0.5).astype(int)


def gradient_zeros(signal: ObjectiveSignal, grid: TimingGrid, oversample: int = 10) -> list[int]:
    """Gradient zeros of an in-phase signal quantized to the clock grid (cycles).

    Rounds to the nearest cycle (ties up) and collapses duplicates.
    """
    roots = gradient_roots(signal, grid, oversample)
    cycles = _round_half_up(np.array(roots) / grid.angle_resolution) if roots else []
    out: list[int] = []
    for c in cycles:
        if not out or c != out[-1]:
            out.append(int(c))
    return out


def sample(signal: ObjectiveSignal, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(t, f(t), f'(t))`` at ``n`` uniform points over one period."""
    t = np.arange(n) * (signal.period / n)
    return t, evaluate(signal, t), evaluate_gradient(signal, t)


def component_table(signal: ObjectiveSignal) -> list[tuple[int, float, float, float]]:
    """Rows ``(order, frequency_Hz, weight, phase_rad)``."""
    f0 = signal.omega / TWO_PI
    return [(c.order, c.order * f0, c.weight, c.phase) for c in signal.components]


def from_orders(fundamental_freq: float, orders: Sequence[int]) -> ObjectiveSignal:
    """In-phase signal with the default ``1/p`` weighting."""
    return make_objective(fundamental_freq, [(p, 1.0 / p) for p in orders])
