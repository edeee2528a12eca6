"""Quarter-wave switching schedules on a clock grid.

A schedule lists the voltage edges of the first quarter period.  The rest of
the period follows from quarter-wave symmetry of the coil current: the
voltage is mirrored *and negated* about the quarter point and negated over
the second half.  Hence the coil current ``(1/L) * integral(v)`` is odd and
symmetric about ``pi/2`` and its Fourier series holds odd sine terms only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import (
    AngleOutOfRange,
    LevelOverflow,
    NotQuarterSymmetric,
    UnsortedEdges,
    ValidationError,
)
from .grid import TimingGrid
from .signals import ObjectiveSignal, gradient_angle, gradient_roots


@dataclass(frozen=True)
class SwitchingEdge:
    angle: int  # clock cycles from t = 0
    step: int  # multiples of V0, negative = falling

    def __post_init__(self):
        if int(self.angle) != self.angle:
            raise AngleOutOfRange(f"edge angle must be an integer cycle count, got {self.angle}")
        if int(self.step) != self.step or self.step == 0:
            raise ValidationError(f"edge step must be a non-zero integer, got {self.step}")
        object.__setattr__(self, "angle", int(self.angle))
        object.__setattr__(self, "step", int(self.step))


@dataclass(frozen=True)
class CircuitParams:
    """Bridge and coil parameters.

    ``v_step`` is the voltage of one level (``V0``); it defaults to ``v_dc``
    which is the single H-bridge case.  ``omega`` (rad/s) defaults to the
    grid fundamental wherever a grid is available.
    """

    v_dc: float
    inductance: float
    v_step: Optional[float] = None
    resistance: float = 0.0
    omega: Optional[float] = None

    def __post_init__(self):
        if self.v_step is None:
            object.__setattr__(self, "v_step", self.v_dc)
        for name in ("v_dc", "inductance", "v_step"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.resistance < 0:
            raise ValidationError(f"resistance must be >= 0, got {self.resistance}")
        if self.omega is not None and not self.omega > 0:
            raise ValidationError(f"omega must be > 0, got {self.omega}")

    def omega_for(self, grid: TimingGrid) -> float:
        return grid.omega if self.omega is None else self.omega


@dataclass(frozen=True)
class SwitchingSchedule:
    grid: TimingGrid
    edges: tuple[SwitchingEdge, ...]
    start_level: int
    level_max: int = 1
    _levels: tuple[int, ...] = field(default=(), repr=False, compare=False)

    @property
    def angles(self) -> np.ndarray:
        return np.array([e.angle for e in self.edges], dtype=int)

    @property
    def angles_rad(self) -> np.ndarray:
        return self.grid.to_radians(self.angles)

    @property
    def steps(self) -> np.ndarray:
        return np.array([e.step for e in self.edges], dtype=int)

    @property
    def running_levels(self) -> tuple[int, ...]:
        """Level after each edge."""
        return self._levels

    @property
    def final_level(self) -> int:
        return self._levels[-1] if self._levels else self.start_level

    @property
    def boundary_step(self) -> int:
        """The implied edge at ``pi/2`` that takes the level to 0 (mirror point)."""
        return -self.final_level

    def with_angles(self, angles) -> "SwitchingSchedule":
        """Same edge pattern at new angles (cycles)."""
        angles = list(angles)
        if len(angles) != len(self.edges):
            raise ValidationError(f"expected {len(self.edges)} angles, got {len(angles)}")
        return build_schedule(self.grid, [(a, e.step) for a, e in zip(angles, self.edges)],
                              self.start_level, self.level_max)


def build_schedule(grid: TimingGrid, edges: Iterable, start_level: int, level_max: int = 1,
                   boundary_step: Optional[int] = None) -> SwitchingSchedule:
    """Validate a quarter-period edge list.

    ``edges`` holds :class:`SwitchingEdge` or ``(angle, step)`` pairs with
    angles in ``[0, grid.quarter]`` cycles and non-decreasing.  When
    ``boundary_step`` is given it must match the edge implied at ``pi/2``.
    """
    edges = tuple(e if isinstance(e, SwitchingEdge) else SwitchingEdge(*e) for e in edges)
    if int(level_max) != level_max or level_max < 1:
        raise ValidationError(f"level_max must be a positive integer, got {level_max}")
    if int(start_level) != start_level or abs(start_level) > level_max:
        raise LevelOverflow(f"start_level {start_level} outside [-{level_max}, {level_max}]")
    levels = []
    level = int(start_level)
    prev = 0
    for i, e in enumerate(edges):
        if not 0 <= e.angle <= grid.quarter:
            raise AngleOutOfRange(f"edge {i} at cycle {e.angle} outside [0, {grid.quarter}]")
        if e.angle < prev:
            raise UnsortedEdges(f"edge {i} at cycle {e.angle} precedes cycle {prev}")
        prev = e.angle
        level += e.step
        if abs(level) > level_max:
            raise LevelOverflow(f"edge {i} at cycle {e.angle} drives level to {level} (max {level_max})")
        levels.append(level)
    sched = SwitchingSchedule(grid, edges, int(start_level), int(level_max), tuple(levels))
    if boundary_step is not None and boundary_step != sched.boundary_step:
        raise ValidationError(
            f"boundary step {boundary_step} inconsistent with final level {sched.final_level}"
        )
    return sched


def square_wave(grid: TimingGrid) -> SwitchingSchedule:
    return build_schedule(grid, [], 1, 1)


def initial_schedule_from_objective(signal: ObjectiveSignal, grid: TimingGrid) -> SwitchingSchedule:
    """Bipolar schedule whose voltage follows the sign of ``f'``.

    Each gradient zero becomes one edge of step ``-2 * level`` (two V0 steps
    through zero).  Zeros that round onto the same cycle cancel in pairs.
    """
    if any(p % 2 == 0 for p in signal.orders):
        raise NotQuarterSymmetric(f"even harmonic orders in {signal.orders} break quarter-wave symmetry")
    roots = gradient_roots(signal, grid)  # raises for out-of-phase signals
    cycles = np.floor(np.asarray(roots) / grid.angle_resolution + 0.5).astype(int) if roots else []
    angles: list[int] = []
    for c in cycles:
        if angles and angles[-1] == c:
            angles.pop()
        else:
            angles.append(int(c))
    g0 = float(gradient_angle(signal, 0.0))
    if g0 == 0.0:
        g0 = float(gradient_angle(signal, 1e-6 * grid.angle_resolution))
    level = 1 if g0 > 0 else -1
    edges = []
    for a in angles:
        edges.append((a, -2 * level))
        level = -level
    return build_schedule(grid, edges, 1 if g0 > 0 else -1, 1)


def quarter_levels(schedule: SwitchingSchedule) -> np.ndarray:
    q = schedule.grid.quarter
    delta = np.zeros(q + 1, dtype=int)
    for e in schedule.edges:
        delta[e.angle] += e.step
    return schedule.start_level + np.cumsum(delta)[:q]


def expand_full_period(schedule: SwitchingSchedule) -> np.ndarray:
    """Voltage level (multiples of V0) for each clock cycle of one period."""
    first = quarter_levels(schedule)
    half = np.concatenate([first, -first[::-1]])
    return np.concatenate([half, -half])


def _check_spc(samples_per_cycle: int) -> int:
    if int(samples_per_cycle) != samples_per_cycle or samples_per_cycle < 1:
        raise ValidationError(f"samples_per_cycle must be a positive integer, got {samples_per_cycle}")
    return int(samples_per_cycle)


def resemblance_current(schedule: SwitchingSchedule, circuit: CircuitParams,
                        samples_per_cycle: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Ideal-inductor coil current sampled over one period.

    Returns ``(t, i)`` with ``samples_per_cycle`` points per clock cycle and
    ``t[0] = 0``.  The current is the exact piecewise-linear integral of the
    voltage with zero mean over the period.  Series resistance is ignored.
    """
    spc = _check_spc(samples_per_cycle)
    grid = schedule.grid
    levels = expand_full_period(schedule)
    dt_cycle = grid.period / grid.cycles_per_period
    slope = levels * (circuit.v_step / circuit.inductance)  # A/s inside each cycle
    knots = np.concatenate([[0.0], np.cumsum(slope * dt_cycle)])
    mean = np.sum(knots[:-1] + knots[1:]) / (2 * grid.cycles_per_period)
    frac = np.arange(spc) / spc
    i = (knots[:-1, None] + slope[:, None] * dt_cycle * frac[None, :]).ravel() - mean
    t = np.arange(grid.cycles_per_period * spc) * (dt_cycle / spc)
    return t, i


def voltage_samples(schedule: SwitchingSchedule, circuit: CircuitParams,
                    samples_per_cycle: int = 1) -> np.ndarray:
    """Bridge output voltage on the same sample instants as :func:`resemblance_current`.

    At a switching instant the sample takes the mean of the two adjacent
    levels, so trapezoidal quadrature of ``v * i`` is exact.
    """
    spc = _check_spc(samples_per_cycle)
    levels = expand_full_period(schedule).astype(float)
    v = np.repeat(levels, spc)
    starts = np.arange(len(levels)) * spc
    v[starts] = 0.5 * (levels + np.roll(levels, 1))
    return v * circuit.v_step


def edge_count(schedule: SwitchingSchedule) -> int:
    """Number of V0 steps per quarter excluding the implied boundary edge."""
    return int(np.sum(np.abs(schedule.steps)))


def dwell_lengths(levels: np.ndarray) -> np.ndarray:
    """Cyclic run lengths of a level sequence."""
    levels = np.asarray(levels)
    change = np.flatnonzero(levels != np.roll(levels, 1))
    if change.size == 0:
        return np.array([len(levels)])
    return np.diff(np.concatenate([change, [change[0] + len(levels)]]))


def describe(schedule: SwitchingSchedule) -> str:
    grid = schedule.grid
    deg = 360.0 / grid.cycles_per_period
    parts = [f"start level {schedule.start_level:+d}, level_max {schedule.level_max}, "
             f"{len(schedule.edges)} edges:"]
    for e, lvl in zip(schedule.edges, schedule.running_levels):
        parts.append(f"  cycle {e.angle:5d} ({e.angle * deg:8.3f} deg)  step {e.step:+d} -> {lvl:+d}")
    parts.append(f"  cycle {grid.quarter:5d} (  90.000 deg)  boundary step {schedule.boundary_step:+d}")
    return "\n".join(parts)


QUARTER_ANGLE = math.pi / 2
