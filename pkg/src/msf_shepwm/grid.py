from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveFrequency, ValidationError


@dataclass(frozen=True)
class TimingGrid:
    """Clock grid on which every switching instant must land.

    One fundamental period spans ``cycles_per_period`` clock cycles, so the
    angular resolution is ``2*pi / cycles_per_period``.
    """

    clock_frequency: float
    cycles_per_period: int

    def __post_init__(self):
        if not self.clock_frequency > 0:
            raise NonPositiveFrequency(f"clock_frequency must be > 0, got {self.clock_frequency}")
        if int(self.cycles_per_period) != self.cycles_per_period or self.cycles_per_period <= 0:
            raise ValidationError(f"cycles_per_period must be a positive integer, got {self.cycles_per_period}")
        if self.cycles_per_period % 4:
            raise ValidationError(
                f"cycles_per_period must be divisible by 4, got {self.cycles_per_period}"
            )
        object.__setattr__(self, "cycles_per_period", int(self.cycles_per_period))

    @classmethod
    def from_fundamental(cls, fundamental_frequency: float, cycles_per_period: int) -> "TimingGrid":
        return cls(fundamental_frequency * cycles_per_period, cycles_per_period)

    @property
    def quarter(self) -> int:
        return self.cycles_per_period // 4

    @property
    def half(self) -> int:
        return self.cycles_per_period // 2

    @property
    def fundamental_frequency(self) -> float:
        return self.clock_frequency / self.cycles_per_period

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.fundamental_frequency

    @property
    def period(self) -> float:
        return 1.0 / self.fundamental_frequency

    @property
    def angle_resolution(self) -> float:
        return 2.0 * math.pi / self.cycles_per_period

    def to_radians(self, cycles):
        return np.asarray(cycles, dtype=float) * self.angle_resolution

    def to_cycles(self, radians):
        return np.asarray(radians, dtype=float) / self.angle_resolution
