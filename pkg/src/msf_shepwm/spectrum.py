"""Fourier description of the coil current: closed form from switching angles,
or numerically from a sampled waveform; plus modulation indices and THD."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptySelectedSet, NonIntegerPeriods, ValidationError
from .grid import TimingGrid
from .schedule import CircuitParams, SwitchingSchedule


def harmonic_terms(angles_rad, steps, final_level, orders) -> np.ndarray:
    """Normalised harmonic amplitudes ``c_p = (p*w*L/V0) * b_p``.

    ``c_p = 4/(p*pi) * (final_level*sin(p*pi/2) - sum_q step_q*sin(p*alpha_q))``
    which is the switching-edge sum with the implied edge at ``pi/2``.
    """
    p = np.asarray(orders, dtype=float)
    a = np.asarray(angles_rad, dtype=float)
    s = np.asarray(steps, dtype=float)
    edge_sum = np.sin(np.outer(p, a)) @ s if a.size else np.zeros_like(p)
    return 4.0 / (p * math.pi) * (final_level * np.sin(p * math.pi / 2) - edge_sum)


def odd_orders(max_order: int) -> np.ndarray:
    return np.arange(1, int(max_order) + 1, 2)


def default_thd_cutoff(selected: Iterable[int]) -> int:
    """Highest odd order counted by THD: the largest odd p <= 1.4 * max(selected)."""
    top = max(selected)
    cut = int(math.floor(1.4 * top))
    return cut if cut % 2 else cut - 1


@dataclass(frozen=True)
class SpectrumReport:
    """Current harmonics ``i(t) = sum_p a_p cos(p w t) + b_p sin(p w t)``.

    ``modulation`` is the signed modulation index ``m_p = (p w L / V0) b_p``
    and ``scaled`` the scaled magnitude ``|m_p| / p``.
    """

    omega: float
    orders: np.ndarray
    b: np.ndarray
    v_step: float
    inductance: float
    a: Optional[np.ndarray] = None
    selected: tuple[int, ...] = ()
    eliminated: tuple[int, ...] = ()

    @property
    def modulation(self) -> np.ndarray:
        return self.orders * self.omega * self.inductance / self.v_step * self.b

    @property
    def scaled(self) -> np.ndarray:
        return np.abs(self.modulation) / self.orders

    @property
    def folded(self) -> bool:
        return self.a is None

    def index(self, p: int) -> int:
        hit = np.flatnonzero(self.orders == p)
        if not hit.size:
            raise ValidationError(f"order {p} not in report (orders {self.orders[0]}..{self.orders[-1]})")
        return int(hit[0])

    def coefficient(self, p: int) -> float:
        return float(self.b[self.index(p)])

    def scaled_index(self, p: int) -> float:
        return float(self.scaled[self.index(p)])

    def amplitude(self) -> np.ndarray:
        """Peak amplitude per order (includes cosine parts when present)."""
        if self.a is None:
            return np.abs(self.b)
        return np.hypot(self.a, self.b)

    def with_sets(self, selected=(), eliminated=()) -> "SpectrumReport":
        return SpectrumReport(self.omega, self.orders, self.b, self.v_step, self.inductance, self.a,
                              tuple(selected), tuple(eliminated))

    def membership(self, p: int) -> str:
        if p in self.selected:
            return "selected"
        if p in self.eliminated:
            return "eliminated"
        return "other"

    def thd(self, selected=None, max_order=None) -> float:
        return thd(self, self.selected if selected is None else selected, max_order)


def analytic_coefficients(schedule: SwitchingSchedule, circuit: CircuitParams,
                          max_order: int) -> SpectrumReport:
    """Closed-form current harmonics of a quarter-wave schedule (odd orders only)."""
    orders = odd_orders(max_order)
    omega = circuit.omega_for(schedule.grid)
    c = harmonic_terms(schedule.angles_rad, schedule.steps, schedule.final_level, orders)
    b = c * circuit.v_step / (orders * omega * circuit.inductance)
    return SpectrumReport(omega, orders, b, circuit.v_step, circuit.inductance)


def _periods(n_samples: int, grid: TimingGrid, sample_period, periods) -> int:
    if sample_period is not None:
        ratio = n_samples * sample_period / grid.period
        k = round(ratio)
        if k < 1 or abs(ratio - k) > 1e-9 * max(1.0, ratio):
            raise NonIntegerPeriods(f"waveform spans {ratio:.6f} periods; need an integer")
        return k
    k = 1 if periods is None else int(periods)
    if k < 1 or n_samples % k:
        raise NonIntegerPeriods(f"{n_samples} samples cannot hold {k} whole periods")
    return k


def dft_coefficients(waveform, grid: TimingGrid, max_order: int, circuit: Optional[CircuitParams] = None,
                     sample_period: Optional[float] = None, periods: Optional[int] = None,
                     piecewise_linear: bool = False, fold_tol: float = 1e-9) -> SpectrumReport:
    """Harmonics of a uniformly sampled periodic waveform by FFT.

    With ``piecewise_linear`` the samples are taken as the knots of a linear
    interpolant (exact for the ideal coil current when the samples include
    every switching instant) and the hat-function attenuation
    ``sinc^2(k/n)`` is applied, which makes the result free of aliasing.

    Cosine parts below ``fold_tol`` times the largest sine part are dropped
    and the report is folded to signed sine coefficients.
    """
    x = np.asarray(waveform, dtype=float)
    n = x.size
    k_per = _periods(n, grid, sample_period, periods)
    orders = np.arange(1, int(max_order) + 1)
    bins = orders * k_per
    if bins[-1] >= n / 2:
        raise ValidationError(f"max_order {max_order} exceeds the Nyquist limit of {n} samples")
    X = np.fft.rfft(x)[bins] / n
    if piecewise_linear:
        X = X * np.sinc(bins / n) ** 2
    a = 2.0 * X.real
    b = -2.0 * X.imag
    ref = max(np.max(np.abs(b)), np.max(np.abs(a)), np.finfo(float).tiny)
    folded = np.max(np.abs(a)) < fold_tol * ref
    v_step = circuit.v_step if circuit else 1.0
    inductance = circuit.inductance if circuit else 1.0
    omega = circuit.omega_for(grid) if circuit else grid.omega
    return SpectrumReport(omega, orders, b, v_step, inductance, None if folded else a)


def thd(report: SpectrumReport, selected: Sequence[int], max_order: Optional[int] = None) -> float:
    """Percentage ratio of the RMS of unselected to selected current harmonics.

    Unselected orders run up to ``max_order`` (default
    :func:`default_thd_cutoff`); harmonics above it are ignored.
    """
    selected = tuple(int(p) for p in selected)
    if not selected:
        raise EmptySelectedSet("THD needs at least one selected order")
    if max_order is None:
        max_order = default_thd_cutoff(selected)
    amp = report.amplitude()
    sel = np.isin(report.orders, selected)
    missing = set(selected) - set(int(p) for p in report.orders)
    if missing:
        raise ValidationError(f"selected orders {sorted(missing)} absent from report")
    other = ~sel & (report.orders <= max_order)
    den = math.sqrt(float(np.sum(amp[sel] ** 2)))
    if den == 0.0:
        raise ValidationError("selected harmonics are all zero")
    return 100.0 * math.sqrt(float(np.sum(amp[other] ** 2))) / den


def report_to_text(report: SpectrumReport, selected=None, max_order=None) -> str:
    """Tab-separated table: order, frequency, b_p, m_p/p, membership, then a THD line."""
    selected = report.selected if selected is None else tuple(selected)
    f0 = report.omega / (2 * math.pi)
    lines = ["order\tfrequency_Hz\tb_p_A\tm_p_over_p\tmembership"]
    for p, b, s in zip(report.orders, report.b, report.scaled):
        lines.append(f"{int(p)}\t{p * f0:.6f}\t{b:.12e}\t{s:.12e}\t{report.membership(int(p))}")
    if selected:
        cut = default_thd_cutoff(selected) if max_order is None else max_order
        lines.append(f"# THD_percent={thd(report, selected, cut):.6f} cutoff_order={cut}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict:
    """Read back :func:`report_to_text` output as ``{order: (b_p, m_p/p, membership)}``."""
    out = {}
    thd_value = None
    for ln in text.splitlines():
        if not ln.strip() or ln.startswith("order"):
            continue
        if ln.startswith("#"):
            for tok in ln[1:].split():
                k, _, v = tok.partition("=")
                if k == "THD_percent":
                    thd_value = float(v)
            continue
        p, _f, b, s, mem = ln.split("\t")
        out[int(p)] = (float(b), float(s), mem)
    return {"rows": out, "thd": thd_value}
