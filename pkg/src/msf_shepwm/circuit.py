"""Driven RL coil: exact time-domain simulation and power / efficiency metrics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

import numpy as np

from .errors import MalformedRow, NonIntegerPeriods, NonMonotoneTime, TooShort, ValidationError, ZeroDCPower
from .schedule import CircuitParams, SwitchingSchedule, expand_full_period, resemblance_current, voltage_samples

TRACE_HEADER = ("time_s", "voltage_V", "current_A")


@dataclass(frozen=True)
class WaveformTrace:
    """Uniformly sampled load voltage and current over whole periods.

    Samples are periodic: ``u[k]`` is taken at ``k * sample_period`` and the
    sample at the end of the last period is not repeated.
    """

    sample_period: float
    u: np.ndarray
    i: np.ndarray
    periods: int = 1

    def __post_init__(self):
        if len(self.u) != len(self.i):
            raise ValidationError(f"voltage and current lengths differ ({len(self.u)} vs {len(self.i)})")
        if not self.sample_period > 0:
            raise ValidationError("sample_period must be > 0")

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.u)) * self.sample_period

    @property
    def duration(self) -> float:
        return len(self.u) * self.sample_period

    @property
    def period(self) -> float:
        return self.duration / self.periods

    @property
    def samples_per_period(self) -> int:
        return len(self.u) // self.periods


@dataclass(frozen=True)
class PowerMetrics:
    v_dc: float
    i_dc: float
    p_dc: float
    p_out: float
    q_out: float
    eta: float
    zeta: float
    harmonics: dict = field(default_factory=dict)  # order -> (U_rms, I_rms, theta)
    note: str = ""


def rl_step(i0, v, resistance: float, inductance: float, dt: float):
    """Exact current after ``dt`` of constant voltage ``v`` across series R-L."""
    if resistance == 0.0:
        return i0 + v * dt / inductance
    i_inf = v / resistance
    return i_inf + (i0 - i_inf) * math.exp(-resistance * dt / inductance)


def _rl_period(v_cells: np.ndarray, i0: float, circuit: CircuitParams, dt: float) -> np.ndarray:
    decay = math.exp(-circuit.resistance * dt / circuit.inductance)
    i_inf = v_cells / circuit.resistance
    out = np.empty(v_cells.size + 1)
    out[0] = i0
    cur = i0
    for k, target in enumerate(i_inf):
        cur = target + (cur - target) * decay
        out[k + 1] = cur
    return out


def simulate(schedule: SwitchingSchedule, circuit: CircuitParams, samples_per_cycle: int = 64,
             periods: int = 1) -> WaveformTrace:
    """Periodic steady state of the coil current under the schedule's voltage.

    Each sub-sample interval has constant voltage and is integrated in
    closed form; the initial current is the fixed point of the one-period
    map.  With ``R = 0`` the zero-mean ideal integral is returned.
    """
    if int(samples_per_cycle) != samples_per_cycle or samples_per_cycle < 4:
        raise ValidationError(f"samples_per_cycle must be an integer >= 4, got {samples_per_cycle}")
    if int(periods) != periods or periods < 1:
        raise ValidationError(f"periods must be a positive integer, got {periods}")
    grid = schedule.grid
    spc = int(samples_per_cycle)
    dt = grid.period / (grid.cycles_per_period * spc)
    u = voltage_samples(schedule, circuit, spc)
    if circuit.resistance == 0.0:
        _, i = resemblance_current(schedule, circuit, spc)
    else:
        v_cells = np.repeat(expand_full_period(schedule).astype(float), spc) * circuit.v_step
        rt = circuit.resistance * grid.period / circuit.inductance
        beta = _rl_period(v_cells, 0.0, circuit, dt)[-1]
        i0 = beta / -math.expm1(-rt)
        i = _rl_period(v_cells, i0, circuit, dt)[:-1]
    return WaveformTrace(dt, np.tile(u, periods), np.tile(i, periods), int(periods))


def _check_trace(trace: WaveformTrace) -> None:
    if int(trace.periods) != trace.periods or trace.periods < 1 or len(trace.u) % trace.periods:
        raise NonIntegerPeriods(f"{len(trace.u)} samples do not split into {trace.periods} whole periods")


def real_power(trace: WaveformTrace) -> float:
    """Mean of ``u * i`` over the covered periods (periodic trapezoidal rule)."""
    _check_trace(trace)
    return float(np.mean(trace.u * trace.i))


def harmonic_phasors(trace: WaveformTrace, orders: Iterable[int]) -> dict[int, tuple[float, float, float]]:
    """RMS voltage, RMS current and voltage-minus-current phase per order."""
    _check_trace(trace)
    n = len(trace.u)
    U = np.fft.rfft(trace.u) / n
    I = np.fft.rfft(trace.i) / n
    out = {}
    for p in orders:
        k = int(p) * trace.periods
        if k >= n / 2:
            raise ValidationError(f"order {p} above the Nyquist limit of the trace")
        u_ph, i_ph = U[k], I[k]
        theta = float(np.angle(u_ph) - np.angle(i_ph))
        theta = (theta + math.pi) % (2 * math.pi) - math.pi
        out[int(p)] = (math.sqrt(2) * abs(u_ph), math.sqrt(2) * abs(i_ph), theta)
    return out


def reactive_power(trace: WaveformTrace, orders: Iterable[int], grid=None) -> float:
    """``sum_i U_i I_i sin(theta_i)`` over the transmitting orders."""
    if grid is not None and abs(trace.period - grid.period) > 1e-9 * grid.period:
        raise NonIntegerPeriods(f"trace period {trace.period:.6g} s differs from grid period {grid.period:.6g} s")
    return float(sum(u * i * math.sin(th) for u, i, th in harmonic_phasors(trace, orders).values()))


def efficiency_metrics(v_dc: float, i_dc: float, p_out: float, q_out: float, harmonics=None,
                       note: str = "") -> PowerMetrics:
    p_dc = v_dc * i_dc
    if not p_dc > 0:
        raise ZeroDCPower(f"DC input power must be > 0 (V_DC={v_dc}, I_DC={i_dc})")
    return PowerMetrics(v_dc, i_dc, p_dc, p_out, q_out, p_out / p_dc, q_out / p_dc, dict(harmonics or {}), note)


def metrics_to_text(m: PowerMetrics) -> str:
    def fmt(v: float) -> str:
        return f"{round(v, 2) + 0.0:.2f}"  # no "-0.00"

    rows = [
        ("V_DC_V", fmt(m.v_dc)),
        ("I_DC_A", fmt(m.i_dc)),
        ("P_DC_W", fmt(m.p_dc)),
        ("P_out_W", fmt(m.p_out)),
        ("Q_out_var", fmt(m.q_out)),
        ("eta_percent", fmt(100 * m.eta)),
        ("zeta", fmt(m.zeta)),
    ]
    for p, (u, i, th) in sorted(m.harmonics.items()):
        rows.append((f"harmonic_{p}", f"U_rms={u:.6g} I_rms={i:.6g} theta_rad={th:.6g}"))
    if m.note:
        rows.append(("note", m.note))
    return "".join(f"{k} = {v}\n" for k, v in rows)


def parse_metrics(text: str) -> dict[str, str]:
    out = {}
    for ln in text.splitlines():
        if "=" in ln:
            k, _, v = ln.partition(" = ")
            out[k.strip()] = v.strip()
    return out


# ------------------------------------------------------------------ trace I/O

def trace_to_csv(trace: WaveformTrace, fh: Optional[TextIO] = None) -> str:
    buf = fh or io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for t, u, i in zip(trace.t, trace.u, trace.i):
        w.writerow((repr(float(t)), repr(float(u)), repr(float(i))))
    return buf.getvalue() if fh is None else ""


def ingest_trace(stream: TextIO, fundamental_frequency: float,
                 samples_per_period: Optional[int] = None) -> WaveformTrace:
    """Read a ``time_s,voltage_V,current_A`` CSV and resample it uniformly.

    The whole number of fundamental periods covered by the file is kept and
    resampled by linear interpolation to ``samples_per_period`` points per
    period (default: the file's own rate rounded to an integer).
    """
    if not fundamental_frequency > 0:
        raise ValidationError("fundamental_frequency must be > 0")
    t, u, i = [], [], []
    for n, row in enumerate(csv.reader(stream), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if n == 1 and row[0].strip() == TRACE_HEADER[0]:
            continue
        if len(row) != 3:
            raise MalformedRow(f"line {n}: expected 3 columns, got {len(row)}")
        try:
            tv, uv, iv = (float(c) for c in row)
        except ValueError:
            raise MalformedRow(f"line {n}: non-numeric field in {row}") from None
        if t and not tv > t[-1]:
            raise NonMonotoneTime(f"line {n}: time {tv} does not increase past {t[-1]}")
        t.append(tv)
        u.append(uv)
        i.append(iv)
    if len(t) < 2:
        raise TooShort(f"trace holds {len(t)} samples")
    t = np.array(t)
    period = 1.0 / fundamental_frequency
    dt = float(np.median(np.diff(t)))
    span = t[-1] - t[0] + dt
    periods = int(math.floor(span / period + 1e-6))
    if periods < 1:
        raise TooShort(f"trace covers {span / period:.3f} periods; need at least one")
    spp = int(samples_per_period) if samples_per_period else max(4, int(round(period / dt)))
    tt = t[0] + np.arange(periods * spp) * (period / spp)
    return WaveformTrace(period / spp, np.interp(tt, t, u), np.interp(tt, t, i), periods)
