"""Design configuration and schedule files (INI-style key/value sections).

Physical quantities carry their unit in the key name, e.g.
``inductance_uH`` or ``clock_frequency_Hz``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError, ValidationError
from .grid import TimingGrid
from .schedule import CircuitParams, SwitchingSchedule, build_schedule
from .signals import ObjectiveSignal, make_objective, preset

_UNIT_SCALE = {
    "inductance_H": 1.0, "inductance_mH": 1e-3, "inductance_uH": 1e-6, "inductance_nH": 1e-9,
}


@dataclass(frozen=True)
class OptimizerSettings:
    weights: dict[int, float]
    thresholds: dict[int, float]
    initial_angles: Optional[tuple[int, ...]] = None
    tolerance: float = 1e-8
    max_iterations: int = 500
    penalty: float = 1e4
    starts: int = 1
    seed: int = 0


@dataclass(frozen=True)
class ExportSettings:
    output_dir: Path = Path(".")
    lookup_table: str = "lookup_table.txt"
    levels: str = "levels.txt"
    schedule: str = "schedule.ini"
    spectrum: str = "spectrum.tsv"
    dead_time_cycles: int = 0
    samples_per_cycle: int = 64
    max_order: Optional[int] = None
    thd_cutoff_order: Optional[int] = None


@dataclass(frozen=True)
class DesignConfig:
    grid: TimingGrid
    signal: ObjectiveSignal
    circuit: CircuitParams
    optimizer: OptimizerSettings
    export: ExportSettings
    level_max: int = 1
    template: Optional[SwitchingSchedule] = None
    preset_name: Optional[str] = None
    source: Optional[Path] = field(default=None, compare=False)

    @property
    def selected(self) -> tuple[int, ...]:
        return self.signal.orders


def parse_pairs(text: str, field_name: str, value_type=float) -> dict[int, float]:
    """``"1:1, 3:0.5"`` -> ``{1: 1.0, 3: 0.5}``."""
    out = {}
    for tok in _split(text):
        key, sep, val = tok.partition(":")
        if not sep:
            raise ConfigError(f"{field_name}: expected order:value, got {tok!r}", field_name)
        try:
            out[int(key)] = value_type(val)
        except ValueError:
            raise ConfigError(f"{field_name}: bad entry {tok!r}", field_name) from None
    return out


def parse_ints(text: str, field_name: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in _split(text))
    except ValueError:
        raise ConfigError(f"{field_name}: expected comma-separated integers, got {text!r}", field_name) from None


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.replace("\n", ",").split(",") if t.strip()]


def _get(section, key, conv, default=None, required=False, field_prefix=""):
    name = f"{field_prefix}{key}"
    if section is None or key not in section:
        if required:
            raise ConfigError(f"missing required field {name}", name)
        return default
    raw = section[key]
    try:
        return conv(raw)
    except (ValueError, TypeError):
        raise ConfigError(f"field {name}: cannot parse {raw!r}", name) from None


def _parse_harmonics(text: str) -> list[tuple[int, float, float]]:
    comps = []
    for tok in _split(text):
        parts = tok.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"design.harmonics: expected order:weight[:phase_rad], got {tok!r}",
                              "design.harmonics")
        try:
            comps.append((int(parts[0]), float(parts[1]), float(parts[2]) if len(parts) == 3 else 0.0))
        except ValueError:
            raise ConfigError(f"design.harmonics: bad entry {tok!r}", "design.harmonics") from None
    return comps


def grid_from_section(sec, prefix: str) -> TimingGrid:
    cycles = _get(sec, "cycles_per_period", int, required=True, field_prefix=prefix)
    clock = _get(sec, "clock_frequency_Hz", float, field_prefix=prefix)
    fund = _get(sec, "fundamental_frequency_Hz", float, field_prefix=prefix)
    if clock is None and fund is None:
        raise ConfigError(f"need {prefix}clock_frequency_Hz or {prefix}fundamental_frequency_Hz",
                          f"{prefix}clock_frequency_Hz")
    try:
        grid = TimingGrid(clock, cycles) if clock is not None else TimingGrid.from_fundamental(fund, cycles)
    except ValidationError as exc:
        raise ConfigError(f"{prefix}cycles_per_period/clock: {exc}", f"{prefix}cycles_per_period") from None
    if clock is not None and fund is not None and not math.isclose(grid.fundamental_frequency, fund, rel_tol=1e-9):
        raise ConfigError(
            f"{prefix}fundamental_frequency_Hz={fund} inconsistent with clock/cycles "
            f"({grid.fundamental_frequency})", f"{prefix}fundamental_frequency_Hz")
    return grid


def load_config(path) -> DesignConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", "config") from None
    cfg = parse_config(text)
    return DesignConfig(**{**cfg.__dict__, "source": path})


def parse_config(text: str) -> DesignConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep unit suffix case
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}", "config") from None
    design = cp["design"] if cp.has_section("design") else None
    if design is None:
        raise ConfigError("missing [design] section", "design")
    grid = grid_from_section(design, "design.")
    omega = grid.omega

    preset_name = _get(design, "preset", str)
    harmonics = _get(design, "harmonics", str)
    if (preset_name is None) == (harmonics is None):
        raise ConfigError("give exactly one of design.preset or design.harmonics", "design.preset")
    try:
        if preset_name is not None:
            signal = preset(preset_name.strip(), omega)
        else:
            signal = make_objective(omega, _parse_harmonics(harmonics))
    except ValidationError as exc:
        name = "design.preset" if preset_name is not None else "design.harmonics"
        raise ConfigError(f"{name}: {exc}", name) from None

    level_max = _get(design, "level_max", int, 1, field_prefix="design.")
    template = None
    if "edges" in design:
        try:
            template = build_schedule(grid, parse_pairs(design["edges"], "design.edges", int).items(),
                                      _get(design, "start_level", int, 1, field_prefix="design."), level_max)
        except ValidationError as exc:
            raise ConfigError(f"design.edges: {exc}", "design.edges") from None

    circ = cp["circuit"] if cp.has_section("circuit") else None
    v_dc = _get(circ, "dc_voltage_V", float, required=True, field_prefix="circuit.")
    v_step = _get(circ, "step_voltage_V", float, None, field_prefix="circuit.")
    ind = None
    for key, scale in _UNIT_SCALE.items():
        val = _get(circ, key, float, field_prefix="circuit.")
        if val is not None:
            if ind is not None:
                raise ConfigError("inductance given more than once", f"circuit.{key}")
            ind = val * scale
    if ind is None:
        raise ConfigError("missing required field circuit.inductance_uH", "circuit.inductance_uH")
    res = _get(circ, "series_resistance_ohm", float, 0.0, field_prefix="circuit.")
    try:
        circuit = CircuitParams(v_dc, ind, v_step, res)
    except ValidationError as exc:
        raise ConfigError(f"circuit: {exc}", "circuit") from None

    opt = cp["optimizer"] if cp.has_section("optimizer") else None
    weights = {p: 1.0 for p in signal.orders}
    if opt is not None and "weights" in opt:
        given = parse_pairs(opt["weights"], "optimizer.weights")
        unknown = set(given) - set(signal.orders)
        if unknown:
            raise ConfigError(f"optimizer.weights: orders {sorted(unknown)} are not selected harmonics",
                              "optimizer.weights")
        weights.update(given)
    thresholds = {}
    if opt is not None and "thresholds" in opt:
        thresholds = parse_pairs(opt["thresholds"], "optimizer.thresholds")
    if opt is not None and "scaled_bound" in opt:
        bound = _get(opt, "scaled_bound", float, field_prefix="optimizer.")
        orders = parse_ints(opt.get("constrained_orders", ""), "optimizer.constrained_orders")
        if not orders:
            raise ConfigError("optimizer.scaled_bound needs optimizer.constrained_orders",
                              "optimizer.constrained_orders")
        for p in orders:
            thresholds.setdefault(p, bound * p)
    initial = None
    if opt is not None and "initial_angles_cycles" in opt:
        initial = parse_ints(opt["initial_angles_cycles"], "optimizer.initial_angles_cycles")
    settings = OptimizerSettings(
        weights, thresholds, initial,
        _get(opt, "tolerance", float, 1e-8, field_prefix="optimizer."),
        _get(opt, "max_iterations", int, 500, field_prefix="optimizer."),
        _get(opt, "penalty", float, 1e4, field_prefix="optimizer."),
        _get(opt, "starts", int, 1, field_prefix="optimizer."),
        _get(opt, "seed", int, 0, field_prefix="optimizer."),
    )

    ex = cp["export"] if cp.has_section("export") else None
    export = ExportSettings(
        Path(_get(ex, "output_dir", str, ".", field_prefix="export.")),
        _get(ex, "lookup_table", str, "lookup_table.txt", field_prefix="export."),
        _get(ex, "levels", str, "levels.txt", field_prefix="export."),
        _get(ex, "schedule", str, "schedule.ini", field_prefix="export."),
        _get(ex, "spectrum", str, "spectrum.tsv", field_prefix="export."),
        _get(ex, "dead_time_cycles", int, 0, field_prefix="export."),
        _get(ex, "samples_per_cycle", int, 64, field_prefix="export."),
        _get(ex, "max_order", int, None, field_prefix="export."),
        _get(ex, "thd_cutoff_order", int, None, field_prefix="export."),
    )
    return DesignConfig(grid, signal, circuit, settings, export, level_max, template, preset_name)


# ------------------------------------------------------------ schedule files

def schedule_to_text(schedule: SwitchingSchedule) -> str:
    edges = ", ".join(f"{e.angle}:{e.step:+d}" for e in schedule.edges)
    return (
        "[schedule]\n"
        f"clock_frequency_Hz = {schedule.grid.clock_frequency!r}\n"
        f"cycles_per_period = {schedule.grid.cycles_per_period}\n"
        f"start_level = {schedule.start_level}\n"
        f"level_max = {schedule.level_max}\n"
        f"edges = {edges}\n"
    )


def parse_schedule(text: str) -> SwitchingSchedule:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"schedule syntax error: {exc}", "schedule") from None
    if not cp.has_section("schedule"):
        raise ConfigError("missing [schedule] section", "schedule")
    sec = cp["schedule"]
    grid = grid_from_section(sec, "schedule.")
    edges = []
    for tok in _split(sec.get("edges", "")):
        a, sep, s = tok.partition(":")
        if not sep:
            raise ConfigError(f"schedule.edges: expected angle:step, got {tok!r}", "schedule.edges")
        try:
            edges.append((int(a), int(s)))
        except ValueError:
            raise ConfigError(f"schedule.edges: bad entry {tok!r}", "schedule.edges") from None
    try:
        return build_schedule(grid, edges, _get(sec, "start_level", int, required=True, field_prefix="schedule."),
                              _get(sec, "level_max", int, 1, field_prefix="schedule."))
    except ConfigError:
        raise
    except ValidationError as exc:
        raise ConfigError(f"schedule: {exc}", "schedule.edges") from None


def load_schedule(path) -> SwitchingSchedule:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read schedule {path}: {exc}", "schedule") from None
    return parse_schedule(text)
