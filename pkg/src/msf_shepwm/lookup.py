"""Gate lookup tables for one or two H-bridge cells.

Each cell has four gates, ordered ``HA, LA, HB, LB`` (high/low side of legs
A and B).  Level +1 turns on HA and LB, -1 turns on HB and LA, and 0 shorts
the coil through both low sides.  The first gate of the first cell is the
most significant bit of every table row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .errors import DeadTimeTooLong, IngestError, MalformedRow, ShootThrough, ValidationError
from .grid import TimingGrid
from .schedule import SwitchingSchedule, dwell_lengths, expand_full_period

_CELL_STATES = {
    1: (1, 0, 0, 1),
    0: (0, 1, 0, 1),
    -1: (0, 1, 1, 0),
}
_DECODE = {v: k for k, v in _CELL_STATES.items()}


def gate_names(level_max: int) -> list[str]:
    return [f"{g}{cell + 1}" for cell in range(level_max) for g in ("HA", "LA", "HB", "LB")]


@dataclass(frozen=True)
class LookupTable:
    grid: TimingGrid
    level_max: int
    dead_time_cycles: int
    gates: np.ndarray  # (cycles_per_period, 4 * level_max) of 0/1

    def __len__(self) -> int:
        return self.gates.shape[0]

    @property
    def gate_names(self) -> list[str]:
        return gate_names(self.level_max)

    def levels(self) -> np.ndarray:
        return decode_levels(self.gates, self.level_max)

    def to_text(self) -> str:
        lines = [_header(self.grid, self.level_max, self.dead_time_cycles, self.gate_names)]
        lines.extend("".join("1" if b else "0" for b in row) for row in self.gates)
        return "\n".join(lines) + "\n"

    def write(self, fh: TextIO) -> None:
        fh.write(self.to_text())


def _split_cells(level: int, level_max: int) -> list[int]:
    # fill cells in order: +2 -> (+1, +1), +1 -> (+1, 0), -1 -> (-1, 0)
    cells = []
    rest = int(level)
    for _ in range(level_max):
        c = max(-1, min(1, rest))
        cells.append(c)
        rest -= c
    if rest:
        raise ValidationError(f"level {level} not representable with {level_max} cell(s)")
    return cells


def _apply_dead_time(on: np.ndarray, dead: int) -> np.ndarray:
    """Delay every turn-on of a cyclic gate signal by ``dead`` cycles."""
    if dead == 0 or on.all() or not on.any():
        return on
    out = on.copy()
    n = len(on)
    rising = np.flatnonzero(on & ~np.roll(on, 1))
    for k in rising:
        idx = (k + np.arange(dead)) % n
        out[idx] = False
    return out


def check_shoot_through(gates: np.ndarray) -> None:
    g = np.asarray(gates, dtype=bool)
    for cell in range(g.shape[1] // 4):
        ha, la, hb, lb = (g[:, 4 * cell + j] for j in range(4))
        both = np.flatnonzero((ha & la) | (hb & lb))
        if both.size:
            raise ShootThrough(f"cell {cell + 1}: both switches of a leg on at cycle {both[0]}")


def gates_from_levels(levels: np.ndarray, level_max: int, dead_time_cycles: int = 0) -> np.ndarray:
    levels = np.asarray(levels, dtype=int)
    if level_max not in (1, 2):
        raise ValidationError(f"lookup tables support 1 or 2 H-bridge cells, got level_max={level_max}")
    if int(dead_time_cycles) != dead_time_cycles or dead_time_cycles < 0:
        raise ValidationError(f"dead_time_cycles must be a non-negative integer, got {dead_time_cycles}")
    dead = int(dead_time_cycles)
    if dead:
        shortest = int(dwell_lengths(levels).min())
        if dead >= shortest:
            raise DeadTimeTooLong(f"dead time {dead} cycles >= shortest dwell {shortest} cycles")
    states = {lvl: sum((list(_CELL_STATES[c]) for c in _split_cells(lvl, level_max)), [])
              for lvl in range(-level_max, level_max + 1)}
    gates = np.array([states[int(l)] for l in levels], dtype=bool)
    for j in range(gates.shape[1]):
        gates[:, j] = _apply_dead_time(gates[:, j], dead)
    check_shoot_through(gates)
    return gates.astype(np.uint8)


def to_lookup_table(schedule: SwitchingSchedule, dead_time_cycles: int = 0) -> LookupTable:
    """Gate bit table with one row per clock cycle of a full period."""
    levels = expand_full_period(schedule)
    gates = gates_from_levels(levels, schedule.level_max, dead_time_cycles)
    return LookupTable(schedule.grid, schedule.level_max, int(dead_time_cycles), gates)


def decode_levels(gates: np.ndarray, level_max: int) -> np.ndarray:
    """Invert the gate encoding.  Rows in a dead-time state repeat the previous level."""
    g = np.asarray(gates, dtype=int)
    n = g.shape[0]
    out = np.zeros(n, dtype=int)
    known = np.zeros(n, dtype=bool)
    for k in range(n):
        total = 0
        ok = True
        for cell in range(level_max):
            state = _DECODE.get(tuple(g[k, 4 * cell:4 * cell + 4]))
            if state is None:
                ok = False
                break
            total += state
        out[k] = total
        known[k] = ok
    if not known.any():
        raise IngestError("lookup table holds no decodable gate state")
    # fill dead-time rows cyclically from the last decodable row
    last = out[np.flatnonzero(known)[-1]]
    for k in range(n):
        if known[k]:
            last = out[k]
        else:
            out[k] = last
    return out


def _header(grid: TimingGrid, level_max: int, dead_time_cycles: int, names=None) -> str:
    parts = [f"clock_frequency_Hz={grid.clock_frequency!r}",
             f"cycles_per_period={grid.cycles_per_period}",
             f"level_max={level_max}",
             f"dead_time_cycles={dead_time_cycles}"]
    if names is not None:
        parts.append("gates=" + ",".join(names))
    return "# " + " ".join(parts)


def _parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise MalformedRow(f"missing header line, got {line[:40]!r}")
    fields = {}
    for tok in line[1:].split():
        key, sep, value = tok.partition("=")
        if not sep:
            raise MalformedRow(f"bad header token {tok!r}")
        fields[key] = value
    try:
        return {
            "grid": TimingGrid(float(fields["clock_frequency_Hz"]), int(fields["cycles_per_period"])),
            "level_max": int(fields["level_max"]),
            "dead_time_cycles": int(fields["dead_time_cycles"]),
        }
    except KeyError as exc:
        raise MalformedRow(f"header lacks {exc.args[0]}") from None


def parse_lookup_table(text: str) -> LookupTable:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedRow("empty lookup table file")
    meta = _parse_header(lines[0])
    width = 4 * meta["level_max"]
    rows = []
    for n, ln in enumerate(lines[1:], start=2):
        if len(ln) != width or set(ln) - {"0", "1"}:
            raise MalformedRow(f"line {n}: expected {width} gate bits, got {ln!r}")
        rows.append([int(ch) for ch in ln])
    if len(rows) != meta["grid"].cycles_per_period:
        raise MalformedRow(f"expected {meta['grid'].cycles_per_period} rows, got {len(rows)}")
    gates = np.array(rows, dtype=np.uint8)
    check_shoot_through(gates)
    return LookupTable(meta["grid"], meta["level_max"], meta["dead_time_cycles"], gates)


def levels_to_text(levels: np.ndarray, grid: TimingGrid, level_max: int) -> str:
    """Compact form: the header then one signed integer level per cycle."""
    lines = [_header(grid, level_max, 0)]
    lines.extend(f"{int(l):+d}" for l in levels)
    return "\n".join(lines) + "\n"


def parse_levels(text: str) -> tuple[TimingGrid, int, np.ndarray]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedRow("empty level file")
    meta = _parse_header(lines[0])
    try:
        levels = np.array([int(ln) for ln in lines[1:]], dtype=int)
    except ValueError as exc:
        raise MalformedRow(str(exc)) from None
    if len(levels) != meta["grid"].cycles_per_period:
        raise MalformedRow(f"expected {meta['grid'].cycles_per_period} levels, got {len(levels)}")
    return meta["grid"], meta["level_max"], levels
