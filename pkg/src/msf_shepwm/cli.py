"""Command-line interface: ``msf-shepwm {synth,design,analyze,simulate,metrics,export}``.

Set ``MSF_SHEPWM_LOG`` (e.g. ``DEBUG``) to change log verbosity.  Exit codes:
0 success, 2 invalid input or configuration, 3 optimiser failure,
4 trace or file ingestion failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from . import __version__, lookup, pipeline
from .circuit import (
    efficiency_metrics,
    harmonic_phasors,
    ingest_trace,
    metrics_to_text,
    reactive_power,
    real_power,
    simulate,
    trace_to_csv,
)
from .config import ConfigError, load_config, load_schedule
from .errors import IngestError, MsfShepwmError, OptimizationError, ValidationError
from .signals import component_table, gradient_zeros, sample
from .spectrum import analytic_coefficients, default_thd_cutoff, report_to_text

EXIT_OK, EXIT_INVALID, EXIT_OPTIMIZER, EXIT_INGEST = 0, 2, 3, 4

log = logging.getLogger("msf_shepwm")


def _orders(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated orders, got {text!r}") from None


def _echo_grid(cfg) -> None:
    f0 = cfg.grid.fundamental_frequency
    freqs = ", ".join(f"{p * f0 / 1e3:.2f} kHz" for p in cfg.selected)
    print(f"clock {cfg.grid.clock_frequency / 1e6:.6g} MHz, {cfg.grid.cycles_per_period} cycles/period, "
          f"transmitting {freqs}")


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    _echo_grid(cfg)
    print("order\tfrequency_Hz\tweight\tphase_rad")
    for p, f, w, ph in component_table(cfg.signal):
        print(f"{p}\t{f:.6f}\t{w:.6g}\t{ph:.6g}")
    if cfg.signal.in_phase:
        zeros = gradient_zeros(cfg.signal, cfg.grid)
        print(f"gradient zeros ({len(zeros)}): {', '.join(map(str, zeros))}")
    else:
        print("gradient zeros: n/a (components not in phase)")
    out = Path(args.output) if args.output else cfg.export.output_dir / "objective.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    n = args.samples or cfg.grid.cycles_per_period * 4
    t, f, df = sample(cfg.signal, n)
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("time_s", "f", "df_dt"))
        for row in zip(t, f, df):
            w.writerow(tuple(repr(float(v)) for v in row))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_design(args) -> int:
    cfg = load_config(args.config)
    _echo_grid(cfg)
    outcome = pipeline.optimized_design(cfg) if args.optimize else pipeline.fast_design(cfg)
    if outcome.result is not None:
        r = outcome.result
        print(f"optimiser: {r.method}, {r.iterations} iterations, converged={r.converged}, "
              f"penalised objective {r.quantized_penalized:.6g}, violation {r.quantized_violation:.3g}")
    sched = outcome.schedule
    print(f"switching angles (cycles): {', '.join(str(int(a)) for a in sched.angles)}")
    for p in cfg.selected:
        print(f"  m_{p}/{p} = {outcome.report.scaled_index(p):.4f}")
    print(f"THD = {outcome.thd:.2f} % (orders <= {outcome.thd_cutoff})")
    for path in pipeline.write_outputs(outcome, cfg, args.output_dir):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    sched = load_schedule(args.schedule)
    if sched.grid != cfg.grid:
        raise ConfigError("schedule grid differs from config grid", "schedule.cycles_per_period")
    selected = args.selected or cfg.selected
    max_order = args.max_order or pipeline.report_order(cfg)
    report = analytic_coefficients(sched, cfg.circuit, max_order).with_sets(
        selected, tuple(cfg.optimizer.thresholds))
    cutoff = args.thd_cutoff or cfg.export.thd_cutoff_order or default_thd_cutoff(selected)
    text = report_to_text(report, selected, cutoff)
    _emit(text, args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    sched = load_schedule(args.schedule)
    trace = simulate(sched, cfg.circuit, args.samples_per_cycle or cfg.export.samples_per_cycle, args.periods)
    _emit(trace_to_csv(trace), args.output)
    return EXIT_OK


def cmd_metrics(args) -> int:
    if args.i_dc is None:
        raise ConfigError("I_DC is required to compute eta and zeta (--i-dc)", "i_dc")
    if args.v_dc is None and args.config is None:
        raise ConfigError("V_DC is required (--v-dc or a config)", "v_dc")
    cfg = load_config(args.config) if args.config else None
    v_dc = args.v_dc if args.v_dc is not None else cfg.circuit.v_dc
    orders = args.orders or (cfg.selected if cfg else None)
    harmonics = {}
    note = ""
    p_out, q_out = args.p_out, args.q_out
    if args.trace or args.simulate:
        if cfg is None:
            raise ConfigError("--trace/--simulate need --config", "config")
        if not orders:
            raise ConfigError("transmitting orders needed (--orders)", "orders")
        if args.trace:
            try:
                with open(args.trace, encoding="utf-8", newline="") as fh:
                    trace = ingest_trace(fh, cfg.grid.fundamental_frequency)
            except OSError as exc:
                raise IngestError(f"cannot read trace {args.trace}: {exc}") from None
        else:
            sched = load_schedule(args.simulate)
            trace = simulate(sched, cfg.circuit, cfg.export.samples_per_cycle)
            if cfg.circuit.resistance == 0.0:
                note = "ideal model: no dissipation"
        if p_out is None:
            # an ideal trace has no loss path; report zero rather than round-off
            p_out = 0.0 if note else real_power(trace)
        if q_out is None:
            q_out = reactive_power(trace, orders)
        harmonics = harmonic_phasors(trace, orders)
    if p_out is None or q_out is None:
        missing = "P_out (--p-out)" if p_out is None else "Q_out (--q-out)"
        raise ConfigError(f"{missing} required when no trace is given", "p_out" if p_out is None else "q_out")
    metrics = efficiency_metrics(v_dc, args.i_dc, p_out, q_out, harmonics, note)
    _emit(metrics_to_text(metrics), args.output)
    return EXIT_OK


def cmd_export(args) -> int:
    sched = load_schedule(args.schedule)
    if args.levels:
        from .schedule import expand_full_period

        text = lookup.levels_to_text(expand_full_period(sched), sched.grid, sched.level_max)
    else:
        text = lookup.to_lookup_table(sched, args.dead_time).to_text()
    _emit(text, args.output)
    return EXIT_OK


def _emit(text: str, output) -> None:
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="msf-shepwm", description="Design and analyse multi-frequency SHE-PWM switching schedules.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesise the objective signal")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="CSV path for f(t) and f'(t)")
    p.add_argument("--samples", type=int, help="points per period (default 4 per clock cycle)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("design", help="build a schedule, spectrum report and lookup table")
    p.add_argument("config")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--fast", action="store_true", help="gradient-zero schedule, no optimisation")
    mode.add_argument("--optimize", action="store_true", help="run the constrained optimisation")
    p.add_argument("--output-dir", type=Path)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("analyze", help="spectrum report of an existing schedule")
    p.add_argument("schedule")
    p.add_argument("--config", required=True)
    p.add_argument("--selected", type=_orders)
    p.add_argument("--max-order", type=int)
    p.add_argument("--thd-cutoff", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="steady-state coil current trace (CSV)")
    p.add_argument("schedule")
    p.add_argument("--config", required=True)
    p.add_argument("--samples-per-cycle", type=int)
    p.add_argument("--periods", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="power and efficiency metrics")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--trace", help="measured trace CSV (time_s,voltage_V,current_A)")
    src.add_argument("--simulate", metavar="SCHEDULE", help="simulate this schedule instead")
    p.add_argument("--config")
    p.add_argument("--orders", type=_orders, help="transmitting orders for Q_out")
    p.add_argument("--v-dc", type=float)
    p.add_argument("--i-dc", type=float)
    p.add_argument("--p-out", type=float)
    p.add_argument("--q-out", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("export", help="gate lookup table of a schedule")
    p.add_argument("schedule")
    p.add_argument("--dead-time", type=int, default=0, help="dead time in clock cycles")
    p.add_argument("--levels", action="store_true", help="compact signed-level form instead of gate bits")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("MSF_SHEPWM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    log.info("msf-shepwm %s", __version__)
    try:
        return args.func(args)
    except OptimizationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZER
    except IngestError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MsfShepwmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
