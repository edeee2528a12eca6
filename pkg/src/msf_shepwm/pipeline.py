"""End-to-end design flow shared by the command-line tools."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import lookup
from .config import DesignConfig, schedule_to_text
from .optimizer import OptimizationResult, make_problem, solve
from .schedule import SwitchingSchedule, expand_full_period, initial_schedule_from_objective
from .spectrum import SpectrumReport, analytic_coefficients, default_thd_cutoff, report_to_text, thd

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DesignOutcome:
    schedule: SwitchingSchedule
    report: SpectrumReport
    thd: float
    thd_cutoff: int
    result: Optional[OptimizationResult] = None


def template_for(config: DesignConfig) -> SwitchingSchedule:
    if config.template is not None:
        return config.template
    return initial_schedule_from_objective(config.signal, config.grid)


def report_order(config: DesignConfig) -> int:
    top = max(config.selected)
    return config.export.max_order or max(2 * top + 1, default_thd_cutoff(config.selected))


def analyze(schedule: SwitchingSchedule, config: DesignConfig) -> DesignOutcome:
    report = analytic_coefficients(schedule, config.circuit, report_order(config))
    report = report.with_sets(config.selected, tuple(config.optimizer.thresholds))
    cutoff = config.export.thd_cutoff_order or default_thd_cutoff(config.selected)
    return DesignOutcome(schedule, report, thd(report, config.selected, cutoff), cutoff)


def fast_design(config: DesignConfig) -> DesignOutcome:
    """Gradient-zero schedule without optimisation."""
    return analyze(template_for(config), config)


def optimized_design(config: DesignConfig) -> DesignOutcome:
    template = template_for(config)
    opt = config.optimizer
    if opt.initial_angles is not None:
        template = template.with_angles(opt.initial_angles)
    problem = make_problem(template, opt.weights, opt.thresholds, config.signal,
                           penalty=opt.penalty, tol=opt.tolerance, max_iter=opt.max_iterations)
    result = solve(problem, template.angles_rad, n_starts=opt.starts, seed=opt.seed)
    log.info("solver: %s, %d iterations, converged=%s, objective %.6g",
             result.method, result.iterations, result.converged, result.objective)
    out = analyze(result.schedule, config)
    return DesignOutcome(out.schedule, out.report, out.thd, out.thd_cutoff, result)


def write_outputs(outcome: DesignOutcome, config: DesignConfig, output_dir: Optional[Path] = None) -> list[Path]:
    ex = config.export
    out = Path(output_dir) if output_dir is not None else ex.output_dir
    out.mkdir(parents=True, exist_ok=True)
    table = lookup.to_lookup_table(outcome.schedule, ex.dead_time_cycles)
    files = {
        ex.schedule: schedule_to_text(outcome.schedule),
        ex.spectrum: report_to_text(outcome.report, config.selected, outcome.thd_cutoff),
        ex.lookup_table: table.to_text(),
        ex.levels: lookup.levels_to_text(expand_full_period(outcome.schedule), outcome.schedule.grid,
                                         outcome.schedule.level_max),
    }
    written = []
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written

