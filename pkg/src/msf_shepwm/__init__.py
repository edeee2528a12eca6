"""Multi-frequency selective harmonic elimination PWM for inductive coil drivers.

Synthesis of multi-harmonic target currents, quarter-wave switching
schedules on a clock grid, analytic and numeric spectra, constrained
angle optimisation, RL coil simulation and gate lookup-table export.
"""

__version__ = "0.1.0"

from .circuit import (
    PowerMetrics,
    WaveformTrace,
    efficiency_metrics,
    harmonic_phasors,
    ingest_trace,
    reactive_power,
    real_power,
    simulate,
)
from .config import DesignConfig, load_config, load_schedule, parse_config, parse_schedule
from .errors import *  # noqa: F401,F403
from .grid import TimingGrid
from .lookup import LookupTable, decode_levels, parse_lookup_table, to_lookup_table
from .optimizer import (
    OptimizationProblem,
    OptimizationResult,
    initial_m,
    make_problem,
    penalized_objective,
    quantize_refine,
    residuals_and_constraints,
    solve,
)
from .schedule import (
    CircuitParams,
    SwitchingEdge,
    SwitchingSchedule,
    build_schedule,
    expand_full_period,
    initial_schedule_from_objective,
    resemblance_current,
    square_wave,
)
from .signals import (
    HarmonicComponent,
    ObjectiveSignal,
    evaluate,
    evaluate_gradient,
    gradient_zeros,
    make_objective,
    preset,
)
from .spectrum import SpectrumReport, analytic_coefficients, dft_coefficients, thd
