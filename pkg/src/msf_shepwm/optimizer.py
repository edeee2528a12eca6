"""Switching-angle optimisation for multi-frequency harmonic targets.

Decision variables are the quarter-period switching angles (radians) of a
fixed edge pattern and one shared modulation scale ``m``.  The modulation
index targeted at a selected order is ``m_p = m * shape_p``; with the
default ``1/p`` current spectrum every ``shape_p`` is 1, so all selected
harmonics aim at the same normalised amplitude.

    minimise   sum_{p in selected} lambda_p * (c_p(alpha) - m * shape_p)**2
    subject to |c_p(alpha)| <= eps_p  for p in constrained
               0 <= alpha_1 <= ... <= alpha_N <= pi/2

where ``c_p = (p w L / V0) b_p`` does not depend on ``L`` or ``V0``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import EmptySelectedSet, InfeasibleThresholds, ValidationError
from .grid import TimingGrid
from .ipm import NLP, kkt_errors, solve_nlp
from .schedule import SwitchingSchedule
from .signals import ObjectiveSignal

log = logging.getLogger(__name__)

HALF_PI = math.pi / 2
DEFAULT_PENALTY = 1e4


@dataclass(frozen=True)
class OptimizationProblem:
    template: SwitchingSchedule
    weights: Mapping[int, float]
    thresholds: Mapping[int, float]
    shape: Mapping[int, float] = field(default_factory=dict)
    penalty: float = DEFAULT_PENALTY
    tol: float = 1e-8
    max_iter: int = 500

    def __post_init__(self):
        w = {int(p): float(v) for p, v in self.weights.items()}
        e = {int(p): float(v) for p, v in self.thresholds.items()}
        if not w:
            raise EmptySelectedSet("no selected harmonics")
        if any(v < 0 for v in w.values()):
            raise ValidationError(f"weights must be >= 0, got {w}")
        if any(not v > 0 for v in e.values()):
            raise ValidationError(f"thresholds must be > 0, got {e}")
        both = set(w) & set(e)
        if both:
            raise ValidationError(f"orders {sorted(both)} are both selected and constrained")
        shape = {p: float(self.shape.get(p, 1.0)) for p in sorted(w)}
        object.__setattr__(self, "weights", dict(sorted(w.items())))
        object.__setattr__(self, "thresholds", dict(sorted(e.items())))
        object.__setattr__(self, "shape", shape)

    @property
    def grid(self) -> TimingGrid:
        return self.template.grid

    @property
    def selected(self) -> tuple[int, ...]:
        return tuple(self.weights)

    @property
    def constrained(self) -> tuple[int, ...]:
        return tuple(self.thresholds)

    @property
    def n_angles(self) -> int:
        return len(self.template.edges)

    @property
    def steps(self) -> np.ndarray:
        return self.template.steps.astype(float)

    @property
    def final_level(self) -> int:
        return self.template.final_level

    def with_weights(self, weights) -> "OptimizationProblem":
        return OptimizationProblem(self.template, weights, self.thresholds, self.shape,
                                   self.penalty, self.tol, self.max_iter)


def shape_from_signal(signal: ObjectiveSignal) -> dict[int, float]:
    """Relative modulation targets ``p * w_p / w_1`` (all 1 for ``1/p`` weights)."""
    w1 = signal.components[0].weight
    return {c.order: c.order * c.weight / w1 for c in signal.components}


def thresholds_from_scaled_bound(bound: float, orders: Sequence[int]) -> dict[int, float]:
    """Per-order thresholds giving every constrained ``m_p / p`` the same bound."""
    return {int(p): bound * p for p in orders}


def make_problem(template: SwitchingSchedule, weights: Mapping[int, float], thresholds: Mapping[int, float],
                 signal: Optional[ObjectiveSignal] = None, **kwargs) -> OptimizationProblem:
    shape = shape_from_signal(signal) if signal is not None else {}
    return OptimizationProblem(template, weights, thresholds, shape, **kwargs)


# ----------------------------------------------------------------- evaluation

def _terms(angles, steps, final_level, orders):
    """c_p, dc_p/dalpha_q and d2c_p/dalpha_q2 for every order (rows) and angle (cols)."""
    p = np.asarray(orders, dtype=float)[:, None]
    a = np.asarray(angles, dtype=float)[None, :]
    pa = p * a
    sin_pa, cos_pa = np.sin(pa), np.cos(pa)
    k = 4.0 / (p[:, 0] * math.pi)
    c = k * (final_level * np.sin(p[:, 0] * HALF_PI) - sin_pa @ steps)
    dc = -(4.0 / math.pi) * cos_pa * steps[None, :]
    d2c = (4.0 / math.pi) * p * sin_pa * steps[None, :]
    return c, dc, d2c


@dataclass(frozen=True)
class Evaluation:
    objective: float
    objective_grad: np.ndarray  # w.r.t. (alpha_1..alpha_N, m)
    selected_terms: np.ndarray  # c_p for p in selected
    constrained_terms: np.ndarray  # c_p for p in constrained
    constraints: np.ndarray  # every inequality as g >= 0
    constraint_jac: np.ndarray

    @property
    def max_violation(self) -> float:
        return float(np.max(np.maximum(-self.constraints, 0.0), initial=0.0))


def harmonic_values(angles, problem: OptimizationProblem, orders) -> np.ndarray:
    return _terms(angles, problem.steps, problem.final_level, orders)[0]


def _ordering(n: int):
    """Rows of ``A @ alpha + b >= 0`` for 0 <= a_1 <= ... <= a_N <= pi/2."""
    A = np.zeros((n + 1, n))
    b = np.zeros(n + 1)
    if n:
        A[0, 0] = 1.0
        for q in range(1, n):
            A[q, q - 1], A[q, q] = -1.0, 1.0
        A[n, n - 1] = -1.0
        b[n] = HALF_PI
    return A, b


def residuals_and_constraints(angles, m: float, problem: OptimizationProblem) -> Evaluation:
    """Objective, constraint values and their analytic gradients.

    Constraints are ordered: angle ordering (``N + 1`` rows), then
    ``eps_p - c_p`` and ``eps_p + c_p`` for each constrained order.
    """
    angles = np.asarray(angles, dtype=float)
    n = angles.size
    lam = np.array(list(problem.weights.values()))
    shape = np.array(list(problem.shape.values()))
    c_sel, dc_sel, _ = _terms(angles, problem.steps, problem.final_level, problem.selected)
    r = c_sel - m * shape
    obj = float(np.sum(lam * r ** 2))
    grad = np.concatenate([2.0 * (lam * r) @ dc_sel, [-2.0 * np.sum(lam * r * shape)]])
    A, b = _ordering(n)
    cons = [A @ angles + b] if n else []
    jac = [np.hstack([A, np.zeros((n + 1, 1))])] if n else []
    if problem.constrained:
        eps = np.array(list(problem.thresholds.values()))
        c_con, dc_con, _ = _terms(angles, problem.steps, problem.final_level, problem.constrained)
        cons += [eps - c_con, eps + c_con]
        zero = np.zeros((len(eps), 1))
        jac += [np.hstack([-dc_con, zero]), np.hstack([dc_con, zero])]
    else:
        c_con = np.zeros(0)
    g = np.concatenate(cons) if cons else np.zeros(0)
    J = np.vstack(jac) if jac else np.zeros((0, n + 1))
    return Evaluation(obj, grad, c_sel, c_con, g, J)


def _hess_lag(angles, m, z, problem: OptimizationProblem) -> np.ndarray:
    n = angles.size
    lam = np.array(list(problem.weights.values()))
    shape = np.array(list(problem.shape.values()))
    c_sel, dc_sel, d2_sel = _terms(angles, problem.steps, problem.final_level, problem.selected)
    r = c_sel - m * shape
    H = np.zeros((n + 1, n + 1))
    Ha = 2.0 * (dc_sel.T * lam) @ dc_sel + np.diag(2.0 * (lam * r) @ d2_sel)
    H[:n, :n] = Ha
    H[:n, n] = H[n, :n] = -2.0 * (lam * shape) @ dc_sel
    H[n, n] = 2.0 * np.sum(lam * shape ** 2)
    if problem.constrained:
        k = len(problem.constrained)
        off = n + 1 if n else 0  # no ordering rows without angles
        z_up, z_lo = z[off:off + k], z[off + k:]
        _, _, d2_con = _terms(angles, problem.steps, problem.final_level, problem.constrained)
        # g = eps - c has hessian -d2c; g = eps + c has +d2c; subtract sum z_i hess g_i
        H[:n, :n] += np.diag((z_up - z_lo) @ d2_con)
    return H


def best_scale(c_sel: np.ndarray, problem: OptimizationProblem, fallback: float = 0.0) -> float:
    """Least-squares shared scale ``m`` for fixed selected terms."""
    lam = np.array(list(problem.weights.values()))
    shape = np.array(list(problem.shape.values()))
    den = float(np.sum(lam * shape ** 2))
    if den == 0.0:
        return fallback
    return float(np.sum(lam * shape * c_sel) / den)


def objective_at(angles, problem: OptimizationProblem) -> float:
    """Objective with ``m`` eliminated in closed form."""
    c_sel = harmonic_values(angles, problem, problem.selected)
    m = best_scale(c_sel, problem)
    return residuals_and_constraints(angles, m, problem).objective


def violation_at(angles, problem: OptimizationProblem) -> float:
    """Largest threshold excess ``max(|c_p| - eps_p)`` (0 when feasible)."""
    if not problem.constrained:
        return 0.0
    c = harmonic_values(angles, problem, problem.constrained)
    eps = np.array(list(problem.thresholds.values()))
    return float(np.max(np.maximum(np.abs(c) - eps, 0.0)))


def penalized_objective(angles, problem: OptimizationProblem) -> float:
    obj = objective_at(angles, problem)
    if problem.constrained:
        c = harmonic_values(angles, problem, problem.constrained)
        eps = np.array(list(problem.thresholds.values()))
        obj += problem.penalty * float(np.sum(np.maximum(np.abs(c) - eps, 0.0) ** 2))
    return obj


def penalized_objective_cycles(cycles, problem: OptimizationProblem) -> float:
    return penalized_objective(problem.grid.to_radians(cycles), problem)


def initial_m(angles, problem: OptimizationProblem) -> float:
    """Mean of ``c_p / shape_p`` over the selected orders; shared scale start value."""
    if not problem.selected:
        raise EmptySelectedSet("no selected harmonics")
    c = harmonic_values(angles, problem, problem.selected)
    shape = np.array(list(problem.shape.values()))
    return float(np.mean(c / shape))


# --------------------------------------------------------------------- solve

@dataclass(frozen=True)
class OptimizationResult:
    problem: OptimizationProblem
    angles: np.ndarray  # continuous, radians
    scale: float
    objective: float
    max_violation: float
    stationarity: float
    iterations: int
    converged: bool
    method: str
    quantized: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    quantized_objective: float = math.nan
    quantized_penalized: float = math.nan
    quantized_violation: float = math.nan

    @property
    def modulation(self) -> dict[int, float]:
        """Target modulation indices ``m_p`` of the selected orders."""
        return {p: self.scale * s for p, s in self.problem.shape.items()}

    @property
    def schedule(self) -> SwitchingSchedule:
        return self.problem.template.with_angles(self.quantized)


def _nlp(problem: OptimizationProblem) -> NLP:
    n = problem.n_angles
    cache: dict = {}

    def ev(x):
        key = x.tobytes()
        if cache.get("key") != key:
            cache["key"] = key
            cache["ev"] = residuals_and_constraints(x[:n], x[n], problem)
        return cache["ev"]

    return NLP(
        fun=lambda x: ev(x).objective,
        grad=lambda x: ev(x).objective_grad,
        cons=lambda x: ev(x).constraints,
        jac=lambda x: ev(x).constraint_jac,
        hess_lag=lambda x, z: _hess_lag(x[:n], x[n], z, problem),
    )


def _solve_continuous(problem: OptimizationProblem, angles0: np.ndarray) -> OptimizationResult:
    n = problem.n_angles
    if angles0.size != n:
        raise ValidationError(f"expected {n} initial angles, got {angles0.size}")
    x0 = np.concatenate([angles0, [initial_m(angles0, problem)]])
    nlp = _nlp(problem)
    res = solve_nlp(nlp, x0, tol=problem.tol, max_iter=problem.max_iter)
    # recompute everything from the returned point
    ev = residuals_and_constraints(res.x[:n], res.x[n], problem)
    stat, viol, _ = kkt_errors(nlp, res.x, res.z)
    return OptimizationResult(problem, res.x[:n].copy(), float(res.x[n]), ev.objective, ev.max_violation,
                              stat, res.iterations, res.converged and viol <= problem.tol, res.method)


def _repair_order(cycles: np.ndarray, quarter: int) -> np.ndarray:
    a = np.asarray(cycles, dtype=int).copy()
    n = a.size
    if n > quarter + 1:
        raise ValidationError(f"{n} distinct angles do not fit in {quarter + 1} grid positions")
    a = np.clip(a, 0, quarter)
    for q in range(1, n):
        a[q] = max(a[q], a[q - 1] + 1)
    for q in range(n - 1, -1, -1):
        hi = quarter if q == n - 1 else a[q + 1] - 1
        a[q] = min(a[q], hi)
    return a


def _first_improvement(a, best, moves, problem, quarter):
    for idx, delta in moves:
        trial = a.copy()
        trial[list(idx)] += delta
        if trial.size and (trial[0] < 0 or trial[-1] > quarter or np.any(np.diff(trial) < 1)):
            continue
        val = penalized_objective_cycles(trial, problem)
        if val < best - 1e-15 * max(1.0, abs(best)):
            return trial, val
    return None


def refine_cycles(cycles, problem: OptimizationProblem, radius: int = 2) -> np.ndarray:
    """Coordinate-descent local search on integer angles.

    Angles are visited in order with offsets ``-radius..radius``; the first
    strictly improving move is taken and the sweep restarts.  When no single
    angle can improve, joint ``(+-1, +-1)`` moves of neighbouring angle pairs
    are tried before stopping, which escapes diagonal traps next to a
    threshold boundary.
    """
    quarter = problem.grid.quarter
    a = _repair_order(cycles, quarter)
    n = a.size
    best = penalized_objective_cycles(a, problem)
    offsets = [d for d in range(-radius, radius + 1) if d]
    single = [((q,), np.array([d])) for q in range(n) for d in offsets]
    pairs = [((q, q + 1), np.array([d1, d2])) for q in range(n - 1)
             for d1 in (-1, 1) for d2 in (-1, 1)]
    while True:
        step = _first_improvement(a, best, single, problem, quarter)
        if step is None:
            step = _first_improvement(a, best, pairs, problem, quarter)
        if step is None:
            return a
        a, best = step


def quantize_refine(result: OptimizationResult, grid: Optional[TimingGrid] = None,
                    max_corner_angles: int = 10) -> np.ndarray:
    """Round continuous angles to the clock grid, then refine locally.

    The nearest rounding is always refined.  For up to ``max_corner_angles``
    angles every floor/ceil corner of the grid cell holding the continuous
    optimum is also scored, and the best corner is refined as a second seed;
    a threshold crossing inside the cell can otherwise trap coordinate
    descent one diagonal step away from the best corner.  The better of the
    two local minima wins (ties: lexicographically smaller angles).
    """
    problem = result.problem
    grid = grid or problem.grid
    if grid != problem.grid:
        raise ValidationError("grid differs from the problem's grid")
    cont = grid.to_cycles(result.angles)
    seeds = [np.floor(cont + 0.5).astype(int)]
    if 0 < cont.size <= max_corner_angles:
        lo = np.floor(cont).astype(int)
        frac = cont - lo
        best_corner, best_val = None, math.inf
        for bits in itertools.product((0, 1), repeat=cont.size):
            corner = lo + np.array(bits)
            if np.any(frac[np.array(bits) == 1] == 0.0):
                continue  # already on the grid in that coordinate
            val = penalized_objective_cycles(_repair_order(corner, grid.quarter), problem)
            if val < best_val:
                best_corner, best_val = corner, val
        if best_corner is not None and not np.array_equal(best_corner, seeds[0]):
            seeds.append(best_corner)
    refined = [refine_cycles(a, problem) for a in seeds]
    return min(refined, key=lambda a: (penalized_objective_cycles(a, problem), tuple(a)))


def _with_quantized(result: OptimizationResult) -> OptimizationResult:
    q = quantize_refine(result)
    p = result.problem
    return OptimizationResult(**{**result.__dict__, "quantized": q,
                                 "quantized_objective": objective_at(p.grid.to_radians(q), p),
                                 "quantized_penalized": penalized_objective_cycles(q, p),
                                 "quantized_violation": violation_at(p.grid.to_radians(q), p)})


def solve(problem: OptimizationProblem, initial_angles, n_starts: int = 1, seed: int = 0,
          perturbation: float = 3.0, raise_on_infeasible: bool = True) -> OptimizationResult:
    """Solve the continuous problem then quantise.

    ``initial_angles`` are radians.  ``n_starts > 1`` adds restarts from the
    initial angles perturbed by up to ``perturbation`` clock cycles (seeded,
    so repeatable); the best quantised penalised objective wins, ties going
    to the lexicographically smallest angle vector.
    """
    angles0 = np.asarray(initial_angles, dtype=float)
    grid = problem.grid
    starts = [angles0]
    rng = np.random.default_rng(seed)
    for _ in range(max(0, n_starts - 1)):
        jitter = rng.uniform(-perturbation, perturbation, angles0.size) * grid.angle_resolution
        starts.append(np.sort(np.clip(angles0 + jitter, 0.0, HALF_PI)))
    results = []
    for a0 in starts:
        r = _with_quantized(_solve_continuous(problem, a0))
        if not r.converged:
            log.warning("solver stopped without converging (%s, %d iterations, violation %.3g)",
                        r.method, r.iterations, r.max_violation)
        results.append(r)
    best = min(results, key=lambda r: (r.quantized_penalized, tuple(r.quantized)))
    if raise_on_infeasible and all(r.max_violation > 1e-6 for r in results):
        raise InfeasibleThresholds(
            f"no feasible point found (smallest violation {min(r.max_violation for r in results):.3g})", best)
    return best
