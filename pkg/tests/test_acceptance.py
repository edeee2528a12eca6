"""Reference acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the pass/fail lines
as they happen; they are also collected into the terminal summary.
"""

import time

import numpy as np
import pytest

from msf_shepwm import (
    CircuitParams,
    TimingGrid,
    analytic_coefficients,
    build_schedule,
    dft_coefficients,
    efficiency_metrics,
    gradient_zeros,
    harmonic_phasors,
    initial_schedule_from_objective,
    make_problem,
    preset,
    residuals_and_constraints,
    resemblance_current,
    simulate,
    solve,
    thd,
    to_lookup_table,
)
from msf_shepwm.circuit import metrics_to_text, parse_metrics
from msf_shepwm.optimizer import penalized_objective_cycles, violation_at

import oracles
from conftest import INITIAL_ANGLES, SELECTED, SETUP1_ANGLES, SETUP2_ANGLES, THRESHOLDS, record_criterion
from test_optimizer import central_jacobian, toy_problem, toy_start


def scaled_row(schedule, circuit):
    r = analytic_coefficients(schedule, circuit, 35)
    return np.array([r.scaled_index(p) for p in SELECTED]), thd(r, SELECTED)


def check(number, passed, detail):
    record_criterion(number, bool(passed), detail)
    assert passed, detail


class TestAcceptance:
    def test_criterion_01_initial_row(self, template476, coil1):
        t0 = time.perf_counter()
        row, t = scaled_row(template476.with_angles(INITIAL_ANGLES), coil1)
        elapsed = time.perf_counter() - t0
        expected = np.array([0.534, 0.145, 0.066, 0.043])
        ok = np.all(np.abs(row - expected) <= 0.002) and abs(t - 7.33) <= 0.3 and elapsed < 1.0
        check(1, ok, f"m_p/p={np.round(row, 4).tolist()} THD={t:.2f}% in {elapsed * 1e3:.1f} ms")

    def test_criterion_02_setup_rows(self, template476, coil1):
        cases = [(SETUP1_ANGLES, [0.553, 0.171, 0.047, 0.032], 9.04),
                 (SETUP2_ANGLES, [0.493, 0.157, 0.068, 0.043], 7.80)]
        ok, parts = True, []
        for angles, expected, ref_thd in cases:
            row, t = scaled_row(template476.with_angles(angles), coil1)
            ok &= bool(np.all(np.abs(row - expected) <= 0.002)) and abs(t - ref_thd) <= 0.3
            parts.append(f"{np.round(row, 4).tolist()} THD={t:.2f}%")
        check(2, ok, "; ".join(parts))

    def test_criterion_03_optimizer_quality(self, template476):
        setups = [("setup 1", {1: 1, 3: 1, 7: 1, 17: 1}, SETUP1_ANGLES),
                  ("setup 2", {1: 1, 3: 1, 7: 1, 17: 0}, SETUP2_ANGLES)]
        a0 = template476.grid.to_radians(INITIAL_ANGLES)
        ok, parts = True, []
        for name, weights, reference in setups:
            problem = make_problem(template476, weights, THRESHOLDS)
            t0 = time.perf_counter()
            r = solve(problem, a0)
            elapsed = time.perf_counter() - t0
            again = solve(problem, a0)
            ref = penalized_objective_cycles(reference, problem)
            feasible = violation_at(template476.grid.to_radians(r.quantized), problem) == 0.0
            same = np.array_equal(r.quantized, again.quantized) and r.quantized_penalized == again.quantized_penalized
            ok &= bool(r.quantized_penalized <= ref and feasible and same and elapsed < 30.0)
            parts.append(f"{name}: angles={r.quantized.tolist()} penalized={r.quantized_penalized:.4g} "
                         f"(reference {ref:.4g}) feasible={feasible} deterministic={same} {elapsed:.2f} s")
        check(3, ok, "; ".join(parts))

    def test_criterion_04_gradient_zeros(self, grid476, grid3888):
        z2 = gradient_zeros(preset("f2", grid476.omega), grid476)
        z1 = gradient_zeros(preset("f1", grid3888.omega), grid3888)
        near = len(z2) == 6 and bool(np.all(np.abs(np.array(z2) - np.array(INITIAL_ANGLES)) <= 1))
        ok = near and len(z1) == 38
        check(4, ok, f"f2 zeros={z2} (within 1: {near}); f1 on 3888 grid: {len(z1)} angles (expected 38)")

    def test_criterion_05_lookup_tables(self, template476, grid3888):
        tables = [to_lookup_table(template476.with_angles(SETUP2_ANGLES)),
                  to_lookup_table(build_schedule(grid3888, [], 1)),
                  to_lookup_table(initial_schedule_from_objective(preset("f1", grid3888.omega), grid3888))]
        lengths = [len(t) for t in tables]
        clean = True
        for t in tables:
            g = t.gates.astype(bool)
            for row in g:
                if (row[0] and row[1]) or (row[2] and row[3]):
                    clean = False
        ok = lengths[0] == 476 and lengths[1] == 3888 and lengths[2] == 3888 and clean
        check(5, ok, f"lengths={lengths} shoot-through free={clean}")

    def test_criterion_06_analytic_vs_dft(self):
        rng = np.random.default_rng(2024)
        grid = TimingGrid(24e6, 476)
        circ = CircuitParams(24.0, 1.4e-6)
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(50):
            level_max = int(rng.integers(1, 3))
            n = int(rng.integers(1, 11))
            angles = np.sort(rng.choice(grid.quarter + 1, n, replace=False))
            level = int(rng.integers(-level_max, level_max + 1))
            start, edges = level, []
            for a in angles:
                choices = [s for s in range(-2 * level_max, 2 * level_max + 1) if s and abs(level + s) <= level_max]
                s = int(rng.choice(choices))
                level += s
                edges.append((int(a), s))
            sched = build_schedule(grid, edges, start, level_max)
            an = analytic_coefficients(sched, circ, 35)
            _, i = resemblance_current(sched, circ, 1)
            num = dft_coefficients(i, grid, 35, circ, piecewise_linear=True).b[::2]
            worst = max(worst, float(np.max(np.abs(num - an.b) / np.abs(an.b))))
        elapsed = time.perf_counter() - t0
        check(6, worst <= 1e-6 and elapsed < 10.0, f"worst relative error {worst:.2e} over 50 schedules "
                                                   f"in {elapsed:.2f} s")

    def test_criterion_07_efficiency_rows(self):
        rows = [(1.43, 6.87, 224.81, "20.02", "6.55"), (0.13, 2.40, 8.62, "76.92", "2.76")]
        got = []
        for i_dc, p, q, eta, zeta in rows:
            m = parse_metrics(metrics_to_text(efficiency_metrics(24.0, i_dc, p, q)))
            got.append((m["eta_percent"], m["zeta"]))
        ok = got == [(r[3], r[4]) for r in rows]
        check(7, ok, f"(eta %, zeta) = {got}")

    def test_criterion_08_simulation(self, template476, coil1):
        tr = simulate(template476.with_angles(SETUP2_ANGLES), coil1, 64)
        i_rms = harmonic_phasors(tr, (1,))[1][1]
        p2p = float(np.ptp(tr.i))
        ok = abs(i_rms - 16.97) <= 0.2 * 16.97 and p2p > 48.0
        check(8, ok, f"fundamental RMS {i_rms:.2f} A (16.97 +- 20%), peak-to-peak {p2p:.1f} A (> 48)")

    def test_criterion_09_toy_optimality(self):
        t0 = time.perf_counter()
        misses = []
        count = 0
        for cycles in (32, 64, 96, 128):
            for n in (1, 2, 3):
                for eps in (0.05, 0.2, 0.3):
                    p = toy_problem(cycles, n, eps)
                    r = solve(p, toy_start(p), n_starts=16, perturbation=0.5 * p.grid.quarter,
                              raise_on_infeasible=False)
                    steps = p.steps.astype(int)
                    best, arg = oracles.brute_force(cycles, steps, 1, p.weights, p.thresholds)
                    got = oracles.penalized(cycles, r.quantized, steps, 1, p.weights, p.thresholds)
                    count += 1
                    if not got <= best * (1 + 1e-12) + 1e-15:
                        misses.append((cycles, n, eps, r.quantized.tolist(), arg))
        elapsed = time.perf_counter() - t0
        check(9, not misses and elapsed < 60.0,
              f"{count - len(misses)}/{count} toys optimal in {elapsed:.1f} s" + (f" misses={misses}" if misses else ""))

    def test_criterion_10_jacobians(self, template476):
        rng = np.random.default_rng(7)
        problem = make_problem(template476, {p: 1.0 for p in SELECTED}, THRESHOLDS)
        base = template476.grid.to_radians(np.array(SETUP2_ANGLES, float))
        worst, checked = 0.0, 0
        while checked < 20:
            a = np.sort(base + rng.uniform(-0.01, 0.01, base.size))
            x = np.concatenate([a, [rng.uniform(0.2, 1.0)]])
            ev = residuals_and_constraints(x[:-1], x[-1], problem)
            if np.any(ev.constraints < 0):
                continue
            fg = central_jacobian(lambda y: np.array([residuals_and_constraints(y[:-1], y[-1], problem).objective]), x)[0]
            fj = central_jacobian(lambda y: residuals_and_constraints(y[:-1], y[-1], problem).constraints, x)
            worst = max(worst,
                        np.linalg.norm(fg - ev.objective_grad) / np.linalg.norm(ev.objective_grad),
                        np.linalg.norm(fj - ev.constraint_jac) / np.linalg.norm(ev.constraint_jac))
            checked += 1
        check(10, worst <= 1e-5, f"worst relative Jacobian error {worst:.2e} at {checked} feasible points")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
