import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msf_shepwm import (
    AngleOutOfRange,
    CircuitParams,
    LevelOverflow,
    NotQuarterSymmetric,
    TimingGrid,
    UnsortedEdges,
    ValidationError,
    build_schedule,
    expand_full_period,
    initial_schedule_from_objective,
    preset,
    resemblance_current,
    square_wave,
)
from msf_shepwm.schedule import voltage_samples


@st.composite
def schedules(draw, max_cycles=480):
    """Random valid bipolar or two-cell schedules."""
    cycles = 4 * draw(st.integers(2, max_cycles // 4))
    grid = TimingGrid(1e6, cycles)
    level_max = draw(st.sampled_from([1, 2]))
    n = draw(st.integers(0, min(8, grid.quarter + 1)))
    angles = sorted(draw(st.lists(st.integers(0, grid.quarter), min_size=n, max_size=n, unique=True)))
    level = draw(st.integers(-level_max, level_max))
    start = level
    edges = []
    for a in angles:
        choices = [s for s in range(-2 * level_max, 2 * level_max + 1) if s and abs(level + s) <= level_max]
        s = draw(st.sampled_from(choices))
        level += s
        edges.append((a, s))
    return build_schedule(grid, edges, start, level_max)


class TestBuild:
    def test_level_overflow(self, grid476):
        with pytest.raises(LevelOverflow):
            build_schedule(grid476, [(10, 1)], 1, 1)
        with pytest.raises(LevelOverflow):
            build_schedule(grid476, [], 2, 1)

    def test_unsorted(self, grid476):
        with pytest.raises(UnsortedEdges):
            build_schedule(grid476, [(20, -2), (10, 2)], 1, 1)

    @pytest.mark.parametrize("angle", [-1, 120])
    def test_out_of_range(self, grid476, angle):
        with pytest.raises(AngleOutOfRange):
            build_schedule(grid476, [(angle, -2)], 1, 1)

    def test_quarter_edge_allowed(self, grid476):
        s = build_schedule(grid476, [(119, -2)], 1, 1)
        assert s.final_level == -1 and s.boundary_step == 1

    def test_boundary_step_checked(self, grid476):
        with pytest.raises(ValidationError):
            build_schedule(grid476, [(10, -2)], 1, 1, boundary_step=-1)

    def test_with_angles_keeps_pattern(self, template476):
        s = template476.with_angles((36, 49, 68, 77, 88, 111))
        np.testing.assert_array_equal(s.steps, template476.steps)
        with pytest.raises(ValidationError):
            template476.with_angles((1, 2))

    def test_grid_validation(self):
        with pytest.raises(ValidationError):
            TimingGrid(1e6, 478)


class TestInitialSchedule:
    def test_f2_pattern(self, f2, grid476):
        s = initial_schedule_from_objective(f2, grid476)
        assert s.start_level == 1
        np.testing.assert_array_equal(s.steps, [-2, 2, -2, 2, -2, 2])
        assert np.all(np.abs(s.angles - np.array([36, 49, 68, 77, 88, 111])) <= 1)

    def test_even_orders_rejected(self, grid476):
        with pytest.raises(NotQuarterSymmetric):
            initial_schedule_from_objective(preset("f4", grid476.omega), grid476)

    def test_phases_rejected(self, grid476):
        with pytest.raises(NotQuarterSymmetric):
            initial_schedule_from_objective(preset("f5", grid476.omega), grid476)


class TestExpansion:
    def test_square_wave_levels(self, grid476):
        lv = expand_full_period(square_wave(grid476))
        assert lv.size == 476
        assert np.all(lv[:119] == 1) and np.all(lv[119:357] == -1) and np.all(lv[357:] == 1)

    @settings(max_examples=60, deadline=None)
    @given(s=schedules())
    def test_half_wave_odd_symmetry(self, s):
        lv = expand_full_period(s)
        half = s.grid.half
        np.testing.assert_array_equal(lv[half:], -lv[:half])
        assert lv.sum() == 0

    @settings(max_examples=60, deadline=None)
    @given(s=schedules())
    def test_even_dft_bins_vanish(self, s):
        X = np.fft.fft(expand_full_period(s).astype(float))
        assert np.max(np.abs(X[::2])) < 1e-9 * max(1.0, np.max(np.abs(X)))

    @settings(max_examples=60, deadline=None)
    @given(s=schedules())
    def test_levels_within_bounds(self, s):
        assert np.max(np.abs(expand_full_period(s))) <= s.level_max


class TestResemblanceCurrent:
    def test_square_wave_triangle(self, grid476, coil1):
        _, i = resemblance_current(square_wave(grid476), coil1, 4)
        T = grid476.period
        peak = coil1.v_dc * T / (4 * coil1.inductance)
        assert np.max(i) == pytest.approx(peak, rel=1e-12)
        assert np.min(i) == pytest.approx(-peak, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(s=schedules(), spc=st.integers(1, 8))
    def test_continuous_and_periodic(self, s, spc):
        circ = CircuitParams(10.0, 1e-3)
        _, i = resemblance_current(s, circ, spc)
        step = circ.v_step / circ.inductance * s.grid.period / s.grid.cycles_per_period / spc
        jumps = np.abs(np.diff(np.concatenate([i, i[:1]])))
        assert np.all(jumps <= s.level_max * step * (1 + 1e-9) + 1e-12)
        assert abs(np.mean(i)) < 1e-9 * max(1.0, np.max(np.abs(i)))

    @settings(max_examples=40, deadline=None)
    @given(s=schedules())
    def test_current_quarter_symmetry(self, s):
        _, i = resemblance_current(s, CircuitParams(1.0, 1.0), 1)
        n = s.grid.cycles_per_period
        k = np.arange(n)
        # odd about t = 0 and even about the quarter point, on the knot grid
        np.testing.assert_allclose(i[(-k) % n], -i, atol=1e-9 * max(1.0, np.max(np.abs(i))))
        q = s.grid.quarter
        np.testing.assert_allclose(i[(q + k) % n], i[(q - k) % n], atol=1e-9 * max(1.0, np.max(np.abs(i))))

    def test_voltage_average_at_edges(self, grid476, coil1):
        v = voltage_samples(square_wave(grid476), coil1, 2)
        assert v[0] == 24.0 and v[1] == 24.0 and v[2 * 119] == 0.0
