import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msf_shepwm import (
    CircuitParams,
    EmptySelectedSet,
    SpectrumReport,
    analytic_coefficients,
    dft_coefficients,
    resemblance_current,
    square_wave,
    thd,
)
from msf_shepwm.spectrum import default_thd_cutoff, parse_report, report_to_text

from conftest import INITIAL_ANGLES, SELECTED, SETUP1_ANGLES, SETUP2_ANGLES
from test_schedule import schedules


def dft_of_current(s, circ, max_order, spc=1):
    _, i = resemblance_current(s, circ, spc)
    return dft_coefficients(i, s.grid, max_order, circ, piecewise_linear=True)


class TestAnalytic:
    def test_square_wave_fundamental(self, grid476, coil1):
        r = analytic_coefficients(square_wave(grid476), coil1, 9)
        assert r.modulation[0] == pytest.approx(4 / math.pi)
        np.testing.assert_allclose(r.scaled, 4 / math.pi / r.orders ** 2)

    @pytest.mark.parametrize("angles, expected", [
        (INITIAL_ANGLES, (0.534, 0.145, 0.066, 0.043)),
        (SETUP1_ANGLES, (0.553, 0.171, 0.047, 0.032)),
        (SETUP2_ANGLES, (0.493, 0.157, 0.068, 0.043)),
    ])
    def test_reference_rows(self, template476, coil1, angles, expected):
        r = analytic_coefficients(template476.with_angles(angles), coil1, 31)
        got = [r.scaled_index(p) for p in SELECTED]
        np.testing.assert_allclose(got, expected, atol=0.002)

    @pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
    def test_scaled_index_invariant_to_coil(self, template476, c):
        s = template476.with_angles(INITIAL_ANGLES)
        base = analytic_coefficients(s, CircuitParams(24.0, 1.4e-6), 31)
        other = analytic_coefficients(s, CircuitParams(24.0 * c, 1.4e-6 / c ** 2), 31)
        np.testing.assert_allclose(other.scaled, base.scaled, rtol=1e-12)
        np.testing.assert_allclose(other.b, base.b * c ** 3, rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(s=schedules(max_cycles=400))
    def test_matches_dft(self, s):
        circ = CircuitParams(24.0, 1.4e-6)
        top = min(35, s.grid.cycles_per_period // 2 - 1)
        top -= 1 - top % 2
        an = analytic_coefficients(s, circ, top)
        num = dft_of_current(s, circ, top)
        odd = num.b[::2]
        scale = max(np.max(np.abs(an.b)), 1e-300)
        np.testing.assert_allclose(odd, an.b, rtol=1e-6, atol=1e-9 * scale)
        np.testing.assert_allclose(num.b[1::2], 0.0, atol=1e-9 * scale)

    def test_dft_pure_sine(self, grid476):
        t = np.arange(476) / 476
        r = dft_coefficients(3.0 * np.sin(2 * math.pi * 5 * t), grid476, 9)
        expected = np.zeros(9)
        expected[4] = 3.0
        np.testing.assert_allclose(r.b, expected, atol=1e-12)
        assert r.folded

    def test_dft_cosine_kept(self, grid476):
        t = np.arange(476) / 476
        r = dft_coefficients(np.cos(2 * math.pi * t), grid476, 3)
        assert not r.folded
        assert r.amplitude()[0] == pytest.approx(1.0)


class TestParseval:
    @settings(max_examples=30, deadline=None)
    @given(s=schedules(max_cycles=400))
    def test_partial_energy_bounded(self, s):
        circ = CircuitParams(1.0, 1.0)
        _, i = resemblance_current(s, circ, 8)
        total = float(np.mean(i ** 2))
        r = analytic_coefficients(s, circ, 99)
        partial = np.cumsum(r.b ** 2 / 2)
        assert np.all(np.diff(partial) >= 0)
        assert partial[-1] <= total * (1 + 1e-9) + 1e-15


class TestTHD:
    def _report(self, b):
        orders = np.arange(1, 2 * len(b), 2)
        return SpectrumReport(1.0, orders, np.asarray(b, float), 1.0, 1.0)

    def test_zero(self):
        assert thd(self._report([1.0, 0.0, 0.5, 0.0]), (1, 5), 7) == 0.0

    def test_hundred(self):
        assert thd(self._report([1.0, 1.0]), (1,), 3) == pytest.approx(100.0)

    def test_reorder_invariant(self):
        r = self._report([1.0, 0.3, 0.2, 0.1, 0.05])
        assert thd(r, (1, 5), 9) == thd(r, (5, 1), 9)

    def test_cutoff(self):
        assert default_thd_cutoff(SELECTED) == 23
        assert default_thd_cutoff((1, 3)) == 3

    def test_empty_selected(self):
        with pytest.raises(EmptySelectedSet):
            thd(self._report([1.0]), ())

    def test_reference_initial_row(self, template476, coil1):
        r = analytic_coefficients(template476.with_angles(INITIAL_ANGLES), coil1, 35)
        assert thd(r, SELECTED) == pytest.approx(7.33, abs=0.3)

    def test_report_text_round_trip(self, template476, coil1):
        r = analytic_coefficients(template476.with_angles(INITIAL_ANGLES), coil1, 35).with_sets(SELECTED, (5, 9))
        parsed = parse_report(report_to_text(r))
        assert parsed["thd"] == pytest.approx(thd(r, SELECTED), abs=1e-6)
        assert parsed["rows"][5][2] == "eliminated" and parsed["rows"][3][2] == "selected"
        assert parsed["rows"][1][0] == pytest.approx(r.coefficient(1), rel=1e-11)
