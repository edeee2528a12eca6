"""Independent reference implementations used by the tests.

Nothing here calls into the package's harmonic or objective code: levels
are built cycle by cycle and harmonics come from exact integration of the
piecewise-constant voltage.
"""

import itertools
import math

import numpy as np


def full_levels(cycles_per_period, angles, steps, start_level):
    q = cycles_per_period // 4
    quarter = []
    for j in range(q):
        lvl = start_level
        for a, s in zip(angles, steps):
            if a <= j:
                lvl += s
        quarter.append(lvl)
    second = [-quarter[q - 1 - j] for j in range(q)]
    half = quarter + second
    return np.array(half + [-v for v in half], dtype=float)


def voltage_cosine_terms(cycles_per_period, angles, steps, start_level, orders):
    """``(1/pi) * integral(level * cos(p*theta))`` over one period, per order."""
    lv = full_levels(cycles_per_period, angles, steps, start_level)
    edges = 2 * math.pi * np.arange(cycles_per_period + 1) / cycles_per_period
    out = []
    for p in orders:
        s = np.sin(p * edges)
        out.append(float(np.sum(lv * (s[1:] - s[:-1]))) / (p * math.pi))
    return np.array(out)


def penalized(cycles_per_period, angles, steps, start_level, weights, thresholds, mu=1e4):
    sel = sorted(weights)
    con = sorted(thresholds)
    c = voltage_cosine_terms(cycles_per_period, angles, steps, start_level, sel + con)
    cs, cc = c[:len(sel)], c[len(sel):]
    lam = np.array([weights[p] for p in sel])
    m = float(np.sum(lam * cs) / np.sum(lam)) if np.sum(lam) else 0.0
    eps = np.array([thresholds[p] for p in con])
    return float(np.sum(lam * (cs - m) ** 2)) + mu * float(np.sum(np.maximum(np.abs(cc) - eps, 0.0) ** 2))


def brute_force(cycles_per_period, steps, start_level, weights, thresholds, mu=1e4):
    q = cycles_per_period // 4
    best, arg = math.inf, None
    for combo in itertools.combinations(range(q + 1), len(steps)):
        val = penalized(cycles_per_period, combo, steps, start_level, weights, thresholds, mu)
        if val < best:
            best, arg = val, combo
    return best, arg
