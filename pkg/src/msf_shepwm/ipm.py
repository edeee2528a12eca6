"""Small dense interior-point solver for ``min f(x)  s.t.  g(x) >= 0``.

Primal-dual log-barrier method on slack variables ``s = g(x)``: damped
Newton steps on the perturbed KKT system, fraction-to-boundary rule,
backtracking on an l1 merit function, inertia correction by diagonal
shifts, and a geometric decrease of the barrier parameter.  If the Newton
iteration breaks down (singular system or stalled steps) the solve falls back to an
augmented-Lagrangian loop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import minimize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NLP:
    """Callbacks of a smooth inequality-constrained problem.

    ``hess_lag(x, z)`` must return ``hess f(x) - sum_i z_i hess g_i(x)``.
    """

    fun: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    cons: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    hess_lag: Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class IPResult:
    x: np.ndarray
    z: np.ndarray
    iterations: int
    converged: bool
    stationarity: float
    violation: float
    complementarity: float
    method: str = "interior-point"
    message: str = ""


class NewtonBreakdown(Exception):
    """Newton system singular or iterates stalled / diverged."""


def kkt_errors(nlp: NLP, x: np.ndarray, z: np.ndarray) -> tuple[float, float, float]:
    """(stationarity, constraint violation, complementarity) measured on ``x`` itself."""
    g = nlp.cons(x)
    J = nlp.jac(x)
    stat = np.linalg.norm(nlp.grad(x) - J.T @ z, np.inf) if x.size else 0.0
    viol = float(np.max(np.maximum(-g, 0.0), initial=0.0))
    comp = float(np.max(np.abs(np.maximum(g, 0.0) * z), initial=0.0))
    return float(stat), viol, comp


def _factor(W: np.ndarray, delta_prev: float):
    n = W.shape[0]
    delta = 0.0
    eye = np.eye(n)
    while True:
        try:
            return cho_factor(W + delta * eye), delta
        except LinAlgError:
            delta = max(1e-8, delta_prev / 3.0) if delta == 0.0 else delta * 10.0
            if delta > 1e12:
                raise NewtonBreakdown("Newton matrix not positive definite after regularization")


def interior_point(nlp: NLP, x0, mu0: float = 1.0, mu_factor: float = 0.2, mu_final: float = 1e-10,
                   tol: float = 1e-8, max_iter: int = 500, kappa: float = 10.0,
                   tau_min: float = 0.99, slack_floor: float = 1.0) -> IPResult:
    x = np.array(x0, dtype=float)
    g = nlp.cons(x)
    m = g.size
    # a generous slack floor keeps violated constraints away from the barrier
    # edge; small floors jam the fraction-to-boundary rule on infeasible starts
    s = np.maximum(g, slack_floor)
    mu = mu0
    z = mu / s
    delta = 0.0
    stalls = 0
    damp = 0.0  # Levenberg-style damping, raised while steps get cut back
    it = 0

    def merit(xx, ss, mu_, nu_):
        return nlp.fun(xx) - mu_ * np.sum(np.log(ss)) + nu_ * np.sum(np.abs(nlp.cons(xx) - ss))

    while True:
        # inner loop on the current barrier problem
        while it < max_iter:
            g = nlp.cons(x)
            J = nlp.jac(x)
            gf = nlp.grad(x)
            r_d = gf - J.T @ z
            r_p = g - s
            r_c = s * z - mu
            err = max(np.linalg.norm(r_d, np.inf), np.linalg.norm(r_p, np.inf),
                      np.linalg.norm(r_c, np.inf), 0.0)
            if err <= kappa * mu and (mu > mu_final or err <= tol):
                break
            it += 1
            sig = z / s
            W = nlp.hess_lag(x, z) + J.T @ (sig[:, None] * J)
            if not np.all(np.isfinite(W)):
                raise NewtonBreakdown("non-finite Newton matrix")
            if damp:
                W = W + damp * np.eye(W.shape[0])
            (cf, delta) = _factor(W, delta)
            rhs = -r_d - J.T @ ((r_c + z * r_p) / s)
            dx = cho_solve(cf, rhs)
            ds = J @ dx + r_p
            dz = -(r_c + z * ds) / s
            tau = max(tau_min, 1.0 - mu)
            a_s = _max_step(s, ds, tau)
            a_z = _max_step(z, dz, tau)
            # penalty only needs to dominate the current multipliers; a monotone
            # history lets early large duals freeze the line search later on
            nu = max(np.linalg.norm(z + dz, np.inf), np.linalg.norm(z, np.inf), 0.0) + 1.0
            phi0 = merit(x, s, mu, nu)
            dphi = gf @ dx - mu * np.sum(ds / s) - nu * np.sum(np.abs(r_p))
            alpha = a_s
            for _ in range(50):
                if merit(x + alpha * dx, s + alpha * ds, mu, nu) <= phi0 + 1e-4 * alpha * min(dphi, 0.0):
                    break
                alpha *= 0.5
            log.debug("it %3d mu %.1e err %.2e a_s %.2e alpha %.2e a_z %.2e delta %.1e damp %.1e merit %.6e",
                      it, mu, err, a_s, alpha, a_z, delta, damp, phi0)
            if alpha * np.linalg.norm(dx, np.inf) < 1e-14 * (1.0 + np.linalg.norm(x, np.inf)) and err > tol:
                stalls += 1
                if stalls >= 5:
                    raise NewtonBreakdown("interior-point steps stalled")
            else:
                stalls = 0
            if alpha < 0.5 * a_s:
                damp = max(1e-8, 10.0 * damp)
            elif damp:
                damp = damp / 10.0 if damp > 1e-8 else 0.0
            x = x + alpha * dx
            s = s + alpha * ds
            z = z + a_z * dz
            # keep the duals near the central path
            z = np.clip(z, mu / (1e10 * s), 1e10 * mu / s)
            # re-synchronise slacks with feasible constraints
            g_new = nlp.cons(x)
            s = np.maximum(s, np.minimum(g_new, s * 10.0)) if m else s
        if it >= max_iter or mu <= mu_final:
            break
        mu = max(mu_final, mu * mu_factor)

    stat, viol, comp = kkt_errors(nlp, x, z)
    converged = it < max_iter and stat <= tol and viol <= tol
    return IPResult(x, z, it, converged, stat, viol, comp,
                    message="converged" if converged else ("iteration limit" if it >= max_iter else "tolerance not met"))


def _max_step(v: np.ndarray, dv: np.ndarray, tau: float) -> float:
    neg = dv < 0
    if not neg.any():
        return 1.0
    return float(min(1.0, np.min(-tau * v[neg] / dv[neg])))


def augmented_lagrangian(nlp: NLP, x0, tol: float = 1e-8, max_outer: int = 40,
                         rho0: float = 10.0, rho_max: float = 1e8) -> IPResult:
    """Fallback: bound-free augmented Lagrangian with BFGS inner solves."""
    x = np.array(x0, dtype=float)
    z = np.zeros(nlp.cons(x).size)
    rho = rho0
    total = 0
    prev_viol = np.inf
    for _ in range(max_outer):
        def la(xx):
            g = nlp.cons(xx)
            t = np.maximum(z - rho * g, 0.0)
            return nlp.fun(xx) + (np.sum(t ** 2) - np.sum(z ** 2)) / (2 * rho)

        def la_grad(xx):
            g = nlp.cons(xx)
            t = np.maximum(z - rho * g, 0.0)
            return nlp.grad(xx) - nlp.jac(xx).T @ t

        res = minimize(la, x, jac=la_grad, method="BFGS", options={"gtol": tol * 0.1, "maxiter": 500})
        x = res.x
        total += int(res.nit)
        g = nlp.cons(x)
        z = np.maximum(z - rho * g, 0.0)
        stat, viol, comp = kkt_errors(nlp, x, z)
        if stat <= tol and viol <= tol and comp <= tol:
            return IPResult(x, z, total, True, stat, viol, comp, "augmented-Lagrangian", "converged")
        if viol > 0.25 * prev_viol:
            if rho >= rho_max:
                break  # penalty saturated without reducing the violation
            rho = min(rho_max, rho * 10.0)
        prev_viol = viol
    stat, viol, comp = kkt_errors(nlp, x, z)
    return IPResult(x, z, total, False, stat, viol, comp, "augmented-Lagrangian", "outer iteration limit")


def solve_nlp(nlp: NLP, x0, **kwargs) -> IPResult:
    try:
        return interior_point(nlp, x0, **kwargs)
    except NewtonBreakdown as exc:
        log.warning("%s; falling back to augmented Lagrangian", exc)
        return augmented_lagrangian(nlp, x0, tol=kwargs.get("tol", 1e-8))
