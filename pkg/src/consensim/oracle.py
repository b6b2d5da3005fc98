"""Centralized interior-point reference solver and KKT residual records.

The distributed runs are audited against

    minimize   F(x) = sum_i f_i(x)
    subject to g_i(x) < 0 for all i,

solved here by classic path following: for a decreasing barrier weight
``alpha/tau`` minimize

    Phi_tau(x) = F(x) - (alpha/tau) * sum_i ln(-g_i(x))

with damped Newton steps, multiply ``tau`` tenfold, and stop once the duality
gap bound ``M * alpha / tau`` falls below the requested tolerance.  The
barrier multipliers ``lambda_i = -(alpha/tau) / g_i(x)`` of the final central
point are dual feasible, so the returned objective is within ``gap_bound`` of
the true optimum.  Everything here assumes convex objectives/constraints with
a strictly feasible start, which all shipped scenarios satisfy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calculus import InfeasiblePointError

__all__ = [
    "OracleResult",
    "KktResidual",
    "solve_centralized",
    "kkt_residual",
    "total_objective",
]

ARMIJO_FACTOR = 0.5
ARMIJO_SLOPE = 1e-4
MIN_STEP = 1e-16
ACTIVITY_RTOL = 1e-4


def total_objective(objectives, x: np.ndarray) -> float:
    """F(x) = sum of the per-agent objectives."""
    return float(sum(f.value(x) for f in objectives))


@dataclass(frozen=True)
class OracleResult:
    """Central-path endpoint returned by :func:`solve_centralized`.

    ``multipliers[i] = -epsilon_final / g_i(x)`` are the dual-feasible
    barrier multipliers, and ``objective`` is within ``gap_bound`` of the
    constrained optimum.
    """

    x: np.ndarray
    multipliers: np.ndarray
    objective: float
    tau_final: float
    epsilon_final: float
    gap_bound: float
    outer_iterations: int
    newton_iterations: int
    path: tuple

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "multipliers": self.multipliers.tolist(),
            "objective": self.objective,
            "tau_final": self.tau_final,
            "epsilon_final": self.epsilon_final,
            "gap_bound": self.gap_bound,
            "outer_iterations": self.outer_iterations,
            "newton_iterations": self.newton_iterations,
            "path": [{"tau": tau, "x": x.tolist()} for tau, x in self.path],
        }


@dataclass(frozen=True)
class KktResidual:
    """First-order optimality audit of a point.

    ``stationarity`` is ``||grad F + sum_i lambda_i grad g_i||`` with
    least-squares multipliers fitted over the active set (constraints with
    ``|g_i(x)| <= 1e-4 * (1 + |g_i(x_ref)|)``); an interior point therefore
    scores its raw ``||grad F||``.  ``worst_violation`` is
    ``max(0, max_i g_i)`` and ``complementarity_bound`` is
    ``sum_i |lambda_i g_i|`` for the fitted multipliers.
    """

    stationarity: float
    worst_violation: float
    complementarity_bound: float
    multipliers: np.ndarray
    active: tuple
    barrier_stationarity: float = None

    def to_dict(self) -> dict:
        return {
            "stationarity": self.stationarity,
            "worst_violation": self.worst_violation,
            "complementarity_bound": self.complementarity_bound,
            "multipliers": self.multipliers.tolist(),
            "active": list(self.active),
            "barrier_stationarity": self.barrier_stationarity,
        }


def _phi(objectives, constraints, x, weight):
    """Barrier merit value; +inf outside the strictly feasible set."""
    gvals = [g.value(x) for g in constraints]
    if any(gv >= 0.0 for gv in gvals):
        return math.inf
    total = sum(f.value(x) for f in objectives)
    return float(total - weight * sum(math.log(-gv) for gv in gvals))


def _phi_derivatives(objectives, constraints, x, weight):
    """(grad, hess) of the barrier merit at a strictly feasible x."""
    n = x.size
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    for f in objectives:
        grad += f.gradient(x)
        hess += f.hessian(x)
    for g in constraints:
        gv = g.value(x)
        gg = g.gradient(x)
        grad -= weight * gg / gv
        hess -= weight * (g.hessian(x) / gv - np.outer(gg, gg) / gv**2)
    return grad, hess


def solve_centralized(objectives, constraints, x0, tol: float = 1e-8,
                      alpha: float = 1.0, tau0: float = 1.0,
                      tau_factor: float = 10.0, max_outer: int = 60,
                      max_inner: int = 200) -> OracleResult:
    """Path-following solve of ``min F`` over the intersection ``g_i < 0``.

    Parameters
    ----------
    objectives, constraints:
        Lists of :class:`~consensim.calculus.SmoothFunction`; the constraint
        list sets the duality-gap bound ``M * alpha / tau``.
    x0:
        Strictly feasible start (else :class:`InfeasiblePointError`).
    tol:
        Target duality-gap bound.  Newton inner solves run to a gradient
        norm three orders tighter (floored at 1e-12), so halving ``tol``
        at least halves every reported residual.

    Raises
    ------
    RuntimeError
        If the gap bound is still above ``tol`` after ``max_outer``
        barrier stages or an inner solve stalls.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.ndim != 1:
        raise ValueError("x0 must be a vector")
    if not objectives or not constraints:
        raise ValueError("need at least one objective and one constraint")
    bad = [i for i, g in enumerate(constraints) if g.value(x) >= 0.0]
    if bad:
        raise InfeasiblePointError(
            f"x0 violates constraint(s) {[i + 1 for i in bad]}; the oracle "
            "needs a strictly feasible start")
    if tol <= 0:
        raise ValueError("tol must be positive")

    M = len(constraints)
    inner_tol = max(1e-12, 1e-3 * tol)
    tau = float(tau0)
    newton_total = 0
    path = []
    for outer in range(1, max_outer + 1):
        weight = alpha / tau
        for _ in range(max_inner):
            grad, hess = _phi_derivatives(objectives, constraints, x, weight)
            gnorm = float(np.linalg.norm(grad))
            # attainable gradient resolution: one ulp of x moves grad by
            # ~||H||*eps*|x|, so near the boundary (H ~ tau) a fixed inner
            # tolerance is unreachable; stop within ~64 ulps of the center
            floor = (64.0 * np.finfo(float).eps
                     * (1.0 + float(np.abs(x).max()))
                     * max(1.0, float(np.abs(hess).max())))
            if gnorm <= max(inner_tol, floor):
                break
            p = np.linalg.solve(hess, -grad)
            slope = float(grad @ p)
            if slope >= 0.0:  # numerical loss of descent; fall back to -grad
                p = -grad
                slope = -gnorm**2
            phi0 = _phi(objectives, constraints, x, weight)
            # allow roundoff-level non-descent so the quadratic phase is not
            # stalled by merit values that differ below machine epsilon
            noise = 100.0 * np.finfo(float).eps * (1.0 + abs(phi0))
            step = 1.0
            while (_phi(objectives, constraints, x + step * p, weight)
                   > phi0 + ARMIJO_SLOPE * step * slope + noise):
                step *= ARMIJO_FACTOR
                if step < MIN_STEP:
                    raise RuntimeError(
                        f"line search stalled at tau={tau:.3g} "
                        f"(|grad|={gnorm:.3g})")
            x = x + step * p
            newton_total += 1
        else:
            raise RuntimeError(f"Newton did not converge at tau={tau:.3g}")
        path.append((tau, x.copy()))
        if M * weight < tol:
            gvals = np.array([g.value(x) for g in constraints])
            lambdas = -weight / gvals
            return OracleResult(
                x=x, multipliers=lambdas,
                objective=total_objective(objectives, x),
                tau_final=tau, epsilon_final=weight, gap_bound=M * weight,
                outer_iterations=outer, newton_iterations=newton_total,
                path=tuple(path))
        tau *= tau_factor
    raise RuntimeError(
        f"gap bound still above {tol:.3g} after {max_outer} barrier stages")


def kkt_residual(objectives, constraints, x, t: float = None,
                 alpha: float = 2.0, x_ref=None) -> KktResidual:
    """First-order optimality record at ``x``.

    The limit residual fits least-squares multipliers over the constraints
    active at ``x`` (threshold ``1e-4 * (1 + |g_i(x_ref)|)`` per constraint,
    with ``x_ref`` defaulting to ``x`` itself).  When a time ``t`` is given,
    ``barrier_stationarity`` additionally reports
    ``||grad F + sum_i lambda_i grad g_i||`` with the decaying barrier
    multipliers ``lambda_i = -(alpha/(t+1)) / g_i``.
    """
    x = np.asarray(x, dtype=float)
    ref = x if x_ref is None else np.asarray(x_ref, dtype=float)
    gvals = np.array([g.value(x) for g in constraints])
    thresholds = ACTIVITY_RTOL * (1.0 + np.abs(
        np.array([g.value(ref) for g in constraints])))
    grad_f = np.zeros(x.size)
    for f in objectives:
        grad_f += f.gradient(x)
    active = tuple(int(i) for i in np.nonzero(np.abs(gvals) <= thresholds)[0])
    lambdas = np.zeros(len(constraints))
    if active:
        A = np.stack([constraints[i].gradient(x) for i in active], axis=1)
        fitted, *_ = np.linalg.lstsq(A, -grad_f, rcond=None)
        lambdas[list(active)] = fitted
        stationarity = float(np.linalg.norm(grad_f + A @ fitted))
    else:
        stationarity = float(np.linalg.norm(grad_f))
    worst = float(max(0.0, gvals.max()))
    comp = float(np.abs(lambdas * gvals).sum())

    barrier_stat = None
    if t is not None:
        if np.any(gvals >= 0.0):
            barrier_stat = math.inf
        else:
            w = alpha / (t + 1.0)
            resid = grad_f.copy()
            for g, gv in zip(constraints, gvals):
                resid -= w * g.gradient(x) / gv
            barrier_stat = float(np.linalg.norm(resid))
    return KktResidual(
        stationarity=stationarity, worst_violation=worst,
        complementarity_bound=comp, multipliers=lambdas, active=active,
        barrier_stationarity=barrier_stat)
