"""Control laws for double-integrator agents (``xdot = v``, ``vdot = u``).

The consensus part uses fractional signed powers ``sig(y)^q = |y|^q sgn(y)``
with position exponent ``q in (0, 1)`` and the velocity exponent always
derived as ``p = 2q/(q+1)`` (the homogeneity relation that yields finite-time
convergence of the nominal system).  The optimal-consensus laws add the
barrier Newton correction and its total time derivative; the DAT variant
estimates the required network averages with signum-driven estimators:

* chi payload (4n):  ``[lx; ltx; d(lx)/dt; d(ltx)/dt]``
* mu  payload (2n^2): ``[lxx; d(lxx)/dt]`` (both matrices flattened)

with agent control ``u_i = H^{-1} Hdot H^{-1} (chi1 + chi2)
- H^{-1} (chi3 + chi4) - H chi1 + r_i`` where ``H``/``Hdot`` are the
reshaped mu blocks (the matrix form of the scalar chain rule).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import (
    CONDITION_LIMIT,
    BarrierLagrangian,
    SingularHessianError,
    barrier_partials,
    barrier_third,
    k_total_derivative,
)
from .graph import Graph, incidence, projector
from .protocols_single import signum

__all__ = [
    "SigConsensusParams",
    "DatStateDouble",
    "sig_pow",
    "sig_consensus",
    "nominal_double_rhs",
    "nominal_energy",
    "control_double_common",
    "dat_signals_double",
    "dat_rhs_double",
    "control_double_dat",
]


@dataclass(frozen=True)
class SigConsensusParams:
    """Gains/exponents of the finite-time consensus term
    ``r_i = -gamma1 * sum_j sig(x_i - x_j)^q - gamma2 * sig(v_i)^p``.

    ``p`` is not a free parameter: it is always ``2q/(q+1)``.
    """

    gamma1: float
    gamma2: float
    q: float

    def __post_init__(self):
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValueError(f"sig gains must be positive, got {self.gamma1}, {self.gamma2}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"position exponent q must lie in (0, 1), got {self.q}")

    @property
    def p(self) -> float:
        """Velocity exponent ``2q/(q+1)`` (derived, never configured)."""
        return 2.0 * self.q / (self.q + 1.0)


@dataclass
class DatStateDouble:
    """Estimator state for the double-integrator DAT law.

    ``zeta`` (N, 4n) corrects the chi payloads, ``xi`` (N, 2n^2) the mu
    payloads; ``a`` and ``b`` are the respective signum gains (monitored
    against the running sup of the correction norms at run time).
    """

    zeta: np.ndarray
    xi: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"signum gains must be positive, got a={self.a}, b={self.b}")
        self.zeta = np.asarray(self.zeta, dtype=float)
        self.xi = np.asarray(self.xi, dtype=float)


def sig_pow(y: np.ndarray, q: float) -> np.ndarray:
    """Componentwise signed power ``|y|^q * sgn(y)`` (odd, continuous at 0)."""
    if not q > 0:
        raise ValueError(f"sig exponent must be positive, got {q}")
    y = np.asarray(y, dtype=float)
    return np.sign(y) * np.abs(y) ** q


def sig_consensus(params: SigConsensusParams, g: Graph, x: np.ndarray,
                  v: np.ndarray) -> np.ndarray:
    """Finite-time consensus term for all agents, shape (N, n).

    The position part is computed as ``-gamma1 * D @ sig(D.T @ x)^q`` (valid
    because sig is odd) and sums to zero over agents; the velocity part
    ``-gamma2 * sig(v_i)^p`` acts per agent.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    D = incidence(g)
    return (-params.gamma1 * (D @ sig_pow(D.T @ x, params.q))
            - params.gamma2 * sig_pow(v, params.p))


def nominal_double_rhs(params: SigConsensusParams, g: Graph, x: np.ndarray,
                       v: np.ndarray):
    """State derivative of the nominal (barrier-free) finite-time system:
    ``xdot = v``, ``vdot = sig_consensus``.  Consensus with zero velocity is
    an equilibrium."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    return v.copy(), sig_consensus(params, g, x, v)


def nominal_energy(params: SigConsensusParams, g: Graph, x: np.ndarray,
                   v: np.ndarray) -> float:
    """Lyapunov functional of the nominal system.

    ``V = gamma1 * sum_edges |x_i - x_j|^{q+1} / (q+1) + 0.5 ||P v||^2``
    (componentwise over state dimensions, edges counted once so that the
    position term is exactly the primitive of the gamma1 force).  V is
    nonincreasing along nominal trajectories:
    ``dV/dt = -gamma2 * v @ P @ sig(v)^p <= 0`` by the Chebyshev sum
    inequality.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    D = incidence(g)
    gaps = D.T @ x
    potential = params.gamma1 * np.sum(np.abs(gaps) ** (params.q + 1.0)) / (params.q + 1.0)
    kinetic = 0.5 * np.sum((projector(g.n) @ v) ** 2)
    return float(potential + kinetic)


def control_double_common(b: BarrierLagrangian, x_i: np.ndarray, v_i: np.ndarray,
                          t: float, r_i: np.ndarray) -> np.ndarray:
    """Common-constraint law ``u_i = -dk/dt - lxx @ lx + r_i`` with
    ``k = lxx^{-1} (lx + ltx)`` on the agent's own barrier."""
    p = barrier_partials(b, x_i, t)
    _, k_dot = k_total_derivative(b, x_i, v_i, t)
    return -k_dot - p.lxx @ p.lx + np.asarray(r_i, dtype=float)


def dat_signals_double(b: BarrierLagrangian, x_i: np.ndarray, v_i: np.ndarray,
                       t: float):
    """Per-agent DAT payloads ``(chi, mu)``.

    chi (4n)  = [lx; ltx; lxx @ v + ltx; lxxt @ v + lttx]
    mu  (2n^2) = [lxx; barrier_third(.., v) + lxxt]  (flattened)

    The third/fourth chi blocks are the total time derivatives of the first
    two along the trajectory; with ``v = 0`` they reduce to ``ltx`` and
    ``lttx`` exactly.
    """
    v_i = np.asarray(v_i, dtype=float)
    p = barrier_partials(b, x_i, t)
    dlx = p.lxx @ v_i + p.ltx
    dltx = p.lxxt @ v_i + p.lttx
    dlxx = barrier_third(b, x_i, t, v_i) + p.lxxt
    chi = np.concatenate([p.lx, p.ltx, dlx, dltx])
    mu = np.concatenate([p.lxx.ravel(), dlxx.ravel()])
    return chi, mu


def dat_rhs_double(state: DatStateDouble, g: Graph, chi: np.ndarray,
                   mu: np.ndarray, sgn_epsilon: float = 0.0):
    """Estimator dynamics
    ``zeta_dot_i = -a * sum_j sgn(chi_i - chi_j)``,
    ``xi_dot_i = -b * sum_j sgn(mu_i - mu_j)``;
    with exact signum both columnwise sums are conserved."""
    chi = np.asarray(chi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    D = incidence(g)
    zeta_dot = -state.a * (D @ signum(D.T @ chi, sgn_epsilon))
    xi_dot = -state.b * (D @ signum(D.T @ mu, sgn_epsilon))
    return zeta_dot, xi_dot


def control_double_dat(chi_i: np.ndarray, mu_i: np.ndarray,
                       r_i: np.ndarray) -> np.ndarray:
    """DAT law assembled from the tracked signals.

    ``u_i = H^{-1} Hdot H^{-1} (chi1 + chi2) - H^{-1} (chi3 + chi4)
    - H chi1 + r_i`` where ``H``/``Hdot`` are the two reshaped mu blocks.
    This is the matrix form of the scalar law (scalar ``mu1^{-2} mu2`` lifts
    to ``H^{-1} Hdot H^{-1}``); with each agent's own payloads it reproduces
    the common-constraint law exactly.
    """
    r_i = np.asarray(r_i, dtype=float)
    n = r_i.size
    chi_i = np.asarray(chi_i, dtype=float)
    mu_i = np.asarray(mu_i, dtype=float)
    if chi_i.size != 4 * n or mu_i.size != 2 * n * n:
        raise ValueError(
            f"payload sizes ({chi_i.size}, {mu_i.size}) != ({4 * n}, {2 * n * n}) for n={n}")
    c1, c2, c3, c4 = chi_i.reshape(4, n)
    H = mu_i[: n * n].reshape(n, n)
    Hdot = mu_i[n * n:].reshape(n, n)
    cond = np.linalg.cond(H)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularHessianError(f"estimated Hessian condition number {cond:.3e}")
    k = np.linalg.solve(H, c1 + c2)
    return np.linalg.solve(H, Hdot @ k) - np.linalg.solve(H, c3 + c4) - H @ c1 + r_i
