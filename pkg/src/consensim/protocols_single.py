"""Control laws for single-integrator agents (``xdot_i = u_i``).

Two variants drive the network to the constrained optimal consensus point:

* common-constraint law: each agent applies its own time-varying Newton flow
  plus a saturated (tanh) consensus coupling;
* distributed-average-tracking (DAT) law: signum-driven estimators let every
  agent track the network averages of the barrier partials, so the Newton
  flow can be evaluated on network-averaged quantities instead of local ones.

DAT payloads stack ``(lx, ltx, lxx)`` into a flat vector of length
``2n + n^2`` per agent; estimator states ``kappa_i`` live in the same space
and are engine-owned (initialized to zero unless a scenario overrides them).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import (
    CONDITION_LIMIT,
    BarrierLagrangian,
    SingularHessianError,
    barrier_partials,
    newton_direction,
)
from .graph import Graph, incidence

__all__ = [
    "TanhConsensusParams",
    "DatStateSingle",
    "signum",
    "tanh_consensus",
    "control_single_common",
    "dat_signal_single",
    "dat_rhs_single",
    "control_single_dat",
    "payload_size_single",
]


@dataclass(frozen=True)
class TanhConsensusParams:
    """Gains of the saturated consensus term
    ``r_i = -beta1 * sum_j tanh(beta2 * (x_i - x_j))``.

    Practical consensus requires ``beta1 * sqrt(lambda2(L))`` to dominate the
    spread of the agents' Newton directions; the engine audits that margin.
    """

    beta1: float
    beta2: float

    def __post_init__(self):
        if not (self.beta1 > 0 and self.beta2 > 0):
            raise ValueError(f"tanh gains must be positive, got {self.beta1}, {self.beta2}")


@dataclass
class DatStateSingle:
    """Estimator state for the single-integrator DAT law.

    Attributes
    ----------
    kappa : ndarray, shape (N, 2n + n^2)
        Per-agent correction states; the tracked signal is
        ``nu_i = kappa_i + payload_i``.
    c : float
        Signum gain; must dominate ``sup_t max_i ||kappa_i(t)||_inf`` for
        finite-time average tracking (monitored at run time, warning below a
        2x margin).
    """

    kappa: np.ndarray
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"signum gain c must be positive, got {self.c}")
        self.kappa = np.asarray(self.kappa, dtype=float)


def payload_size_single(n: int) -> int:
    """Length of the stacked (lx, ltx, lxx) payload: ``2n + n**2``."""
    return 2 * n + n * n


def signum(y: np.ndarray, epsilon: float = 0.0) -> np.ndarray:
    """Componentwise sign with ``sgn(0) = 0``.

    ``epsilon > 0`` swaps in the boundary-layer approximation
    ``y / (|y| + epsilon)`` to suppress chattering; the default is the exact
    discontinuous function.
    """
    if epsilon > 0.0:
        return y / (np.abs(y) + epsilon)
    return np.sign(y)


def tanh_consensus(params: TanhConsensusParams, g: Graph, x: np.ndarray) -> np.ndarray:
    """Saturated consensus term for all agents.

    Parameters
    ----------
    params : TanhConsensusParams
    g : Graph
    x : ndarray, shape (N, n)
        Stacked agent positions.

    Returns
    -------
    ndarray, shape (N, n)
        ``r_i = -beta1 * sum_{j in N(i)} tanh(beta2 * (x_i - x_j))``, computed
        as ``-beta1 * D @ tanh(beta2 * D.T @ x)`` (valid because tanh is odd).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    D = incidence(g)
    return -params.beta1 * (D @ np.tanh(params.beta2 * (D.T @ x)))


def control_single_common(b: BarrierLagrangian, x_i: np.ndarray, t: float,
                          r_i: np.ndarray) -> np.ndarray:
    """Common-constraint law ``u_i = omega_i + r_i`` with
    ``omega_i = -lxx^{-1} (lx + ltx)`` evaluated on the agent's own barrier."""
    return newton_direction(b, x_i, t) + np.asarray(r_i, dtype=float)


def dat_signal_single(b: BarrierLagrangian, x_i: np.ndarray, t: float) -> np.ndarray:
    """Flat payload ``[lx; ltx; lxx.ravel()]`` of length ``2n + n^2``."""
    p = barrier_partials(b, x_i, t)
    return np.concatenate([p.lx, p.ltx, p.lxx.ravel()])


def dat_rhs_single(state: DatStateSingle, g: Graph, nu: np.ndarray,
                   sgn_epsilon: float = 0.0) -> np.ndarray:
    """Estimator dynamics ``kappa_dot_i = -c * sum_j sgn(nu_i - nu_j)``.

    Parameters
    ----------
    state : DatStateSingle
    g : Graph
    nu : ndarray, shape (N, P)
        Tracked signals ``kappa + payload``.
    sgn_epsilon : float
        Optional signum boundary layer (0 = exact).

    Returns
    -------
    ndarray, shape (N, P)
        With exact signum the columnwise sum is zero, so
        ``sum_i kappa_i`` is conserved up to integration chatter.
    """
    nu = np.asarray(nu, dtype=float)
    D = incidence(g)
    return -state.c * (D @ signum(D.T @ nu, sgn_epsilon))


def control_single_dat(nu_i: np.ndarray, r_i: np.ndarray) -> np.ndarray:
    """DAT law ``u_i = -nu3^{-1} (nu1 + nu2) + r_i``.

    ``nu_i`` is the agent's flat tracked signal whose blocks estimate the
    network averages of ``lx``, ``ltx`` and ``lxx`` (the last reshaped to a
    matrix); after the estimators converge this equals the Newton flow of the
    averaged barrier.
    """
    r_i = np.asarray(r_i, dtype=float)
    n = r_i.size
    nu_i = np.asarray(nu_i, dtype=float)
    if nu_i.size != payload_size_single(n):
        raise ValueError(f"payload length {nu_i.size} != {payload_size_single(n)} for n={n}")
    nu1 = nu_i[:n]
    nu2 = nu_i[n:2 * n]
    H = nu_i[2 * n:].reshape(n, n)
    cond = np.linalg.cond(H)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularHessianError(f"estimated Hessian condition number {cond:.3e}")
    return -np.linalg.solve(H, nu1 + nu2) + r_i
