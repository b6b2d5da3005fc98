"""Agent cost calculus: smooth objectives, constraints, and the time-decaying
logarithmic barrier composite.

Each agent carries one objective ``f`` and exactly one inequality constraint
``g(x) <= 0``, combined into

    L(x, t) = f(x) - (alpha / (t + 1)) * ln(-g(x)),      alpha > 1,

whose minimizer tracks the constrained optimum of ``f`` as ``t`` grows.  The
controllers consume the partial derivatives of ``L`` up to third order; this
module provides them analytically together with the Newton direction and the
total time derivative of the Newton correction term.

Notation for the partials (``D`` = derivative):

    lx   = dL/dx           ltx  = d2L/dtdx        lxx  = d2L/dx2
    lttx = d3L/dt2dx       lxxt = d3L/dx2dt

and ``barrier_third(b, x, t, d)`` is the third spatial derivative contracted
once with a direction ``d``, i.e. the directional derivative of ``lxx``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CONDITION_LIMIT",
    "InfeasiblePointError",
    "SingularHessianError",
    "SmoothFunction",
    "QuadraticFunction",
    "AffineFunction",
    "BarrierLagrangian",
    "BarrierPartials",
    "barrier_partials",
    "barrier_third",
    "newton_direction",
    "k_total_derivative",
    "function_from_dict",
]

# Hessians with 2-norm condition number beyond this are treated as singular.
CONDITION_LIMIT = 1e12


class InfeasiblePointError(ValueError):
    """Raised when the barrier is evaluated at a point with g(x) >= 0."""


class SingularHessianError(RuntimeError):
    """Raised when a Hessian solve is attempted past the condition limit."""


class SmoothFunction:
    """Interface for three-times differentiable scalar fields on R^n."""

    dim: int

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def third_directional(self, x: np.ndarray, d: np.ndarray) -> np.ndarray:
        """Directional derivative of the Hessian along ``d``, an (n, n) matrix."""
        raise NotImplementedError

    def quadratic_coefficients(self):
        """``(A, b, c)`` with ``value(x) = x@A@x + b@x + c`` for polynomials
        of degree <= 2, else ``None`` (enables the engine's batched path)."""
        return None


def _as_vector(x, dim: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"{what} must have shape ({dim},), got {x.shape}")
    return x


@dataclass(frozen=True)
class QuadraticFunction(SmoothFunction):
    """``value(x) = (x - center) @ W @ (x - center) + offset``.

    Parameters
    ----------
    center : ndarray, shape (n,)
    weight : scalar, (n,) vector (diagonal) or (n, n) symmetric matrix,
        default identity.
    offset : float
        Additive constant; constraints of the form ``|x - c|_W^2 - r <= 0``
        use ``offset = -r``.
    """

    center: np.ndarray
    weight: np.ndarray = None
    offset: float = 0.0

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(-1)
        n = center.size
        w = self.weight
        if w is None:
            W = np.eye(n)
        else:
            W = np.asarray(w, dtype=float)
            if W.ndim == 0:
                W = float(W) * np.eye(n)
            elif W.ndim == 1:
                if W.size != n:
                    raise ValueError(f"diagonal weight length {W.size} != dim {n}")
                W = np.diag(W)
            elif W.shape != (n, n):
                raise ValueError(f"weight must be ({n}, {n}), got {W.shape}")
            if not np.allclose(W, W.T, atol=1e-12):
                raise ValueError("weight matrix must be symmetric")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "weight", W)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "dim", n)

    def value(self, x) -> float:
        d = _as_vector(x, self.dim, "x") - self.center
        return float(d @ self.weight @ d) + self.offset

    def gradient(self, x) -> np.ndarray:
        d = _as_vector(x, self.dim, "x") - self.center
        return 2.0 * (self.weight @ d)

    def hessian(self, x) -> np.ndarray:
        return 2.0 * self.weight.copy()

    def third_directional(self, x, d) -> np.ndarray:
        return np.zeros((self.dim, self.dim))

    def quadratic_coefficients(self):
        A = self.weight.copy()
        b = -2.0 * (self.weight @ self.center)
        c = float(self.center @ self.weight @ self.center) + self.offset
        return A, b, c


@dataclass(frozen=True)
class AffineFunction(SmoothFunction):
    """``value(x) = normal @ x + offset``."""

    normal: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float).reshape(-1)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "dim", normal.size)

    def value(self, x) -> float:
        return float(self.normal @ _as_vector(x, self.dim, "x")) + self.offset

    def gradient(self, x) -> np.ndarray:
        return self.normal.copy()

    def hessian(self, x) -> np.ndarray:
        return np.zeros((self.dim, self.dim))

    def third_directional(self, x, d) -> np.ndarray:
        return np.zeros((self.dim, self.dim))

    def quadratic_coefficients(self):
        return np.zeros((self.dim, self.dim)), self.normal.copy(), self.offset


def _gradient_identically_zero(fn: SmoothFunction) -> bool:
    if isinstance(fn, AffineFunction):
        return not np.any(fn.normal)
    if isinstance(fn, QuadraticFunction):
        return not np.any(fn.weight)
    return False


@dataclass(frozen=True)
class BarrierLagrangian:
    """Objective plus time-decaying log barrier for one constraint.

    ``L(x, t) = objective(x) - (alpha/(t+1)) * ln(-constraint(x))`` on the
    strictly feasible set ``constraint(x) < 0``.
    """

    objective: SmoothFunction
    constraint: SmoothFunction
    alpha: float = 2.0

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise ValueError(f"barrier decay parameter must exceed 1, got {self.alpha}")
        if self.objective.dim != self.constraint.dim:
            raise ValueError(
                f"objective dim {self.objective.dim} != constraint dim {self.constraint.dim}"
            )
        if _gradient_identically_zero(self.constraint):
            raise ValueError("constraint with identically zero gradient is not a barrier")
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def dim(self) -> int:
        return self.objective.dim

    def feasible(self, x) -> bool:
        return self.constraint.value(x) < 0.0

    def value(self, x, t: float) -> float:
        g = self.constraint.value(x)
        if g >= 0.0:
            raise InfeasiblePointError(f"g(x) = {g:.6g} >= 0 at x = {np.asarray(x)}")
        return self.objective.value(x) - self.alpha / (t + 1.0) * np.log(-g)

    def combined_gradient_weight(self, t: float) -> float:
        """Weight ``w`` such that ``lx + ltx = grad f - w * grad g / g``.

        Equals ``alpha * t / (t+1)^2`` (the barrier weight of the combined
        first-order term; zero at t = 0, decaying like alpha/t afterwards).
        """
        return self.alpha * t / (t + 1.0) ** 2


@dataclass(frozen=True)
class BarrierPartials:
    """Partial derivatives of the barrier composite at one ``(x, t)``.

    Fields: ``lx`` (n,), ``ltx`` (n,), ``lxx`` (n, n), ``lttx`` (n,),
    ``lxxt`` (n, n) — see the module docstring for the derivative map.
    """

    lx: np.ndarray
    ltx: np.ndarray
    lxx: np.ndarray
    lttx: np.ndarray
    lxxt: np.ndarray


def _barrier_pieces(b: BarrierLagrangian, x: np.ndarray):
    """Feasibility-checked shared terms: g, G1 = grad g / g, M = hess g / g - G1 G1^T."""
    g = b.constraint.value(x)
    if g >= 0.0:
        raise InfeasiblePointError(f"g(x) = {g:.6g} >= 0 at x = {np.asarray(x)}")
    grad_g = b.constraint.gradient(x)
    hess_g = b.constraint.hessian(x)
    G1 = grad_g / g
    M = hess_g / g - np.outer(G1, G1)
    return g, grad_g, hess_g, G1, M


def barrier_partials(b: BarrierLagrangian, x, t: float) -> BarrierPartials:
    """All first/second/third mixed partials the control laws consume.

    With ``w = alpha/(t+1)`` and ``G1 = grad g / g``:

        lx   = grad f - w * G1
        ltx  = (w/(t+1)) * G1
        lxx  = hess f - w * (hess g / g - G1 G1^T)
        lttx = -(2w/(t+1)^2) * G1
        lxxt = (w/(t+1)) * (hess g / g - G1 G1^T)

    Raises
    ------
    InfeasiblePointError
        If ``g(x) >= 0``.
    """
    x = _as_vector(x, b.dim, "x")
    g, grad_g, hess_g, G1, M = _barrier_pieces(b, x)
    w = b.alpha / (t + 1.0)
    return BarrierPartials(
        lx=b.objective.gradient(x) - w * G1,
        ltx=(w / (t + 1.0)) * G1,
        lxx=b.objective.hessian(x) - w * M,
        lttx=(-2.0 * w / (t + 1.0) ** 2) * G1,
        lxxt=(w / (t + 1.0)) * M,
    )


def barrier_third(b: BarrierLagrangian, x, t: float, d) -> np.ndarray:
    """Directional derivative of ``lxx`` along ``d`` as an (n, n) matrix.

    Differentiating ``lxx = hess f - w*(hess g / g - G1 G1^T)`` in direction
    ``d``, with ``h1 = (hess g @ d)/g - G1 (G1 @ d)`` the derivative of G1:

        D_d lxx = f''' [d] - w * ( g'''[d]/g - (hess g / g)(G1 @ d)
                                   - h1 G1^T - G1 h1^T )
    """
    x = _as_vector(x, b.dim, "x")
    d = _as_vector(d, b.dim, "d")
    g, grad_g, hess_g, G1, _ = _barrier_pieces(b, x)
    w = b.alpha / (t + 1.0)
    f3 = b.objective.third_directional(x, d)
    g3 = b.constraint.third_directional(x, d)
    G1d = float(G1 @ d)
    h1 = (hess_g @ d) / g - G1 * G1d
    dM = g3 / g - (hess_g / g) * G1d - np.outer(h1, G1) - np.outer(G1, h1)
    return f3 - w * dM


def _solve_guarded(H: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    cond = np.linalg.cond(H)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularHessianError(f"{what}: condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")
    return np.linalg.solve(H, rhs)


def newton_direction(b: BarrierLagrangian, x, t: float) -> np.ndarray:
    """Time-varying Newton flow direction ``-lxx^{-1} (lx + ltx)``.

    The ``ltx`` feedforward makes ``d/dt lx = -lx`` exact along the flow, so
    the iterate tracks the barrier path without quasi-static lag.
    """
    p = barrier_partials(b, x, t)
    return -_solve_guarded(p.lxx, p.lx + p.ltx, "newton_direction")


def k_total_derivative(b: BarrierLagrangian, x, v, t: float):
    """Correction term ``k = lxx^{-1} (lx + ltx)`` and its total time derivative.

    Along a trajectory with velocity ``v``:

        d(lx)/dt  = lxx @ v + ltx
        d(ltx)/dt = lxxt @ v + lttx
        d(lxx)/dt = barrier_third(b, x, t, v) + lxxt
        dk/dt     = lxx^{-1} ( d(lx + ltx)/dt - d(lxx)/dt @ k )

    Returns
    -------
    (k, k_dot) : pair of (n,) vectors
    """
    x = _as_vector(x, b.dim, "x")
    v = _as_vector(v, b.dim, "v")
    p = barrier_partials(b, x, t)
    m = p.lx + p.ltx
    k = _solve_guarded(p.lxx, m, "k_total_derivative")
    dH = barrier_third(b, x, t, v) + p.lxxt
    dm = p.lxx @ v + p.ltx + p.lxxt @ v + p.lttx
    k_dot = _solve_guarded(p.lxx, dm - dH @ k, "k_total_derivative")
    return k, k_dot


def function_from_dict(spec: dict, dim: int) -> SmoothFunction:
    """Build a :class:`SmoothFunction` from its scenario-JSON description.

    Supported forms::

        {"type": "quadratic", "center": [...], "weight": optional}
        {"type": "affine", "normal": [...], "offset": number}
        {"type": "quadratic_constraint", "center": [...], "radius2": number,
         "weight": optional}

    ``weight`` may be a scalar, a length-n list (diagonal) or an n x n nested
    list; it defaults to the identity.  ``quadratic_constraint`` encodes
    ``(x-c) @ W @ (x-c) - radius2 <= 0``.
    """
    kind = spec.get("type")
    if kind == "quadratic":
        fn = QuadraticFunction(center=spec["center"], weight=spec.get("weight"),
                               offset=float(spec.get("offset", 0.0)))
    elif kind == "affine":
        fn = AffineFunction(normal=spec["normal"], offset=float(spec.get("offset", 0.0)))
    elif kind == "quadratic_constraint":
        fn = QuadraticFunction(center=spec["center"], weight=spec.get("weight"),
                               offset=-float(spec["radius2"]))
    else:
        raise ValueError(f"unknown function type {kind!r}")
    if fn.dim != dim:
        raise ValueError(f"function of dim {fn.dim} in a {dim}-dimensional scenario")
    return fn
