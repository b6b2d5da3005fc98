"""Scenario assembly, fixed-step integration, feasibility guarding, logging.

A :class:`Scenario` couples a communication graph, per-agent objectives and
constraints, one of five controllers, and integration settings:

==================  ===========================================================
``single_common``   single integrator, own barrier Newton flow + tanh consensus
``single_dat``      single integrator, signum average-tracking estimators
``double_common``   double integrator, own barrier feedforward + sig consensus
``double_dat``      double integrator, signum average-tracking estimators
``nominal_double``  barrier-free finite-time consensus (reference dynamics)
==================  ===========================================================

Integration is explicit Euler (default) or RK4 on a fixed grid; proposals
that would leave the strictly feasible set trigger local step halving (up to
20 levels) that keeps the outer time grid intact.  Runs are deterministic:
no randomness enters the dynamics.

Two equivalent right-hand-side implementations exist: a per-agent reference
path composed from the calculus/protocol operations, and a batched path over
stacked quadratic coefficients used automatically when every objective and
constraint is polynomial (this is what makes 3e5-step runs affordable in
Python).  Their agreement is covered by tests.
"""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import oracle as oracle_mod
from .calculus import (
    BarrierLagrangian,
    InfeasiblePointError,
    SingularHessianError,
    SmoothFunction,
    function_from_dict,
)
from .graph import Graph, build_graph, consensus_error, incidence, is_connected, lambda2
from .protocols_double import (
    DatStateDouble,
    SigConsensusParams,
    control_double_common,
    control_double_dat,
    dat_rhs_double,
    dat_signals_double,
    sig_consensus,
    sig_pow,
)
from .protocols_single import (
    DatStateSingle,
    TanhConsensusParams,
    control_single_common,
    control_single_dat,
    dat_rhs_single,
    dat_signal_single,
    payload_size_single,
    signum,
    tanh_consensus,
)

__all__ = [
    "CONTROLLERS",
    "SCENARIO_SCHEMA",
    "ScenarioError",
    "InfeasibleStartError",
    "GainMarginWarning",
    "AgentSpec",
    "Scenario",
    "SimState",
    "TrajectoryLog",
    "RunSummary",
    "scenario_from_dict",
    "load_scenario",
    "initial_state",
    "step",
    "feasibility_backtrack",
    "run",
    "run_sweep",
    "SWEEPABLE_PARAMS",
]

CONTROLLERS = ("single_common", "single_dat", "double_common", "double_dat",
               "nominal_double")
SINGLE_CONTROLLERS = ("single_common", "single_dat")
DOUBLE_CONTROLLERS = ("double_common", "double_dat", "nominal_double")
BARRIER_CONTROLLERS = ("single_common", "single_dat", "double_common", "double_dat")

MAX_HALVINGS = 20
CONNECTIVITY_TOL = 1e-9

SWEEPABLE_PARAMS = ("alpha", "beta1", "beta2", "gamma1", "gamma2", "q",
                    "a", "b", "c", "sgn_epsilon", "dt", "t_end")


class ScenarioError(ValueError):
    """Configuration problem (bad keys, shapes, gains, graph, ...)."""


class InfeasibleStartError(ValueError):
    """One or more initial positions violate their own constraint."""


class GainMarginWarning(UserWarning):
    """A monitored gain condition holds with less than a 2x margin."""


_FUNCTION_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "type": {"const": "quadratic"},
                "center": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "weight": {},
                "offset": {"type": "number"},
            },
            "required": ["type", "center"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "type": {"const": "affine"},
                "normal": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "offset": {"type": "number"},
            },
            "required": ["type", "normal"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "type": {"const": "quadratic_constraint"},
                "center": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "radius2": {"type": "number"},
                "weight": {},
            },
            "required": ["type", "center", "radius2"],
            "additionalProperties": False,
        },
    ],
}

#: JSON schema for scenario files.  Graph edges are 1-based vertex pairs.
SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "controller": {"enum": list(CONTROLLERS)},
        "dimension": {"type": "integer", "minimum": 1},
        "graph": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "items": {"type": "integer", "minimum": 1},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
            },
            "required": ["n", "edges"],
            "additionalProperties": False,
        },
        "agents": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "x0": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "v0": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "objective": _FUNCTION_SCHEMA,
                    "constraint": _FUNCTION_SCHEMA,
                },
                "required": ["x0"],
                "additionalProperties": False,
            },
        },
        "alpha": {"type": "number"},
        "beta1": {"type": "number", "exclusiveMinimum": 0},
        "beta2": {"type": "number", "exclusiveMinimum": 0},
        "gamma1": {"type": "number", "exclusiveMinimum": 0},
        "gamma2": {"type": "number", "exclusiveMinimum": 0},
        "q": {"type": "number"},
        "a": {"type": "number", "exclusiveMinimum": 0},
        "b": {"type": "number", "exclusiveMinimum": 0},
        "c": {"type": "number", "exclusiveMinimum": 0},
        "sgn_epsilon": {"type": "number", "minimum": 0},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "method": {"enum": ["euler", "rk4"]},
        "log_stride": {"type": "integer", "minimum": 1},
        "delta0": {"type": "number", "exclusiveMinimum": 0},
        "delta1": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "notes": {"type": "string"},
        "kappa0": {"type": "array"},
        "zeta0": {"type": "array"},
        "xi0": {"type": "array"},
    },
    "required": ["controller", "dimension", "graph", "agents"],
    "additionalProperties": False,
}


@dataclass
class AgentSpec:
    """One agent: initial state plus local objective/constraint."""

    x0: np.ndarray
    v0: np.ndarray = None
    objective: SmoothFunction = None
    constraint: SmoothFunction = None


@dataclass
class Scenario:
    """Full simulation configuration; see :data:`SCENARIO_SCHEMA` for the
    JSON form.  ``dt=None`` resolves to 1e-3, or 1e-4 when exact signum
    estimators are active (``*_dat`` with ``sgn_epsilon == 0``)."""

    name: str
    controller: str
    dimension: int
    graph: Graph
    agents: list
    alpha: float = None
    beta1: float = None
    beta2: float = None
    gamma1: float = None
    gamma2: float = None
    q: float = None
    a: float = None
    b: float = None
    c: float = None
    sgn_epsilon: float = 0.0
    dt: float = None
    t_end: float = 30.0
    method: str = "euler"
    log_stride: int = 10
    delta0: float = 1e-2
    delta1: float = 1e-2
    seed: int = 0
    notes: str = ""
    kappa0: np.ndarray = None
    zeta0: np.ndarray = None
    xi0: np.ndarray = None

    @property
    def n_agents(self) -> int:
        return self.graph.n

    @property
    def is_double(self) -> bool:
        return self.controller in DOUBLE_CONTROLLERS

    @property
    def uses_barrier(self) -> bool:
        return self.controller in BARRIER_CONTROLLERS

    @property
    def resolved_dt(self) -> float:
        if self.dt is not None:
            return float(self.dt)
        exact_signum = self.controller.endswith("_dat") and self.sgn_epsilon == 0.0
        return 1e-4 if exact_signum else 1e-3

    def tanh_params(self) -> TanhConsensusParams:
        return TanhConsensusParams(beta1=self.beta1, beta2=self.beta2)

    def sig_params(self) -> SigConsensusParams:
        return SigConsensusParams(gamma1=self.gamma1, gamma2=self.gamma2, q=self.q)

    def barriers(self) -> list:
        return [BarrierLagrangian(a.objective, a.constraint, self.alpha)
                for a in self.agents]

    def validate(self):
        """Semantic checks; raises ScenarioError or InfeasibleStartError."""
        if self.controller not in CONTROLLERS:
            raise ScenarioError(f"unknown controller {self.controller!r}")
        if len(self.agents) != self.graph.n:
            raise ScenarioError(
                f"{len(self.agents)} agents for a graph on {self.graph.n} vertices")
        if not is_connected(self.graph) or (
                self.graph.n > 1 and lambda2(self.graph) <= CONNECTIVITY_TOL):
            raise ScenarioError("communication graph must be connected")
        n = self.dimension
        for idx, ag in enumerate(self.agents, start=1):
            ag.x0 = np.asarray(ag.x0, dtype=float)
            if ag.x0.shape != (n,):
                raise ScenarioError(f"agent {idx}: x0 must have length {n}")
            if self.is_double:
                ag.v0 = (np.zeros(n) if ag.v0 is None
                         else np.asarray(ag.v0, dtype=float))
                if ag.v0.shape != (n,):
                    raise ScenarioError(f"agent {idx}: v0 must have length {n}")
            elif ag.v0 is not None:
                raise ScenarioError(
                    f"agent {idx}: v0 given but {self.controller} agents are "
                    "single integrators")
        if self.uses_barrier:
            if self.alpha is None:
                raise ScenarioError(f"{self.controller} requires alpha")
            if not self.alpha > 1.0:
                raise ScenarioError(f"alpha must exceed 1, got {self.alpha}")
            for idx, ag in enumerate(self.agents, start=1):
                if ag.objective is None or ag.constraint is None:
                    raise ScenarioError(
                        f"agent {idx}: {self.controller} requires an objective "
                        "and a constraint per agent")
            infeasible = [(idx, ag.constraint.value(ag.x0))
                          for idx, ag in enumerate(self.agents, start=1)
                          if ag.constraint.value(ag.x0) >= 0.0]
            if infeasible:
                detail = ", ".join(f"agent {i}: g(x0) = {g:.6g}" for i, g in infeasible)
                raise InfeasibleStartError(
                    f"initial positions must be strictly feasible ({detail})")
        else:
            for idx, ag in enumerate(self.agents, start=1):
                if ag.objective is not None or ag.constraint is not None:
                    raise ScenarioError(
                        f"agent {idx}: nominal_double is barrier-free; remove "
                        "objective/constraint")
        if self.controller in SINGLE_CONTROLLERS:
            if self.beta1 is None or self.beta2 is None:
                raise ScenarioError(f"{self.controller} requires beta1 and beta2")
            self.tanh_params()
        if self.controller in DOUBLE_CONTROLLERS:
            if self.gamma1 is None or self.gamma2 is None or self.q is None:
                raise ScenarioError(f"{self.controller} requires gamma1, gamma2 and q")
            self.sig_params()
        if self.controller == "single_dat" and self.c is None:
            raise ScenarioError("single_dat requires the signum gain c")
        if self.controller == "double_dat" and (self.a is None or self.b is None):
            raise ScenarioError("double_dat requires the signum gains a and b")
        if not self.t_end > self.resolved_dt:
            raise ScenarioError("t_end must exceed dt")
        if self.method not in ("euler", "rk4"):
            raise ScenarioError(f"unknown method {self.method!r}")
        if self.sgn_epsilon < 0:
            raise ScenarioError("sgn_epsilon must be >= 0")


def scenario_from_dict(d: dict) -> Scenario:
    """Validate a raw scenario dictionary and build a :class:`Scenario`.

    Structural violations are reported with their JSON pointer path;
    semantic problems raise :class:`ScenarioError`, strictly infeasible
    initial positions :class:`InfeasibleStartError`.
    """
    import jsonschema

    if not isinstance(d, dict):
        raise ScenarioError(f"scenario must be a JSON object, got {type(d).__name__}")
    if "p" in d:
        raise ScenarioError(
            'the velocity exponent "p" is derived from q (p = 2q/(q+1)); '
            'configure "q" instead')
    try:
        jsonschema.validate(d, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ScenarioError(f"{e.json_path}: {e.message}") from None

    gd = d["graph"]
    try:
        graph = build_graph(gd["n"], [(i - 1, j - 1) for i, j in gd["edges"]])
    except ValueError as e:
        raise ScenarioError(f"$.graph: {e}") from None

    controller = d["controller"]
    dim = d["dimension"]
    needs_fn = controller in BARRIER_CONTROLLERS
    agents = []
    for idx, ad in enumerate(d["agents"]):
        obj = cons = None
        try:
            if "objective" in ad:
                obj = function_from_dict(ad["objective"], dim)
            if "constraint" in ad:
                cons = function_from_dict(ad["constraint"], dim)
        except (ValueError, KeyError) as e:
            raise ScenarioError(f"$.agents[{idx}]: {e}") from None
        if needs_fn and (obj is None or cons is None):
            raise ScenarioError(
                f"$.agents[{idx}]: {controller} requires objective and constraint")
        agents.append(AgentSpec(
            x0=np.asarray(ad["x0"], dtype=float),
            v0=None if "v0" not in ad else np.asarray(ad["v0"], dtype=float),
            objective=obj, constraint=cons))

    sc = Scenario(
        name=d.get("name", "scenario"),
        controller=controller,
        dimension=dim,
        graph=graph,
        agents=agents,
        alpha=d.get("alpha"),
        beta1=d.get("beta1"), beta2=d.get("beta2"),
        gamma1=d.get("gamma1"), gamma2=d.get("gamma2"), q=d.get("q"),
        a=d.get("a"), b=d.get("b"), c=d.get("c"),
        sgn_epsilon=d.get("sgn_epsilon", 0.0),
        dt=d.get("dt"), t_end=d.get("t_end", 30.0),
        method=d.get("method", "euler"),
        log_stride=d.get("log_stride", 10),
        delta0=d.get("delta0", 1e-2), delta1=d.get("delta1", 1e-2),
        seed=d.get("seed", 0),
        notes=d.get("notes", ""),
        kappa0=None if "kappa0" not in d else np.asarray(d["kappa0"], dtype=float),
        zeta0=None if "zeta0" not in d else np.asarray(d["zeta0"], dtype=float),
        xi0=None if "xi0" not in d else np.asarray(d["xi0"], dtype=float),
    )
    try:
        sc.validate()
    except (ScenarioError, InfeasibleStartError):
        raise
    except ValueError as e:
        raise ScenarioError(str(e)) from None
    return sc


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"{path}: invalid JSON at line {e.lineno}, "
                                f"column {e.colno}: {e.msg}") from None
    return scenario_from_dict(d)


@dataclass
class SimState:
    """Instantaneous simulation state.

    ``x``/``v`` are (N, n); estimator states are present only for the DAT
    controllers (``kappa`` single, ``zeta``/``xi`` double).
    """

    t: float
    x: np.ndarray
    v: np.ndarray = None
    kappa: np.ndarray = None
    zeta: np.ndarray = None
    xi: np.ndarray = None

    def copy(self) -> "SimState":
        cp = lambda a: None if a is None else a.copy()
        return SimState(self.t, self.x.copy(), cp(self.v), cp(self.kappa),
                        cp(self.zeta), cp(self.xi))


@dataclass
class TrajectoryLog:
    """Sampled trajectory, one entry per logged step.

    Arrays: ``times`` (K,), ``x``/``v``/``u`` (K, N, n), ``g`` (K, N),
    ``grad_sum_norm``/``consensus_err``/``kkt_residual``/
    ``estimator_residual`` (K,).  ``v`` is zero for single integrators;
    barrier-free rows hold NaN in ``g``, ``grad_sum_norm`` and
    ``kkt_residual``; ``estimator_residual`` is NaN for non-DAT controllers.

    The CSV form is long: one row per (time, agent, dimension) with 1-based
    agent and dimension columns and header
    ``t,agent,dim,x,v,u,g,grad_sum_norm,consensus_err,kkt_residual``.
    """

    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    u: np.ndarray
    g: np.ndarray
    grad_sum_norm: np.ndarray
    consensus_err: np.ndarray
    kkt_residual: np.ndarray
    estimator_residual: np.ndarray

    CSV_HEADER = ("t", "agent", "dim", "x", "v", "u", "g",
                  "grad_sum_norm", "consensus_err", "kkt_residual")

    def __len__(self) -> int:
        return self.times.size

    def to_csv(self, path):
        K, N, n = self.x.shape
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(self.CSV_HEADER)
            for k in range(K):
                for i in range(N):
                    for d in range(n):
                        w.writerow((
                            f"{self.times[k]:.17g}", i + 1, d + 1,
                            f"{self.x[k, i, d]:.17g}",
                            f"{self.v[k, i, d]:.17g}",
                            f"{self.u[k, i, d]:.17g}",
                            f"{self.g[k, i]:.17g}",
                            f"{self.grad_sum_norm[k]:.17g}",
                            f"{self.consensus_err[k]:.17g}",
                            f"{self.kkt_residual[k]:.17g}",
                        ))

    @classmethod
    def from_csv(cls, path) -> "TrajectoryLog":
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
        data = np.atleast_1d(data)
        if data.size == 0 or data.dtype.names is None:
            raise ValueError(f"{path}: empty or headerless trajectory CSV")
        missing = [c for c in cls.CSV_HEADER if c not in data.dtype.names]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        times = np.unique(data["t"])
        N = int(data["agent"].max())
        n = int(data["dim"].max())
        K = times.size
        if data.shape[0] != K * N * n:
            raise ValueError(f"{path}: ragged trajectory CSV")
        order = np.lexsort((data["dim"], data["agent"], data["t"]))
        d = data[order]
        shape = (K, N, n)
        per_time = d["g"].reshape(K, N, n)[:, :, 0]
        return cls(
            times=times,
            x=d["x"].reshape(shape), v=d["v"].reshape(shape),
            u=d["u"].reshape(shape), g=per_time,
            grad_sum_norm=d["grad_sum_norm"].reshape(K, N, n)[:, 0, 0],
            consensus_err=d["consensus_err"].reshape(K, N, n)[:, 0, 0],
            kkt_residual=d["kkt_residual"].reshape(K, N, n)[:, 0, 0],
            estimator_residual=np.full(K, np.nan),
        )

    def max_pairwise_gap(self) -> np.ndarray:
        """Per-logged-step max over dimensions of (max_i - min_i)."""
        return (self.x.max(axis=1) - self.x.min(axis=1)).max(axis=1)

    def max_speed(self) -> np.ndarray:
        return np.abs(self.v).max(axis=(1, 2))


@dataclass
class RunSummary:
    """Run outcome record; ``to_dict`` yields a JSON-ready structure."""

    name: str
    controller: str
    n_agents: int
    dimension: int
    dt: float
    t_end: float
    method: str
    log_stride: int
    seed: int
    n_steps: int
    wall_time_s: float
    aborted: dict = None
    n_backtracks: int = 0
    max_backtrack_depth: int = 0
    final_positions: np.ndarray = None
    final_velocities: np.ndarray = None
    mean_final_position: np.ndarray = None
    final_consensus_error: float = math.nan
    tail_consensus_error: float = math.nan
    final_max_gap: float = math.nan
    final_max_speed: float = math.nan
    settling_time_consensus: float = None
    settling_time_stationary: float = None
    final_grad_sum_norm: float = math.nan
    final_kkt: dict = None
    feasibility_min_margin: float = math.nan
    estimator: dict = None
    gains_audit: dict = None
    warnings: list = field(default_factory=list)
    notes: str = ""

    def to_dict(self) -> dict:
        def conv(x):
            if isinstance(x, np.ndarray):
                return x.tolist()
            if isinstance(x, (np.floating, np.integer)):
                x = x.item()
            if isinstance(x, float) and not math.isfinite(x):
                return None  # NaN/inf have no strict-JSON form
            if isinstance(x, dict):
                return {k: conv(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [conv(v) for v in x]
            return x

        return {k: conv(v) for k, v in self.__dict__.items()}

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


class _AbortRun(Exception):
    def __init__(self, reason: str, t: float, agent=None):
        super().__init__(reason)
        self.reason = reason
        self.t = t
        self.agent = agent


def _spread(a: np.ndarray) -> float:
    """Max over components of (max over agents - min over agents)."""
    return float((a.max(axis=0) - a.min(axis=0)).max())


def _bsolve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A[i] y[i] = B[i] for stacks A (N, n, n), B (N, n)."""
    n = A.shape[-1]
    if n == 1:
        return B / A[:, :, 0]
    if n == 2:
        # Cramer's rule; the per-step LAPACK dispatch dominates at this size.
        det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
        out = np.empty_like(B)
        out[:, 0] = (A[:, 1, 1] * B[:, 0] - A[:, 0, 1] * B[:, 1]) / det
        out[:, 1] = (A[:, 0, 0] * B[:, 1] - A[:, 1, 0] * B[:, 0]) / det
        return out
    return np.linalg.solve(A, B[:, :, None])[:, :, 0]


class _QuadBatch:
    """Stacked coefficients of per-agent polynomials f(x) = x@A@x + b@x + c."""

    def __init__(self, coeffs):
        self.A = np.stack([c[0] for c in coeffs])
        self.b = np.stack([c[1] for c in coeffs])
        self.c = np.array([c[2] for c in coeffs])
        self.H = 2.0 * self.A

    def value(self, X: np.ndarray) -> np.ndarray:
        return (np.einsum("ni,nij,nj->n", X, self.A, X)
                + np.einsum("ni,ni->n", X, self.b) + self.c)

    def grad(self, X: np.ndarray) -> np.ndarray:
        return 2.0 * np.einsum("nij,nj->ni", self.A, X) + self.b


def _cond_guard_batch(H: np.ndarray, t: float):
    """Abort-level guard: symmetric batched condition estimate vs the limit."""
    n = H.shape[-1]
    if n == 1:
        lo = hi = np.abs(H[:, 0, 0])
        bad = lo == 0.0
    elif n == 2:
        a = H[:, 0, 0]
        b = H[:, 0, 1]
        c = H[:, 1, 1]
        root = np.sqrt((a - c) ** 2 + 4.0 * b * b)
        lam1 = np.abs((a + c + root) / 2.0)
        lam2 = np.abs((a + c - root) / 2.0)
        hi = np.maximum(lam1, lam2)
        lo = np.minimum(lam1, lam2)
        bad = lo * 1e12 <= hi
    else:
        vals = np.abs(np.linalg.eigvalsh(H))
        hi = vals[:, -1]
        lo = vals[:, 0]
        bad = lo * 1e12 <= hi
    if not np.isfinite(H).all():
        raise SingularHessianError(f"non-finite Hessian entries at t={t:.6g}")
    if bad.any():
        agent = int(np.argmax(bad))
        raise SingularHessianError(
            f"Hessian condition limit exceeded for agent {agent + 1} at t={t:.6g}")


class _Runtime:
    """Compiled per-run context: graph operators, dispatch, margins."""

    def __init__(self, sc: Scenario):
        sc.validate()
        self.sc = sc
        self.N = sc.graph.n
        self.n = sc.dimension
        self.D = incidence(sc.graph)
        self.DT = self.D.T.copy()
        self.controller = sc.controller
        self.eps = sc.sgn_epsilon
        self.double = sc.is_double
        if sc.uses_barrier:
            self.barriers = sc.barriers()
            obj_coeffs = [a.objective.quadratic_coefficients() for a in sc.agents]
            con_coeffs = [a.constraint.quadratic_coefficients() for a in sc.agents]
            self.batched = (all(c is not None for c in obj_coeffs)
                            and all(c is not None for c in con_coeffs))
            if self.batched:
                self.fq = _QuadBatch(obj_coeffs)
                self.gq = _QuadBatch(con_coeffs)
            self.alpha = sc.alpha
        else:
            self.barriers = None
            self.batched = True
        if self.controller in SINGLE_CONTROLLERS:
            self.tanh = sc.tanh_params()
        if self.controller in DOUBLE_CONTROLLERS:
            self.sig = sc.sig_params()
            self.p_exp = self.sig.p
        self.sqrt_lambda2 = math.sqrt(lambda2(sc.graph))
        self._rhs = getattr(self, "_rhs_" + self.controller)
        # running audit measurements
        self.drive_spread = 0.0
        self.sup_kappa = 0.0
        self.sup_zeta = 0.0
        self.sup_xi = 0.0
        self.n_backtracks = 0
        self.max_depth = 0

    # -- initial state ----------------------------------------------------

    def initial_state(self) -> SimState:
        sc = self.sc
        X = np.stack([a.x0 for a in sc.agents]).astype(float)
        V = (np.stack([a.v0 for a in sc.agents]).astype(float)
             if self.double else None)
        kappa = zeta = xi = None
        if self.controller == "single_dat":
            P = payload_size_single(self.n)
            kappa = np.zeros((self.N, P)) if sc.kappa0 is None else sc.kappa0.copy()
            if kappa.shape != (self.N, P):
                raise ScenarioError(f"kappa0 must have shape ({self.N}, {P})")
        if self.controller == "double_dat":
            zeta = (np.zeros((self.N, 4 * self.n)) if sc.zeta0 is None
                    else sc.zeta0.copy())
            xi = (np.zeros((self.N, 2 * self.n * self.n)) if sc.xi0 is None
                  else sc.xi0.copy())
            if zeta.shape != (self.N, 4 * self.n):
                raise ScenarioError(f"zeta0 must have shape ({self.N}, {4 * self.n})")
            if xi.shape != (self.N, 2 * self.n * self.n):
                raise ScenarioError(
                    f"xi0 must have shape ({self.N}, {2 * self.n * self.n})")
        return SimState(t=0.0, x=X, v=V, kappa=kappa, zeta=zeta, xi=xi)

    # -- barrier partial batches ------------------------------------------

    def _first_second(self, X: np.ndarray, t: float):
        """Batched (g, G1, M, lx, ltx, lxx) at all agents; raises on g >= 0."""
        g = self.gq.value(X)
        if np.any(g >= 0.0):
            agent = int(np.argmax(g))
            raise InfeasiblePointError(
                f"agent {agent + 1}: g(x) = {g[agent]:.6g} >= 0 at t={t:.6g}")
        invg = 1.0 / g
        G1 = self.gq.grad(X) * invg[:, None]
        M = self.gq.H * invg[:, None, None] - G1[:, :, None] * G1[:, None, :]
        w = self.alpha / (t + 1.0)
        lx = self.fq.grad(X) - w * G1
        ltx = (w / (t + 1.0)) * G1
        lxx = self.fq.H - w * M
        _cond_guard_batch(lxx, t)
        return g, invg, G1, M, w, lx, ltx, lxx

    def _third_terms(self, X, V, t, invg, G1, M, w, lxx):
        """Batched lxxt, lttx, and d(lxx)/dt = third[v] + lxxt (polynomials)."""
        lxxt = (w / (t + 1.0)) * M
        lttx = (-2.0 * w / (t + 1.0) ** 2) * G1
        G1V = np.einsum("ni,ni->n", G1, V)
        HgV = np.einsum("nij,nj->ni", self.gq.H, V)
        h1 = HgV * invg[:, None] - G1 * G1V[:, None]
        dM = (-(self.gq.H * invg[:, None, None]) * G1V[:, None, None]
              - h1[:, :, None] * G1[:, None, :] - G1[:, :, None] * h1[:, None, :])
        third_v = -w * dM
        dlxx = third_v + lxxt
        return lxxt, lttx, dlxx

    # -- per-agent (generic) barrier helpers -------------------------------

    def _partials_list(self, X, t):
        from .calculus import barrier_partials

        return [barrier_partials(b, X[i], t) for i, b in enumerate(self.barriers)]

    def _gvals(self, X) -> np.ndarray:
        if self.batched:
            return self.gq.value(X)
        return np.array([b.constraint.value(X[i]) for i, b in enumerate(self.barriers)])

    # -- right-hand sides ---------------------------------------------------
    # Each returns (derivs tuple matching the state layout, diag dict).

    def _rhs_single_common(self, t, X, V, KAP, ZET, XI):
        if self.batched:
            g, invg, G1, M, w, lx, ltx, lxx = self._first_second(X, t)
            omega = _bsolve(lxx, -(lx + ltx))
            R = -self.tanh.beta1 * (self.D @ np.tanh(self.tanh.beta2 * (self.DT @ X)))
            U = omega + R
        else:
            ps = self._partials_list(X, t)
            g = self._gvals(X)
            lx = np.stack([p.lx for p in ps])
            R = tanh_consensus(self.tanh, self.sc.graph, X)
            U = np.stack([control_single_common(b, X[i], t, R[i])
                          for i, b in enumerate(self.barriers)])
            omega = U - R
        return (U, None, None, None, None), {"u": U, "lx": lx, "g": g,
                                             "drive": omega, "est": None}

    def _rhs_single_dat(self, t, X, V, KAP, ZET, XI):
        if self.batched:
            g, invg, G1, M, w, lx, ltx, lxx = self._first_second(X, t)
            payload = np.concatenate(
                [lx, ltx, lxx.reshape(self.N, self.n * self.n)], axis=1)
            NU = KAP + payload
            dKAP = -self.sc.c * (self.D @ signum(self.DT @ NU, self.eps))
            nu1 = NU[:, :self.n]
            nu2 = NU[:, self.n:2 * self.n]
            H = NU[:, 2 * self.n:].reshape(self.N, self.n, self.n)
            _cond_guard_batch(H, t)
            R = -self.tanh.beta1 * (self.D @ np.tanh(self.tanh.beta2 * (self.DT @ X)))
            drive = -_bsolve(H, nu1 + nu2)
            U = drive + R
        else:
            g = self._gvals(X)
            payload = np.stack([dat_signal_single(b, X[i], t)
                                for i, b in enumerate(self.barriers)])
            lx = payload[:, :self.n]
            state = DatStateSingle(kappa=KAP, c=self.sc.c)
            NU = KAP + payload
            dKAP = dat_rhs_single(state, self.sc.graph, NU, self.eps)
            R = tanh_consensus(self.tanh, self.sc.graph, X)
            U = np.stack([control_single_dat(NU[i], R[i]) for i in range(self.N)])
            drive = U - R
        return (U, None, dKAP, None, None), {"u": U, "lx": lx, "g": g,
                                             "drive": drive, "est": (NU,)}

    def _rhs_double_common(self, t, X, V, KAP, ZET, XI):
        if self.batched:
            g, invg, G1, M, w, lx, ltx, lxx = self._first_second(X, t)
            lxxt, lttx, dlxx = self._third_terms(X, V, t, invg, G1, M, w, lxx)
            m = lx + ltx
            k = _bsolve(lxx, m)
            dm = (np.einsum("nij,nj->ni", lxx, V) + ltx
                  + np.einsum("nij,nj->ni", lxxt, V) + lttx)
            kdot = _bsolve(lxx, dm - np.einsum("nij,nj->ni", dlxx, k))
            R = (-self.sig.gamma1 * (self.D @ sig_pow(self.DT @ X, self.sig.q))
                 - self.sig.gamma2 * sig_pow(V, self.p_exp))
            drive = -kdot - np.einsum("nij,nj->ni", lxx, lx)
            U = drive + R
        else:
            ps = self._partials_list(X, t)
            g = self._gvals(X)
            lx = np.stack([p.lx for p in ps])
            R = sig_consensus(self.sig, self.sc.graph, X, V)
            U = np.stack([control_double_common(b, X[i], V[i], t, R[i])
                          for i, b in enumerate(self.barriers)])
            drive = U - R
        return (V, U, None, None, None), {"u": U, "lx": lx, "g": g,
                                          "drive": drive, "est": None}

    def _rhs_double_dat(self, t, X, V, KAP, ZET, XI):
        if self.batched:
            g, invg, G1, M, w, lx, ltx, lxx = self._first_second(X, t)
            lxxt, lttx, dlxx = self._third_terms(X, V, t, invg, G1, M, w, lxx)
            dlx = np.einsum("nij,nj->ni", lxx, V) + ltx
            dltx = np.einsum("nij,nj->ni", lxxt, V) + lttx
            nn = self.n * self.n
            CHI = ZET + np.concatenate([lx, ltx, dlx, dltx], axis=1)
            MU = XI + np.concatenate(
                [lxx.reshape(self.N, nn), dlxx.reshape(self.N, nn)], axis=1)
            dZET = -self.sc.a * (self.D @ signum(self.DT @ CHI, self.eps))
            dXI = -self.sc.b * (self.D @ signum(self.DT @ MU, self.eps))
            c1 = CHI[:, :self.n]
            c2 = CHI[:, self.n:2 * self.n]
            c34 = CHI[:, 2 * self.n:3 * self.n] + CHI[:, 3 * self.n:]
            H = MU[:, :nn].reshape(self.N, self.n, self.n)
            Hdot = MU[:, nn:].reshape(self.N, self.n, self.n)
            _cond_guard_batch(H, t)
            khat = _bsolve(H, c1 + c2)
            drive = (_bsolve(H, np.einsum("nij,nj->ni", Hdot, khat) - c34)
                     - np.einsum("nij,nj->ni", H, c1))
            R = (-self.sig.gamma1 * (self.D @ sig_pow(self.DT @ X, self.sig.q))
                 - self.sig.gamma2 * sig_pow(V, self.p_exp))
            U = drive + R
        else:
            g = self._gvals(X)
            pairs = [dat_signals_double(b, X[i], V[i], t)
                     for i, b in enumerate(self.barriers)]
            lx = np.stack([barrier_chi[:self.n] for barrier_chi, _ in pairs])
            CHI = ZET + np.stack([c for c, _ in pairs])
            MU = XI + np.stack([m for _, m in pairs])
            state = DatStateDouble(zeta=ZET, xi=XI, a=self.sc.a, b=self.sc.b)
            dZET, dXI = dat_rhs_double(state, self.sc.graph, CHI, MU, self.eps)
            R = sig_consensus(self.sig, self.sc.graph, X, V)
            U = np.stack([control_double_dat(CHI[i], MU[i], R[i])
                          for i in range(self.N)])
            drive = U - R
        return (V, U, None, dZET, dXI), {"u": U, "lx": lx, "g": g,
                                         "drive": drive, "est": (CHI, MU)}

    def _rhs_nominal_double(self, t, X, V, KAP, ZET, XI):
        R = (-self.sig.gamma1 * (self.D @ sig_pow(self.DT @ X, self.sig.q))
             - self.sig.gamma2 * sig_pow(V, self.p_exp))
        return (V, R, None, None, None), {"u": R, "lx": None, "g": None,
                                          "drive": None, "est": None}

    # -- stepping -----------------------------------------------------------

    @staticmethod
    def _axpy(st, d, h):
        return tuple(None if s is None else s + h * ds for s, ds in zip(st, d))

    def _combine(self, t, st, h, d1):
        """One explicit step of the configured method from (t, st).

        Returns the proposal, or None if an RK4 stage left the feasible set.
        """
        if self.sc.method == "euler":
            return self._axpy(st, d1, h)
        try:
            k2 = self._rhs(t + h / 2, *self._axpy(st, d1, h / 2))[0]
            k3 = self._rhs(t + h / 2, *self._axpy(st, k2, h / 2))[0]
            k4 = self._rhs(t + h, *self._axpy(st, k3, h))[0]
        except InfeasiblePointError:
            return None
        out = []
        for s, a, b_, c_, d_ in zip(st, d1, k2, k3, k4):
            if s is None:
                out.append(None)
            else:
                out.append(s + (h / 6.0) * (a + 2.0 * b_ + 2.0 * c_ + d_))
        return tuple(out)

    def _acceptable(self, prop, t):
        """Finite and strictly feasible; returns (ok, hard_abort_reason)."""
        X = prop[0]
        if not np.isfinite(X).all() or (prop[1] is not None
                                        and not np.isfinite(prop[1]).all()):
            return False, "non-finite state"
        if self.barriers is not None:
            if np.any(self._gvals(X) >= 0.0):
                return False, None
        return True, None

    def _advance(self, t, st, h, d1, depth):
        prop = self._combine(t, st, h, d1)
        if prop is not None:
            ok, hard = self._acceptable(prop, t)
            if ok:
                return prop
            if hard is not None:
                raise _AbortRun(hard, t)
        if depth >= MAX_HALVINGS:
            X = prop[0] if prop is not None else st[0]
            g = self._gvals(X) if self.barriers is not None else None
            agent = None if g is None else int(np.argmax(g)) + 1
            raise _AbortRun(
                f"barrier breach unresolved after {MAX_HALVINGS} halvings", t, agent)
        if depth == 0:
            self.n_backtracks += 1
        h2 = h / 2.0
        mid = self._advance(t, st, h2, d1, depth + 1)
        self.max_depth = max(self.max_depth, depth + 1)
        d_mid = self._rhs(t + h2, *mid)[0]
        return self._advance(t + h2, mid, h2, d_mid, depth + 1)

    def update_margins(self, st, diag):
        if diag["drive"] is not None:
            self.drive_spread = max(self.drive_spread, _spread(diag["drive"]))
        if st[2] is not None:
            self.sup_kappa = max(self.sup_kappa, float(np.abs(st[2]).max()))
        if st[3] is not None:
            self.sup_zeta = max(self.sup_zeta, float(np.abs(st[3]).max()))
        if st[4] is not None:
            self.sup_xi = max(self.sup_xi, float(np.abs(st[4]).max()))

    def estimator_residual(self, diag) -> float:
        if diag["est"] is None:
            return math.nan
        worst = 0.0
        for sig_arr in diag["est"]:
            worst = max(worst, float(np.abs(sig_arr - sig_arr.mean(axis=0)).max()))
        return worst

    def kkt_composite(self, m: np.ndarray) -> float:
        """max(limit-KKT stationarity, worst violation) at the mean point."""
        res = oracle_mod.kkt_residual(
            [a.objective for a in self.sc.agents],
            [a.constraint for a in self.sc.agents], m)
        return max(res.stationarity, res.worst_violation)

    def gains_audit(self) -> dict:
        sc = self.sc
        audit = {}
        if self.controller in SINGLE_CONTROLLERS:
            bound = sc.beta1 * self.sqrt_lambda2
            audit["omega0"] = self.drive_spread
            audit["beta1_sqrt_lambda2"] = bound
            audit["tanh_margin"] = (math.inf if self.drive_spread == 0.0
                                    else bound / self.drive_spread)
        elif self.controller != "nominal_double":
            audit["phi0"] = self.drive_spread
        if self.controller == "single_dat":
            audit["c"] = sc.c
            audit["sup_kappa_inf"] = self.sup_kappa
            audit["c_margin"] = (math.inf if self.sup_kappa == 0.0
                                 else sc.c / self.sup_kappa)
        if self.controller == "double_dat":
            audit["a"] = sc.a
            audit["sup_zeta_inf"] = self.sup_zeta
            audit["a_margin"] = (math.inf if self.sup_zeta == 0.0
                                 else sc.a / self.sup_zeta)
            audit["b"] = sc.b
            audit["sup_xi_inf"] = self.sup_xi
            audit["b_margin"] = (math.inf if self.sup_xi == 0.0
                                 else sc.b / self.sup_xi)
        return audit


def initial_state(sc: Scenario) -> SimState:
    """Initial :class:`SimState` for a scenario (zero estimator states unless
    the scenario overrides them)."""
    return _Runtime(sc).initial_state()


def _state_tuple(state: SimState):
    return (state.x, state.v, state.kappa, state.zeta, state.xi)


def _state_from_tuple(t, st) -> SimState:
    return SimState(t=t, x=st[0], v=st[1], kappa=st[2], zeta=st[3], xi=st[4])


def step(state: SimState, sc: Scenario) -> SimState:
    """Advance one scenario step (dt) from ``state``, with backtracking.

    Convenience wrapper for unit-level use; :func:`run` drives whole
    trajectories with a single compiled runtime instead.
    """
    rt = _Runtime(sc)
    st = _state_tuple(state)
    d, _ = rt._rhs(state.t, *st)
    try:
        new = rt._advance(state.t, st, sc.resolved_dt, d, 0)
    except _AbortRun as e:
        raise RuntimeError(f"step aborted at t={e.t:.6g}: {e.reason}") from None
    return _state_from_tuple(state.t + sc.resolved_dt, new)


def feasibility_backtrack(state: SimState, proposed: SimState,
                          sc: Scenario) -> SimState:
    """Resolve a proposed step against the strict-feasibility requirement.

    If every agent satisfies ``g_i < 0`` at the proposal it is accepted
    unchanged; otherwise the step from ``state`` to ``proposed.t`` is retaken
    with recursive local halving (up to 20 levels).  Exhaustion raises
    ``RuntimeError`` identifying the worst agent and time.
    """
    rt = _Runtime(sc)
    if rt.barriers is None or not np.any(rt._gvals(proposed.x) >= 0.0):
        return proposed
    st = _state_tuple(state)
    h = proposed.t - state.t
    if h <= 0:
        raise ValueError("proposed state must lie after the current state")
    d, _ = rt._rhs(state.t, *st)
    try:
        new = rt._advance(state.t, st, h, d, 0)
    except _AbortRun as e:
        agent = "" if e.agent is None else f" (agent {e.agent})"
        raise RuntimeError(f"backtracking exhausted at t={e.t:.6g}{agent}: "
                           f"{e.reason}") from None
    return _state_from_tuple(proposed.t, new)


def run(sc: Scenario):
    """Simulate a scenario on its fixed grid.

    Returns
    -------
    (TrajectoryLog, RunSummary)
        The log is sampled every ``log_stride`` steps plus the final state;
        aborted runs keep the partial log and carry the abort record in the
        summary.  Gain-condition margins below 2x raise
        :class:`GainMarginWarning` and are listed in ``summary.warnings``.
    """
    rt = _Runtime(sc)
    dt = sc.resolved_dt
    n_steps = int(round(sc.t_end / dt))
    if not math.isclose(n_steps * dt, sc.t_end, rel_tol=1e-9, abs_tol=1e-12):
        raise ScenarioError(f"t_end={sc.t_end} is not a multiple of dt={dt}")
    stride = sc.log_stride
    K_cap = n_steps // stride + 2
    N, n = rt.N, rt.n

    times = np.zeros(K_cap)
    xs = np.zeros((K_cap, N, n))
    vs = np.zeros((K_cap, N, n))
    us = np.zeros((K_cap, N, n))
    gs = np.full((K_cap, N), np.nan)
    gsn = np.full(K_cap, np.nan)
    cerr = np.zeros(K_cap)
    kkt = np.full(K_cap, np.nan)
    est = np.full(K_cap, np.nan)

    state = rt.initial_state()
    st = _state_tuple(state)
    k_log = 0
    aborted = None
    wall0 = time.perf_counter()

    def log_row(idx, t, st_, diag):
        times[idx] = t
        xs[idx] = st_[0]
        if st_[1] is not None:
            vs[idx] = st_[1]
        us[idx] = diag["u"]
        if diag["g"] is not None:
            gs[idx] = diag["g"]
            gsn[idx] = np.linalg.norm(diag["lx"].sum(axis=0))
            kkt[idx] = rt.kkt_composite(st_[0].mean(axis=0))
        cerr[idx] = consensus_error(st_[0])
        est[idx] = rt.estimator_residual(diag)

    try:
        for k in range(n_steps):
            t = k * dt
            d, diag = rt._rhs(t, *st)
            if k % stride == 0:
                log_row(k_log, t, st, diag)
                k_log += 1
            rt.update_margins(st, diag)
            st = rt._advance(t, st, dt, d, 0)
        t = n_steps * dt
        d, diag = rt._rhs(t, *st)
        rt.update_margins(st, diag)
        log_row(k_log, t, st, diag)
        k_log += 1
    except (_AbortRun, SingularHessianError, InfeasiblePointError) as e:
        if isinstance(e, _AbortRun):
            aborted = {"reason": e.reason, "t": e.t, "agent": e.agent}
        else:
            aborted = {"reason": str(e), "t": float(t), "agent": None}
    wall = time.perf_counter() - wall0

    log = TrajectoryLog(
        times=times[:k_log], x=xs[:k_log], v=vs[:k_log], u=us[:k_log],
        g=gs[:k_log], grad_sum_norm=gsn[:k_log], consensus_err=cerr[:k_log],
        kkt_residual=kkt[:k_log], estimator_residual=est[:k_log])

    summary = _summarize(sc, rt, log, aborted, n_steps, dt, wall)
    for msg in summary.warnings:
        warnings.warn(GainMarginWarning(msg))
    return log, summary


def _settle_index(flags: np.ndarray):
    """First index from which ``flags`` stays True through the end."""
    if flags.size == 0 or not flags[-1]:
        return None
    bad = np.nonzero(~flags)[0]
    return 0 if bad.size == 0 else int(bad[-1]) + 1


def _summarize(sc, rt, log, aborted, n_steps, dt, wall) -> RunSummary:
    s = RunSummary(
        name=sc.name, controller=sc.controller, n_agents=sc.graph.n,
        dimension=sc.dimension, dt=dt, t_end=sc.t_end, method=sc.method,
        log_stride=sc.log_stride, seed=sc.seed, n_steps=n_steps,
        wall_time_s=wall, aborted=aborted, n_backtracks=rt.n_backtracks,
        max_backtrack_depth=rt.max_depth, notes=sc.notes)
    if len(log) == 0:
        return s
    gaps = log.max_pairwise_gap()
    s.final_positions = log.x[-1].copy()
    s.final_velocities = log.v[-1].copy() if sc.is_double else None
    s.mean_final_position = log.x[-1].mean(axis=0)
    s.final_consensus_error = float(log.consensus_err[-1])
    tail = log.times >= 0.75 * log.times[-1]
    # ultimate-bound surrogate: worst consensus error over the trailing quarter
    s.tail_consensus_error = float(log.consensus_err[tail].max())
    s.final_max_gap = float(gaps[-1])
    s.settling_time_consensus = None
    idx = _settle_index(gaps <= sc.delta0)
    if idx is not None:
        s.settling_time_consensus = float(log.times[idx])
    if sc.is_double:
        speeds = log.max_speed()
        s.final_max_speed = float(speeds[-1])
        idx = _settle_index((gaps <= sc.delta0) & (speeds <= sc.delta1))
        if idx is not None:
            s.settling_time_stationary = float(log.times[idx])
    if sc.uses_barrier:
        s.final_grad_sum_norm = float(log.grad_sum_norm[-1])
        s.feasibility_min_margin = float((-log.g).min())
        res = oracle_mod.kkt_residual(
            [a.objective for a in sc.agents], [a.constraint for a in sc.agents],
            log.x[-1].mean(axis=0))
        s.final_kkt = {"stationarity": res.stationarity,
                       "worst_violation": res.worst_violation,
                       "complementarity_bound": res.complementarity_bound}
    if sc.controller.endswith("_dat"):
        s.estimator = {"final_residual": float(log.estimator_residual[-1])}
        if sc.controller == "single_dat":
            s.estimator["sup_kappa_inf"] = rt.sup_kappa
        else:
            s.estimator["sup_zeta_inf"] = rt.sup_zeta
            s.estimator["sup_xi_inf"] = rt.sup_xi
    s.gains_audit = rt.gains_audit()
    audit = s.gains_audit
    for key, label in (("tanh_margin", "beta1*sqrt(lambda2) vs omega0"),
                       ("c_margin", "c vs sup||kappa||_inf"),
                       ("a_margin", "a vs sup||zeta||_inf"),
                       ("b_margin", "b vs sup||xi||_inf")):
        margin = audit.get(key)
        if margin is not None and margin < 2.0:
            s.warnings.append(
                f"{label} margin {margin:.3g} < 2: gain condition is thin")
    return s


def _sweep_worker(args):
    scenario_dict, param, value = args
    d = dict(scenario_dict)
    d[param] = value
    sc = scenario_from_dict(d)
    _, summary = run(sc)
    out = summary.to_dict()
    out["swept_param"] = param
    out["swept_value"] = value
    return out


def run_sweep(scenario_dict: dict, param: str, values, jobs: int = None) -> list:
    """Run one scenario per parameter value, in parallel processes.

    ``param`` must be one of :data:`SWEEPABLE_PARAMS`; returns the summary
    dictionaries in the order of ``values``.
    """
    if param not in SWEEPABLE_PARAMS:
        raise ScenarioError(
            f"cannot sweep {param!r}; choose one of {', '.join(SWEEPABLE_PARAMS)}")
    values = list(values)
    if not values:
        raise ScenarioError("sweep needs at least one value")
    # validate the base configuration once before forking workers
    base = dict(scenario_dict)
    base[param] = values[0]
    scenario_from_dict(base)
    tasks = [(scenario_dict, param, v) for v in values]
    if jobs == 1 or len(tasks) == 1:
        return [_sweep_worker(t) for t in tasks]
    import os
    from concurrent.futures import ProcessPoolExecutor

    workers = jobs or min(len(tasks), os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_sweep_worker, tasks))
