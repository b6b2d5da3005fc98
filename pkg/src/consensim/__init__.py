"""Distributed constrained optimal-consensus simulations.

Networked single- and double-integrator agents steer, via consensus coupling
plus time-decaying log-barrier terms (optionally reconstructed through
distributed average tracking), toward the minimizer of the sum of their
private objectives inside the intersection of their private constraint sets.
A centralized interior-point solver provides the reference optimum.
"""

from .calculus import (
    AffineFunction,
    BarrierLagrangian,
    BarrierPartials,
    InfeasiblePointError,
    QuadraticFunction,
    SingularHessianError,
    SmoothFunction,
    barrier_partials,
    barrier_third,
    function_from_dict,
    k_total_derivative,
    newton_direction,
)
from .engine import (
    AgentSpec,
    GainMarginWarning,
    InfeasibleStartError,
    RunSummary,
    Scenario,
    ScenarioError,
    SimState,
    TrajectoryLog,
    feasibility_backtrack,
    initial_state,
    load_scenario,
    run,
    run_sweep,
    scenario_from_dict,
    step,
)
from .graph import (
    Graph,
    build_graph,
    consensus_error,
    incidence,
    is_connected,
    lambda2,
    laplacian,
    path_graph,
    projector,
)
from .oracle import (
    KktResidual,
    OracleResult,
    kkt_residual,
    solve_centralized,
    total_objective,
)
from .protocols_double import (
    DatStateDouble,
    SigConsensusParams,
    control_double_common,
    control_double_dat,
    dat_rhs_double,
    dat_signals_double,
    nominal_double_rhs,
    nominal_energy,
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

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # graph
    "Graph", "build_graph", "path_graph", "incidence", "laplacian", "lambda2",
    "projector", "consensus_error", "is_connected",
    # calculus
    "SmoothFunction", "QuadraticFunction", "AffineFunction",
    "BarrierLagrangian", "BarrierPartials", "barrier_partials",
    "barrier_third", "newton_direction", "k_total_derivative",
    "function_from_dict", "InfeasiblePointError", "SingularHessianError",
    # single-integrator protocols
    "TanhConsensusParams", "DatStateSingle", "signum", "tanh_consensus",
    "control_single_common", "dat_signal_single", "dat_rhs_single",
    "control_single_dat", "payload_size_single",
    # double-integrator protocols
    "SigConsensusParams", "DatStateDouble", "sig_pow", "sig_consensus",
    "nominal_double_rhs", "nominal_energy", "control_double_common",
    "dat_signals_double", "dat_rhs_double", "control_double_dat",
    # engine
    "Scenario", "AgentSpec", "SimState", "TrajectoryLog", "RunSummary",
    "ScenarioError", "InfeasibleStartError", "GainMarginWarning",
    "scenario_from_dict", "load_scenario", "initial_state", "step",
    "feasibility_backtrack", "run", "run_sweep",
    # oracle
    "OracleResult", "KktResidual", "solve_centralized", "kkt_residual",
    "total_objective",
]
