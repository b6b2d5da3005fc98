"""Command-line front end.

Subcommands
-----------
run      simulate a scenario file; writes ``trajectory.csv``,
         ``summary.json`` and SVG figures into the output directory
plot     re-render a figure from a previously written trajectory CSV
oracle   solve the scenario's centralized problem and print the JSON record
sweep    run one simulation per value of a scalar parameter, in parallel,
         and tabulate the summary metrics as CSV

Exit codes: 0 success, 1 dynamics abort / solver failure, 2 configuration
error, 3 infeasible initialization.  Defaults for ``--dt``, ``--t-end``,
``--seed``, ``--out``, ``--jobs`` and ``--tol`` may also be supplied through
``CONSENSIM_DT``, ``CONSENSIM_T_END``, ... environment variables; explicit
flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import engine, oracle
from .calculus import InfeasiblePointError
from .engine import InfeasibleStartError, ScenarioError, TrajectoryLog

EXIT_OK = 0
EXIT_ABORT = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

_SWEEP_COLUMNS = (
    "value", "aborted", "final_consensus_error", "tail_consensus_error",
    "final_max_gap", "final_max_speed", "settling_time_consensus",
    "settling_time_stationary", "final_grad_sum_norm", "wall_time_s",
)


def _env(name: str, cast, what: str):
    raw = os.environ.get("CONSENSIM_" + name)
    if raw is None:
        return None
    try:
        return cast(raw)
    except ValueError:
        raise ScenarioError(
            f"CONSENSIM_{name}={raw!r} is not a valid {what}") from None


def _load_raw(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ScenarioError(f"scenario file not found: {p}")
    with open(p, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"{p}: invalid JSON at line {e.lineno}, "
                                f"column {e.colno}: {e.msg}") from None


def _apply_overrides(d: dict, args) -> dict:
    d = dict(d)
    if args.dt is not None:
        d["dt"] = args.dt
    if args.t_end is not None:
        d["t_end"] = args.t_end
    if getattr(args, "seed", None) is not None:
        d["seed"] = args.seed
    return d


def cmd_run(args) -> int:
    d = _apply_overrides(_load_raw(args.scenario), args)
    sc = engine.scenario_from_dict(d)
    out = Path(args.out) if args.out else Path("runs") / sc.name
    out.mkdir(parents=True, exist_ok=True)
    log, summary = engine.run(sc)
    log.to_csv(out / "trajectory.csv")
    summary.save(out / "summary.json")
    from .plots import render_run_figures

    figures = render_run_figures(log, out, sc.is_double)
    written = [str(out / "trajectory.csv"), str(out / "summary.json"), *figures]
    if summary.aborted:
        rec = summary.aborted
        agent = "" if rec["agent"] is None else f" (agent {rec['agent']})"
        print(f"run aborted at t={rec['t']:.6g}{agent}: {rec['reason']}",
              file=sys.stderr)
        print("partial outputs: " + ", ".join(written))
        return EXIT_ABORT
    print(f"run '{sc.name}' finished: {summary.n_steps} steps of dt={summary.dt} "
          f"in {summary.wall_time_s:.2f}s")
    print(f"  final consensus error {summary.final_consensus_error:.3e}, "
          f"max gap {summary.final_max_gap:.3e}")
    for w in summary.warnings:
        print(f"  warning: {w}", file=sys.stderr)
    print("wrote " + ", ".join(written))
    return EXIT_OK


def cmd_plot(args) -> int:
    log = TrajectoryLog.from_csv(args.csv)
    out = Path(args.out) if args.out else Path(f"{args.kind}.svg")
    from . import plots

    if args.kind == "positions_2d":
        if log.x.shape[2] != 2:
            raise ScenarioError(
                f"positions_2d needs planar states, log has dimension "
                f"{log.x.shape[2]}")
        plots.plot_positions_2d(log, out)
    else:
        plots.plot_velocities(log, out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    d = _load_raw(args.scenario)
    sc = engine.scenario_from_dict(d)
    if not sc.uses_barrier:
        raise ScenarioError(
            f"{sc.controller} scenarios have no constrained problem to solve")
    objectives = [a.objective for a in sc.agents]
    constraints = [a.constraint for a in sc.agents]
    if args.x0 is not None:
        try:
            x0 = [float(v) for v in args.x0.split(",")]
        except ValueError:
            raise ScenarioError(f"--x0 must be comma-separated floats, "
                                f"got {args.x0!r}") from None
        if len(x0) != sc.dimension:
            raise ScenarioError(f"--x0 needs {sc.dimension} components")
    else:
        import numpy as np

        x0 = np.stack([a.x0 for a in sc.agents]).mean(axis=0)
    result = oracle.solve_centralized(objectives, constraints, x0, tol=args.tol)
    record = {
        "scenario": sc.name,
        "tol": args.tol,
        "optimum": result.to_dict(),
        "kkt_at_optimum": oracle.kkt_residual(
            objectives, constraints, result.x).to_dict(),
    }
    text = json.dumps(record, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    d = _apply_overrides(_load_raw(args.scenario), args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ScenarioError(
            f"--values must be comma-separated floats, got {args.values!r}"
        ) from None
    summaries = engine.run_sweep(d, args.param, values, jobs=args.jobs)
    out = Path(args.out) if args.out else Path(f"sweep_{args.param}.csv")
    rows = []
    for s in summaries:
        rows.append({
            "value": s["swept_value"],
            "aborted": "" if s["aborted"] is None else s["aborted"]["reason"],
            **{k: s.get(k) for k in _SWEEP_COLUMNS[2:]},
        })
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(",".join((args.param,) + _SWEEP_COLUMNS[1:]) + "\n")
        for r in rows:
            fh.write(",".join("" if r[c] is None else str(r[c])
                              for c in _SWEEP_COLUMNS) + "\n")
    width = max(len(args.param), 10)
    print(f"{args.param:>{width}}  tail_consensus_error  aborted")
    for r in rows:
        tail = r["tail_consensus_error"]
        tail_s = "-" if tail is None else f"{tail:.6e}"
        print(f"{r['value']:>{width}.6g}  {tail_s:>20}  {r['aborted'] or '-'}")
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consensim",
        description="Distributed constrained-consensus simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=True):
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--dt", type=float, default=_env("DT", float, "float"),
                       help="integration step override")
        p.add_argument("--t-end", type=float,
                       default=_env("T_END", float, "float"),
                       help="horizon override")
        if seed:
            p.add_argument("--seed", type=int,
                           default=_env("SEED", int, "integer"),
                           help="seed recorded in the summary")

    p_run = sub.add_parser("run", help="simulate a scenario")
    add_common(p_run)
    p_run.add_argument("--out", default=_env("OUT", str, "path"),
                       help="output directory (default runs/<name>)")
    p_run.set_defaults(func=cmd_run)

    p_plot = sub.add_parser("plot", help="render a figure from a trajectory CSV")
    p_plot.add_argument("csv", help="trajectory.csv from a previous run")
    p_plot.add_argument("kind", choices=["positions_2d", "velocities"])
    p_plot.add_argument("--out", default=None, help="output SVG path")
    p_plot.set_defaults(func=cmd_plot)

    p_oracle = sub.add_parser(
        "oracle", help="solve the centralized problem for a scenario")
    p_oracle.add_argument("scenario", help="scenario JSON file")
    p_oracle.add_argument("--tol", type=float,
                          default=_env("TOL", float, "float") or 1e-8,
                          help="duality-gap tolerance (default 1e-8)")
    p_oracle.add_argument("--x0", default=None,
                          help="comma-separated start (default: mean of agent "
                               "initial positions)")
    p_oracle.add_argument("--out", default=None, help="write JSON here instead "
                                                      "of stdout")
    p_oracle.set_defaults(func=cmd_oracle)

    p_sweep = sub.add_parser(
        "sweep", help="re-run a scenario across values of one parameter")
    add_common(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         choices=list(engine.SWEEPABLE_PARAMS))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated parameter values")
    p_sweep.add_argument("--jobs", type=int,
                         default=_env("JOBS", int, "integer"),
                         help="parallel worker processes")
    p_sweep.add_argument("--out", default=_env("OUT", str, "path"),
                         help="summary CSV path (default sweep_<param>.csv)")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
    except ScenarioError as e:  # malformed CONSENSIM_* environment value
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleStartError, InfeasiblePointError) as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ScenarioError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as e:
        print(f"aborted: {e}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
