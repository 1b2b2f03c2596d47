"""Command-line front end.

Subcommands:
  run        simulate a scenario file, writing CSV, report, and SVG plots
  bounds     print gain design, graph constants, and residual-set bounds
  drift-demo run a scenario with and without gain leakage and compare

Exit codes: 0 success, 2 validation failure, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import bounds as bounds_mod
from .graph import laplacian, leader_constants, partition_leader, strong_constants
from .numerics import ConvergenceError
from .scenario_io import ScenarioFile, ScenarioFormatError, load_scenario_file
from .sim import SimulationDivergence, nonrobust_twin, simulate, tail_sup_norm, write_trajectory_csv
from .svgplot import line_plot

__all__ = ["RunReport", "main", "main_entry"]


@dataclass(frozen=True)
class RunReport:
    """Everything a run prints: design echo, constants, verdicts."""

    scenario: str
    variant: str
    mode: str
    n_agents: int
    design: dict
    graph: dict
    bound: dict | None
    observed: dict
    containment: dict | None
    gain_min: float
    gain_max: float
    wall_clock_s: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _listify(m: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.atleast_2d(m)]


def _design_dict(design) -> dict:
    return {
        "q": _listify(design.q),
        "k": _listify(design.k),
        "gamma": _listify(design.gamma),
        "tau": float(design.tau),
    }


def _graph_dict(scenario) -> dict:
    lap = scenario.lap_matrix
    if scenario.mode == "leader":
        lc = leader_constants(partition_leader(lap))
        return {
            "q": [float(v) for v in lc.q],
            "lambda_hat0": float(lc.lambda_hat0),
        }
    sc = strong_constants(lap)
    return {
        "r": [float(v) for v in sc.r],
        "lambda2_hat": float(sc.lambda2_hat),
    }


def _bound_for(scenario):
    """Residual-set bound for a robust scenario, else None."""
    if not scenario.protocol.variant.robust:
        return None
    phi = scenario.protocol.phi
    upsilon = scenario.upsilon()
    lap = scenario.lap_matrix
    if scenario.mode == "leader":
        lc = leader_constants(partition_leader(lap))
        return bounds_mod.leader_bound(lc, scenario.design, phi, upsilon)
    sc = strong_constants(lap)
    return bounds_mod.leaderless_bound(sc, scenario.design, phi, upsilon)


def _bound_dict(bd) -> dict:
    d = {}
    if isinstance(bd, bounds_mod.LeaderBound):
        d["delta"] = bd.delta
        d["alpha"] = bd.alpha
        d["pi"] = bd.pi
    else:
        d["epsilon"] = bd.epsilon
        d["beta"] = bd.beta
        d["xi"] = bd.xi
    d["tau"] = bd.tau
    d["radius_sq"] = bd.radius_sq
    d["applicable"] = bd.applicable
    return d


def _section(title: str, pairs) -> list[str]:
    lines = [f"{title}:"]
    for key, val in pairs:
        lines.append(f"  {key} = {val}")
    return lines


def _report_text(rep: RunReport) -> str:
    lines = [
        f"scenario: {rep.scenario}",
        f"variant: {rep.variant}",
        f"agents: {rep.n_agents} ({rep.mode} mode)",
    ]
    lines += _section("design", rep.design.items())
    lines += _section("graph", rep.graph.items())
    if rep.bound is not None:
        lines += _section("bound", rep.bound.items())
    else:
        lines.append("bound: none (non-robust protocol; no residual-set claim)")
    lines += _section("observed", rep.observed.items())
    if rep.containment is not None:
        lines += _section("containment", rep.containment.items())
    lines.append(f"gain_min = {rep.gain_min}")
    lines.append(f"gain_max = {rep.gain_max}")
    lines.append(f"wall_clock_s = {rep.wall_clock_s}")
    lines.append("JSON: " + json.dumps(rep.as_dict()))
    return "\n".join(lines) + "\n"


def _apply_overrides(sf: ScenarioFile, args) -> ScenarioFile:
    if getattr(args, "seed", None) is not None:
        sf = dataclasses.replace(
            sf, x0_seed=args.seed, gain_seed=args.seed + 1, x0=None, initial_gains=None
        )
    if getattr(args, "step", None) is not None:
        sf = dataclasses.replace(sf, step_h=args.step)
    return sf


def _gain_labels(scenario) -> list[str]:
    if scenario.mode == "leader":
        return [f"c_{i + 2}" for i in range(scenario.n_agents - 1)]
    return [f"d_{i + 1}" for i in range(scenario.n_agents)]


def cmd_run(args) -> int:
    sf = _apply_overrides(load_scenario_file(args.scenario), args)
    scenario = sf.build()
    os.makedirs(args.out, exist_ok=True)
    name = os.path.splitext(os.path.basename(args.scenario))[0]

    t0 = time.perf_counter()
    traj = simulate(scenario)
    wall = time.perf_counter() - t0

    csv_path = os.path.join(args.out, sf.output.csv)
    write_trajectory_csv(traj, csv_path)

    bd = _bound_for(scenario)
    tail = tail_sup_norm(traj)
    observed = {
        "final_err": float(traj.err_norms[-1]),
        "tail_sup_err": float(tail),
    }
    containment = None
    if bd is not None and bd.applicable:
        rep_c = bounds_mod.check_containment(traj, bd)
        containment = {
            "observed_sq": rep_c.observed_sq,
            "bound_sq": rep_c.bound_sq,
            "contained": rep_c.contained,
            "slack_ratio": rep_c.slack_ratio,
        }
    rep = RunReport(
        scenario=name,
        variant=scenario.protocol.variant.value,
        mode=scenario.mode,
        n_agents=scenario.n_agents,
        design=_design_dict(scenario.design),
        graph=_graph_dict(scenario),
        bound=None if bd is None else _bound_dict(bd),
        observed=observed,
        containment=containment,
        gain_min=float(traj.gains.min()),
        gain_max=float(traj.gains.max()),
        wall_clock_s=wall,
    )
    text = _report_text(rep)
    with open(os.path.join(args.out, sf.output.report), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)

    if sf.output.plots:
        err_label = "||xi||" if scenario.mode == "leader" else "||zeta||"
        line_plot(
            os.path.join(args.out, sf.output.err_plot),
            traj.times,
            [traj.err_norms],
            [err_label],
            title=f"{name}: consensus error",
            xlabel="t [s]",
            ylabel=err_label,
        )
        line_plot(
            os.path.join(args.out, sf.output.gains_plot),
            traj.times,
            list(traj.gains.T),
            _gain_labels(scenario),
            title=f"{name}: adaptive gains",
            xlabel="t [s]",
            ylabel="gain",
        )
    return 0


def cmd_bounds(args) -> int:
    sf = load_scenario_file(args.scenario)
    scenario = sf.build()
    if not scenario.protocol.variant.robust:
        print(
            "error: no residual-set bound applies to the non-robust protocol "
            "(the adaptation law has no leakage term); use a robust variant",
            file=sys.stderr,
        )
        return 2
    lines = _section("design", _design_dict(scenario.design).items())
    lines += _section("graph", _graph_dict(scenario).items())
    bd = _bound_for(scenario)
    lines += _section("bound", _bound_dict(bd).items())
    if bd.applicable:
        lines.append(f"applicable: radius_sq = {bd.radius_sq}")
    elif scenario.mode == "leader":
        lines.append("inapplicable: delta >= tau")
    else:
        lines.append("inapplicable: epsilon >= tau")
    print("\n".join(lines))
    return 0


def _growth_verdict(gains: np.ndarray) -> tuple[float, str]:
    """Classify max-gain growth over the second half of the run."""
    half = gains.shape[0] // 2
    cmax = gains.max(axis=1)
    growth = float(cmax[-1] - cmax[half])
    nondecreasing = bool(np.all(np.diff(gains, axis=0) >= -1e-12))
    if nondecreasing and growth >= 0.05:
        return growth, "strictly increased"
    if growth < 0.01:
        return growth, "settled"
    return growth, "weak/none"


def cmd_drift_demo(args) -> int:
    sf = _apply_overrides(load_scenario_file(args.scenario), args)
    scenario = sf.build()
    os.makedirs(args.out, exist_ok=True)
    name = os.path.splitext(os.path.basename(args.scenario))[0]

    t0 = time.perf_counter()
    traj_robust = simulate(scenario)
    traj_drift = simulate(nonrobust_twin(scenario))
    wall = time.perf_counter() - t0

    g_rob, v_rob = _growth_verdict(traj_robust.gains)
    g_dft, v_dft = _growth_verdict(traj_drift.gains)
    summary = {
        "scenario": name,
        "robust": {
            "gain_max_final": float(traj_robust.gains[-1].max()),
            "gain_growth_second_half": g_rob,
            "verdict": v_rob,
        },
        "drift": {
            "gain_max_final": float(traj_drift.gains[-1].max()),
            "gain_growth_second_half": g_dft,
            "verdict": v_dft,
        },
        "wall_clock_s": wall,
    }
    lines = [
        f"scenario: {name}",
        "leakage as configured (phi > 0):",
        f"  gain_max_final = {summary['robust']['gain_max_final']}",
        f"  gain_growth_second_half = {g_rob}",
        f"  verdict: gains {v_rob}",
        "leakage removed (phi = 0):",
        f"  gain_max_final = {summary['drift']['gain_max_final']}",
        f"  gain_growth_second_half = {g_dft}",
        f"  verdict: gains {v_dft}",
        f"wall_clock_s = {wall}",
        "JSON: " + json.dumps(summary),
    ]
    text = "\n".join(lines) + "\n"
    with open(os.path.join(args.out, sf.output.report), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)

    if sf.output.plots:
        labels = _gain_labels(scenario)
        line_plot(
            os.path.join(args.out, "robust_" + sf.output.gains_plot),
            traj_robust.times,
            list(traj_robust.gains.T),
            labels,
            title=f"{name}: gains with leakage",
            xlabel="t [s]",
            ylabel="gain",
        )
        line_plot(
            os.path.join(args.out, "drift_" + sf.output.gains_plot),
            traj_drift.times,
            list(traj_drift.gains.T),
            labels,
            title=f"{name}: gains without leakage",
            xlabel="t [s]",
            ylabel="gain",
        )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consensim",
        description="Simulate adaptive consensus protocols and check residual-set bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write artifacts")
    p_run.add_argument("scenario", help="scenario file path")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, help="redraw x0 (seed) and gains (seed+1)")
    p_run.add_argument("--step", type=float, help="override the integration step")
    p_run.set_defaults(func=cmd_run)

    p_bounds = sub.add_parser("bounds", help="print design constants and bounds")
    p_bounds.add_argument("scenario", help="scenario file path")
    p_bounds.set_defaults(func=cmd_bounds)

    p_drift = sub.add_parser(
        "drift-demo", help="contrast a run with and without gain leakage"
    )
    p_drift.add_argument("scenario", help="scenario file path")
    p_drift.add_argument("--out", required=True, help="output directory")
    p_drift.add_argument("--seed", type=int, help="redraw x0 (seed) and gains (seed+1)")
    p_drift.add_argument("--step", type=float, help="override the integration step")
    p_drift.set_defaults(func=cmd_drift_demo)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SimulationDivergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ScenarioFormatError, ConvergenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())
