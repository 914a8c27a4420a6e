"""Command-line surface: run, solve, plot-graph, serve-stdio, list-envs.

Exit codes: 0 success, 2 usage error, 3 environment/solver error.
"""

from __future__ import annotations

import csv
import json
import pathlib
import sys

import click

from . import registry, stdio_server
from .circuit import parse_circuit
from .devices import initial_device_state
from .errors import VoltVarError
from .evaluation import COMPONENT_KEYS, EvaluationConfig, evaluate
from .policies import make_policy
from .powerflow import SolverConfig, build_injections, residual, solve


@click.group()
def main():
    """Volt-Var control simulation toolkit."""


def _fail(exc: VoltVarError):
    click.echo(f"error: {exc}", err=True)
    sys.exit(3)


@main.command("run")
@click.option("--env", "env_name", required=True, help="registered environment name")
@click.option("--worker-idx", type=int, default=None)
@click.option("--policy", "policy_name", type=click.Choice(["random", "greedy"]),
              default="random")
@click.option("--episodes", type=int, default=20)
@click.option("--seed", type=int, default=0)
@click.option("--split", type=click.Choice(["train", "test", "all"]), default="test")
@click.option("--gamma", type=float, default=1.0)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--plots", "plots_dir", type=click.Path(file_okay=False), default=None,
              help="directory for reward/component figures")
def run_cmd(env_name, worker_idx, policy_name, episodes, seed, split, gamma,
            out_path, csv_path, plots_dir):
    """Evaluate a baseline policy and write report.json (and optional steps CSV)."""
    try:
        env = registry.make_env(env_name, worker_idx)
        policy = make_policy(policy_name, seed)
        cfg = EvaluationConfig(episodes=episodes, seed=seed, split=split, gamma=gamma)
        report = evaluate(policy, env, cfg)
    except VoltVarError as exc:
        _fail(exc)

    pathlib.Path(out_path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["episode", "step", "reward", "f_volt", "f_power",
                        "cap_err", "reg_err", "dis_err", "soc_err", "converged"])
            for s in report.steps:
                w.writerow([s.episode, s.step, repr(s.reward)]
                           + [repr(s.info[k]) for k in COMPONENT_KEYS]
                           + [s.info["converged"]])
    if plots_dir:
        from .plotting import render_run_plots
        render_run_plots(report, plots_dir)
    click.echo(f"mean return {report.mean:.6f} (std {report.std:.6f}) "
               f"over {report.episodes} episodes")


@main.command("solve")
@click.option("--circuit", "circuit_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", type=float, default=1e-8)
@click.option("--max-iter", type=int, default=100)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def solve_cmd(circuit_path, tol, max_iter, out_path):
    """Power-flow solve at base loads with reset device statuses."""
    try:
        circuit = parse_circuit(pathlib.Path(circuit_path).read_text())
        state = initial_device_state(circuit)
        inj = build_injections(circuit, {}, state)
        sol = solve(circuit, state, inj, SolverConfig(tol=tol, max_iter=max_iter))
        res = residual(circuit, state, inj, sol)
    except VoltVarError as exc:
        _fail(exc)

    doc = {
        "converged": sol.converged,
        "iterations": sol.iterations,
        "max_residual": res,
        "total_loss_pu": sol.total_loss_pu,
        "substation_p_pu": sol.substation_p_pu,
        "voltages": {f"{b}/{p}": v for (b, p), v in sorted(sol.v.items())},
    }
    pathlib.Path(out_path).write_text(json.dumps(doc, indent=2) + "\n")
    click.echo(f"max residual {res:.3e} ({'converged' if sol.converged else 'NOT converged'})")


@main.command("plot-graph")
@click.option("--env", "env_name", required=True)
@click.option("--show-voltages", is_flag=True)
@click.option("--show-controllers", is_flag=True)
@click.option("--show-actions", is_flag=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--pos", "pos_path", type=click.Path(dir_okay=False), default=None)
@click.option("--png", "png_path", type=click.Path(dir_okay=False), default=None,
              help="also render a matplotlib figure")
def plot_graph_cmd(env_name, show_voltages, show_controllers, show_actions,
                   out_path, pos_path, png_path):
    """Emit the network as DOT (+ positions CSV, + optional PNG)."""
    from .plotting import emit_graph, render_graph_png

    try:
        env = registry.make_env(env_name)
        env.reset(0)
        last_action = None
        if show_actions:
            last_action = env.random_action()
            env.step(last_action)
        dot, pos_csv = emit_graph(env, show_voltages=show_voltages,
                                  show_controllers=show_controllers,
                                  show_actions=show_actions, last_action=last_action)
        pathlib.Path(out_path).write_text(dot)
        if pos_path:
            pathlib.Path(pos_path).write_text(pos_csv)
        if png_path:
            render_graph_png(env, png_path, show_voltages=show_voltages)
    except VoltVarError as exc:
        _fail(exc)
    click.echo(f"wrote {out_path}")


@main.command("serve-stdio")
def serve_stdio_cmd():
    """Speak the vvc/1 newline-delimited JSON protocol on stdin/stdout."""
    sys.exit(stdio_server.serve())


@main.command("list-envs")
def list_envs_cmd():
    for name in registry.list_envs():
        click.echo(name)


if __name__ == "__main__":
    main()
