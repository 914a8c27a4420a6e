"""Network graph export (DOT + positions CSV), figure rendering, and run plots.

Figures are written to files with the non-interactive Agg backend; nothing
here opens a window.
"""

from __future__ import annotations

import csv
import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .circuit import Circuit
from .env import VoltVarEnv


def tree_positions(circuit: Circuit) -> dict[str, tuple[float, float]]:
    """Deterministic layered layout: depth below source is -y, leaves spread in x."""
    children: dict[str, list[str]] = {}
    for e in sorted(circuit.edges.values(), key=lambda e: e.id):
        children.setdefault(e.from_bus, []).append(e.to_bus)

    pos: dict[str, tuple[float, float]] = {}
    next_x = [0.0]

    def place(bus: str, depth: int) -> float:
        kids = children.get(bus, [])
        if not kids:
            x = next_x[0]
            next_x[0] += 1.0
        else:
            xs = [place(k, depth + 1) for k in kids]
            x = sum(xs) / len(xs)
        pos[bus] = (x, -float(depth))
        return x

    place(circuit.source_bus, 0)
    return pos


def _bus_band(env: VoltVarEnv, bus: str) -> str:
    sol = env.last_solution
    vs = [sol.v[(bus, p)] for p in env.circuit.buses[bus].phases]
    if max(vs) > env.config.v_upper:
        return "over"
    if min(vs) < env.config.v_lower:
        return "under"
    return "ok"


_BAND_COLOR = {"over": "indianred", "under": "royalblue", "ok": "palegreen"}


def _device_annotations(circuit: Circuit) -> dict[str, list[str]]:
    notes: dict[str, list[str]] = {}
    for c in sorted(circuit.capacitors.values(), key=lambda c: c.id):
        notes.setdefault(c.bus, []).append(f"cap:{c.id}")
    for b in sorted(circuit.batteries.values(), key=lambda b: b.id):
        notes.setdefault(b.bus, []).append(f"bat:{b.id}")
    reg_edges: dict[str, list[str]] = {}
    for r in sorted(circuit.regulators.values(), key=lambda r: r.id):
        reg_edges.setdefault(r.edge, []).append(r.id)
    for eid, regs in reg_edges.items():
        notes.setdefault(circuit.edges[eid].to_bus, []).append(
            "reg:" + ",".join(regs))
    return notes


def emit_graph(env: VoltVarEnv, show_voltages: bool = False,
               show_controllers: bool = False, show_actions: bool = False,
               last_action=None) -> tuple[str, str]:
    """Render the network as a DOT document plus a positions CSV (id,x,y)."""
    circuit = env.circuit
    pos = tree_positions(circuit)
    notes = _device_annotations(circuit) if show_controllers else {}

    action_note = {}
    if show_actions and last_action is not None:
        slots = env.action_slots()
        for slot, val in zip(slots, last_action):
            bus = (circuit.capacitors[slot.device_id].bus if slot.kind == "cap"
                   else circuit.edges[circuit.regulators[slot.device_id].edge].to_bus
                   if slot.kind == "reg" else circuit.batteries[slot.device_id].bus)
            action_note.setdefault(bus, []).append(f"a[{slot.device_id}]={val}")

    out = io.StringIO()
    out.write("graph circuit {\n")
    for bus in sorted(circuit.buses):
        attrs = [f'pos="{pos[bus][0]:.3f},{pos[bus][1]:.3f}!"']
        label_parts = [bus]
        if show_voltages and env.last_solution is not None:
            band = _bus_band(env, bus)
            attrs += ['style=filled', f'fillcolor="{_BAND_COLOR[band]}"',
                      f'band="{band}"']
        if bus in notes:
            label_parts += notes[bus]
        if bus in action_note:
            label_parts += action_note[bus]
        attrs.append('label="' + "\\n".join(label_parts) + '"')
        out.write(f'  "{bus}" [{", ".join(attrs)}];\n')
    for e in sorted(circuit.edges.values(), key=lambda e: e.id):
        attrs = [f'id="{e.id}"']
        if e.kind != "line":
            attrs.append(f'kind="{e.kind}"')
        out.write(f'  "{e.from_bus}" -- "{e.to_bus}" [{", ".join(attrs)}];\n')
    out.write("}\n")

    csv_buf = io.StringIO()
    w = csv.writer(csv_buf, lineterminator="\n")
    w.writerow(["id", "x", "y"])
    for bus in sorted(pos):
        w.writerow([bus, f"{pos[bus][0]:.3f}", f"{pos[bus][1]:.3f}"])
    return out.getvalue(), csv_buf.getvalue()


def render_graph_png(env: VoltVarEnv, path: str, show_voltages: bool = False):
    """Matplotlib rendering of the network using the layered layout."""
    circuit = env.circuit
    pos = tree_positions(circuit)
    fig, ax = plt.subplots(figsize=(10, 7))
    for e in circuit.edges.values():
        x0, y0 = pos[e.from_bus]
        x1, y1 = pos[e.to_bus]
        style = "-" if e.kind == "line" else "--"
        ax.plot([x0, x1], [y0, y1], style, color="gray", lw=1, zorder=1)
    for bus, (x, y) in pos.items():
        color = "lightsteelblue"
        if show_voltages and env.last_solution is not None:
            color = _BAND_COLOR[_bus_band(env, bus)]
        ax.scatter([x], [y], s=140, color=color, edgecolors="black", zorder=2)
        ax.annotate(bus, (x, y), fontsize=6, ha="center", va="center", zorder=3)
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_run_plots(report, out_dir: str):
    """Reward trace and per-component error figures for an evaluation run."""
    import pathlib

    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot([s.reward for s in report.steps], lw=0.8)
    ax.set_xlabel("step")
    ax.set_ylabel("reward")
    ax.set_title(f"per-step reward ({report.episodes} episodes)")
    fig.tight_layout()
    fig.savefig(out / "rewards.png", dpi=150)
    plt.close(fig)

    keys = ["f_volt", "f_power", "cap_error", "reg_error", "dis_error", "soc_error"]
    fig, axes = plt.subplots(2, 3, figsize=(12, 6), sharex=True)
    for ax, key in zip(axes.flat, keys):
        ax.plot([s.info[key] for s in report.steps], lw=0.8)
        ax.set_title(key)
    fig.tight_layout()
    fig.savefig(out / "components.png", dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(len(report.episode_returns)), report.episode_returns)
    ax.set_xlabel("episode")
    ax.set_ylabel("return")
    ax.set_title(f"returns: mean {report.mean:.3f}, std {report.std:.3f}")
    fig.tight_layout()
    fig.savefig(out / "returns.png", dpi=150)
    plt.close(fig)
