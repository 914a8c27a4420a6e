#!/usr/bin/env python3
"""Build the bundled circuit data files and registry.json.

Run from the repo root after changing any bundled-system parameter:

    python scripts/make_bundled_circuits.py
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from voltvar.circuit import (Bus, BatterySpec, CapacitorSpec, Circuit, Edge,
                             Load, RegulatorSpec, serialize_circuit)

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "voltvar" / "data"

ABC = (0, 1, 2)


def line(eid, frm, to, phases, r, x):
    return Edge(id=eid, from_bus=frm, to_bus=to, phases=phases, kind="line",
                r_pu={p: r for p in phases}, x_pu={p: x for p in phases})


def reg_edge(eid, frm, to, prefix):
    regs = {p: f"{prefix}_{p}" for p in ABC}
    edge = Edge(id=eid, from_bus=frm, to_bus=to, phases=ABC, kind="regulator",
                regulators=regs)
    specs = [RegulatorSpec(id=regs[p], edge=eid, phase=p) for p in ABC]
    return edge, specs


def build_13bus():
    phases = {
        "650": ABC, "rg60": ABC, "632": ABC, "633": ABC, "634": ABC,
        "645": (1, 2), "646": (1, 2), "671": ABC, "675": ABC, "680": ABC,
        "684": (0, 2), "611": (2,), "652": (0,),
    }
    buses = [Bus(id=b, phases=ph, base_kv=2.4) for b, ph in sorted(phases.items())]

    redge, regs13 = reg_edge("reg_650_rg60", "650", "rg60", "vreg13")
    edges = [
        redge,
        line("ln_rg60_632", "rg60", "632", ABC, 0.014, 0.02),
        line("ln_632_633", "632", "633", ABC, 0.008, 0.011),
        Edge(id="xfm_633_634", from_bus="633", to_bus="634", phases=ABC,
             kind="transformer", ratio=1.0),
        line("ln_632_645", "632", "645", (1, 2), 0.01, 0.013),
        line("ln_645_646", "645", "646", (1, 2), 0.007, 0.008),
        line("ln_632_671", "632", "671", ABC, 0.018, 0.026),
        line("ln_671_675", "671", "675", ABC, 0.011, 0.014),
        line("ln_671_680", "671", "680", ABC, 0.009, 0.012),
        line("ln_671_684", "671", "684", (0, 2), 0.008, 0.009),
        line("ln_684_611", "684", "611", (2,), 0.006, 0.007),
        line("ln_684_652", "684", "652", (0,), 0.007, 0.007),
    ]

    def loads_at(bus, spec):
        return [Load(id=f"ld_{bus}_{p}", bus=bus, phase=p, base_p_kw=pk,
                     base_q_kvar=qk, profile_key=f"ld_{bus}_{p}")
                for p, pk, qk in spec]

    loads = (
        loads_at("634", [(0, 55.0, 35.0), (1, 55.0, 35.0), (2, 55.0, 35.0)])
        + loads_at("645", [(1, 85.0, 62.0)])
        + loads_at("646", [(1, 115.0, 66.0)])
        + loads_at("671", [(0, 120.0, 80.0), (1, 120.0, 80.0), (2, 120.0, 80.0)])
        + loads_at("675", [(0, 160.0, 95.0), (1, 70.0, 40.0), (2, 90.0, 50.0)])
        + loads_at("611", [(2, 85.0, 40.0)])
        + loads_at("652", [(0, 64.0, 38.0)])
        + loads_at("680", [(1, 30.0, 15.0)])
    )

    caps = [
        CapacitorSpec(id="cap_611", bus="611", phases=(2,), q_rating_kvar=100.0),
        CapacitorSpec(id="cap_675", bus="675", phases=ABC, q_rating_kvar=200.0),
    ]
    bats = [BatterySpec(id="bat_680", bus="680", phases=ABC,
                        e_max_kwh=500.0, p_max_kw=200.0, soc0=1.0)]

    return Circuit(buses, edges, loads, caps, regs13, bats,
                   source_bus="650", source_v_pu=1.0, base_mva=1.0)


def build_34bus():
    three = ["800", "802", "806", "808", "812", "814", "814r", "816", "824",
             "828", "830", "832", "834", "836", "840", "842", "844", "846",
             "848", "850", "852", "852r", "854", "858", "860", "862", "888",
             "890"]
    ph0 = ["818", "820", "822", "864"]
    ph1 = ["856", "838"]
    phases = {b: ABC for b in three}
    phases.update({b: (0,) for b in ph0})
    phases.update({b: (1,) for b in ph1})
    assert len(phases) == 34
    buses = [Bus(id=b, phases=ph, base_kv=14.4) for b, ph in sorted(phases.items())]

    reg1, regs1 = reg_edge("reg_814_814r", "814", "814r", "vreg34a")
    reg2, regs2 = reg_edge("reg_852_852r", "852", "852r", "vreg34b")

    chain3 = [  # backbone, three-phase
        ("800", "802"), ("802", "806"), ("806", "808"), ("808", "812"),
        ("812", "814"), ("814r", "850"), ("850", "816"), ("816", "824"),
        ("824", "828"), ("828", "830"), ("830", "854"), ("854", "852"),
        ("852r", "832"), ("832", "888"), ("888", "890"), ("832", "858"),
        ("858", "834"), ("834", "842"), ("842", "844"), ("844", "846"),
        ("846", "848"), ("834", "860"), ("860", "836"), ("836", "862"),
        ("836", "840"),
    ]
    spurs = [
        ("816", "818", (0,)), ("818", "820", (0,)), ("820", "822", (0,)),
        ("854", "856", (1,)), ("858", "864", (0,)), ("862", "838", (1,)),
    ]
    edges = [reg1, reg2]
    for frm, to in chain3:
        edges.append(line(f"ln_{frm}_{to}", frm, to, ABC, 0.0045, 0.006))
    for frm, to, ph in spurs:
        edges.append(line(f"ln_{frm}_{to}", frm, to, ph, 0.005, 0.005))

    load_spec = {
        "806": [(1, 27.0, 14.0)], "820": [(0, 34.0, 17.0)],
        "822": [(0, 67.0, 35.0)], "824": [(1, 20.0, 10.0)],
        "828": [(0, 7.0, 3.0)], "830": [(0, 26.0, 13.0), (1, 20.0, 10.0)],
        "836": [(1, 16.0, 8.0), (2, 21.0, 11.0)],
        "838": [(1, 14.0, 7.0)], "840": [(0, 18.0, 11.0), (1, 20.0, 12.0)],
        "844": [(0, 100.0, 75.0), (1, 100.0, 75.0), (2, 100.0, 75.0)],
        "846": [(1, 24.0, 12.0)], "848": [(0, 20.0, 16.0), (1, 31.6, 21.0)],
        "856": [(1, 4.0, 2.0)], "858": [(0, 7.0, 3.0)],
        "860": [(0, 36.0, 24.0), (1, 40.0, 26.0), (2, 110.0, 55.0)],
        "864": [(0, 2.0, 1.0)],
        "890": [(0, 60.0, 30.0), (1, 60.0, 30.0), (2, 60.0, 30.0)],
    }
    loads = [Load(id=f"ld_{bus}_{p}", bus=bus, phase=p, base_p_kw=pk,
                  base_q_kvar=qk, profile_key=f"ld_{bus}_{p}")
             for bus, entries in sorted(load_spec.items())
             for p, pk, qk in entries]

    caps = [
        CapacitorSpec(id="cap_844", bus="844", phases=ABC, q_rating_kvar=100.0),
        CapacitorSpec(id="cap_848", bus="848", phases=ABC, q_rating_kvar=150.0),
    ]
    bats = [
        BatterySpec(id="bat_832", bus="832", phases=ABC,
                    e_max_kwh=400.0, p_max_kw=150.0, soc0=1.0),
        BatterySpec(id="bat_890", bus="890", phases=ABC,
                    e_max_kwh=300.0, p_max_kw=120.0, soc0=1.0),
    ]

    return Circuit(buses, edges, loads, caps, regs1 + regs2, bats,
                   source_bus="800", source_v_pu=1.0, base_mva=1.0)


def registry_doc():
    w33 = 1.0 / 33

    def entry(system, circuit_file, power_w, dis_w, soc_dis_w, soc_soc_w):
        return {
            "system_name": system,
            "circuit_file": circuit_file,
            "max_episode_steps": 24,
            "reg_act_num": 33,
            "bat_act_num": 33,
            "power_w": power_w,
            "cap_w": w33,
            "reg_w": w33,
            "soc_w": 0.0,
            "dis_w": dis_w,
            "soc_variant": {"dis_w": soc_dis_w, "soc_w": soc_soc_w},
        }

    return {
        "13Bus": entry("13Bus", "13bus.json", 10.0, 6.0 / 33, 1.0 / 33, 100.0 / 33),
        "34Bus": entry("34Bus", "34bus.json", 1.0, 10.0 / 33, 4.0 / 33, 500.0 / 33),
        "123Bus": entry("123Bus", "generate:123:seed=7:caps=4:regs=7:bats=4",
                        10.0, 7.0 / 33, 5.0 / 33, 500.0 / 33),
        "8500Node": entry("8500Node", "generate:8500:seed=11:caps=10:regs=12:bats=10",
                          1.0, 200.0 / 33, 200.0 / 33, 10000.0 / 33),
    }


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    (DATA / "13bus.json").write_text(serialize_circuit(build_13bus()))
    (DATA / "34bus.json").write_text(serialize_circuit(build_34bus()))
    (DATA / "registry.json").write_text(
        json.dumps(registry_doc(), sort_keys=True, indent=2) + "\n")
    print(f"wrote 13bus.json, 34bus.json, registry.json to {DATA}")


if __name__ == "__main__":
    main()
