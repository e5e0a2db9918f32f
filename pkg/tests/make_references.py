"""Regenerate the frozen reference values in tests/data from the oracles.

Run from the repository root:  python3 tests/make_references.py
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from oracles import DenseFlow, nose_by_bisection
from staticgrid.case_io import read_case

DATA = Path(__file__).parent / "data"
FIXTURES = Path(__file__).parents[1] / "src" / "staticgrid" / "data"


def flow_record(flow: DenseFlow, z) -> dict:
    vm, th, k = flow.unpack(z)
    v = vm * np.exp(1j * th)
    losses = float(np.sum((v * np.conj(flow.y @ v)).real)) * flow.case.system_base
    return {"bus": [b.number for b in flow.case.buses], "v": vm.tolist(),
            "theta": th.tolist(), "k_g": float(k), "losses_mw": losses}


def desk3() -> dict:
    case = read_case(FIXTURES / "desk3.con")
    out = {}
    for label, distributed in (("single", False), ("distributed", True)):
        flow = DenseFlow(case, distributed=distributed)
        z, res = flow.solve()
        assert res < 1e-12
        out[label] = flow_record(flow, z)
    # bus 2 limited to q_max = -0.1: held at the bound as a PQ bus
    tight = replace(case, pv=(replace(case.pv[0], q_max=-0.1),))
    flow = DenseFlow(tight, pinned={2: -0.1})
    z, res = flow.solve()
    assert res < 1e-12
    out["q_limited"] = flow_record(flow, z) | {"q_max": -0.1}
    return out


def desk9_heavy_september() -> dict:
    case = read_case(FIXTURES / "desk9.con")
    mult = 1.0990  # heavy centroid, September, area 3
    case = replace(case, pq=tuple(replace(ld, p_load=ld.p_load * mult, q_load=ld.q_load * mult)
                                  for ld in case.pq))
    directions = {
        "supply": [(s.bus, s.p_s0, s.gamma) for s in case.supply if s.connected],
        "demand": [(d.bus, d.p_d0, d.q_d0) for d in case.demand if d.connected],
    }
    flow = DenseFlow(case, distributed=True, directions=directions)
    lam_max, z_base, z_nose = nose_by_bisection(flow)
    vb, _, _ = flow.unpack(z_base)
    vn, _, _ = flow.unpack(z_nose)
    drop = vb - vn
    buses = [b.number for b in case.buses]
    order = sorted(range(len(buses)), key=lambda i: (-round(drop[i], 9), round(vn[i], 9), buses[i]))
    return {"delta_lambda": lam_max - 1.0, "critical_bus": buses[order[0]],
            "voltage_drop": dict(zip(map(str, buses), drop.tolist()))}


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    (DATA / "desk3_reference.json").write_text(json.dumps(desk3(), indent=2) + "\n")
    (DATA / "desk9_reference.json").write_text(
        json.dumps({"heavy_september": desk9_heavy_september()}, indent=2) + "\n")
