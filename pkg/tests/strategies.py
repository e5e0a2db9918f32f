"""Hypothesis strategies producing valid random cases."""

from __future__ import annotations

from hypothesis import strategies as st

from staticgrid.case_model import (
    AreaRecord, Branch, BusRecord, CapacityFactorTable, DemandBid, LoadLevelTable,
    PowerCase, PQGen, PQLoad, PVGen, ShuntDevice, SlackGen, SupplyBid,
)

finite = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=0.01, max_value=50, allow_nan=False)
unit = st.floats(min_value=0.01, max_value=1.0, allow_nan=False)


@st.composite
def cases(draw, max_buses=8) -> PowerCase:
    n = draw(st.integers(min_value=2, max_value=max_buses))
    numbers = draw(st.lists(st.integers(1, 9999), min_size=n, max_size=n, unique=True))
    buses = tuple(BusRecord(b, draw(st.sampled_from([13.8, 34.5, 230.0, 500.0])),
                            draw(st.floats(0.9, 1.1)), draw(st.floats(-0.5, 0.5)), 3, 1)
                  for b in numbers)
    ref = numbers[0]
    # a spanning path keeps every bus connected to the reference
    lines = []
    for a, b in zip(numbers, numbers[1:]):
        transformer = draw(st.booleans())
        lines.append(Branch(
            a, b, 100.0, 230.0, 60.0, draw(st.sampled_from([0.0, 12.5])),
            (34.5, 230.0) if transformer else None,
            draw(st.floats(0.0, 0.05)), draw(st.floats(0.01, 0.3)), draw(st.floats(0.0, 0.2)),
            draw(st.floats(0.9, 1.1)) if transformer else 0.0,
            draw(st.sampled_from([0.0, 0.0, 30.0])) if transformer else 0.0,
            draw(positive), draw(positive), draw(positive), True))
    rest = numbers[1:]
    load_buses = draw(st.lists(st.sampled_from(rest), unique=True, max_size=len(rest)))
    pq = tuple(PQLoad(b, 100.0, 230.0, draw(st.floats(0.0, 2.0)), draw(st.floats(-1.0, 1.0)),
                      1.1, 0.9, draw(st.booleans()), draw(st.booleans()))
               for b in load_buses)
    free = [b for b in rest if b not in load_buses]
    gen_buses = draw(st.lists(st.sampled_from(free), unique=True, max_size=len(free))) if free else []
    pqgen = []
    for b in gen_buses:
        p = draw(st.floats(0.0, 1.0))
        q = p * draw(st.floats(-0.32, 0.32))
        pqgen.append(PQGen(b, 100.0, 34.5, p, q))
    sw = (SlackGen(ref, 100.0, 230.0, 1.0, 0.0, 9.0, -9.0, 1.1, 0.9, draw(st.floats(0, 5)),
                   draw(st.floats(0, 1)), True, True),)
    pv = tuple(PVGen(b, 100.0, 230.0, draw(st.floats(0, 2)), 1.0, 2.0, -2.0, 1.1, 0.9,
                     draw(st.floats(0, 1)), draw(st.booleans()))
               for b in draw(st.lists(st.sampled_from(rest), unique=True, max_size=2)))
    shunts = tuple(ShuntDevice(b, 100.0, 230.0, 60.0, draw(st.floats(0, 0.1)),
                               draw(st.floats(-0.5, 0.5)), draw(st.booleans()))
                   for b in draw(st.lists(st.sampled_from(numbers), unique=True, max_size=2)))
    supply = tuple(SupplyBid(b, 100.0, draw(st.floats(0, 1)), 1.0, 0.0, 0.0, 0.0,
                             draw(st.floats(0, 600)), 0.0, 0.0, 0.0, 0.0, True, 0.0, 1.0,
                             0.1, -0.1) for b in gen_buses[:1])
    demand = tuple(DemandBid(ld.bus, 100.0, 0.1 * ld.p_load, 0.1 * ld.q_load,
                             0.1 * ld.p_load, 0.0, 0.0, 0.0, draw(st.floats(0, 600)))
                   for ld in pq[:1])
    month_values = st.lists(st.floats(0.8, 1.2), min_size=12, max_size=12)
    heavy = draw(month_values)
    levels = (LoadLevelTable(3, tuple(heavy), tuple(h * 0.9 for h in heavy),
                             tuple(h * 0.8 for h in heavy)),)
    factors = (CapacityFactorTable(3, tuple(draw(st.lists(unit, min_size=12, max_size=12))),
                                   None, tuple(draw(st.lists(unit, min_size=12, max_size=12)))),)
    names = tuple(draw(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126),
                               max_size=16)) for _ in numbers)
    return PowerCase(buses=buses, areas=(AreaRecord(3, ref, 100.0, 0.0, 0.0, 3.7),),
                     bus_names=names, area_names=("Nordeste",), pq=pq, pqgen=tuple(pqgen),
                     sw=sw, pv=pv, shunts=shunts, lines=tuple(lines), supply=supply,
                     demand=demand, load_levels=levels, capacity_factors=factors)
