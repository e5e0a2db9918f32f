import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import two_bus
from oracles import DenseFlow
from staticgrid.case_model import BusRecord, PQGen, PQLoad
from staticgrid.powerflow import (
    ConvergenceError, PowerFlowError, SingularJacobianError, SolverOptions, build_model,
    convert_to_impedance, mismatch, solve_power_flow,
)

DISTRIBUTED = SolverOptions(distributed_slack=True)


def test_two_bus_closed_form():
    sol = solve_power_flow(two_bus(p_load=0.5, x=0.1))
    delta = 0.5 * math.asin(2 * 0.1 * 0.5)
    assert sol.v[1] == pytest.approx(math.cos(delta), abs=1e-10)
    assert sol.theta[1] == pytest.approx(-delta, abs=1e-10)
    assert sol.v[1] == pytest.approx(0.998746, abs=1e-6)
    assert sol.losses == pytest.approx(0.0, abs=1e-9)


def test_zero_load():
    sol = solve_power_flow(two_bus(p_load=0.0))
    assert np.allclose(sol.v, 1.0) and np.allclose(sol.theta, 0.0)
    assert sol.losses == pytest.approx(0.0, abs=1e-12)


def _max_mismatch(case, sol, options=SolverOptions()):
    model = build_model(case, options.distributed_slack)
    return float(np.max(np.abs(mismatch(model, sol.v, sol.theta, k=sol.k_g))))


def test_desk3_matches_reference(desk3, desk3_reference):
    ref = desk3_reference["single"]
    sol = solve_power_flow(desk3)
    assert list(sol.bus_ids) == ref["bus"]
    assert np.max(np.abs(sol.v - ref["v"])) < 1e-6
    assert np.max(np.abs(sol.theta - ref["theta"])) < 1e-6
    assert sol.losses == pytest.approx(ref["losses_mw"], abs=1e-6)
    assert sol.mismatch <= 1e-8
    assert _max_mismatch(desk3, sol) <= 1e-8


def test_desk3_distributed_matches_reference(desk3, desk3_reference):
    ref = desk3_reference["distributed"]
    sol = solve_power_flow(desk3, DISTRIBUTED)
    assert np.max(np.abs(sol.v - ref["v"])) < 1e-6
    assert np.max(np.abs(sol.theta - ref["theta"])) < 1e-6
    assert sol.k_g == pytest.approx(ref["k_g"], abs=1e-6)
    assert _max_mismatch(desk3, sol, DISTRIBUTED) <= 1e-8


def test_distributed_units_share_one_scalar(desk3):
    sol = solve_power_flow(desk3, DISTRIBUTED)
    for unit, p in sol.unit_p:
        assert unit.gamma == 1.0
        assert p == pytest.approx((1 + sol.k_g) * unit.p, abs=1e-14)


def test_single_slack_has_zero_share(desk3):
    sol = solve_power_flow(desk3)
    assert sol.k_g == 0.0
    pv = [p for u, p in sol.unit_p if u.kind == "PV"]
    assert pv == [desk3.pv[0].p_gen]


@pytest.mark.parametrize("distributed", [False, True])
def test_power_balance(desk9, distributed):
    sol = solve_power_flow(desk9, SolverOptions(distributed_slack=distributed))
    gap = (np.sum(sol.p_gen) - np.sum(sol.p_load)) * sol.system_base - sol.losses
    assert abs(gap) <= 10 * 1e-8 * sol.system_base


def test_q_limit_pins_unit(desk3, desk3_reference):
    ref = desk3_reference["q_limited"]
    tight = replace(desk3, pv=(replace(desk3.pv[0], q_max=ref["q_max"]),))
    sol = solve_power_flow(tight, SolverOptions(enforce_q_limits=True))
    assert sol.pinned == {2: ref["q_max"]}
    assert np.max(np.abs(sol.v - ref["v"])) < 1e-6
    assert np.max(np.abs(sol.theta - ref["theta"])) < 1e-6
    assert sol.q_gen[1] == pytest.approx(ref["q_max"], abs=1e-8)


def test_q_limits_inside_bounds_change_nothing(desk3):
    free = solve_power_flow(desk3)
    limited = solve_power_flow(desk3, SolverOptions(enforce_q_limits=True))
    assert limited.pinned == {}
    assert np.allclose(free.v, limited.v, atol=1e-12)


def test_impedance_conversion_examples():
    load = PQLoad(3, 100, 230, 0.8, 0.6, z_convertible=True)
    z = convert_to_impedance(load, 0.9)
    assert z.power(0.9) == pytest.approx((0.8, 0.6), abs=1e-15)
    assert z.power(0.81) == pytest.approx((0.648, 0.486), abs=1e-12)
    reactive = convert_to_impedance(PQLoad(3, 100, 230, 0.0, 0.5, z_convertible=True), 1.1)
    assert reactive.power(np.array([0.7, 1.0, 1.3]))[0] == pytest.approx(0.0, abs=1e-16)
    with pytest.raises(ValueError):
        convert_to_impedance(PQLoad(3, 100, 230, 0.8, 0.6), 0.9)


def test_generator_converts_as_negative_load():
    z = convert_to_impedance(PQGen(3, 100, 34.5, 0.3, 0.1, z_convertible=True), 1.1)
    assert z.power(1.1) == pytest.approx((-0.3, -0.1), abs=1e-15)


@given(v=st.floats(0.5, 1.5), angle=st.floats(0.05, 1.5))
def test_converted_ratio_is_constant(v, angle):
    load = PQLoad(3, 100, 230, math.cos(angle), math.sin(angle), z_convertible=True)
    p, q = convert_to_impedance(load, 0.9).power(v)
    assert p / q == pytest.approx(1 / math.tan(angle), rel=1e-12)


def test_voltage_violation_triggers_conversion(desk3):
    # bus 3 settles near 0.982 p.u., below this lower limit
    load = replace(desk3.pq[0], v_min=0.99, z_convertible=True)
    sol = solve_power_flow(replace(desk3, pq=(load,)))
    assert sol.converted == [("PQ", 0, 0.99)]
    v3 = sol.v[2]
    assert v3 < 0.99
    assert sol.p_load[2] == pytest.approx(1.8 * (v3 / 0.99) ** 2, abs=1e-12)
    assert sol.q_load[2] / sol.p_load[2] == pytest.approx(0.6 / 1.8, rel=1e-12)
    assert sol.mismatch <= 1e-8


def test_farm_injects_as_negative_load(desk9):
    sol = solve_power_flow(desk9)
    i = sol.bus_ids.index(101)
    assert sol.p_injected[i] == pytest.approx(0.3477, abs=1e-8)
    assert sol.q_injected[i] == pytest.approx(0.0, abs=1e-8)


def test_matches_dense_oracle_on_desk9(desk9):
    flow = DenseFlow(desk9)
    z, res = flow.solve()
    assert res < 1e-12
    vm, th, _ = flow.unpack(z)
    sol = solve_power_flow(desk9)
    assert np.max(np.abs(sol.v - vm)) < 1e-8
    assert np.max(np.abs(sol.theta - th)) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.permutations(range(9)))
def test_bus_order_does_not_matter(desk9, order):
    shuffled = replace(desk9, buses=tuple(desk9.buses[i] for i in order),
                       bus_names=tuple(desk9.bus_names[i] for i in order))
    a = solve_power_flow(desk9)
    b = solve_power_flow(shuffled)
    for bus in a.bus_ids:
        assert abs(a.voltage(bus) - b.voltage(bus)) < 1e-10


def test_iteration_limit(desk9):
    with pytest.raises(ConvergenceError) as info:
        solve_power_flow(desk9, SolverOptions(max_iterations=1))
    assert info.value.iterations == 1


def test_beyond_the_nose_does_not_converge():
    with pytest.raises(PowerFlowError):
        solve_power_flow(two_bus(p_load=6.0))


def test_isolated_bus_gives_singular_jacobian():
    base = two_bus()
    case = replace(base, buses=base.buses + (BusRecord(3, 230.0),))
    with pytest.raises(SingularJacobianError) as info:
        solve_power_flow(case)
    assert info.value.iteration >= 1


def test_options_are_checked():
    with pytest.raises(ValueError):
        SolverOptions(tolerance=0.0)
    with pytest.raises(ValueError):
        SolverOptions(max_iterations=0)
