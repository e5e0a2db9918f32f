import math
from dataclasses import replace

import pytest

from conftest import two_bus
from staticgrid.case_model import PQGen
from staticgrid.cpf import CpfError, GrowthDirections, trace_pv_curve
from staticgrid.scenario import power_factor_q
from staticgrid.sensitivity import format_rank_table, rank_wind_farms

UNIT = GrowthDirections({1: (1.0, 1.0)}, {2: (1.0, 0.0)})


def farm_case(p_farm=0.3, q_farm=0.0):
    base = two_bus(p_load=1.0, x=0.1, p_g0=1.0 - p_farm)
    return replace(base, pqgen=(PQGen(2, 100.0, 230.0, p_farm, q_farm),))


def nose_power(q_injected, x=0.1):
    # lossless line from V1 = 1: P_max**2 = 1/(4 X**2) - Q/X with Q the net reactive load
    return math.sqrt(1 / (4 * x * x) + q_injected / x)


@pytest.fixture(scope="module")
def desk9_rank(desk9):
    return rank_wind_farms(desk9)


def test_farm_at_target_power_factor_has_zero_sensitivity():
    q = power_factor_q(0.3, 0.95)
    rank = rank_wind_farms(farm_case(q_farm=q), dirs=UNIT)
    (entry,) = rank.entries
    assert entry.sensitivity == 0.0
    assert entry.delta_lambda == rank.base_delta_lambda
    assert entry.power_factor == pytest.approx(0.95, abs=1e-12)


def test_single_farm_matches_closed_form():
    rank = rank_wind_farms(farm_case(), dirs=UNIT)
    q = power_factor_q(0.3, 0.95)
    # lam_max = P_max + farm output, margin measured from lam = 1
    base = nose_power(0.0) + 0.3 - 1.0
    moved = nose_power(q) + 0.3 - 1.0
    assert rank.base_delta_lambda == pytest.approx(base, abs=1e-3)
    (entry,) = rank.entries
    assert entry.q_applied == pytest.approx(q, abs=1e-15)
    assert entry.delta_lambda == pytest.approx(moved, abs=1e-3)
    # both margins carry at most 1e-3 error, so S carries at most 2e-3 / q
    assert entry.sensitivity == pytest.approx((moved - base) / q, abs=2e-3 / q)
    assert entry.sensitivity > 0


def test_reactive_band_clips_the_injection(desk9, desk9_rank):
    bands = {s.bus: s.q_max for s in desk9.supply}
    for e in desk9_rank.entries:
        assert e.q_applied <= bands[e.bus] + 1e-15
    first = {e.bus: e for e in desk9_rank.entries}[101]
    # 0.3477 * tan(acos 0.95) exceeds the band by a hair at bus 101
    assert first.q_applied == bands[101]


def test_desk9_rank_is_co_ordered(desk9, desk9_rank):
    farms = sorted(g.bus for g in desk9.pqgen if g.connected)
    assert sorted(desk9_rank.buses) == farms
    s = [e.sensitivity for e in desk9_rank.entries]
    dl = [e.delta_lambda for e in desk9_rank.entries]
    assert s == sorted(s, reverse=True)
    assert dl == sorted(dl, reverse=True)
    for e in desk9_rank.entries:
        if e.sensitivity > 0:
            assert e.delta_lambda >= desk9_rank.base_delta_lambda


def test_ranking_is_deterministic(desk9, desk9_rank):
    assert rank_wind_farms(desk9) == desk9_rank


def test_table_format(desk9_rank):
    lines = format_rank_table(desk9_rank).splitlines()
    assert lines[0].startswith("base delta_lambda = ")
    assert lines[1].split() == ["rank", "bus", "name", "PF", "S_i", "delta_lambda_c"]
    assert len(lines) == 2 + len(desk9_rank.entries)
    assert lines[2].split()[:3] == ["1", str(desk9_rank.entries[0].bus),
                                    desk9_rank.entries[0].name]


def test_failed_farm_is_flagged_and_ranked_last(desk9, monkeypatch):
    import staticgrid.sensitivity as sens

    def flaky(case, dirs=None, options=None):
        if any(g.q_gen > 0 for g in case.pqgen if g.bus == 102):
            raise CpfError("corrector failed")
        return trace_pv_curve(case, dirs, options)

    monkeypatch.setattr(sens, "trace_pv_curve", flaky)
    rank = rank_wind_farms(desk9)
    assert rank.entries[-1].bus == 102
    assert rank.entries[-1].failed and "corrector failed" in rank.entries[-1].error
    assert all(not e.failed for e in rank.entries[:-1])
    assert "failed" in format_rank_table(rank).splitlines()[-1]


def test_input_errors():
    with pytest.raises(ValueError, match="power factor"):
        rank_wind_farms(farm_case(), target_pf=0.0)
    with pytest.raises(ValueError, match="no PQ generator"):
        rank_wind_farms(two_bus())
