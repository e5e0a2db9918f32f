import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from staticgrid.case_io import CaseFormatError, parse_case, read_case, serialize_case, write_case
from staticgrid.case_model import PowerCase, ShuntDevice, validate_case
from staticgrid.fixtures import fixture_path, list_fixtures
from strategies import cases

SUPPLY_132 = "132 100 1.0 2.5 0 0 0 173.38 0 0 0 0 1 0 1 2.5 -1.5 0 0 1\n"


def test_shunt_row():
    case = parse_case("Shunts.con\n103 100 34.5 60 0 0.1 0\n")
    assert case.shunts == (ShuntDevice(103, 100.0, 34.5, 60.0, 0.0, 0.1, False),)


def test_empty_document():
    case = parse_case("")
    assert case == PowerCase()
    assert "no-phase-reference" in {d.rule for d in validate_case(case)}


def test_supply_cost_coefficient():
    case = parse_case("Supply.con\n" + SUPPLY_132)
    bid = case.supply[0]
    assert bid.bus == 132 and bid.c_p1 == 173.38
    assert (bid.q_min, bid.q_max) == (-1.5, 2.5)


def test_trailing_optional_columns_default():
    case = parse_case("Bus.con\n7 230\n")
    b = case.buses[0]
    assert (b.number, b.v_base, b.v0, b.theta0) == (7, 230.0, 1.0, 0.0)


def test_names_bind_positionally():
    case = parse_case('Bus.con\n1 230\n2 230\nBus.names\n"A-UHE"\n"B # not a comment"\n')
    assert case.bus_names == ("A-UHE", "B # not a comment")
    assert case.bus_name(2) == "B # not a comment"


@pytest.mark.parametrize("name", list_fixtures())
def test_fixture_round_trip(name):
    case = read_case(fixture_path(name))
    assert parse_case(serialize_case(case)) == case


def test_ratio_text_survives_round_trip(desk9):
    text = serialize_case(desk9)
    assert "34.5/230" in text
    again = parse_case(text)
    assert [br.k_t for br in again.lines] == [br.k_t for br in desk9.lines]
    assert (34.5, 230.0) in [br.k_t for br in again.lines]


def test_capacity_factor_row_round_trip():
    row = "3 0.39 0.39 0.32 0.37 0.45 0.52 0.56 0.6 0.61 0.54 0.49 0.42"
    case = parse_case("CapacFactor.Wind.con\n" + row + "\n")
    expected = tuple(float(t) for t in row.split()[1:])
    assert case.capacity_factors[0].wind == expected
    again = parse_case(serialize_case(case))
    assert again.capacity_factors[0].wind == expected
    assert again.capacity_factors[0].factor("wind", 9) == 0.61
    assert row in serialize_case(case)


def test_base_normalization():
    text = ("PQ.con\n3 50 230 1.0 0.4\n"
            "Line.con\n1 3 50 230 60 0 0 0.01 0.1 0.2\n")
    case = parse_case(text)
    ld, br = case.pq[0], case.lines[0]
    assert ld.s_base == 100.0
    assert (ld.p_load, ld.q_load) == pytest.approx((0.5, 0.2))
    assert (br.r, br.x, br.b) == pytest.approx((0.02, 0.2, 0.1))
    assert parse_case(serialize_case(case)) == case


@pytest.mark.parametrize("text, line, column, fragment", [
    ("Foo.con\n", 1, 1, "unknown section"),
    ("Bus.con\n1 230\nBus.con\n", 3, 1, "duplicate section"),
    ("1 230\n", 1, 1, "before any section"),
    ("Bus.con\n1 230 x\n", 2, 7, "v0"),
    ("Bus.con\n1 230 1 0 1 1 7\n", 2, 15, "7 fields"),
    ("Shunts.con\n103 100\n", 2, 5, "2 fields"),
    ("CapacFactor.Wind.con\n3 0.4 0.4\n", 2, 7, "expected 13"),
    ("Bus.names\nplain\n", 2, 1, "double-quoted"),
    ("LoadLev.Heavy.con\n3" + " 1.0" * 12 + "\n3" + " 1.0" * 12 + "\n", 3, 1, "listed twice"),
])
def test_format_errors_carry_position(text, line, column, fragment):
    with pytest.raises(CaseFormatError) as info:
        parse_case(text)
    assert (info.value.line, info.value.column) == (line, column)
    assert fragment in str(info.value)
    assert f"line {line}, column {column}" in str(info.value)


comment = st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=20)


@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_comments_and_blank_lines_are_ignored(desk9, data):
    lines = serialize_case(desk9).splitlines()
    noisy = []
    for ln in lines:
        if data.draw(st.booleans()):
            noisy.append("# " + data.draw(comment))
        if data.draw(st.booleans()):
            noisy.append("")
        quoted = ln.startswith('"')
        noisy.append(ln if quoted else ln + "  # " + data.draw(comment))
    assert parse_case("\n".join(noisy)) == desk9


@settings(max_examples=60, deadline=None)
@given(cases())
def test_generated_round_trip(case):
    assert parse_case(serialize_case(case)) == case


def test_read_and_write_paths(tmp_path, desk3, monkeypatch):
    path = tmp_path / "copy.con"
    write_case(desk3, path)
    assert read_case(path) == desk3
    monkeypatch.setattr("sys.stdin", io.StringIO(path.read_text()))
    assert read_case("-") == desk3
