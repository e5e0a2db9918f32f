"""Plain-text case format: sectioned numeric tables.

A document is a sequence of sections.  Each section starts with a header
line holding only the structure name (``Bus.con``, ``PQgen.con``,
``LoadLev.Heavy.con``, ``Bus.names`` ...) followed by one row per record,
fields separated by whitespace.  ``#`` starts a comment.  Names sections hold
one double-quoted string per line.  Trailing columns that carry a default
may be omitted.
"""

from __future__ import annotations

import json
import sys
from dataclasses import MISSING, dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Optional, Union

from .case_model import (
    MONTHS,
    AreaRecord,
    Branch,
    BusRecord,
    CapacityFactorTable,
    DemandBid,
    GenSourceTag,
    LoadLevelTable,
    PowerCase,
    PQGen,
    PQLoad,
    PVGen,
    ShuntDevice,
    SlackGen,
    SupplyBid,
)


class CaseFormatError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


# --- field codecs -----------------------------------------------------------


def _parse_float(tok: str) -> float:
    if "/" in tok:
        num, den = tok.split("/", 1)
        return float(num) / float(den)
    return float(tok)


def _parse_int(tok: str) -> int:
    value = float(tok)
    if value != int(value):
        raise ValueError(f"expected an integer, got {tok!r}")
    return int(value)


def _parse_bool(tok: str) -> bool:
    value = float(tok)
    if value not in (0.0, 1.0):
        raise ValueError(f"expected 0 or 1, got {tok!r}")
    return value == 1.0


def _parse_ratio(tok: str) -> Optional[tuple[float, float]]:
    if "/" in tok:
        a, b = tok.split("/", 1)
        return float(a), float(b)
    value = float(tok)
    if value == 0:
        return None
    return value, 1.0


def _parse_source(tok: str) -> str:
    return tok.lower()


def format_number(value: float) -> str:
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, tuple):
        return f"{format_number(value[0])}/{format_number(value[1])}"
    if value is None:
        return "0"
    if isinstance(value, str):
        return value
    return format_number(value)


def _codec_for(record_type: type, name: str, annotation: Any) -> Callable[[str], Any]:
    if record_type is Branch and name == "k_t":
        return _parse_ratio
    if record_type is GenSourceTag and name == "source":
        return _parse_source
    codecs = {"bool": _parse_bool, "int": _parse_int}
    return codecs.get(str(annotation), _parse_float)


@dataclass(frozen=True)
class _Table:
    header: str
    attr: str
    record_type: type

    def columns(self) -> list[tuple[str, Callable[[str], Any], Any]]:
        cols = []
        for f in fields(self.record_type):
            default = f.default if f.default is not MISSING else MISSING
            cols.append((f.name, _codec_for(self.record_type, f.name, f.type), default))
        return cols


_TABLES = [
    _Table("Bus.con", "buses", BusRecord),
    _Table("Areas.con", "areas", AreaRecord),
    _Table("Regions.con", "regions", AreaRecord),
    _Table("PQ.con", "pq", PQLoad),
    _Table("PQgen.con", "pqgen", PQGen),
    _Table("SW.con", "sw", SlackGen),
    _Table("PV.con", "pv", PVGen),
    _Table("Shunts.con", "shunts", ShuntDevice),
    _Table("Line.con", "lines", Branch),
    _Table("Supply.con", "supply", SupplyBid),
    _Table("Demand.con", "demand", DemandBid),
    _Table("GenSource.con", "gen_sources", GenSourceTag),
]
_TABLE_BY_HEADER = {t.header: t for t in _TABLES}

_LEVEL_HEADERS = {
    "LoadLev.Heavy.con": "heavy",
    "LoadLev.Medium.con": "medium",
    "LoadLev.Light.con": "light",
}
_FACTOR_HEADERS = {
    "CapacFactor.Wind.con": "wind",
    "CapacFactor.Hydro.con": "hydro",
    "CapacFactor.FFuel.con": "fossil",
}
_NAME_HEADERS = {
    "Bus.names": "bus_names",
    "Areas.names": "area_names",
    "Regions.names": "region_names",
}

SECTION_HEADERS = (
    [t.header for t in _TABLES] + list(_LEVEL_HEADERS) + list(_FACTOR_HEADERS)
    + list(_NAME_HEADERS)
)


# --- base normalization -----------------------------------------------------

# fields scaling with the power base (powers, admittances, currents)
_POWER_FIELDS: dict[type, tuple[str, ...]] = {
    AreaRecord: ("p_exported", "p_tolerance"),
    PQLoad: ("p_load", "q_load"),
    PQGen: ("p_gen", "q_gen"),
    SlackGen: ("q_max", "q_min", "p_g0"),
    PVGen: ("p_gen", "q_max", "q_min"),
    ShuntDevice: ("g", "b"),
    Branch: ("b", "i_max", "p_max", "s_max"),
    SupplyBid: ("p_s0", "p_s_max", "p_s_min", "p_s", "q_max", "q_min"),
    DemandBid: ("p_d0", "q_d0", "p_d_max", "p_d_min", "p_d"),
}
# fields scaling inversely (impedances)
_IMPEDANCE_FIELDS: dict[type, tuple[str, ...]] = {Branch: ("r", "x")}


def to_system_base(record: Any, system_base: float) -> Any:
    s_base = getattr(record, "s_base", None)
    if s_base is None or s_base == system_base or s_base <= 0:
        return record
    ratio = s_base / system_base
    changes: dict[str, Any] = {"s_base": system_base}
    for name in _POWER_FIELDS.get(type(record), ()):
        changes[name] = getattr(record, name) * ratio
    for name in _IMPEDANCE_FIELDS.get(type(record), ()):
        changes[name] = getattr(record, name) / ratio
    return replace(record, **changes)


# --- parsing ----------------------------------------------------------------


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def _tokens(line: str) -> list[tuple[str, int]]:
    out = []
    i = 0
    n = len(line)
    while i < n:
        while i < n and line[i].isspace():
            i += 1
        if i >= n:
            break
        j = i
        while j < n and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


def _looks_like_header(token: str) -> bool:
    return token.endswith(".con") or token.endswith(".names")


def _parse_name(raw: str, lineno: int) -> str:
    text = raw.strip()
    if not text.startswith('"'):
        raise CaseFormatError("names must be double-quoted strings", lineno, 1)
    try:
        value, end = json.JSONDecoder().raw_decode(text)
    except json.JSONDecodeError as exc:
        raise CaseFormatError(f"bad quoted name: {exc.msg}", lineno, exc.colno) from None
    rest = _strip_comment(text[end:]).strip()
    if rest or not isinstance(value, str):
        raise CaseFormatError("one quoted name per line expected", lineno, end + 1)
    return value


def _build_record(table: _Table, toks: list[tuple[str, int]], lineno: int) -> Any:
    cols = table.columns()
    required = sum(1 for c in cols if c[2] is MISSING)
    if not required <= len(toks) <= len(cols):
        col = toks[-1][1] if toks else 1
        raise CaseFormatError(
            f"{table.header} row has {len(toks)} fields, expected "
            + (f"{len(cols)}" if required == len(cols) else f"{required} to {len(cols)}"),
            lineno, col)
    kwargs = {}
    for (name, codec, _), (tok, col) in zip(cols, toks):
        try:
            kwargs[name] = codec(tok)
        except ValueError as exc:
            raise CaseFormatError(f"{table.header} field {name!r}: {exc}", lineno, col) from None
    return table.record_type(**kwargs)


def _profile_row(header: str, toks: list[tuple[str, int]], lineno: int) -> tuple[int, tuple[float, ...]]:
    if len(toks) != MONTHS + 1:
        raise CaseFormatError(f"{header} row has {len(toks)} fields, expected {MONTHS + 1}",
                              lineno, toks[-1][1] if toks else 1)
    try:
        area = _parse_int(toks[0][0])
    except ValueError as exc:
        raise CaseFormatError(str(exc), lineno, toks[0][1]) from None
    values = []
    for tok, col in toks[1:]:
        try:
            values.append(float(tok))
        except ValueError:
            raise CaseFormatError(f"{header}: bad number {tok!r}", lineno, col) from None
    return area, tuple(values)


def parse_case(text: str, system_base: float = 100.0) -> PowerCase:
    tables: dict[str, list[Any]] = {t.attr: [] for t in _TABLES}
    names: dict[str, list[str]] = {attr: [] for attr in _NAME_HEADERS.values()}
    levels: dict[int, dict[str, tuple[float, ...]]] = {}
    factors: dict[int, dict[str, tuple[float, ...]]] = {}
    seen: set[str] = set()
    section: Optional[str] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if section in _NAME_HEADERS and raw.strip().startswith('"'):
            names[_NAME_HEADERS[section]].append(_parse_name(raw, lineno))
            continue
        toks = _tokens(_strip_comment(raw))
        if not toks:
            continue
        if len(toks) == 1 and _looks_like_header(toks[0][0]):
            header = toks[0][0]
            if header not in SECTION_HEADERS:
                raise CaseFormatError(f"unknown section {header!r}", lineno, toks[0][1])
            if header in seen:
                raise CaseFormatError(f"duplicate section {header!r}", lineno, toks[0][1])
            seen.add(header)
            section = header
            continue
        if section is None:
            raise CaseFormatError("data row before any section header", lineno, toks[0][1])
        if section in _NAME_HEADERS:
            raise CaseFormatError("names must be double-quoted strings", lineno, toks[0][1])
        if section in _LEVEL_HEADERS or section in _FACTOR_HEADERS:
            area, values = _profile_row(section, toks, lineno)
            store, key = ((levels, _LEVEL_HEADERS[section]) if section in _LEVEL_HEADERS
                          else (factors, _FACTOR_HEADERS[section]))
            per_area = store.setdefault(area, {})
            if key in per_area:
                raise CaseFormatError(f"{section}: area {area} listed twice", lineno, toks[0][1])
            per_area[key] = values
            continue
        table = _TABLE_BY_HEADER[section]
        tables[table.attr].append(_build_record(table, toks, lineno))

    kwargs: dict[str, Any] = {
        attr: tuple(to_system_base(r, system_base) for r in rows)
        for attr, rows in tables.items()
    }
    kwargs.update({attr: tuple(v) for attr, v in names.items()})
    kwargs["load_levels"] = tuple(LoadLevelTable(area, **v) for area, v in levels.items())
    kwargs["capacity_factors"] = tuple(
        CapacityFactorTable(area, **v) for area, v in factors.items())
    return PowerCase(system_base=system_base, **kwargs)


# --- serialization ----------------------------------------------------------


def _record_row(record: Any) -> str:
    return " ".join(_format(getattr(record, f.name)) for f in fields(record))


def serialize_case(case: PowerCase) -> str:
    out: list[str] = []

    def section(header: str, rows: list[str]) -> None:
        if not rows:
            return
        out.append(header)
        out.extend(rows)
        out.append("")

    section("Bus.con", [_record_row(r) for r in case.buses])
    section("Bus.names", [json.dumps(n) for n in case.bus_names])
    section("Areas.con", [_record_row(r) for r in case.areas])
    section("Areas.names", [json.dumps(n) for n in case.area_names])
    section("Regions.con", [_record_row(r) for r in case.regions])
    section("Regions.names", [json.dumps(n) for n in case.region_names])
    for table in _TABLES:
        if table.attr in ("buses", "areas", "regions"):
            continue
        section(table.header, [_record_row(r) for r in getattr(case, table.attr)])
    for header, level in _LEVEL_HEADERS.items():
        section(header, [
            " ".join([str(t.area)] + [format_number(v) for v in getattr(t, level)])
            for t in case.load_levels if getattr(t, level) is not None])
    for header, source in _FACTOR_HEADERS.items():
        section(header, [
            " ".join([str(t.area)] + [format_number(v) for v in getattr(t, source)])
            for t in case.capacity_factors if getattr(t, source) is not None])
    return "\n".join(out)


def read_case(path: Union[str, Path], system_base: float = 100.0) -> PowerCase:
    """Read a case from a file path; ``-`` reads standard input."""
    if str(path) == "-":
        return parse_case(sys.stdin.read(), system_base)
    return parse_case(Path(path).read_text(encoding="ascii"), system_base)


def write_case(case: PowerCase, path: Union[str, Path]) -> None:
    text = serialize_case(case)
    if str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="ascii")
