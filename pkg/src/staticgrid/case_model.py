"""Record types for a power-system case and the invariant checker.

Every table of the case file maps to one frozen dataclass.  Quantities are
per unit on the record's own ``s_base`` as written in the file; the parser
rescales them onto the case ``system_base`` so that all solver code works on
a single base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Iterator, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

MONTHS = 12
LEVELS = ("heavy", "medium", "light")
SOURCES = ("wind", "hydro", "fossil")

# wind-farm power factor band, inductive and capacitive
MIN_POWER_FACTOR = 0.95


@dataclass(frozen=True)
class BusRecord:
    number: int
    v_base: float
    v0: float = 1.0
    theta0: float = 0.0
    area: int = 1
    region: int = 1


@dataclass(frozen=True)
class AreaRecord:
    """Row of ``Areas.con`` / ``Regions.con`` (identical layout)."""

    number: int
    slack_bus: int = 0
    s_base: float = 100.0
    p_exported: float = 0.0
    p_tolerance: float = 0.0
    growth_rate: float = 0.0


@dataclass(frozen=True)
class PQLoad:
    bus: int
    s_base: float
    v_base: float
    p_load: float
    q_load: float
    v_max: float = 1.1
    v_min: float = 0.9
    z_convertible: bool = False
    connected: bool = True


@dataclass(frozen=True)
class PQGen:
    """Fixed P/Q generator, injected as a negative load (wind farms)."""

    bus: int
    s_base: float
    v_base: float
    p_gen: float
    q_gen: float
    v_max: float = 1.1
    v_min: float = 0.9
    z_convertible: bool = False
    connected: bool = True

    @property
    def power_factor(self) -> float:
        s = math.hypot(self.p_gen, self.q_gen)
        return 1.0 if s == 0.0 else abs(self.p_gen) / s


@dataclass(frozen=True)
class SlackGen:
    bus: int
    s_base: float
    v_base: float
    v0: float = 1.0
    theta0: float = 0.0
    q_max: float = 99.0
    q_min: float = -99.0
    v_max: float = 1.1
    v_min: float = 0.9
    p_g0: float = 0.0
    gamma: float = 1.0
    is_phase_reference: bool = True
    connected: bool = True


@dataclass(frozen=True)
class PVGen:
    bus: int
    s_base: float
    v_base: float
    p_gen: float
    v0: float = 1.0
    q_max: float = 99.0
    q_min: float = -99.0
    v_max: float = 1.1
    v_min: float = 0.9
    gamma: float = 0.0
    connected: bool = True


@dataclass(frozen=True)
class ShuntDevice:
    bus: int
    s_base: float
    v_base: float
    f_nominal: float
    g: float
    b: float
    connected: bool = True


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    s_base: float
    v_base: float
    f_nominal: float
    length: float
    k_t: Optional[tuple[float, float]]
    r: float
    x: float
    b: float
    tap: float = 0.0
    phase_shift: float = 0.0
    i_max: float = 0.0
    p_max: float = 0.0
    s_max: float = 0.0
    connected: bool = True

    @property
    def is_transformer(self) -> bool:
        return (self.k_t is not None and self.k_t[0] > 0) or self.tap > 0

    @property
    def effective_tap(self) -> float:
        """Off-nominal ratio used in the admittance stamp (1.0 for lines)."""
        if self.tap > 0:
            return self.tap
        return 1.0


@dataclass(frozen=True)
class SupplyBid:
    bus: int
    s_base: float
    p_s0: float
    p_s_max: float
    p_s_min: float = 0.0
    p_s: float = 0.0
    c_p0: float = 0.0
    c_p1: float = 0.0
    c_p2: float = 0.0
    c_q0: float = 0.0
    c_q1: float = 0.0
    c_q2: float = 0.0
    commitment: bool = False
    fut14: float = 0.0
    gamma: float = 1.0
    q_max: float = 0.0
    q_min: float = 0.0
    fut18: float = 0.0
    fut19: float = 0.0
    connected: bool = True


@dataclass(frozen=True)
class DemandBid:
    bus: int
    s_base: float
    p_d0: float
    q_d0: float
    p_d_max: float
    p_d_min: float = 0.0
    p_d: float = 0.0
    c_p0: float = 0.0
    c_p1: float = 0.0
    c_p2: float = 0.0
    c_q0: float = 0.0
    c_q1: float = 0.0
    c_q2: float = 0.0
    commitment: bool = False
    fut15: float = 0.0
    fut16: float = 0.0
    fut17: float = 0.0
    connected: bool = True


@dataclass(frozen=True)
class LoadLevelTable:
    """Monthly load-level centroids of one area; a level may be absent."""

    area: int
    heavy: Optional[tuple[float, ...]] = None
    medium: Optional[tuple[float, ...]] = None
    light: Optional[tuple[float, ...]] = None

    def multiplier(self, level: str, month: int) -> float:
        values = getattr(self, level)
        if values is None:
            raise KeyError(f"area {self.area} has no {level} load level")
        return values[month - 1]


@dataclass(frozen=True)
class CapacityFactorTable:
    area: int
    wind: Optional[tuple[float, ...]] = None
    hydro: Optional[tuple[float, ...]] = None
    fossil: Optional[tuple[float, ...]] = None

    def factor(self, source: str, month: int) -> float:
        values = getattr(self, source)
        if values is None:
            raise KeyError(f"area {self.area} has no {source} capacity factors")
        return values[month - 1]


@dataclass(frozen=True)
class GenSourceTag:
    """Explicit primary-source tag for the generators at a bus."""

    bus: int
    source: str


@dataclass(frozen=True)
class PowerCase:
    buses: tuple[BusRecord, ...] = ()
    areas: tuple[AreaRecord, ...] = ()
    regions: tuple[AreaRecord, ...] = ()
    bus_names: tuple[str, ...] = ()
    area_names: tuple[str, ...] = ()
    region_names: tuple[str, ...] = ()
    pq: tuple[PQLoad, ...] = ()
    pqgen: tuple[PQGen, ...] = ()
    sw: tuple[SlackGen, ...] = ()
    pv: tuple[PVGen, ...] = ()
    shunts: tuple[ShuntDevice, ...] = ()
    lines: tuple[Branch, ...] = ()
    supply: tuple[SupplyBid, ...] = ()
    demand: tuple[DemandBid, ...] = ()
    load_levels: tuple[LoadLevelTable, ...] = ()
    capacity_factors: tuple[CapacityFactorTable, ...] = ()
    gen_sources: tuple[GenSourceTag, ...] = ()
    system_base: float = 100.0

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    def bus_index(self) -> dict[int, int]:
        return {b.number: i for i, b in enumerate(self.buses)}

    def bus_name(self, number: int) -> str:
        idx = self.bus_index().get(number)
        if idx is not None and idx < len(self.bus_names):
            return self.bus_names[idx]
        return str(number)

    def bus_area(self, number: int) -> int:
        for b in self.buses:
            if b.number == number:
                return b.area
        raise KeyError(number)

    def load_level_table(self, area: int) -> Optional[LoadLevelTable]:
        for t in self.load_levels:
            if t.area == area:
                return t
        return None

    def capacity_factor_table(self, area: int) -> Optional[CapacityFactorTable]:
        for t in self.capacity_factors:
            if t.area == area:
                return t
        return None

    def phase_reference(self) -> Optional[SlackGen]:
        refs = [g for g in self.sw if g.connected and g.is_phase_reference]
        return refs[0] if refs else None


class BranchClass(str, Enum):
    LINE = "line"
    TRANSFORMER = "transformer"
    PHASE_SHIFTER = "phase_shifter"


def classify_branch(branch: Branch) -> BranchClass:
    if not branch.is_transformer:
        return BranchClass.LINE
    if branch.phase_shift != 0:
        return BranchClass.PHASE_SHIFTER
    return BranchClass.TRANSFORMER


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    row: int
    rule: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        where = f"{self.kind}[{self.row}]" if self.row >= 0 else self.kind
        return f"{self.severity}: {where}: {self.rule}: {self.message}"


# --- validation -------------------------------------------------------------


def _bus_refs(case: PowerCase) -> Iterator[tuple[str, int, int]]:
    for kind, table, attrs in (
        ("PQ", case.pq, ("bus",)),
        ("PQgen", case.pqgen, ("bus",)),
        ("SW", case.sw, ("bus",)),
        ("PV", case.pv, ("bus",)),
        ("Shunts", case.shunts, ("bus",)),
        ("Line", case.lines, ("from_bus", "to_bus")),
        ("Supply", case.supply, ("bus",)),
        ("Demand", case.demand, ("bus",)),
        ("GenSource", case.gen_sources, ("bus",)),
    ):
        for row, rec in enumerate(table):
            for attr in attrs:
                yield kind, row, getattr(rec, attr)


def _check_names(case: PowerCase, out: list[Diagnostic]) -> None:
    for kind, names, records in (
        ("Bus.names", case.bus_names, case.buses),
        ("Areas.names", case.area_names, case.areas),
        ("Regions.names", case.region_names, case.regions),
    ):
        if names and len(names) != len(records):
            out.append(Diagnostic(kind, -1, "names-length",
                                  f"{len(names)} names for {len(records)} records"))


def _check_buses(case: PowerCase, out: list[Diagnostic]) -> None:
    seen: set[int] = set()
    for row, b in enumerate(case.buses):
        if b.number in seen:
            out.append(Diagnostic("Bus", row, "bus-duplicate", f"bus {b.number} defined twice"))
        seen.add(b.number)
        if b.number <= 0:
            out.append(Diagnostic("Bus", row, "bus-number", "bus number must be positive"))
        if not b.v_base > 0:
            out.append(Diagnostic("Bus", row, "bus-vbase", "voltage base must be positive"))
        if not b.v0 > 0:
            out.append(Diagnostic("Bus", row, "bus-v0", "initial voltage must be positive"))
    for kind, row, bus in _bus_refs(case):
        if bus not in seen:
            out.append(Diagnostic(kind, row, "unknown-bus", f"bus {bus} does not exist"))
    for kind, table in (("Areas", case.areas), ("Regions", case.regions)):
        for row, a in enumerate(table):
            if a.slack_bus != 0 and a.slack_bus not in seen:
                out.append(Diagnostic(kind, row, "area-slack",
                                      f"slack bus {a.slack_bus} does not exist"))
            if not a.s_base > 0:
                out.append(Diagnostic(kind, row, "area-sbase", "power base must be positive"))


def _check_injections(case: PowerCase, out: list[Diagnostic]) -> None:
    load_buses = {ld.bus for ld in case.pq if ld.connected}
    for row, ld in enumerate(case.pq):
        if not ld.v_min < ld.v_max:
            out.append(Diagnostic("PQ", row, "voltage-limits", "v_min must be below v_max"))
        if ld.p_load < 0:
            out.append(Diagnostic("PQ", row, "negative-load",
                                  "load active power must be non-negative"))
    for row, g in enumerate(case.pqgen):
        if not g.v_min < g.v_max:
            out.append(Diagnostic("PQgen", row, "voltage-limits", "v_min must be below v_max"))
        if g.connected and g.bus in load_buses:
            out.append(Diagnostic("PQgen", row, "coincident-load",
                                  f"coincident PQ load and PQ generator at bus {g.bus}"))
        if g.connected and g.p_gen > 0 and g.power_factor < MIN_POWER_FACTOR - 1e-12:
            out.append(Diagnostic("PQgen", row, "power-factor",
                                  f"power factor outside 0.95 band ({g.power_factor:.4f})"))
    refs = [row for row, g in enumerate(case.sw) if g.connected and g.is_phase_reference]
    if not refs:
        out.append(Diagnostic("SW", -1, "no-phase-reference",
                              "no phase reference: exactly one slack must fix the angle"))
    for row in refs[1:]:
        out.append(Diagnostic("SW", row, "multiple-phase-reference",
                              "more than one slack generator fixes the phase"))
    for kind, table in (("SW", case.sw), ("PV", case.pv)):
        for row, g in enumerate(table):
            if not g.q_min < g.q_max:
                out.append(Diagnostic(kind, row, "q-limits", "q_min must be below q_max"))
            if not 0.0 <= g.gamma <= 1.0:
                out.append(Diagnostic(kind, row, "gamma-range",
                                      "loss-sharing factor must lie in [0, 1]"))
    for row, sh in enumerate(case.shunts):
        if not sh.f_nominal > 0:
            out.append(Diagnostic("Shunts", row, "nominal-frequency",
                                  "nominal frequency must be positive"))


def _check_branches(case: PowerCase, out: list[Diagnostic]) -> None:
    for row, br in enumerate(case.lines):
        if br.from_bus == br.to_bus:
            out.append(Diagnostic("Line", row, "self-loop", "from_bus equals to_bus"))
        if br.x == 0:
            out.append(Diagnostic("Line", row, "zero-reactance", "branch reactance is zero"))
        if br.k_t is not None and br.k_t[0] > 0 and br.tap == 0:
            out.append(Diagnostic("Line", row, "tap-defaulted",
                                  "transformer with zero tap; nominal tap 1.0 assumed",
                                  severity="warning"))


def _check_market(case: PowerCase, out: list[Diagnostic]) -> None:
    load_buses = {ld.bus for ld in case.pq}
    for row, s in enumerate(case.supply):
        if s.p_s_min > s.p_s_max:
            out.append(Diagnostic("Supply", row, "bid-bounds", "p_s_min exceeds p_s_max"))
        if s.q_min > s.q_max:
            out.append(Diagnostic("Supply", row, "q-limits", "q_min exceeds q_max"))
        if min(s.c_p0, s.c_p1, s.c_p2, s.c_q0, s.c_q1, s.c_q2) < 0:
            out.append(Diagnostic("Supply", row, "cost-negative",
                                  "cost coefficients must be non-negative"))
    for row, d in enumerate(case.demand):
        if not 0 <= d.p_d_min <= d.p_d_max:
            out.append(Diagnostic("Demand", row, "bid-bounds",
                                  "demand bounds must satisfy 0 <= p_d_min <= p_d_max"))
        if min(d.c_p0, d.c_p1, d.c_p2, d.c_q0, d.c_q1, d.c_q2) < 0:
            out.append(Diagnostic("Demand", row, "cost-negative",
                                  "price coefficients must be non-negative"))
        if d.bus not in load_buses:
            out.append(Diagnostic("Demand", row, "demand-without-load",
                                  f"bus {d.bus} hosts no PQ load"))


def _check_profiles(case: PowerCase, out: list[Diagnostic]) -> None:
    for row, t in enumerate(case.load_levels):
        for level in LEVELS:
            values = getattr(t, level)
            if values is None:
                continue
            if len(values) != MONTHS or min(values) <= 0:
                out.append(Diagnostic("LoadLev", row, "centroid-positive",
                                      f"{level} centroids must be 12 positive values"))
        if t.heavy and t.medium and t.light:
            for m in range(MONTHS):
                if not t.heavy[m] >= t.medium[m] >= t.light[m]:
                    out.append(Diagnostic("LoadLev", row, "level-order",
                                          f"heavy >= medium >= light violated in month {m + 1}"))
    for row, t in enumerate(case.capacity_factors):
        for source in SOURCES:
            values = getattr(t, source)
            if values is None:
                continue
            if len(values) != MONTHS or not all(0 < v <= 1 for v in values):
                out.append(Diagnostic("CapacFactor", row, "factor-range",
                                      f"{source} factors must be 12 values in (0, 1]"))
    for row, tag in enumerate(case.gen_sources):
        if tag.source not in SOURCES:
            out.append(Diagnostic("GenSource", row, "source-unknown",
                                  f"unknown source {tag.source!r}"))


def _check_connectivity(case: PowerCase, out: list[Diagnostic]) -> None:
    ref = case.phase_reference()
    index = case.bus_index()
    if ref is None or ref.bus not in index or case.n_bus == 0:
        return
    edges = [(index[br.from_bus], index[br.to_bus]) for br in case.lines
             if br.connected and br.from_bus in index and br.to_bus in index]
    rows = [e[0] for e in edges]
    cols = [e[1] for e in edges]
    graph = coo_matrix((np.ones(len(edges)), (rows, cols)), shape=(case.n_bus, case.n_bus))
    _, labels = connected_components(graph, directed=False)
    ref_label = labels[index[ref.bus]]
    for row, b in enumerate(case.buses):
        if labels[row] != ref_label:
            out.append(Diagnostic("Bus", row, "island",
                                  f"bus {b.number} is not connected to the phase reference"))


def validate_case(case: PowerCase) -> list[Diagnostic]:
    """Check every record invariant; an empty list means the case is clean."""
    out: list[Diagnostic] = []
    _check_names(case, out)
    _check_buses(case, out)
    _check_injections(case, out)
    _check_branches(case, out)
    _check_market(case, out)
    _check_profiles(case, out)
    _check_connectivity(case, out)
    return out


def errors(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity == "error"]


def record_fields(record_type: type) -> list[str]:
    return [f.name for f in fields(record_type)]


__all__ = [
    "AreaRecord", "Branch", "BranchClass", "BusRecord", "CapacityFactorTable",
    "DemandBid", "Diagnostic", "GenSourceTag", "LoadLevelTable", "PQGen", "PQLoad",
    "PVGen", "PowerCase", "ShuntDevice", "SlackGen", "SupplyBid", "classify_branch",
    "errors", "validate_case", "LEVELS", "SOURCES", "MONTHS",
]
