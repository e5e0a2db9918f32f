"""Operating scenarios: load-level centroids, capacity factors, load growth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from .case_model import LEVELS, SOURCES, PowerCase

ANNUAL_AVERAGE = "annual-average"

# bus-name tags of the primary source
_NAME_TAGS = {"EOL": "wind", "UHE": "hydro", "UTE": "fossil"}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    month: int = 9
    level: str = ANNUAL_AVERAGE
    source_scaling: dict[str, bool] = field(
        default_factory=lambda: {s: True for s in SOURCES})
    growth_rates: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not 1 <= self.month <= 12:
            raise ScenarioError(f"month must be 1..12, got {self.month}")
        if self.level not in LEVELS + (ANNUAL_AVERAGE,):
            raise ScenarioError(f"unknown load level {self.level!r}")
        if any(r <= -100 for r in self.growth_rates):
            raise ScenarioError("growth rates must exceed -100 %")


def compound_growth(base_load: float, rates: Iterable[float]) -> float:
    """Base load compounded over yearly growth rates given in percent."""
    factor = 1.0
    for r in rates:
        factor *= 1.0 + r / 100.0
    return base_load * factor


def scale_loads(case: PowerCase, factor: float) -> PowerCase:
    return replace(case, pq=tuple(
        replace(ld, p_load=ld.p_load * factor, q_load=ld.q_load * factor) for ld in case.pq))


def apply_growth(case: PowerCase, rates: Iterable[float]) -> PowerCase:
    return scale_loads(case, compound_growth(1.0, rates))


def apply_load_level(case: PowerCase, spec: ScenarioSpec) -> PowerCase:
    """Multiply every PQ load by its area's centroid for (level, month)."""
    if spec.level == ANNUAL_AVERAGE:
        return case
    area_of = {b.number: b.area for b in case.buses}
    loads = []
    for ld in case.pq:
        area = area_of[ld.bus]
        table = case.load_level_table(area)
        values = None if table is None else getattr(table, spec.level)
        if values is None:
            if ld.p_load == 0 and ld.q_load == 0:
                loads.append(ld)
                continue
            raise ScenarioError(f"no {spec.level} load-level table for area {area}")
        mult = values[spec.month - 1]
        loads.append(replace(ld, p_load=ld.p_load * mult, q_load=ld.q_load * mult))
    return replace(case, pq=tuple(loads))


def generator_source(case: PowerCase, bus: int) -> str:
    """Primary source of the generation at ``bus``.

    An explicit ``GenSource.con`` tag wins; otherwise the bus name is searched
    for the EOL / UHE / UTE suffix convention.
    """
    for tag in case.gen_sources:
        if tag.bus == bus:
            return tag.source
    name = case.bus_name(bus).upper()
    for token, source in _NAME_TAGS.items():
        if token in name:
            return source
    raise ScenarioError(f"cannot determine the primary source of the generator at bus {bus}")


def apply_capacity_factors(case: PowerCase, spec: ScenarioSpec) -> PowerCase:
    area_of = {b.number: b.area for b in case.buses}

    def factor(bus: int) -> float:
        source = generator_source(case, bus)
        if not spec.source_scaling.get(source, False):
            return 1.0
        table = case.capacity_factor_table(area_of[bus])
        values = None if table is None else getattr(table, source)
        if values is None:
            raise ScenarioError(f"no {source} capacity factors for area {area_of[bus]}")
        return values[spec.month - 1]

    pqgen = []
    for g in case.pqgen:
        f = factor(g.bus)
        pqgen.append(replace(g, p_gen=g.p_gen * f, q_gen=g.q_gen * f))
    pv = [replace(g, p_gen=g.p_gen * factor(g.bus)) for g in case.pv]
    sw = [replace(g, p_g0=g.p_g0 * factor(g.bus)) for g in case.sw]
    return replace(case, pqgen=tuple(pqgen), pv=tuple(pv), sw=tuple(sw))


def apply_scenario(case: PowerCase, spec: ScenarioSpec, capacity_factors: bool = True) -> PowerCase:
    out = case
    if spec.growth_rates:
        out = apply_growth(out, spec.growth_rates)
    out = apply_load_level(out, spec)
    if capacity_factors:
        out = apply_capacity_factors(out, spec)
    return out


def power_factor_q(p: float, power_factor: float) -> float:
    """Reactive power magnitude giving ``power_factor`` at active power ``p``."""
    return abs(p) * math.tan(math.acos(power_factor))
