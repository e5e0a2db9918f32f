"""Wind-farm ranking by the sensitivity of the loadability margin to reactive support.

For every farm the reactive output is moved to the value giving the target
power factor (capacitive, i.e. injecting), clipped to the farm's reactive band
when its supply bid has one.  The index is the finite difference

    S_i = (dlambda_i - dlambda_base) / dq_i

where ``dlambda_i`` is the margin of a full continuation run at the applied
power factor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

from .case_model import PowerCase
from .cpf import CpfError, CpfOptions, GrowthDirections, trace_pv_curve
from .powerflow import PowerFlowError
from .scenario import power_factor_q

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankEntry:
    bus: int
    name: str
    power_factor: float
    q_applied: float
    sensitivity: float
    delta_lambda: float
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class SensitivityRank:
    base_delta_lambda: float
    entries: tuple[RankEntry, ...]

    @property
    def buses(self) -> list[int]:
        return [e.bus for e in self.entries]


def _rank_key(e: RankEntry):
    return (e.failed, -e.sensitivity if not e.failed else 0.0, e.bus)


def rank_wind_farms(case: PowerCase, target_pf: float = 0.95,
                    options: CpfOptions = CpfOptions(),
                    dirs: Optional[GrowthDirections] = None) -> SensitivityRank:
    if not 0 < target_pf <= 1:
        raise ValueError("target power factor must lie in (0, 1]")
    farms = [(row, g) for row, g in enumerate(case.pqgen) if g.connected]
    if not farms:
        raise ValueError("case has no PQ generator to rank")
    base = trace_pv_curve(case, dirs, options).delta_lambda
    bands = {s.bus: (s.q_min, s.q_max) for s in case.supply
             if s.connected and s.q_max > s.q_min}

    entries = []
    for row, g in farms:
        q = power_factor_q(g.p_gen, target_pf)
        if g.bus in bands:
            lo, hi = bands[g.bus]
            q = min(max(q, lo), hi)
        dq = q - g.q_gen
        s = math.hypot(g.p_gen, q)
        pf = abs(g.p_gen) / s if s else 1.0
        name = case.bus_name(g.bus)
        if dq == 0:
            entries.append(RankEntry(g.bus, name, pf, q, 0.0, base))
            continue
        pqgen = list(case.pqgen)
        pqgen[row] = replace(g, q_gen=q)
        try:
            dl = trace_pv_curve(replace(case, pqgen=tuple(pqgen)), dirs, options).delta_lambda
        except (CpfError, PowerFlowError) as exc:
            log.warning("continuation failed for the farm at bus %d: %s", g.bus, exc)
            entries.append(RankEntry(g.bus, name, pf, q, math.nan, math.nan, str(exc)))
            continue
        entries.append(RankEntry(g.bus, name, pf, q, (dl - base) / dq, dl))
    return SensitivityRank(base, tuple(sorted(entries, key=_rank_key)))


def format_rank_table(rank: SensitivityRank) -> str:
    lines = [f"base delta_lambda = {rank.base_delta_lambda:.5f}",
             f"{'rank':>4}  {'bus':>6}  {'name':<24}  {'PF':>6}  {'S_i':>8}  {'delta_lambda_c':>14}"]
    for i, e in enumerate(rank.entries, 1):
        if e.failed:
            lines.append(f"{i:>4}  {e.bus:>6}  {e.name:<24}  {e.power_factor:>6.3f}  "
                         f"{'failed':>8}  {e.error}")
        else:
            lines.append(f"{i:>4}  {e.bus:>6}  {e.name:<24}  {e.power_factor:>6.3f}  "
                         f"{e.sensitivity:>8.4f}  {e.delta_lambda:>14.5f}")
    return "\n".join(lines)
