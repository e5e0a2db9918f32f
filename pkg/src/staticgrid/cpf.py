"""Continuation power flow: PV curves and the maximum loadability point.

Generation and load grow with the loading parameter ``lam`` (``lam = 1`` is
the base case)::

    P_G = P_G0 + (lam - 1 + gamma*k_G) * P_S0
    P_L = P_L0 + (lam - 1) * P_D0
    Q_L = Q_L0 + (lam - 1) * Q_D0

The curve is traced with a tangent predictor and a locally parameterized
corrector; the nose is then located by maximizing ``lam`` over the voltage
that changes fastest between the two points bracketing it.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse import csc_matrix, vstack

from .case_model import PowerCase
from .powerflow import (
    NetworkModel,
    PowerFlowError,
    SingularJacobianError,
    build_model,
    jacobian,
    mismatch,
    newton,
    solve_linear,
)

log = logging.getLogger(__name__)


class CpfError(RuntimeError):
    pass


@dataclass(frozen=True)
class GrowthDirections:
    """Per-bus growth directions; ``supply`` maps bus -> (P_S0, gamma)."""

    supply: dict[int, tuple[float, float]]
    demand: dict[int, tuple[float, float]]

    def __post_init__(self) -> None:
        values = [v for pair in self.supply.values() for v in pair]
        values += [v for pair in self.demand.values() for v in pair]
        if not np.all(np.isfinite(values)):
            raise CpfError("growth directions must be finite")
        if not any(p != 0 or q != 0 for p, q in self.demand.values()):
            raise CpfError("no load increase direction")

    @property
    def total_demand(self) -> float:
        return sum(p for p, _ in self.demand.values())


def default_directions(case: PowerCase) -> GrowthDirections:
    """Directions from Supply/Demand data, or the base case when absent."""
    supply: dict[int, tuple[float, float]] = {}
    bids = [s for s in case.supply if s.connected]
    if bids:
        for s in bids:
            p, g = supply.get(s.bus, (0.0, 0.0))
            # gamma aggregated so that sum(gamma*P_S0) is preserved
            supply[s.bus] = (p + s.p_s0, g + s.gamma * s.p_s0)
    else:
        for g in case.sw:
            if g.connected:
                p, gp = supply.get(g.bus, (0.0, 0.0))
                supply[g.bus] = (p + g.p_g0, gp + g.gamma * g.p_g0)
        for g in case.pv:
            if g.connected:
                p, gp = supply.get(g.bus, (0.0, 0.0))
                supply[g.bus] = (p + g.p_gen, gp + g.gamma * g.p_gen)
    supply = {b: (p, gp / p if p else 0.0) for b, (p, gp) in supply.items()}

    demand: dict[int, tuple[float, float]] = {}
    dem = [d for d in case.demand if d.connected]
    if dem:
        for d in dem:
            p, q = demand.get(d.bus, (0.0, 0.0))
            demand[d.bus] = (p + d.p_d0, q + d.q_d0)
    else:
        for ld in case.pq:
            if ld.connected:
                p, q = demand.get(ld.bus, (0.0, 0.0))
                demand[ld.bus] = (p + ld.p_load, q + ld.q_load)
    return GrowthDirections(supply, demand)


@dataclass(frozen=True)
class CpfOptions:
    initial_step: float = 0.1
    max_step: float = 0.25
    min_step: float = 1e-4
    tolerance: float = 1e-8
    corrector_iterations: int = 12
    max_points: int = 2000
    distributed_slack: bool = True
    stop_at_nose: bool = False
    lower_branch: float = 0.5  # fraction of the margin traced below the nose
    nose_tolerance: float = 1e-10


@dataclass
class CpfPoint:
    lam: float
    v: np.ndarray
    theta: np.ndarray
    k_g: float


@dataclass
class CpfTrace:
    bus_ids: tuple[int, ...]
    points: list[CpfPoint]
    nose_index: Optional[int]
    total_demand: float
    system_base: float
    distributed: bool = True
    names: tuple[str, ...] = field(default_factory=tuple)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def voltages(self) -> np.ndarray:
        return np.array([p.v for p in self.points])

    @property
    def nose(self) -> CpfPoint:
        if self.nose_index is None:
            raise CpfError("nose not bracketed")
        return self.points[self.nose_index]

    @property
    def delta_lambda(self) -> float:
        return self.nose.lam - 1.0


# --- parameterized model ----------------------------------------------------


def continuation_model(case: PowerCase, dirs: GrowthDirections,
                       distributed: bool = True) -> NetworkModel:
    model = build_model(case, distributed_slack=False)
    index = {b: i for i, b in enumerate(model.bus_ids)}
    inj = model.injections
    p_s0 = np.zeros(len(index))
    gp_s0 = np.zeros(len(index))
    for bus, (p, g) in dirs.supply.items():
        p_s0[index[bus]] += p
        gp_s0[index[bus]] += g * p
    p_d0 = np.zeros(len(index))
    q_d0 = np.zeros(len(index))
    for bus, (p, q) in dirs.demand.items():
        p_d0[index[bus]] += p
        q_d0[index[bus]] += q
    inj.p0 = inj.p0 - p_s0 + p_d0
    inj.q0 = inj.q0 + q_d0
    inj.p_lam = p_s0 - p_d0
    inj.q_lam = -q_d0
    if distributed and np.any(gp_s0 != 0):
        inj.p_k = gp_s0
        model.typing.distributed = True
    elif distributed:
        log.info("no loss-sharing generation in the growth direction; single slack used")
    return model


class _Curve:
    """State vector z = [theta (non-ref), V (non-controlled), (k), lam]."""

    def __init__(self, model: NetworkModel, vm0: np.ndarray, va0: np.ndarray):
        self.model = model
        self.typing = model.typing
        self.tc = self.typing.theta_cols()
        self.vc = self.typing.v_cols()
        self.vm0 = vm0.copy()
        self.va0 = va0.copy()
        self.nk = 1 if self.typing.distributed else 0

    @property
    def size(self) -> int:
        return len(self.tc) + len(self.vc) + self.nk + 1

    def pack(self, vm, va, k, lam) -> np.ndarray:
        parts = [va[self.tc], vm[self.vc]]
        if self.nk:
            parts.append([k])
        parts.append([lam])
        return np.concatenate(parts)

    def unpack(self, z: np.ndarray):
        vm, va = self.vm0.copy(), self.va0.copy()
        nt, nv = len(self.tc), len(self.vc)
        va[self.tc] = z[:nt]
        vm[self.vc] = z[nt:nt + nv]
        k = z[nt + nv] if self.nk else 0.0
        return vm, va, k, z[-1]

    def residual(self, z: np.ndarray) -> np.ndarray:
        vm, va, k, lam = self.unpack(z)
        return mismatch(self.model, vm, va, lam, k)

    def jac(self, z: np.ndarray) -> csc_matrix:
        vm, va, _, _ = self.unpack(z)
        return jacobian(self.model, vm, va, with_lambda=True)

    def v_slice(self) -> slice:
        nt = len(self.tc)
        return slice(nt, nt + len(self.vc))

    def tangent(self, z: np.ndarray, previous: np.ndarray) -> np.ndarray:
        rhs = np.zeros(self.size)
        rhs[-1] = 1.0
        aug = vstack([self.jac(z), csc_matrix(previous.reshape(1, -1))]).tocsc()
        t = solve_linear(aug, rhs)
        return t / np.linalg.norm(t)

    def correct(self, z0: np.ndarray, idx: int, value: float, tol: float,
                max_iter: int) -> Optional[np.ndarray]:
        z = z0.copy()
        z[idx] = value
        row = np.zeros((1, self.size))
        row[0, idx] = 1.0
        for _ in range(max_iter + 1):
            f = self.residual(z)
            if np.max(np.abs(f)) <= tol:
                return z
            aug = vstack([self.jac(z), csc_matrix(row)]).tocsc()
            try:
                dz = solve_linear(aug, -np.append(f, 0.0))
            except SingularJacobianError:
                return None
            z = z + dz
            vm = z[self.v_slice()]
            if not np.all(np.isfinite(z)) or (vm.size and np.min(vm) <= 0):
                return None
        return None


def _refine_nose(curve: _Curve, za: np.ndarray, zb: np.ndarray,
                 opts: CpfOptions) -> np.ndarray:
    vs = curve.v_slice()
    dv = np.abs(zb[vs] - za[vs])
    if dv.size == 0:
        # no free voltage: fall back to the best bracketing point
        return za if za[-1] >= zb[-1] else zb
    j = vs.start + int(np.argmax(dv))
    lo, hi = sorted((za[j], zb[j]))
    span = zb[j] - za[j]
    cache: dict[float, np.ndarray] = {}

    def solve_at(s: float) -> Optional[np.ndarray]:
        frac = 0.0 if span == 0 else (s - za[j]) / span
        guess = za + frac * (zb - za)
        return curve.correct(guess, j, s, opts.tolerance, opts.corrector_iterations * 2)

    def neg_lambda(s: float) -> float:
        z = solve_at(s)
        if z is None:
            return np.inf
        cache[s] = z
        return -z[-1]

    res = minimize_scalar(neg_lambda, bounds=(lo, hi), method="bounded",
                          options={"xatol": opts.nose_tolerance})
    best = cache.get(res.x)
    candidates = [za, zb] + ([best] if best is not None else [])
    return max(candidates, key=lambda z: z[-1])


def trace_pv_curve(case: PowerCase, dirs: Optional[GrowthDirections] = None,
                   options: CpfOptions = CpfOptions()) -> CpfTrace:
    dirs = dirs or default_directions(case)
    model = continuation_model(case, dirs, options.distributed_slack)
    vm0 = np.array([b.v0 if b.v0 > 0 else 1.0 for b in case.buses], dtype=float)
    ctrl = model.typing.controlled
    vm0[ctrl] = model.v_set[ctrl]
    va0 = np.zeros(case.n_bus)
    va0[model.typing.ref] = case.phase_reference().theta0
    try:
        vm, va, k, _, _ = newton(model, vm0, va0, 0.0, options.tolerance, 30, lam=1.0)
    except PowerFlowError as exc:
        raise CpfError(f"base case infeasible: {exc}") from exc

    curve = _Curve(model, vm, va)
    z = curve.pack(vm, va, k, 1.0)
    prev_t = np.zeros(curve.size)
    prev_t[-1] = 1.0
    t = curve.tangent(z, prev_t)
    zs = [z]
    nose_index: Optional[int] = None
    lam_nose = None
    step = options.initial_step

    while len(zs) < options.max_points:
        idx = int(np.argmax(np.abs(t)))
        z_pred = z + step * t
        z_new = curve.correct(z_pred, idx, z_pred[idx], options.tolerance,
                              options.corrector_iterations)
        if z_new is None or np.dot(z_new - z, t) <= 0:
            step *= 0.5
            if step < options.min_step:
                if nose_index is not None:
                    break
                raise CpfError("corrector failed below the minimum step")
            continue
        try:
            t_new = curve.tangent(z_new, t)
        except SingularJacobianError:
            # exactly at the fold: nudge the step and retry
            step *= 0.9
            continue
        if nose_index is None and t[-1] > 0 and t_new[-1] <= 0:
            nose = _refine_nose(curve, z, z_new, options)
            if nose[-1] > z[-1] + options.nose_tolerance:
                zs.append(nose)
            nose_index = len(zs) - 1
            lam_nose = zs[nose_index][-1]
            if options.stop_at_nose:
                break
            if z_new[-1] < lam_nose:
                zs.append(z_new)
        else:
            zs.append(z_new)
        z, t = z_new, t_new
        step = min(step * 1.5, options.max_step)
        if nose_index is not None:
            if z[-1] <= lam_nose - options.lower_branch * (lam_nose - 1.0):
                break
            if np.min(curve.unpack(z)[0]) < 0.1:
                break
        elif z[-1] > 1e3:
            raise CpfError("loading parameter diverged without reaching a nose")
    if nose_index is None:
        raise CpfError("nose not bracketed within the point budget")

    points = []
    for zz in zs:
        vm_i, va_i, k_i, lam_i = curve.unpack(zz)
        points.append(CpfPoint(float(lam_i), vm_i, va_i, float(k_i)))
    return CpfTrace(curve.model.bus_ids, points, nose_index, dirs.total_demand,
                    case.system_base, model.typing.distributed,
                    tuple(case.bus_name(b) for b in model.bus_ids))


def loadability_margin(trace: CpfTrace) -> tuple[float, float]:
    """Margin in loading parameter and in MW of load growth."""
    if len(trace.points) < 2 or trace.nose_index is None:
        raise CpfError("trace does not contain a nose")
    dl = trace.delta_lambda
    return dl, dl * trace.total_demand * trace.system_base


def critical_bus(trace: CpfTrace) -> int:
    """Bus with the largest voltage drop from the base case to the nose."""
    base = trace.points[0].v
    nose = trace.nose.v
    drops = base - nose
    order = sorted(range(len(trace.bus_ids)),
                   key=lambda i: (-round(drops[i], 9), round(nose[i], 9), trace.bus_ids[i]))
    return trace.bus_ids[order[0]]


def write_pv_csv(trace: CpfTrace, out: TextIO, buses: Optional[Sequence[int]] = None) -> None:
    """PV-curve table: ``Loading`` (lam) followed by one voltage column per bus."""
    buses = list(buses) if buses else list(trace.bus_ids)
    names = dict(zip(trace.bus_ids, trace.names or [str(b) for b in trace.bus_ids]))
    cols = [trace.bus_ids.index(b) for b in buses]
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["Loading"] + [names[b] for b in buses])
    for p in trace.points:
        writer.writerow([repr(float(p.lam))] + [repr(float(p.v[c])) for c in cols])
